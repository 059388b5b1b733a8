//! Dense complex matrices.
//!
//! Storage is row-major so that the flattened two-mode index `m·(n_max+1)+n`
//! maps directly onto rows and columns. Heavy kernels (products, Hermitian
//! eigendecomposition, singular values) are delegated to `faer`.

use std::ops::{Index, IndexMut};

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} elements cannot fill a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// |v⟩⟨w|
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise modulus of `self - self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| self[(i / r2, j / c2)] * other[(i % r2, j % c2)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        if self.rows * self.cols * other.cols < 32_768 {
            return self.matmul_naive(other);
        }
        from_faer(&(to_faer(self) * to_faer(other)))
    }

    fn matmul_naive(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Principal submatrix on the given index set.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    /// Eigendecomposition of a Hermitian matrix. Only the lower triangle is read.
    /// Eigenvalues ascend; eigenvectors are the columns of the returned matrix.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, CMatrix)> {
        assert!(self.is_square());
        if self.rows == 0 {
            return Ok((Vec::new(), CMatrix::zeros(0, 0)));
        }
        let evd = to_faer(self).self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenFailure)?;
        let values = evd.S().column_vector().iter().map(|z| z.re).collect();
        let u = evd.U();
        let vectors = CMatrix::from_fn(self.rows, self.rows, |i, j| u[(i, j)]);
        Ok((values, vectors))
    }

    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        assert!(self.is_square());
        if self.rows == 0 {
            return Ok(Vec::new());
        }
        to_faer(self).self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::EigenFailure)
    }

    /// Singular values, nonincreasing.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        if self.rows == 0 || self.cols == 0 {
            return Ok(Vec::new());
        }
        to_faer(self).singular_values().map_err(|_| Error::EigenFailure)
    }

    /// `exp(iH)` for Hermitian `H`, through its spectral decomposition.
    pub fn exp_i_hermitian(&self) -> Result<CMatrix> {
        let (values, vectors) = self.hermitian_eigen()?;
        let phases: Vec<C64> = values.iter().map(|&l| C64::from_polar(1.0, l)).collect();
        Ok(scale_columns(&vectors, &phases).matmul(&vectors.adjoint()))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Returns `m · diag(d)`.
pub(crate) fn scale_columns(m: &CMatrix, d: &[C64]) -> CMatrix {
    CMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] * d[j])
}

fn to_faer(m: &CMatrix) -> Mat<C64> {
    Mat::from_fn(m.rows, m.cols, |i, j| m[(i, j)])
}

fn from_faer(m: &Mat<C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// ln(n!) for n = 0..=n_max, by cumulative summation.
pub(crate) fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n_max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matmul_paths_agree() {
        let a = CMatrix::from_fn(40, 37, |i, j| c((i * 3 + j) as f64 * 0.01, (i as f64 - j as f64) * 0.02));
        let b = CMatrix::from_fn(37, 41, |i, j| c((i + 2 * j) as f64 * 0.03, 0.5 - (i * j) as f64 * 1e-3));
        let fast = a.matmul(&b);
        let slow = a.matmul_naive(&b);
        assert!(fast.max_abs_diff(&slow) < 1e-11);
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let a = CMatrix::from_fn(6, 6, |i, j| c((i + j) as f64, i as f64 - j as f64));
        let h = a.matmul(&a.adjoint());
        let (vals, vecs) = h.hermitian_eigen().unwrap();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d: Vec<C64> = vals.iter().map(|&v| c(v, 0.0)).collect();
        let back = scale_columns(&vecs, &d).matmul(&vecs.adjoint());
        assert!(back.max_abs_diff(&h) < 1e-10 * h.max_abs());
    }

    #[test]
    fn exp_of_pauli_x() {
        // exp(iθX) = cos θ I + i sin θ X
        let theta = 0.37_f64;
        let x = CMatrix::from_row_major(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let u = x.scale(c(theta, 0.0)).exp_i_hermitian().unwrap();
        assert!((u[(0, 0)] - c(theta.cos(), 0.0)).norm() < 1e-14);
        assert!((u[(0, 1)] - c(0.0, theta.sin())).norm() < 1e-14);
    }

    #[test]
    fn kron_layout() {
        let a = CMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]).unwrap();
        let b = CMatrix::identity(2);
        let k = a.kron(&b);
        assert_eq!(k[(0, 2)], c(2.0, 0.0));
        assert_eq!(k[(3, 1)], c(3.0, 0.0));
        assert_eq!(k[(1, 2)], ZERO);
    }

    #[test]
    fn ln_factorial_small() {
        let lf = ln_factorials(5);
        assert!((lf[5] - 120f64.ln()).abs() < 1e-14);
    }
}
