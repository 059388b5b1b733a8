//! Orthogonality filter: keep only detection events whose photon numbers in
//! the (π_+, π_−) modes differ by more than a threshold k.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeBasis, SingleModeDensity, TwoModeDensity};
use crate::linalg::{CMatrix, C64};
use crate::metrics::psd_factor;

const ANNIHILATION_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FilterThreshold {
    pub k: usize,
}

impl FilterThreshold {
    pub fn new(k: usize) -> Self {
        Self { k }
    }
}

/// Passing set |m − n| > k on a `(n_max+1)²` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterMask {
    pub k: FilterThreshold,
    pub n_max: usize,
}

impl FilterMask {
    #[inline]
    pub fn passes(&self, m: usize, n: usize) -> bool {
        m.abs_diff(n) > self.k.k
    }

    /// Flattened indices `m·(n_max+1)+n` that pass.
    pub fn passing_indices(&self) -> Vec<usize> {
        let d = self.n_max + 1;
        (0..d * d).filter(|&i| self.passes(i / d, i % d)).collect()
    }

    pub fn count(&self) -> usize {
        self.passing_indices().len()
    }
}

pub fn ofilter_mask(k: FilterThreshold, n_max: usize) -> FilterMask {
    FilterMask { k, n_max }
}

/// ρ ↦ PρP / Tr(PρP), returning the success probability Tr(PρP).
///
/// The state must be written in the (π_+, π_−) basis, the equatorial basis
/// with φ = 0.
pub fn apply_ofilter(rho: &TwoModeDensity, k: FilterThreshold) -> Result<(TwoModeDensity, f64)> {
    require_measurement_basis(rho.basis())?;
    let mask = ofilter_mask(k, rho.n_max());
    let d = rho.n_max() + 1;
    let m = rho.matrix();
    let keep: Vec<bool> = (0..d * d).map(|i| mask.passes(i / d, i % d)).collect();
    let p: f64 = (0..d * d).filter(|&i| keep[i]).map(|i| m[(i, i)].re).sum();
    if !(p > ANNIHILATION_TOL) {
        return Err(Error::FilterAnnihilates(p));
    }
    let s = 1.0 / p;
    let out =
        CMatrix::from_fn(d * d, d * d, |i, j| if keep[i] && keep[j] { m[(i, j)] * s } else { C64::new(0.0, 0.0) });
    Ok((TwoModeDensity::from_parts(out, rho.n_max(), rho.basis(), rho.truncation_error()), p))
}

fn require_measurement_basis(basis: ModeBasis) -> Result<()> {
    if basis != ModeBasis::equatorial(0.0) {
        return Err(Error::InvalidParameter(format!("the filter acts in the (π+, π−) basis, state is in {basis:?}")));
    }
    Ok(())
}

/// Fidelity of two filtered product states and their success probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredFidelity {
    pub fidelity: f64,
    pub success_probability: [f64; 2],
}

/// Filters ρ_i = a_i ⊗ b_i (first factor on π_+) and compares the results,
/// never forming the two-mode matrices.
///
/// With a_i = X_a X_a† and b_i = X_b X_b†, PρP = (P(X_a⊗X_b))(P(X_a⊗X_b))†,
/// so the filtered fidelity is the trace norm of a product of two row-masked
/// Kronecker factors, divided by √(p_1 p_2).
pub fn filtered_product_fidelity(
    first: (&SingleModeDensity, &SingleModeDensity),
    second: (&SingleModeDensity, &SingleModeDensity),
    k: FilterThreshold,
) -> Result<FilteredFidelity> {
    let n_max = [first.0, first.1, second.0, second.1].iter().map(|s| s.n_max()).max().unwrap_or(0);
    let mask = ofilter_mask(k, n_max);
    let rows = mask.passing_indices();
    let x = masked_kron_factor(first, n_max, &rows)?;
    let y = masked_kron_factor(second, n_max, &rows)?;
    let p = [frobenius_sqr(&x), frobenius_sqr(&y)];
    for &pi in &p {
        if !(pi > ANNIHILATION_TOL) {
            return Err(Error::FilterAnnihilates(pi));
        }
    }
    let nuclear: f64 = x.adjoint().matmul(&y).singular_values()?.iter().sum();
    let fidelity = (nuclear / (p[0] * p[1]).sqrt()).clamp(0.0, 1.0);
    Ok(FilteredFidelity { fidelity, success_probability: p })
}

fn masked_kron_factor(pair: (&SingleModeDensity, &SingleModeDensity), n_max: usize, rows: &[usize]) -> Result<CMatrix> {
    let xa = psd_factor(pair.0.embed(n_max).matrix())?;
    let xb = psd_factor(pair.1.embed(n_max).matrix())?;
    let d = n_max + 1;
    let rb = xb.cols();
    Ok(CMatrix::from_fn(rows.len(), xa.cols() * rb, |r, c| {
        let (m, n) = (rows[r] / d, rows[r] % d);
        xa[(m, c / rb)] * xb[(n, c % rb)]
    }))
}

fn frobenius_sqr(m: &CMatrix) -> f64 {
    m.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// Success probability Tr(P(a⊗b)P) from the factor diagonals alone.
pub fn product_success_probability(a: &SingleModeDensity, b: &SingleModeDensity, k: FilterThreshold) -> f64 {
    let (pa, pb) = (a.matrix().diagonal(), b.matrix().diagonal());
    let mut p = 0.0;
    for (m, x) in pa.iter().enumerate() {
        for (n, y) in pb.iter().enumerate() {
            if m.abs_diff(n) > k.k {
                p += x.re * y.re;
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{PhotonStatistics, TensorProduct, TwoModePureState};

    fn pm() -> ModeBasis {
        ModeBasis::equatorial(0.0)
    }

    #[test]
    fn mask_examples() {
        let m0 = ofilter_mask(FilterThreshold::new(0), 2);
        assert!(!m0.passes(1, 1) && m0.passes(1, 0));
        assert_eq!(m0.count(), 6);
        let m1 = ofilter_mask(FilterThreshold::new(1), 4);
        assert!(m1.passes(2, 0) && !m1.passes(1, 0));
    }

    #[test]
    fn passing_state_is_untouched() {
        let rho = TwoModePureState::fock(2, 0, pm()).to_density();
        let (out, p) = apply_ofilter(&rho, FilterThreshold::new(1)).unwrap();
        assert_eq!(p, 1.0);
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn balanced_state_is_annihilated() {
        let rho = TwoModePureState::fock(1, 1, pm()).to_density();
        assert!(matches!(apply_ofilter(&rho, FilterThreshold::new(0)), Err(Error::FilterAnnihilates(_))));
    }

    #[test]
    fn wrong_basis_rejected() {
        let rho = TwoModePureState::fock(2, 0, ModeBasis::Hv).to_density();
        assert!(apply_ofilter(&rho, FilterThreshold::new(0)).is_err());
    }

    #[test]
    fn idempotent() {
        let a = SingleModeDensity::new(CMatrix::from_diagonal(&[0.5, 0.3, 0.2].map(|x| C64::new(x, 0.0)))).unwrap();
        let rho = a.tensor(&a, pm());
        let k = FilterThreshold::new(0);
        let (once, p) = apply_ofilter(&rho, k).unwrap();
        let (twice, p2) = apply_ofilter(&once, k).unwrap();
        assert!((p2 - 1.0).abs() < 1e-12);
        assert!(twice.matrix().max_abs_diff(once.matrix()) < 1e-15);
        let diag = rho.number_distribution();
        let on_diagonal: f64 = (0..3).map(|m| diag.get(m, m)).sum();
        assert!((p - (1.0 - on_diagonal)).abs() < 1e-12);
        assert!((product_success_probability(&a, &a, k) - p).abs() < 1e-15);
    }
}
