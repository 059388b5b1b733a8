//! Fidelity, Bures distance and the closed-form visibility results.
//!
//! Fidelity is computed as F(ρ, σ) = ‖X†Y‖₁ (sum of singular values) where
//! ρ = XX† and σ = YY† are eigen-factorizations restricted to the numerical
//! range of each matrix. This equals Tr√(√ρ σ √ρ) but never takes the square
//! root of round-off eigenvalues, which otherwise contributes noise of order
//! 1e-7 to F. Both matrices are first split into the connected blocks of
//! their joint sparsity pattern; parity-structured states give several.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeBasis, SingleModeDensity, SingleModePureState, TwoModeDensity, TwoModePureState};
use crate::linalg::{inner, scale_columns, CMatrix, C64};

const HERMITIAN_TOL: f64 = 1e-12;
const NEGATIVE_TOL: f64 = 1e-10;

/// Density operators accepted by [`fidelity`].
pub trait DensityOperator {
    fn matrix(&self) -> &CMatrix;

    /// Mode count, per-mode truncation and basis; fidelity requires equality.
    fn layout(&self) -> (usize, usize, Option<ModeBasis>);
}

impl DensityOperator for SingleModeDensity {
    fn matrix(&self) -> &CMatrix {
        SingleModeDensity::matrix(self)
    }

    fn layout(&self) -> (usize, usize, Option<ModeBasis>) {
        (1, self.n_max(), None)
    }
}

impl DensityOperator for TwoModeDensity {
    fn matrix(&self) -> &CMatrix {
        TwoModeDensity::matrix(self)
    }

    fn layout(&self) -> (usize, usize, Option<ModeBasis>) {
        (2, self.n_max(), Some(self.basis()))
    }
}

/// Spectral square root of a Hermitian PSD matrix. Eigenvalues in
/// [−1e-10·λ_max, 0) are clamped to zero; anything lower is rejected.
pub fn matrix_sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!("{}x{} matrix has no square root", m.rows(), m.cols())));
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidDensity(format!("not Hermitian (defect {defect:e})")));
    }
    let (values, vectors) = m.hermitian_eigen()?;
    check_spectrum(&values)?;
    let roots: Vec<C64> = values.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)).collect();
    Ok(scale_columns(&vectors, &roots).matmul(&vectors.adjoint()))
}

fn check_spectrum(values: &[f64]) -> Result<()> {
    let top = values.iter().cloned().fold(0.0, f64::max);
    let low = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if low < -NEGATIVE_TOL * top.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidDensity(format!("eigenvalue {low:e} below −1e-10·λ_max")));
    }
    Ok(())
}

/// Uhlmann fidelity F(ρ, σ) = Tr√(√ρ σ √ρ), clamped to [0, 1].
pub fn fidelity<D: DensityOperator>(rho: &D, sigma: &D) -> Result<f64> {
    if rho.layout() != sigma.layout() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", rho.layout(), sigma.layout())));
    }
    Ok(fidelity_matrices(rho.matrix(), sigma.matrix())?.clamp(0.0, 1.0))
}

/// D = √(1 − F).
pub fn bures_distance<D: DensityOperator>(rho: &D, sigma: &D) -> Result<f64> {
    Ok(distance_from_fidelity(fidelity(rho, sigma)?))
}

pub fn distance_from_fidelity(f: f64) -> f64 {
    (1.0 - f).max(0.0).sqrt()
}

/// Fidelity of two PSD matrices of equal size, unnormalized and unclamped.
pub fn fidelity_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.rows() != sigma.rows() || !rho.is_square() || !sigma.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            rho.rows(),
            rho.cols(),
            sigma.rows(),
            sigma.cols()
        )));
    }
    let dim = rho.rows();
    let blocks = joint_blocks(rho, sigma);
    let mut factors = Vec::with_capacity(blocks.len());
    let mut top: f64 = 0.0;
    for idx in &blocks {
        let a = rho.submatrix(idx).hermitian_eigen()?;
        let b = sigma.submatrix(idx).hermitian_eigen()?;
        check_spectrum(&a.0)?;
        check_spectrum(&b.0)?;
        top = top.max(a.0.last().copied().unwrap_or(0.0)).max(b.0.last().copied().unwrap_or(0.0));
        factors.push((a, b));
    }
    let cutoff = dim as f64 * f64::EPSILON * top;
    let mut f = 0.0;
    for (a, b) in &factors {
        let x = range_factor(a, cutoff);
        let y = range_factor(b, cutoff);
        if x.cols() == 0 || y.cols() == 0 {
            continue;
        }
        f += x.adjoint().matmul(&y).singular_values()?.iter().sum::<f64>();
    }
    Ok(f)
}

/// V·diag(√λ) over eigenvalues above `cutoff`.
fn range_factor((values, vectors): &(Vec<f64>, CMatrix), cutoff: f64) -> CMatrix {
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > cutoff).collect();
    CMatrix::from_fn(vectors.rows(), keep.len(), |i, j| vectors[(i, keep[j])] * values[keep[j]].sqrt())
}

/// Eigen-factor of a PSD matrix on its numerical range, with cutoff relative
/// to its own largest eigenvalue.
pub(crate) fn psd_factor(m: &CMatrix) -> Result<CMatrix> {
    let e = m.hermitian_eigen()?;
    check_spectrum(&e.0)?;
    let top = e.0.last().copied().unwrap_or(0.0);
    Ok(range_factor(&e, m.rows() as f64 * f64::EPSILON * top))
}

/// Connected components of the graph with an edge wherever either matrix
/// has a nonzero entry. Indices with empty rows in both are dropped.
fn joint_blocks(a: &CMatrix, b: &CMatrix) -> Vec<Vec<usize>> {
    let n = a.rows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut live = vec![false; n];
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        let (ra, rb) = (a.row(i), b.row(i));
        for j in 0..n {
            if ra[j] != C64::new(0.0, 0.0) || rb[j] != C64::new(0.0, 0.0) {
                live[i] = true;
                if j > i {
                    let (x, y) = (find(&mut parent, i), find(&mut parent, j));
                    if x != y {
                        parent[x.max(y)] = x.min(y);
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for (i, _) in live.iter().enumerate().filter(|(_, l)| **l) {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// The definitional route Tr√(√ρ σ √ρ) through two spectral square roots.
/// Kept as a reference; [`fidelity`] is more accurate near F = 1 and for
/// nearly orthogonal states.
pub fn fidelity_definitional<D: DensityOperator>(rho: &D, sigma: &D) -> Result<f64> {
    if rho.layout() != sigma.layout() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", rho.layout(), sigma.layout())));
    }
    let s = matrix_sqrt_psd(rho.matrix())?;
    let inner_m = s.matmul(sigma.matrix()).matmul(&s);
    // symmetrize away the round-off before the second eigensolve
    let sym = CMatrix::from_fn(inner_m.rows(), inner_m.cols(), |i, j| (inner_m[(i, j)] + inner_m[(j, i)].conj()) * 0.5);
    let values = sym.hermitian_eigenvalues()?;
    Ok(values.iter().map(|&l| l.max(0.0).sqrt()).sum())
}

/// |⟨ψ|φ⟩|, zero-padding the shorter state.
pub fn pure_fidelity(psi: &SingleModePureState, phi: &SingleModePureState) -> f64 {
    let n = psi.n_max().max(phi.n_max());
    inner(psi.embed(n).amplitudes(), phi.embed(n).amplitudes()).norm()
}

/// |⟨ψ|φ⟩| for two-mode states; both must be expressed in the same basis.
pub fn pure_fidelity_two_mode(psi: &TwoModePureState, phi: &TwoModePureState) -> Result<f64> {
    if psi.basis() != phi.basis() {
        return Err(Error::ShapeMismatch(format!("bases {:?} and {:?}", psi.basis(), phi.basis())));
    }
    let n = psi.n_max().max(phi.n_max());
    Ok(inner(psi.embed(n).amplitudes(), phi.embed(n).amplitudes()).norm())
}

/// Universal cat visibility D(x) = √(1 − √(1 − e^{−4x})), evaluated as
/// √(u / (1 + √(1 − u))) with u = e^{−4x} to keep full precision at large x.
pub fn universal_distance(x: f64) -> f64 {
    let u = (-4.0 * x).exp();
    (u / (1.0 + (1.0 - u).sqrt())).sqrt()
}

/// dD/dx of [`universal_distance`].
pub fn universal_distance_slope(x: f64) -> f64 {
    let u = (-4.0 * x).exp();
    -u / (universal_distance(x) * (1.0 - u).sqrt())
}

/// Visibility of the lossy cat pair |ψ_φ^±⟩ at x = R|α|² sin²φ.
pub fn cat_visibility_closed_form(alpha: f64, phi: f64, reflectivity: f64) -> f64 {
    universal_distance(reflectivity * alpha * alpha * phi.sin().powi(2))
}

/// D(|√T α e^{iφ}⟩, |√T α e^{−iφ}⟩) = √(1 − e^{−2T|α|² sin²φ}).
pub fn coherent_distinguishability_closed_form(alpha: f64, phi: f64, transmissivity: f64) -> f64 {
    (-(-2.0 * transmissivity * alpha * alpha * phi.sin().powi(2)).exp_m1()).max(0.0).sqrt()
}

/// F(a1⊗b1, a2⊗b2) = F(a1, a2)·F(b1, b2).
pub fn product_fidelity_fast_path(
    a1: &SingleModeDensity,
    b1: &SingleModeDensity,
    a2: &SingleModeDensity,
    b2: &SingleModeDensity,
) -> Result<f64> {
    Ok(fidelity(a1, a2)? * fidelity(b1, b2)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFamily {
    Cat,
    Qiopa,
    QiopaFiltered,
}

/// Parameters echoed alongside a visibility sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityMeta {
    pub family: StateFamily,
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
    pub g: Option<f64>,
    pub transmissivity: f64,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityResult {
    pub x: f64,
    pub distance: f64,
    pub fidelity: f64,
    pub meta: VisibilityMeta,
}

impl VisibilityResult {
    pub fn from_fidelity(x: f64, fidelity: f64, meta: VisibilityMeta) -> Self {
        let f = fidelity.clamp(0.0, 1.0);
        Self { x, distance: distance_from_fidelity(f), fidelity: f, meta }
    }
}
