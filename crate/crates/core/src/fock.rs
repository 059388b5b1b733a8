//! Truncated Fock-space states and density operators for one and two bosonic
//! modes, passive two-mode (polarization) rotations and photon statistics.
//!
//! Two-mode objects are flattened with `index = m·(n_max+1) + n`, where `m`
//! counts photons in the first mode of the state's [`ModeBasis`].

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, CMatrix, C64, ONE, ZERO};

const NORM_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const DEGENERATE_NORM: f64 = 1e-14;

/// How far a Fock expansion is carried: until the discarded probability mass
/// falls below `epsilon_tail`, but never beyond `n_cap` photons per mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub epsilon_tail: f64,
    pub n_cap: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { epsilon_tail: 1e-12, n_cap: 256 }
    }
}

impl TruncationPolicy {
    pub fn new(epsilon_tail: f64, n_cap: usize) -> Result<Self> {
        let p = Self { epsilon_tail, n_cap };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_tail > 0.0 && self.epsilon_tail < 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon_tail must lie in (0, 1), got {}", self.epsilon_tail)));
        }
        if self.n_cap < 1 {
            return Err(Error::InvalidParameter("n_cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of expanding an exactly normalized state term by term.
pub(crate) struct Series {
    pub amplitudes: Vec<C64>,
    /// Probability mass beyond the last kept term.
    pub tail: f64,
}

/// Pulls amplitudes `c_0, c_1, …` from `next` until the remaining mass of an
/// exactly normalized state drops to `epsilon`, or `cap + 1` terms are held.
pub(crate) fn expand_series(epsilon: f64, cap: usize, mut next: impl FnMut(usize) -> C64) -> Series {
    let mut amplitudes = Vec::new();
    let mut held = 0.0;
    for n in 0..=cap {
        let c = next(n);
        held += c.norm_sqr();
        amplitudes.push(c);
        if 1.0 - held <= epsilon {
            break;
        }
    }
    Series { amplitudes, tail: (1.0 - held).max(0.0) }
}

/// Polarization basis of a two-mode state, given as the pair of unit vectors
/// (first mode, second mode) in H/V coordinates.
///
/// `Equatorial { phi }` uses π_φ = (π_H + e^{iφ} π_V)/√2 for the first mode and
/// π_φ⊥ = e^{-iφ}(π_H − e^{iφ} π_V)/√2 for the second. The phase on π_φ⊥ makes
/// the collinear amplifier act on this pair as the squeezers
/// S(g e^{-iφ}) on the first mode and S(−g e^{iφ}) on the second, matching the
/// closed-form amplitudes of [`crate::generators::qiopa_equatorial_state`].
/// `RL` is (π_R, π_L) with π_L = (π_H − iπ_V)/√2 exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeBasis {
    Hv,
    Equatorial { phi: f64 },
    Rl,
}

impl ModeBasis {
    /// Equatorial basis with `phi` wrapped into [0, 2π).
    pub fn equatorial(phi: f64) -> Self {
        let mut p = phi.rem_euclid(TAU);
        if p >= TAU {
            p = 0.0;
        }
        ModeBasis::Equatorial { phi: p }
    }

    /// Columns are the basis vectors in H/V coordinates.
    pub fn to_hv(&self) -> [[C64; 2]; 2] {
        let s = FRAC_1_SQRT_2;
        match *self {
            ModeBasis::Hv => [[ONE, ZERO], [ZERO, ONE]],
            ModeBasis::Equatorial { phi } => {
                let e = C64::from_polar(1.0, phi);
                [[C64::new(s, 0.0), e.conj() * s], [e * s, C64::new(-s, 0.0)]]
            }
            ModeBasis::Rl => [[C64::new(s, 0.0), C64::new(s, 0.0)], [C64::new(0.0, s), C64::new(0.0, -s)]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ModeBasis::Equatorial { phi } = *self {
            if !(0.0..TAU).contains(&phi) {
                return Err(Error::InvalidParameter(format!("equatorial phase {phi} outside [0, 2π)")));
            }
        }
        Ok(())
    }
}

/// Photon-number probabilities, per mode or joint over two modes.
#[derive(Debug, Clone, PartialEq)]
pub enum PhotonDistribution {
    Single(Vec<f64>),
    Joint { n_max: usize, probs: Vec<f64> },
}

impl PhotonDistribution {
    pub fn single(probs: Vec<f64>) -> Result<Self> {
        Self::check(&probs)?;
        Ok(PhotonDistribution::Single(probs))
    }

    pub fn joint(n_max: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != (n_max + 1) * (n_max + 1) {
            return Err(Error::ShapeMismatch(format!(
                "joint distribution of length {} does not match n_max = {n_max}",
                probs.len()
            )));
        }
        Self::check(&probs)?;
        Ok(PhotonDistribution::Joint { n_max, probs })
    }

    fn check(probs: &[f64]) -> Result<()> {
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidParameter(format!("negative probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(())
    }

    pub fn probabilities(&self) -> &[f64] {
        match self {
            PhotonDistribution::Single(p) => p,
            PhotonDistribution::Joint { probs, .. } => probs,
        }
    }

    pub fn sum(&self) -> f64 {
        self.probabilities().iter().sum()
    }

    /// Single-mode P(n), or the joint P(m, n) with `m` in the first mode.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        match self {
            PhotonDistribution::Single(p) => {
                if n == 0 {
                    p.get(m).copied().unwrap_or(0.0)
                } else {
                    0.0
                }
            }
            PhotonDistribution::Joint { n_max, probs } => {
                if m > *n_max || n > *n_max {
                    0.0
                } else {
                    probs[m * (n_max + 1) + n]
                }
            }
        }
    }

    /// Mean total photon number.
    pub fn mean(&self) -> f64 {
        match self {
            PhotonDistribution::Single(p) => p.iter().enumerate().map(|(n, p)| n as f64 * p).sum(),
            PhotonDistribution::Joint { n_max, probs } => {
                let d = n_max + 1;
                probs.iter().enumerate().map(|(i, p)| ((i / d) + (i % d)) as f64 * p).sum()
            }
        }
    }

    /// Distribution of the total photon number.
    pub fn total_number(&self) -> Vec<f64> {
        match self {
            PhotonDistribution::Single(p) => p.clone(),
            PhotonDistribution::Joint { n_max, probs } => {
                let d = n_max + 1;
                let mut out = vec![0.0; 2 * n_max + 1];
                for (i, p) in probs.iter().enumerate() {
                    out[i / d + i % d] += p;
                }
                out
            }
        }
    }

    /// Marginals of a joint distribution, (first mode, second mode).
    pub fn marginals(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            PhotonDistribution::Single(_) => None,
            PhotonDistribution::Joint { n_max, probs } => {
                let d = n_max + 1;
                let mut a = vec![0.0; d];
                let mut b = vec![0.0; d];
                for (i, p) in probs.iter().enumerate() {
                    a[i / d] += p;
                    b[i % d] += p;
                }
                Some((a, b))
            }
        }
    }
}

pub trait PhotonStatistics {
    fn number_distribution(&self) -> PhotonDistribution;

    fn mean_photon_number(&self) -> f64 {
        self.number_distribution().mean()
    }
}

pub fn number_distribution<S: PhotonStatistics + ?Sized>(state: &S) -> PhotonDistribution {
    state.number_distribution()
}

pub fn mean_photon_number<S: PhotonStatistics + ?Sized>(state: &S) -> f64 {
    state.mean_photon_number()
}

/// Rescaling to unit norm (pure states) or unit trace (densities).
pub trait Normalize: Sized {
    fn normalized(&self) -> Result<Self>;
}

pub fn normalize<S: Normalize>(state: &S) -> Result<S> {
    state.normalized()
}

fn check_norm(amplitudes: &[C64]) -> Result<()> {
    let n = norm_sqr(amplitudes);
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidParameter(format!("state norm² is {n}, expected 1")));
    }
    Ok(())
}

fn check_density(matrix: &CMatrix) -> Result<()> {
    if !matrix.is_square() {
        return Err(Error::ShapeMismatch(format!("density matrix is {}x{}", matrix.rows(), matrix.cols())));
    }
    let defect = matrix.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidDensity(format!("not Hermitian (defect {defect:e})")));
    }
    let tr = matrix.trace();
    if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
        return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
    }
    Ok(())
}

fn psd_check(matrix: &CMatrix) -> Result<()> {
    let vals = matrix.hermitian_eigenvalues()?;
    if let Some(&min) = vals.first() {
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("eigenvalue {min:e} below −{PSD_TOL:e}")));
        }
    }
    Ok(())
}

fn diagonal_probs(matrix: &CMatrix) -> Vec<f64> {
    matrix.diagonal().iter().map(|z| z.re.max(0.0)).collect()
}

// ---------------------------------------------------------------------------
// Single mode

#[derive(Debug, Clone, PartialEq)]
pub struct SingleModePureState {
    amplitudes: Vec<C64>,
    truncation_error: f64,
}

impl SingleModePureState {
    /// Wraps amplitudes that are already normalized within 1e-10.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::ShapeMismatch("empty amplitude vector".into()));
        }
        check_norm(&amplitudes)?;
        Ok(Self { amplitudes, truncation_error: 0.0 })
    }

    /// Rescales to unit norm, recording the discarded tail mass.
    pub fn from_unnormalized(amplitudes: Vec<C64>, truncation_error: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::ShapeMismatch("empty amplitude vector".into()));
        }
        let s = Self { amplitudes, truncation_error };
        s.normalized()
    }

    /// |n⟩
    pub fn fock(n: usize) -> Self {
        let mut amplitudes = vec![ZERO; n + 1];
        amplitudes[n] = ONE;
        Self { amplitudes, truncation_error: 0.0 }
    }

    pub fn vacuum() -> Self {
        Self::fock(0)
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    /// Zero-pads (never crops) to `n_max`.
    pub fn embed(&self, n_max: usize) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        if n_max > self.n_max() {
            amplitudes.resize(n_max + 1, ZERO);
        }
        Self { amplitudes, truncation_error: self.truncation_error }
    }

    pub fn to_density(&self) -> SingleModeDensity {
        SingleModeDensity {
            matrix: CMatrix::outer(&self.amplitudes, &self.amplitudes),
            truncation_error: self.truncation_error,
        }
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord::from_slice(self.n_max(), None, &self.amplitudes)
    }

    pub fn from_record(r: &StateRecord) -> Result<Self> {
        let data = r.complex_data();
        if data.len() != r.n_max + 1 {
            return Err(Error::ShapeMismatch("single-mode record length".into()));
        }
        Self::new(data)
    }
}

impl PhotonStatistics for SingleModePureState {
    fn number_distribution(&self) -> PhotonDistribution {
        PhotonDistribution::Single(self.amplitudes.iter().map(|c| c.norm_sqr()).collect())
    }
}

impl Normalize for SingleModePureState {
    fn normalized(&self) -> Result<Self> {
        let n2 = norm_sqr(&self.amplitudes);
        if !(n2 > DEGENERATE_NORM) {
            return Err(Error::ZeroNorm { norm_sqr: n2 });
        }
        let s = 1.0 / n2.sqrt();
        Ok(Self {
            amplitudes: self.amplitudes.iter().map(|c| c * s).collect(),
            truncation_error: self.truncation_error,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleModeDensity {
    matrix: CMatrix,
    truncation_error: f64,
}

impl SingleModeDensity {
    /// Validates Hermiticity (1e-12) and unit trace (1e-10).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_density(&matrix)?;
        Ok(Self { matrix, truncation_error: 0.0 })
    }

    pub(crate) fn from_parts(matrix: CMatrix, truncation_error: f64) -> Self {
        Self { matrix, truncation_error }
    }

    pub fn n_max(&self) -> usize {
        self.matrix.rows() - 1
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    /// Eigenvalue check: fails if any eigenvalue is below −1e-10.
    pub fn check_psd(&self) -> Result<()> {
        psd_check(&self.matrix)
    }

    pub fn embed(&self, n_max: usize) -> Self {
        if n_max <= self.n_max() {
            return self.clone();
        }
        let d = self.matrix.rows();
        let matrix =
            CMatrix::from_fn(n_max + 1, n_max + 1, |i, j| if i < d && j < d { self.matrix[(i, j)] } else { ZERO });
        Self { matrix, truncation_error: self.truncation_error }
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord::from_slice(self.n_max(), None, self.matrix.as_slice())
    }

    pub fn from_record(r: &StateRecord) -> Result<Self> {
        let d = r.n_max + 1;
        Self::new(CMatrix::from_row_major(d, d, r.complex_data())?)
    }
}

impl From<&SingleModePureState> for SingleModeDensity {
    fn from(s: &SingleModePureState) -> Self {
        s.to_density()
    }
}

impl PhotonStatistics for SingleModeDensity {
    fn number_distribution(&self) -> PhotonDistribution {
        PhotonDistribution::Single(diagonal_probs(&self.matrix))
    }
}

impl Normalize for SingleModeDensity {
    fn normalized(&self) -> Result<Self> {
        let tr = self.matrix.trace().re;
        if !(tr > DEGENERATE_NORM) {
            return Err(Error::ZeroNorm { norm_sqr: tr });
        }
        Ok(Self { matrix: self.matrix.scale(C64::new(1.0 / tr, 0.0)), truncation_error: self.truncation_error })
    }
}

// ---------------------------------------------------------------------------
// Two modes

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModePureState {
    amplitudes: Vec<C64>,
    n_max: usize,
    basis: ModeBasis,
    truncation_error: f64,
}

impl TwoModePureState {
    pub fn new(amplitudes: Vec<C64>, n_max: usize, basis: ModeBasis) -> Result<Self> {
        let s = Self::from_unnormalized_unchecked(amplitudes, n_max, basis, 0.0)?;
        check_norm(&s.amplitudes)?;
        Ok(s)
    }

    pub fn from_unnormalized(
        amplitudes: Vec<C64>,
        n_max: usize,
        basis: ModeBasis,
        truncation_error: f64,
    ) -> Result<Self> {
        Self::from_unnormalized_unchecked(amplitudes, n_max, basis, truncation_error)?.normalized()
    }

    fn from_unnormalized_unchecked(
        amplitudes: Vec<C64>,
        n_max: usize,
        basis: ModeBasis,
        truncation_error: f64,
    ) -> Result<Self> {
        basis.validate()?;
        if amplitudes.len() != (n_max + 1) * (n_max + 1) {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes do not fill a two-mode space with n_max = {n_max}",
                amplitudes.len()
            )));
        }
        Ok(Self { amplitudes, n_max, basis, truncation_error })
    }

    /// |m, n⟩
    pub fn fock(m: usize, n: usize, basis: ModeBasis) -> Self {
        let n_max = m.max(n);
        let mut amplitudes = vec![ZERO; (n_max + 1) * (n_max + 1)];
        amplitudes[m * (n_max + 1) + n] = ONE;
        Self { amplitudes, n_max, basis, truncation_error: 0.0 }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn basis(&self) -> ModeBasis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    pub fn index(&self, m: usize, n: usize) -> usize {
        m * (self.n_max + 1) + n
    }

    pub fn amplitude(&self, m: usize, n: usize) -> C64 {
        if m > self.n_max || n > self.n_max {
            ZERO
        } else {
            self.amplitudes[self.index(m, n)]
        }
    }

    /// Zero-pads (never crops) to `n_max` per mode.
    pub fn embed(&self, n_max: usize) -> Self {
        if n_max <= self.n_max {
            return self.clone();
        }
        let d = n_max + 1;
        let mut amplitudes = vec![ZERO; d * d];
        for m in 0..=self.n_max {
            for n in 0..=self.n_max {
                amplitudes[m * d + n] = self.amplitude(m, n);
            }
        }
        Self { amplitudes, n_max, basis: self.basis, truncation_error: self.truncation_error }
    }

    /// Keeps photon numbers ≤ `n_max` in each mode, without renormalizing.
    /// Returns the state and the norm² that was cut away.
    pub fn crop(&self, n_max: usize) -> (Vec<C64>, f64) {
        let keep = n_max.min(self.n_max);
        let d = n_max + 1;
        let mut amplitudes = vec![ZERO; d * d];
        for m in 0..=keep {
            for n in 0..=keep {
                amplitudes[m * d + n] = self.amplitude(m, n);
            }
        }
        let lost = (norm_sqr(&self.amplitudes) - norm_sqr(&amplitudes)).max(0.0);
        (amplitudes, lost)
    }

    pub fn to_density(&self) -> TwoModeDensity {
        TwoModeDensity {
            matrix: CMatrix::outer(&self.amplitudes, &self.amplitudes),
            n_max: self.n_max,
            basis: self.basis,
            truncation_error: self.truncation_error,
        }
    }

    /// Re-expresses the state in another polarization basis.
    pub fn change_basis(&self, target: ModeBasis) -> Result<Self> {
        let u = basis_change_matrix(self.basis, target);
        polarization_rotation(self, &u, target)
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord::from_slice(self.n_max, Some(self.basis), &self.amplitudes)
    }

    pub fn from_record(r: &StateRecord) -> Result<Self> {
        Self::new(r.complex_data(), r.n_max, r.basis.unwrap_or(ModeBasis::Hv))
    }
}

impl PhotonStatistics for TwoModePureState {
    fn number_distribution(&self) -> PhotonDistribution {
        PhotonDistribution::Joint { n_max: self.n_max, probs: self.amplitudes.iter().map(|c| c.norm_sqr()).collect() }
    }
}

impl Normalize for TwoModePureState {
    fn normalized(&self) -> Result<Self> {
        let n2 = norm_sqr(&self.amplitudes);
        if !(n2 > DEGENERATE_NORM) {
            return Err(Error::ZeroNorm { norm_sqr: n2 });
        }
        let s = 1.0 / n2.sqrt();
        Ok(Self { amplitudes: self.amplitudes.iter().map(|c| c * s).collect(), ..self.clone() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeDensity {
    matrix: CMatrix,
    n_max: usize,
    basis: ModeBasis,
    truncation_error: f64,
}

impl TwoModeDensity {
    pub fn new(matrix: CMatrix, n_max: usize, basis: ModeBasis) -> Result<Self> {
        basis.validate()?;
        let d = (n_max + 1) * (n_max + 1);
        if matrix.rows() != d {
            return Err(Error::ShapeMismatch(format!("matrix dimension {} for n_max = {n_max}", matrix.rows())));
        }
        check_density(&matrix)?;
        Ok(Self { matrix, n_max, basis, truncation_error: 0.0 })
    }

    pub(crate) fn from_parts(matrix: CMatrix, n_max: usize, basis: ModeBasis, truncation_error: f64) -> Self {
        Self { matrix, n_max, basis, truncation_error }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn basis(&self) -> ModeBasis {
        self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    pub fn check_psd(&self) -> Result<()> {
        psd_check(&self.matrix)
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord::from_slice(self.n_max, Some(self.basis), self.matrix.as_slice())
    }

    pub fn from_record(r: &StateRecord) -> Result<Self> {
        let d = (r.n_max + 1) * (r.n_max + 1);
        Self::new(CMatrix::from_row_major(d, d, r.complex_data())?, r.n_max, r.basis.unwrap_or(ModeBasis::Hv))
    }
}

impl From<&TwoModePureState> for TwoModeDensity {
    fn from(s: &TwoModePureState) -> Self {
        s.to_density()
    }
}

impl PhotonStatistics for TwoModeDensity {
    fn number_distribution(&self) -> PhotonDistribution {
        PhotonDistribution::Joint { n_max: self.n_max, probs: diagonal_probs(&self.matrix) }
    }
}

impl Normalize for TwoModeDensity {
    fn normalized(&self) -> Result<Self> {
        let tr = self.matrix.trace().re;
        if !(tr > DEGENERATE_NORM) {
            return Err(Error::ZeroNorm { norm_sqr: tr });
        }
        Ok(Self { matrix: self.matrix.scale(C64::new(1.0 / tr, 0.0)), ..self.clone() })
    }
}

// ---------------------------------------------------------------------------
// Tensor products

pub trait TensorProduct {
    type Output;

    /// `self` occupies the first mode. Both factors are zero-padded to a
    /// common `n_max`.
    fn tensor(&self, other: &Self, basis: ModeBasis) -> Self::Output;
}

pub fn tensor_product<T: TensorProduct>(a: &T, b: &T, basis: ModeBasis) -> T::Output {
    a.tensor(b, basis)
}

impl TensorProduct for SingleModePureState {
    type Output = TwoModePureState;

    fn tensor(&self, other: &Self, basis: ModeBasis) -> TwoModePureState {
        let n_max = self.n_max().max(other.n_max());
        let (a, b) = (self.embed(n_max), other.embed(n_max));
        let amplitudes = a.amplitudes.iter().flat_map(|x| b.amplitudes.iter().map(move |y| x * y)).collect();
        TwoModePureState { amplitudes, n_max, basis, truncation_error: self.truncation_error + other.truncation_error }
    }
}

impl TensorProduct for SingleModeDensity {
    type Output = TwoModeDensity;

    fn tensor(&self, other: &Self, basis: ModeBasis) -> TwoModeDensity {
        let n_max = self.n_max().max(other.n_max());
        let (a, b) = (self.embed(n_max), other.embed(n_max));
        TwoModeDensity {
            matrix: a.matrix.kron(&b.matrix),
            n_max,
            basis,
            truncation_error: self.truncation_error + other.truncation_error,
        }
    }
}

// ---------------------------------------------------------------------------
// Passive polarization rotations

/// 2x2 matrix `u` with `a_j† ↦ Σ_i u[i][j] a_i†` carrying coefficients in
/// `from` to coefficients in `to`.
pub fn basis_change_matrix(from: ModeBasis, to: ModeBasis) -> [[C64; 2]; 2] {
    let b_from = from.to_hv();
    let b_to = to.to_hv();
    let mut u = [[ZERO; 2]; 2];
    for (i, row) in u.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            *out = (0..2).map(|h| b_to[h][i].conj() * b_from[h][j]).sum();
        }
    }
    u
}

fn unitarity_defect(u: &[[C64; 2]; 2]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let dot: C64 = (0..2).map(|k| u[k][i].conj() * u[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

/// Hermitian `K` with `exp(iK) = u` for a 2x2 unitary `u`.
fn unitary_log(u: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let tr = u[0][0] + u[1][1];
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let disc = (tr * tr * 0.25 - det).sqrt();
    let l1 = tr * 0.5 + disc;
    let l2 = tr * 0.5 - disc;
    if (l1 - l2).norm() < 1e-12 {
        let a = C64::new(l1.arg(), 0.0);
        return [[a, ZERO], [ZERO, a]];
    }
    // Eigenvector of the normal matrix u for l1; its orthogonal complement
    // belongs to l2.
    let cand1 = [u[0][1], l1 - u[0][0]];
    let cand2 = [l1 - u[1][1], u[1][0]];
    let pick = if cand1[0].norm_sqr() + cand1[1].norm_sqr() >= cand2[0].norm_sqr() + cand2[1].norm_sqr() {
        cand1
    } else {
        cand2
    };
    let nrm = (pick[0].norm_sqr() + pick[1].norm_sqr()).sqrt();
    let v1 = [pick[0] / nrm, pick[1] / nrm];
    let v2 = [-v1[1].conj(), v1[0].conj()];
    let (t1, t2) = (l1.arg(), l2.arg());
    let mut k = [[ZERO; 2]; 2];
    for (i, row) in k.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            *out = v1[i] * v1[j].conj() * t1 + v2[i] * v2[j].conj() * t2;
        }
    }
    k
}

/// Applies the Fock-space unitary induced by the mode transformation
/// `a_j† ↦ Σ_i u[i][j] a_i†`.
///
/// Each total-photon-number block N is rotated by `exp(iĜ_N)`, with Ĝ the
/// number-conserving generator Σ K_ij a_i† a_j and `u = exp(iK)`. The output
/// is widened to `n_max = max N` in the support so that no block is cut.
pub fn polarization_rotation(
    state: &TwoModePureState,
    u: &[[C64; 2]; 2],
    output_basis: ModeBasis,
) -> Result<TwoModePureState> {
    let defect = unitarity_defect(u);
    if defect > 1e-12 {
        return Err(Error::NonUnitary(defect));
    }
    output_basis.validate()?;
    let k = unitary_log(u);

    let mut top = 0;
    for m in 0..=state.n_max {
        for n in 0..=state.n_max {
            if state.amplitude(m, n) != ZERO {
                top = top.max(m + n);
            }
        }
    }
    let d_out = top + 1;
    let mut out = vec![ZERO; d_out * d_out];

    for total in 0..=top {
        let block: Vec<C64> = (0..=total).map(|m| state.amplitude(m, total - m)).collect();
        if block.iter().all(|c| *c == ZERO) {
            continue;
        }
        let g = number_block_generator(&k, total);
        let rotated = g.exp_i_hermitian()?.matvec(&block);
        for (m, c) in rotated.into_iter().enumerate() {
            out[m * d_out + (total - m)] = c;
        }
    }

    Ok(TwoModePureState { amplitudes: out, n_max: top, basis: output_basis, truncation_error: state.truncation_error })
}

/// Matrix of Σ K_ij a_i† a_j on span{|m, N−m⟩ : m = 0..N}.
fn number_block_generator(k: &[[C64; 2]; 2], total: usize) -> CMatrix {
    let mut g = CMatrix::zeros(total + 1, total + 1);
    for m in 0..=total {
        let n = total - m;
        g[(m, m)] = k[0][0] * m as f64 + k[1][1] * n as f64;
        if n > 0 {
            // a_0† a_1 |m, n⟩ = √((m+1) n) |m+1, n−1⟩
            g[(m + 1, m)] = k[0][1] * (((m + 1) * n) as f64).sqrt();
        }
        if m > 0 {
            // a_1† a_0 |m, n⟩ = √(m (n+1)) |m−1, n+1⟩
            g[(m - 1, m)] = k[1][0] * ((m * (n + 1)) as f64).sqrt();
        }
    }
    g
}

// ---------------------------------------------------------------------------
// Serialization

/// Debug serialization: `{n_max, basis, data}` with `data` a flat list of
/// `[re, im]` pairs (amplitudes, or a row-major matrix).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub n_max: usize,
    pub basis: Option<ModeBasis>,
    pub data: Vec<[f64; 2]>,
}

impl StateRecord {
    fn from_slice(n_max: usize, basis: Option<ModeBasis>, data: &[C64]) -> Self {
        Self { n_max, basis, data: data.iter().map(|z| [z.re, z.im]).collect() }
    }

    fn complex_data(&self) -> Vec<C64> {
        self.data.iter().map(|[re, im]| C64::new(*re, *im)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
