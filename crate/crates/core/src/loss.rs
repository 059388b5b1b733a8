//! Pure-loss channel: a beam splitter of transmissivity T whose reflected
//! port is traced out.
//!
//! In Kraus form the channel is ρ ↦ Σ_j K_j ρ K_j† with
//! K_j = Σ_n √(C(n, j) T^{n−j} R^j) |n−j⟩⟨n|, where j counts lost photons.
//! On a space truncated at `n_max` the sum over j stops at `n_max` with no
//! further approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{PhotonDistribution, SingleModeDensity, SingleModePureState, TruncationPolicy, TwoModeDensity};
use crate::generators::{coherent_state, CatParams};
use crate::linalg::{ln_factorials, CMatrix, C64, ZERO};

/// Beam-splitter loss with transmissivity `T`. The reflectivity is always
/// derived as `1 − T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LossSetting {
    transmissivity: f64,
}

impl LossSetting {
    pub fn new(transmissivity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::InvalidParameter(format!("transmissivity {transmissivity} outside [0, 1]")));
        }
        Ok(Self { transmissivity })
    }

    pub fn from_reflectivity(reflectivity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reflectivity) {
            return Err(Error::InvalidParameter(format!("reflectivity {reflectivity} outside [0, 1]")));
        }
        Self::new(1.0 - reflectivity)
    }

    pub fn lossless() -> Self {
        Self { transmissivity: 1.0 }
    }

    pub fn t(&self) -> f64 {
        self.transmissivity
    }

    pub fn r(&self) -> f64 {
        1.0 - self.transmissivity
    }
}

impl TryFrom<f64> for LossSetting {
    type Error = Error;

    fn try_from(t: f64) -> Result<Self> {
        Self::new(t)
    }
}

impl From<LossSetting> for f64 {
    fn from(l: LossSetting) -> f64 {
        l.transmissivity
    }
}

/// Kraus amplitudes `k[j][n] = √(C(n, j) T^{n−j} R^j)`, zero for j > n.
#[derive(Debug, Clone)]
pub struct KrausTable {
    n_max: usize,
    amps: Vec<f64>,
}

impl KrausTable {
    pub fn new(n_max: usize, loss: LossSetting) -> Self {
        let d = n_max + 1;
        let mut amps = vec![0.0; d * d];
        let (t, r) = (loss.t(), loss.r());
        if t == 1.0 {
            amps[..d].fill(1.0);
        } else if t == 0.0 {
            for n in 0..d {
                amps[n * d + n] = 1.0;
            }
        } else {
            let lf = ln_factorials(n_max);
            let (ln_t, ln_r) = (t.ln(), r.ln());
            for j in 0..d {
                for n in j..d {
                    let ln_c = lf[n] - lf[j] - lf[n - j];
                    amps[j * d + n] = (0.5 * (ln_c + (n - j) as f64 * ln_t + j as f64 * ln_r)).exp();
                }
            }
        }
        Self { n_max, amps }
    }

    #[inline]
    pub fn amp(&self, lost: usize, n: usize) -> f64 {
        self.amps[lost * (self.n_max + 1) + n]
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// K_j as a dense matrix.
    pub fn operator(&self, lost: usize) -> CMatrix {
        let d = self.n_max + 1;
        let mut k = CMatrix::zeros(d, d);
        for n in lost..d {
            k[(n - lost, n)] = C64::new(self.amp(lost, n), 0.0);
        }
        k
    }
}

pub fn apply_loss_single_mode(rho: &SingleModeDensity, loss: LossSetting) -> SingleModeDensity {
    let table = KrausTable::new(rho.n_max(), loss);
    SingleModeDensity::from_parts(channel_on_matrix(rho.matrix(), &table), rho.truncation_error())
}

pub fn apply_loss_pure(state: &SingleModePureState, loss: LossSetting) -> SingleModeDensity {
    apply_loss_single_mode(&state.to_density(), loss)
}

fn channel_on_matrix(rho: &CMatrix, table: &KrausTable) -> CMatrix {
    let d = rho.rows();
    let mut out = CMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut acc = ZERO;
            for j in 0..d - a.max(b) {
                let w = table.amp(j, a + j) * table.amp(j, b + j);
                if w != 0.0 {
                    acc += rho[(a + j, b + j)] * w;
                }
            }
            out[(a, b)] = acc;
        }
    }
    out
}

/// Identical loss on both modes, applied to the first mode and then the second.
pub fn apply_loss_two_mode(rho: &TwoModeDensity, loss: LossSetting) -> TwoModeDensity {
    let table = KrausTable::new(rho.n_max(), loss);
    let first = loss_on_mode(rho.matrix(), rho.n_max(), &table, Mode::First);
    let both = loss_on_mode(&first, rho.n_max(), &table, Mode::Second);
    TwoModeDensity::from_parts(both, rho.n_max(), rho.basis(), rho.truncation_error())
}

/// Single-mode loss on one mode of a two-mode density.
pub fn apply_loss_one_mode(rho: &TwoModeDensity, loss: LossSetting, mode: Mode) -> TwoModeDensity {
    let table = KrausTable::new(rho.n_max(), loss);
    let out = loss_on_mode(rho.matrix(), rho.n_max(), &table, mode);
    TwoModeDensity::from_parts(out, rho.n_max(), rho.basis(), rho.truncation_error())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    First,
    Second,
}

fn loss_on_mode(rho: &CMatrix, n_max: usize, table: &KrausTable, mode: Mode) -> CMatrix {
    let d = n_max + 1;
    match mode {
        Mode::First => loss_on_first_mode(rho, d, table),
        Mode::Second => swap_modes(&loss_on_first_mode(&swap_modes(rho, d), d, table), d),
    }
}

fn loss_on_first_mode(rho: &CMatrix, d: usize, table: &KrausTable) -> CMatrix {
    let dim = d * d;
    let mut out = CMatrix::zeros(dim, dim);
    let src = rho.as_slice();
    let dst = out.as_mut_slice();
    for m in 0..d {
        for mp in 0..d {
            for j in 0..d - m.max(mp) {
                let w = table.amp(j, m + j) * table.amp(j, mp + j);
                if w == 0.0 {
                    continue;
                }
                for n in 0..d {
                    // row (m+j, n), columns (mp+j, ·) into row (m, n), columns (mp, ·)
                    let src_row = ((m + j) * d + n) * dim + (mp + j) * d;
                    let dst_row = (m * d + n) * dim + mp * d;
                    let s = &src[src_row..src_row + d];
                    for (o, v) in dst[dst_row..dst_row + d].iter_mut().zip(s) {
                        *o += v * w;
                    }
                }
            }
        }
    }
    out
}

fn swap_modes(rho: &CMatrix, d: usize) -> CMatrix {
    let dim = d * d;
    let t = |i: usize| (i % d) * d + i / d;
    CMatrix::from_fn(dim, dim, |i, j| rho[(t(i), t(j))])
}

/// Photon-number statistics after loss: each photon survives independently
/// with probability T. Joint distributions are thinned mode by mode.
pub fn binomial_thinning(dist: &PhotonDistribution, loss: LossSetting) -> PhotonDistribution {
    match dist {
        PhotonDistribution::Single(p) => {
            let table = KrausTable::new(p.len() - 1, loss);
            PhotonDistribution::Single(thin(p, &table))
        }
        PhotonDistribution::Joint { n_max, probs } => {
            let d = n_max + 1;
            let table = KrausTable::new(*n_max, loss);
            let mut out = vec![0.0; d * d];
            for m in 0..d {
                for mp in 0..=m {
                    let w1 = table.amp(m - mp, m).powi(2);
                    if w1 == 0.0 {
                        continue;
                    }
                    for n in 0..d {
                        let p = probs[m * d + n] * w1;
                        if p == 0.0 {
                            continue;
                        }
                        for np in 0..=n {
                            out[mp * d + np] += p * table.amp(n - np, n).powi(2);
                        }
                    }
                }
            }
            PhotonDistribution::Joint { n_max: *n_max, probs: out }
        }
    }
}

fn thin(p: &[f64], table: &KrausTable) -> Vec<f64> {
    (0..p.len()).map(|kept| (kept..p.len()).map(|n| p[n] * table.amp(n - kept, n).powi(2)).sum()).collect()
}

/// Lossy cat built from coherent-state outer products.
///
/// Each component |α_k⟩ leaves as |√T α_k⟩ while the reflected port carries
/// |√R α_k⟩; tracing that port weights the cross terms by the overlaps of the
/// reflected states, which for opposite phases (φ = π/2) is e^{−2R|α|²}.
/// The result is renormalized exactly rather than with the large-|α| factor 1/2,
/// which differs from it by O(e^{−2|α|² sin² φ}).
pub fn lossy_cat_analytic(cat: &CatParams, loss: LossSetting, policy: &TruncationPolicy) -> Result<SingleModeDensity> {
    let components = cat.components();
    let coeff = [1.0, cat.sign.factor()];

    let mut input_norm = 0.0;
    for k in 0..2 {
        for l in 0..2 {
            input_norm += (coeff[k] * coeff[l] * coherent_overlap(components[l], components[k])).re;
        }
    }
    if !(input_norm > 1e-14) {
        return Err(Error::ZeroNorm { norm_sqr: input_norm });
    }

    let st = loss.t().sqrt();
    let sr = loss.r().sqrt();
    let kets = [coherent_state(components[0] * st, policy)?, coherent_state(components[1] * st, policy)?];
    let n_max = kets[0].n_max().max(kets[1].n_max());
    let kets = [kets[0].embed(n_max), kets[1].embed(n_max)];
    let tail = kets[0].truncation_error().max(kets[1].truncation_error());

    let d = n_max + 1;
    let mut m = CMatrix::zeros(d, d);
    for k in 0..2 {
        for l in 0..2 {
            let w = coherent_overlap(components[l] * sr, components[k] * sr) * (coeff[k] * coeff[l]);
            let (bk, bl) = (kets[k].amplitudes(), kets[l].amplitudes());
            for a in 0..d {
                for b in 0..d {
                    m[(a, b)] += w * bk[a] * bl[b].conj();
                }
            }
        }
    }
    let tr = m.trace().re;
    Ok(SingleModeDensity::from_parts(m.scale(C64::new(1.0 / tr, 0.0)), tail))
}

/// ⟨a|b⟩ for coherent states.
pub fn coherent_overlap(a: C64, b: C64) -> C64 {
    (-(a.norm_sqr() + b.norm_sqr()) / 2.0 + a.conj() * b).exp()
}
