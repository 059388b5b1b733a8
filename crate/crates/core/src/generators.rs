//! State families: coherent states and their two-component superpositions,
//! squeezed states, and the macrostates of the collinear quantum-injected
//! parametric amplifier (QI-OPA).
//!
//! The amplifier is U = exp[g(a_H† a_V† − a_H a_V)]. Written in an equatorial
//! mode pair it decouples into two single-mode squeezers, which is how the
//! equatorial macrostates and |Ψ±⟩ are built; [`qiopa_numeric_evolution`]
//! integrates U directly and serves as the cross-check.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{expand_series, ModeBasis, SingleModePureState, TensorProduct, TruncationPolicy, TwoModePureState};
use crate::linalg::{ln_factorials, CMatrix, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// |ψ_φ^±⟩ ∝ |α e^{iφ}⟩ ± |α e^{−iφ}⟩ with real `alpha` ≥ 0. φ = π/2 gives the
/// even/odd cats |iα⟩ ± |−iα⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatParams {
    pub alpha: f64,
    pub phi: f64,
    pub sign: Sign,
}

impl CatParams {
    pub fn new(alpha: f64, phi: f64, sign: Sign) -> Result<Self> {
        let p = Self { alpha, phi, sign };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("cat amplitude must be finite and ≥ 0, got {}", self.alpha)));
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidParameter("cat phase must be finite".into()));
        }
        Ok(())
    }

    /// The two coherent amplitudes, complex conjugates of each other.
    pub fn components(&self) -> [C64; 2] {
        let a = unit_phase(self.phi) * self.alpha;
        [a, a.conj()]
    }

    /// x = R|α|² sin²φ, the scaled loss at which the curves collapse.
    pub fn scaled_loss(&self, reflectivity: f64) -> f64 {
        reflectivity * self.alpha * self.alpha * self.phi.sin().powi(2)
    }
}

/// e^{iφ}, exact at integer multiples of π/2 so that cat parity combs carry
/// exact zeros.
pub(crate) fn unit_phase(phi: f64) -> C64 {
    let q = phi / FRAC_PI_2;
    if (q - q.round()).abs() < 1e-12 {
        return match (q.round() as i64).rem_euclid(4) {
            0 => ONE,
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    C64::from_polar(1.0, phi)
}

/// Amplifier gain g with C = cosh g, Γ = tanh g.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct GainSetting {
    g: f64,
}

impl GainSetting {
    pub fn new(g: f64) -> Result<Self> {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter(format!("gain must be finite and ≥ 0, got {g}")));
        }
        Ok(Self { g })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn c(&self) -> f64 {
        self.g.cosh()
    }

    pub fn gamma(&self) -> f64 {
        self.g.tanh()
    }

    /// ⟨n⟩ = 1 + 4 sinh²g for every amplified single-photon qubit.
    pub fn mean_photon_number(&self) -> f64 {
        1.0 + 4.0 * self.g.sinh().powi(2)
    }
}

impl TryFrom<f64> for GainSetting {
    type Error = Error;

    fn try_from(g: f64) -> Result<Self> {
        Self::new(g)
    }
}

impl From<GainSetting> for f64 {
    fn from(g: GainSetting) -> f64 {
        g.g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pole {
    H,
    V,
}

// ---------------------------------------------------------------------------
// Coherent states and cats

/// |α⟩ with c_n = e^{−|α|²/2} αⁿ/√(n!), by recurrence.
pub fn coherent_state(alpha: C64, policy: &TruncationPolicy) -> Result<SingleModePureState> {
    policy.validate()?;
    let s = coherent_series(alpha, policy.epsilon_tail, policy.n_cap);
    if s.tail > policy.epsilon_tail {
        return Err(Error::TruncationCapExceeded { n_cap: policy.n_cap, tail: s.tail, epsilon: policy.epsilon_tail });
    }
    SingleModePureState::from_unnormalized(s.amplitudes, s.tail)
}

fn coherent_series(alpha: C64, epsilon: f64, cap: usize) -> crate::fock::Series {
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    expand_series(epsilon, cap, |n| {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        c
    })
}

/// Exactly normalized |α e^{iφ}⟩ ± |α e^{−iφ}⟩.
pub fn cat_state(params: &CatParams, policy: &TruncationPolicy) -> Result<SingleModePureState> {
    params.validate()?;
    policy.validate()?;
    let [a, b] = params.components();
    let s = params.sign.factor();
    let overlap = (-params.alpha * params.alpha + a.conj() * b).exp();
    let norm_sqr = 2.0 + 2.0 * s * overlap.re;
    if !(norm_sqr > 1e-14) {
        return Err(Error::ZeroNorm { norm_sqr });
    }
    // Both components share |α|, so one magnitude series sets the cutoff.
    let eps = policy.epsilon_tail * norm_sqr / 4.0;
    let ser = coherent_series(C64::new(params.alpha, 0.0), eps, policy.n_cap);
    let n_max = ser.amplitudes.len() - 1;
    let (ca, cb) = (coherent_amplitudes(a, n_max), coherent_amplitudes(b, n_max));
    let amps: Vec<C64> = ca.iter().zip(&cb).map(|(x, y)| x + y * s).collect();
    let held: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let tail = (1.0 - held / norm_sqr).max(0.0);
    if tail > policy.epsilon_tail {
        return Err(Error::TruncationCapExceeded { n_cap: policy.n_cap, tail, epsilon: policy.epsilon_tail });
    }
    SingleModePureState::from_unnormalized(amps, tail)
}

fn coherent_amplitudes(alpha: C64, n_max: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    out.push(c);
    for n in 1..=n_max {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

// ---------------------------------------------------------------------------
// Squeezed states, S(ζ) = exp[(ζ a†² − ζ* a²)/2]

/// S(ζ)|0⟩: c_{2j} = (e^{iθ}Γ/2)^j √((2j)!)/(j! √C) with ζ = r e^{iθ}.
pub fn squeezed_vacuum(zeta: C64, policy: &TruncationPolicy) -> Result<SingleModePureState> {
    strict(squeezed(zeta, false, policy.epsilon_tail, policy.n_cap)?, policy)
}

/// S(ζ)|1⟩: c_{2i+1} = (e^{iθ}Γ/2)^i √((2i+1)!)/(i! C^{3/2}).
pub fn squeezed_single_photon(zeta: C64, policy: &TruncationPolicy) -> Result<SingleModePureState> {
    strict(squeezed(zeta, true, policy.epsilon_tail, policy.n_cap)?, policy)
}

fn strict(s: SingleModePureState, policy: &TruncationPolicy) -> Result<SingleModePureState> {
    if s.truncation_error() > policy.epsilon_tail {
        return Err(Error::TruncationCapExceeded {
            n_cap: policy.n_cap,
            tail: s.truncation_error(),
            epsilon: policy.epsilon_tail,
        });
    }
    Ok(s)
}

/// Squeezed vacuum or single photon expanded up to `cap`; a tail left at the
/// cap is recorded rather than rejected.
fn squeezed(zeta: C64, odd: bool, epsilon: f64, cap: usize) -> Result<SingleModePureState> {
    if !(zeta.re.is_finite() && zeta.im.is_finite()) {
        return Err(Error::InvalidParameter("squeezing parameter must be finite".into()));
    }
    let r = zeta.norm();
    if r == 0.0 {
        return Ok(SingleModePureState::fock(usize::from(odd)));
    }
    let phase = zeta / r;
    let (ch, gamma) = (r.cosh(), r.tanh());
    let mut c = C64::new(if odd { ch.powf(-1.5) } else { ch.powf(-0.5) }, 0.0);
    let first = usize::from(odd);
    let cap = if cap % 2 == first { cap } else { cap.saturating_sub(1) }.max(first);
    let s = expand_series(epsilon, cap, |n| {
        if n < first || (n - first) % 2 == 1 {
            return ZERO;
        }
        if n > first {
            // step from n − 2 to n
            let k = (n - 2) as f64;
            let ratio = if odd { (k + 2.0) / (k + 1.0) } else { (k + 1.0) / (k + 2.0) };
            c = c * phase * gamma * ratio.sqrt();
        }
        c
    });
    let mut amps = s.amplitudes;
    while amps.len() > 1 && *amps.last().unwrap() == ZERO {
        amps.pop();
    }
    SingleModePureState::from_unnormalized(amps, s.tail)
}

// ---------------------------------------------------------------------------
// QI-OPA macrostates

/// Amplified |1_H⟩ (or |1_V⟩): (1/C²) Σ_i Γ^i √(i+1) |i+1, i⟩ in the H/V
/// basis, with the pole mode carrying the extra photon.
///
/// The expansion stops once the tail mass is below `epsilon_tail`, or at
/// `n_cap` photons in the pole mode, in which case the remaining tail is
/// recorded as the truncation error.
pub fn qiopa_pole_state(gain: GainSetting, pole: Pole, policy: &TruncationPolicy) -> Result<TwoModePureState> {
    policy.validate()?;
    let (c, gamma) = (gain.c(), gain.gamma());
    let c2 = c * c;
    let mut b = 1.0 / c2;
    let s = expand_series(policy.epsilon_tail, policy.n_cap.saturating_sub(1), |i| {
        if i > 0 {
            b *= gamma * ((i + 1) as f64 / i as f64).sqrt();
        }
        C64::new(b, 0.0)
    });
    let top = s.amplitudes.len();
    let d = top + 1;
    let mut amps = vec![ZERO; d * d];
    for (i, bi) in s.amplitudes.iter().enumerate() {
        let idx = match pole {
            Pole::H => (i + 1) * d + i,
            Pole::V => i * d + i + 1,
        };
        amps[idx] = *bi;
    }
    TwoModePureState::from_unnormalized(amps, top, ModeBasis::Hv, s.tail)
}

/// Amplified equatorial qubit |1_φ⟩ in its own basis (π_φ, π_φ⊥):
/// γ_ij = (1/C²)(e^{−iφ}Γ/2)^i (−e^{iφ}Γ/2)^j √((2i+1)!) √((2j)!)/(i! j!) on
/// |2i+1, 2j⟩, evaluated term by term in logarithmic form.
///
/// Each mode is cut where its own tail falls below `epsilon_tail / 2`, or at
/// `n_cap`; any tail left at the cap is recorded, not rejected.
pub fn qiopa_equatorial_state(gain: GainSetting, phi: f64, policy: &TruncationPolicy) -> Result<TwoModePureState> {
    policy.validate()?;
    let basis = ModeBasis::equatorial(phi);
    if gain.g() == 0.0 {
        return Ok(TwoModePureState::fock(1, 0, basis));
    }
    let r = gain.g();
    let eps = policy.epsilon_tail / 2.0;
    let odd = squeezed(C64::new(r, 0.0), true, eps, policy.n_cap)?;
    let even = squeezed(C64::new(r, 0.0), false, eps, policy.n_cap)?;
    let (i_max, j_max) = ((odd.n_max() - 1) / 2, even.n_max() / 2);
    let n_max = odd.n_max().max(even.n_max());
    let d = n_max + 1;

    let lf = ln_factorials(2 * i_max.max(j_max) + 1);
    let ln_c2 = 2.0 * gain.c().ln();
    let ln_half_gamma = (gain.gamma() / 2.0).ln();
    let phase = unit_phase(phi);
    let mut amps = vec![ZERO; d * d];
    for i in 0..=i_max {
        for j in 0..=j_max {
            let ln_mag = -ln_c2 + (i + j) as f64 * ln_half_gamma + 0.5 * (lf[2 * i + 1] + lf[2 * j]) - lf[i] - lf[j];
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let ph = phase_power(phase, j as i64 - i as i64);
            amps[(2 * i + 1) * d + 2 * j] = ph * (sign * ln_mag.exp());
        }
    }
    let tail = odd.truncation_error() + even.truncation_error();
    TwoModePureState::from_unnormalized(amps, n_max, basis, tail)
}

fn phase_power(z: C64, k: i64) -> C64 {
    if k >= 0 {
        z.powi(k as i32)
    } else {
        z.conj().powi((-k) as i32)
    }
}

/// Single-mode factors (mode π_φ, mode π_φ⊥) of the equatorial macrostate:
/// S(g e^{−iφ})|1⟩ and S(−g e^{iφ})|0⟩. Each factor keeps a tail of at most
/// `epsilon_tail / 2`, clamped at `n_cap`.
pub fn qiopa_equatorial_factors(
    gain: GainSetting,
    phi: f64,
    policy: &TruncationPolicy,
) -> Result<(SingleModePureState, SingleModePureState)> {
    policy.validate()?;
    let e = unit_phase(phi);
    let eps = policy.epsilon_tail / 2.0;
    let odd = squeezed(e.conj() * gain.g(), true, eps, policy.n_cap)?;
    let even = squeezed(-e * gain.g(), false, eps, policy.n_cap)?;
    Ok((odd, even))
}

/// The amplified |1_+⟩ and |1_−⟩ as single-mode factor pairs in the common
/// (π_+, π_−) basis, π_± = (π_H ± π_V)/√2:
/// Φ⁺ = S(g)|1⟩ ⊗ S(−g)|0⟩ and Φ⁻ = S(g)|0⟩ ⊗ S(−g)|1⟩.
pub fn qiopa_phi_factors(
    gain: GainSetting,
    policy: &TruncationPolicy,
) -> Result<[(SingleModePureState, SingleModePureState); 2]> {
    policy.validate()?;
    let eps = policy.epsilon_tail / 2.0;
    let g = C64::new(gain.g(), 0.0);
    let plus = (squeezed(g, true, eps, policy.n_cap)?, squeezed(-g, false, eps, policy.n_cap)?);
    let minus = (squeezed(g, false, eps, policy.n_cap)?, squeezed(-g, true, eps, policy.n_cap)?);
    Ok([plus, minus])
}

/// Φ⁺ and Φ⁻ as two-mode states in the (π_+, π_−) basis, padded to a common
/// truncation.
pub fn qiopa_phi_pair(gain: GainSetting, policy: &TruncationPolicy) -> Result<(TwoModePureState, TwoModePureState)> {
    let [(a, b), (c, d)] = qiopa_phi_factors(gain, policy)?;
    let basis = ModeBasis::equatorial(0.0);
    let plus = a.tensor(&b, basis);
    let minus = c.tensor(&d, basis);
    let n = plus.n_max().max(minus.n_max());
    Ok((plus.embed(n), minus.embed(n)))
}

/// |Ψ±⟩ = (Φ⁺ ± iΦ⁻)/√2 in the (π_+, π_−) basis.
///
/// With the basis conventions of [`ModeBasis`], |Ψ+⟩ is the amplified
/// circular qubit (π_H − iπ_V)/√2 (equatorial phase 3π/2) and |Ψ−⟩ the one
/// with phase π/2.
pub fn macro_superposition(gain: GainSetting, sign: Sign, policy: &TruncationPolicy) -> Result<TwoModePureState> {
    let (plus, minus) = qiopa_phi_pair(gain, policy)?;
    let w = C64::new(0.0, sign.factor());
    let amps: Vec<C64> =
        plus.amplitudes().iter().zip(minus.amplitudes()).map(|(p, m)| (p + w * m) * FRAC_1_SQRT_2).collect();
    let tail = plus.truncation_error().max(minus.truncation_error());
    TwoModePureState::from_unnormalized(amps, plus.n_max(), plus.basis(), tail)
}

/// Equatorial phase of the circular macrostate equal to |Ψ±⟩.
pub fn macro_superposition_phase(sign: Sign) -> f64 {
    match sign {
        Sign::Plus => 3.0 * FRAC_PI_2,
        Sign::Minus => FRAC_PI_2,
    }
}

/// Applies exp[g(a_H† a_V† − a_H a_V)] to c_H|1,0⟩ + c_V|0,1⟩ in the H/V basis.
///
/// The generator conserves m − n, so each injected component evolves inside
/// its own ladder {|k+1, k⟩} or {|k, k+1⟩}. The ladder is integrated with
/// 2·n_max rungs and then cropped to `n_max` photons per mode; if more than
/// 1e-8 of the norm falls outside, the guard margin was too small.
pub fn qiopa_numeric_evolution(gain: GainSetting, injected: [C64; 2], n_max: usize) -> Result<TwoModePureState> {
    let norm = injected[0].norm_sqr() + injected[1].norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("injected qubit has norm² {norm}")));
    }
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let rungs = 2 * n_max;
    let g = gain.g();
    // −iG on the ladder, Hermitian
    let mut h = CMatrix::zeros(rungs, rungs);
    for k in 0..rungs - 1 {
        let w = g * (((k + 1) * (k + 2)) as f64).sqrt();
        h[(k + 1, k)] = C64::new(0.0, -w);
        h[(k, k + 1)] = C64::new(0.0, w);
    }
    let u = h.exp_i_hermitian()?;
    let ladder: Vec<C64> = (0..rungs).map(|k| u[(k, 0)]).collect();

    let d = n_max + 1;
    let mut amps = vec![ZERO; d * d];
    let mut kept = 0.0;
    for (k, &l) in ladder.iter().enumerate().take(n_max) {
        let h_amp = injected[0] * l;
        let v_amp = injected[1] * l;
        amps[(k + 1) * d + k] += h_amp;
        amps[k * d + k + 1] += v_amp;
        kept += h_amp.norm_sqr() + v_amp.norm_sqr();
    }
    let lost = (1.0 - kept).max(0.0);
    if lost > 1e-8 {
        return Err(Error::GuardMargin { lost });
    }
    TwoModePureState::from_unnormalized(amps, n_max, ModeBasis::Hv, lost)
}

/// Injected qubit (c_H, c_V) for the equatorial state π_φ.
pub fn equatorial_qubit(phi: f64) -> [C64; 2] {
    [C64::new(FRAC_1_SQRT_2, 0.0), unit_phase(phi) * FRAC_1_SQRT_2]
}

/// φ + π wrapped into [0, 2π).
pub fn antipodal(phi: f64) -> f64 {
    (phi + PI).rem_euclid(2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{PhotonStatistics, TensorProduct};
    use crate::linalg::inner;

    fn policy() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn vacuum_coherent() {
        let s = coherent_state(ZERO, &policy()).unwrap();
        assert_eq!(s.n_max(), 0);
        assert_eq!(s.amplitudes()[0], ONE);
    }

    #[test]
    fn coherent_mean() {
        let s = coherent_state(C64::new(2.0, 0.0), &policy()).unwrap();
        assert!((s.mean_photon_number() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn coherent_overlap_by_series() {
        let p = policy();
        let a = coherent_state(C64::new(1.0, 0.0), &p).unwrap();
        let b = coherent_state(C64::new(-1.0, 0.0), &p).unwrap();
        let n = a.n_max().max(b.n_max());
        let ov = inner(a.embed(n).amplitudes(), b.embed(n).amplitudes());
        assert!((ov.re - 0.135_335_283_236_612_7).abs() < 1e-10);
    }

    #[test]
    fn coherent_cap_is_reported() {
        let p = TruncationPolicy::new(1e-12, 10).unwrap();
        assert!(matches!(coherent_state(C64::new(4.0, 0.0), &p), Err(Error::TruncationCapExceeded { .. })));
    }

    #[test]
    fn cat_parity_combs() {
        let p = policy();
        for (sign, forbidden) in [(Sign::Plus, 1), (Sign::Minus, 0)] {
            let cat = cat_state(&CatParams::new(4.0, FRAC_PI_2, sign).unwrap(), &p).unwrap();
            let d = cat.number_distribution();
            for (n, pn) in d.probabilities().iter().enumerate() {
                if n % 2 == forbidden {
                    assert_eq!(*pn, 0.0);
                }
            }
            assert!((cat.mean_photon_number() - 16.0).abs() < 1e-10);
        }
    }

    #[test]
    fn odd_cat_at_zero_amplitude_is_degenerate() {
        let r = cat_state(&CatParams::new(0.0, FRAC_PI_2, Sign::Minus).unwrap(), &policy());
        assert!(matches!(r, Err(Error::ZeroNorm { .. })));
    }

    #[test]
    fn gain_derived_quantities() {
        let g = GainSetting::new(1.5).unwrap();
        assert!((g.c() - 1.5f64.cosh()).abs() < 1e-15);
        assert!(g.gamma() < 1.0);
        assert!((g.mean_photon_number() - 19.135_323_991_555_527).abs() < 1e-9);
        assert!(GainSetting::new(-0.1).is_err());
    }

    #[test]
    fn squeezed_vacuum_mean() {
        let r = 0.7f64;
        let s = squeezed_vacuum(C64::new(r, 0.0), &policy()).unwrap();
        assert!((s.mean_photon_number() - r.sinh().powi(2)).abs() < 1e-10);
        let s1 = squeezed_single_photon(C64::new(0.0, r), &policy()).unwrap();
        assert!((s1.mean_photon_number() - (1.0 + 3.0 * r.sinh().powi(2))).abs() < 1e-10);
    }

    #[test]
    fn pole_state_at_zero_gain() {
        let s = qiopa_pole_state(GainSetting::new(0.0).unwrap(), Pole::H, &policy()).unwrap();
        assert_eq!(s.amplitude(1, 0), ONE);
        assert!((s.mean_photon_number() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pole_amplitude_ratio() {
        let g = GainSetting::new(0.9).unwrap();
        let s = qiopa_pole_state(g, Pole::V, &policy()).unwrap();
        for i in 0..20 {
            let r = s.amplitude(i + 1, i + 2) / s.amplitude(i, i + 1);
            let expect = g.gamma() * ((i + 2) as f64 / (i + 1) as f64).sqrt();
            assert!((r.re - expect).abs() < 1e-12 && r.im == 0.0);
        }
    }

    #[test]
    fn equatorial_vacuum_term() {
        let g = GainSetting::new(0.6).unwrap();
        let raw = 1.0 / g.c().powi(2);
        let s = qiopa_equatorial_state(g, 0.4, &policy()).unwrap();
        assert!((s.amplitude(1, 0).re - raw).abs() < 1e-12);
    }

    #[test]
    fn equatorial_matches_factor_product() {
        let g = GainSetting::new(0.8).unwrap();
        let phi = 1.1;
        let s = qiopa_equatorial_state(g, phi, &policy()).unwrap();
        let (a, b) = qiopa_equatorial_factors(g, phi, &policy()).unwrap();
        let t = a.tensor(&b, s.basis());
        let n = s.n_max().max(t.n_max());
        let ov = inner(s.embed(n).amplitudes(), t.embed(n).amplitudes());
        assert!((ov.norm() - 1.0).abs() < 1e-12);
        assert!((ov - ONE).norm() < 1e-12);
    }

    #[test]
    fn numeric_evolution_identity_at_zero_gain() {
        let q = equatorial_qubit(0.3);
        let s = qiopa_numeric_evolution(GainSetting::new(0.0).unwrap(), q, 3).unwrap();
        assert!((s.amplitude(1, 0) - q[0]).norm() < 1e-15);
        assert!((s.amplitude(0, 1) - q[1]).norm() < 1e-15);
    }

    #[test]
    fn numeric_evolution_guard_margin() {
        let r = qiopa_numeric_evolution(GainSetting::new(1.0).unwrap(), [ONE, ZERO], 5);
        assert!(matches!(r, Err(Error::GuardMargin { .. })));
    }

    #[test]
    fn psi_pair_orthogonal() {
        let g = GainSetting::new(0.5).unwrap();
        let a = macro_superposition(g, Sign::Plus, &policy()).unwrap();
        let b = macro_superposition(g, Sign::Minus, &policy()).unwrap();
        assert!(inner(a.amplitudes(), b.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn unit_phase_quadrants() {
        assert_eq!(unit_phase(FRAC_PI_2), C64::new(0.0, 1.0));
        assert_eq!(unit_phase(-FRAC_PI_2), C64::new(0.0, -1.0));
        assert_eq!(unit_phase(PI), C64::new(-1.0, 0.0));
        assert!((unit_phase(0.3) - C64::from_polar(1.0, 0.3)).norm() < 1e-16);
    }
}
