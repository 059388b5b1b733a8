//! Parameter sweeps: the universal cat curve, photon
//! number distributions, QI-OPA visibility with and without the orthogonality
//! filter, and slope/inflection diagnostics. Every runner is deterministic and
//! returns rows in grid order.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{PhotonStatistics, SingleModeDensity, TruncationPolicy};
use crate::generators::{
    cat_state, qiopa_equatorial_state, qiopa_phi_factors, qiopa_phi_pair, qiopa_pole_state, CatParams, GainSetting,
    Pole, Sign,
};
use crate::loss::{apply_loss_single_mode, binomial_thinning, LossSetting};
use crate::metrics::{
    cat_visibility_closed_form, distance_from_fidelity, fidelity, pure_fidelity_two_mode, StateFamily, VisibilityMeta,
    VisibilityResult,
};
use crate::ofilter::{filtered_product_fidelity, FilterThreshold};

pub type CurvePoint = VisibilityResult;

/// Whether `grid` lists reflectivities R or scaled losses x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridVariable {
    #[default]
    R,
    X,
}

/// Basis in which QI-OPA photon-number distributions are reported: the
/// equatorial state in its own basis, or the H pole state in H/V.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionBasis {
    #[default]
    Equatorial,
    Hv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub family: StateFamily,
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
    pub gains: Vec<f64>,
    pub thresholds: Vec<usize>,
    pub grid: Vec<f64>,
    pub grid_variable: GridVariable,
    pub basis: DistributionBasis,
    pub truncation: TruncationPolicy,
    pub out: Option<String>,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            family: StateFamily::Cat,
            alpha: None,
            phi: None,
            gains: Vec::new(),
            thresholds: Vec::new(),
            grid: Vec::new(),
            grid_variable: GridVariable::R,
            basis: DistributionBasis::Equatorial,
            truncation: TruncationPolicy::default(),
            out: None,
            seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.truncation.validate()?;
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter("grid is empty".into()));
        }
        for &v in &self.grid {
            let ok = match self.grid_variable {
                GridVariable::R => (0.0..=1.0).contains(&v),
                GridVariable::X => v >= 0.0 && v.is_finite(),
            };
            if !ok {
                return Err(Error::InvalidParameter(format!("grid value {v} out of range")));
            }
        }
        if let Some(a) = self.alpha {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::InvalidParameter(format!("alpha {a} must be finite and ≥ 0")));
            }
        }
        for &g in &self.gains {
            GainSetting::new(g)?;
        }
        Ok(())
    }

    fn cat(&self, sign: Sign) -> Result<CatParams> {
        let alpha = self.alpha.ok_or_else(|| Error::InvalidParameter("alpha is required for the cat family".into()))?;
        CatParams::new(alpha, self.phi.unwrap_or(FRAC_PI_2), sign)
    }

    fn gains(&self) -> Result<Vec<GainSetting>> {
        if self.gains.is_empty() {
            return Err(Error::InvalidParameter("at least one gain is required".into()));
        }
        self.gains.iter().map(|&g| GainSetting::new(g)).collect()
    }

    /// Reflectivities for a curve whose x-axis is `scale`·R.
    fn reflectivities(&self, scale: f64) -> Result<Vec<f64>> {
        match self.grid_variable {
            GridVariable::R => Ok(self.grid.clone()),
            GridVariable::X => self
                .grid
                .iter()
                .map(|&x| {
                    let r = if x == 0.0 { 0.0 } else { x / scale };
                    if r > 1.0 {
                        Err(Error::InvalidParameter(format!("x = {x} needs R = {r} > 1")))
                    } else {
                        Ok(r)
                    }
                })
                .collect(),
        }
    }
}

/// Refuses gains whose photon number would not fit under the cap.
fn check_gain_budget(gain: GainSetting, policy: &TruncationPolicy) -> Result<()> {
    let n = gain.mean_photon_number();
    let need = n + 8.0 * n.sqrt();
    if need > policy.n_cap as f64 {
        return Err(Error::PhotonBudgetExceeded { need, n_cap: policy.n_cap });
    }
    Ok(())
}

/// Evaluates `f` over `items`, spreading the work over the available cores.
/// Output order follows input order.
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> Result<U> + Sync) -> Result<Vec<U>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len()).max(1);
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(workers);
    let parts: Vec<Result<Vec<U>>> = std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| {
                let f = &f;
                s.spawn(move || c.iter().map(f).collect::<Result<Vec<U>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Universal cat curve

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniversalRow {
    pub x: f64,
    pub r: f64,
    pub alpha: f64,
    pub phi: f64,
    pub d_closed: f64,
    pub d_numeric: f64,
    pub f_numeric: f64,
}

impl UniversalRow {
    pub fn point(&self) -> CurvePoint {
        let meta = VisibilityMeta {
            family: StateFamily::Cat,
            alpha: Some(self.alpha),
            phi: Some(self.phi),
            g: None,
            transmissivity: 1.0 - self.r,
            k: None,
        };
        VisibilityResult::from_fidelity(self.x, self.f_numeric, meta)
    }
}

/// Visibility of the lossy pair |ψ_φ^+⟩, |ψ_φ^−⟩ against the closed form.
///
/// The numeric column runs cat_state → loss channel → Bures distance. The
/// closed form is asymptotic in |α|² sin²φ, so the run fails if the two
/// columns differ by more than 1e-6 + e^{−2|α|² sin²φ}.
pub fn run_universal_curve(cfg: &SweepConfig) -> Result<Vec<UniversalRow>> {
    cfg.validate()?;
    let plus = cfg.cat(Sign::Plus)?;
    let minus = cfg.cat(Sign::Minus)?;
    let scale = plus.alpha * plus.alpha * plus.phi.sin().powi(2);
    let rs = cfg.reflectivities(scale)?;
    let tolerance = 1e-6 + (-2.0 * scale).exp();

    let a = cat_state(&plus, &cfg.truncation)?;
    let b = cat_state(&minus, &cfg.truncation)?;
    let n = a.n_max().max(b.n_max());
    let (rho, sigma) = (a.embed(n).to_density(), b.embed(n).to_density());

    par_map(&rs, |&r| {
        let loss = LossSetting::from_reflectivity(r)?;
        let f = fidelity(&apply_loss_single_mode(&rho, loss), &apply_loss_single_mode(&sigma, loss))?;
        let d_numeric = distance_from_fidelity(f);
        let d_closed = cat_visibility_closed_form(plus.alpha, plus.phi, r);
        if (d_numeric - d_closed).abs() > tolerance {
            return Err(Error::OracleMismatch(format!(
                "R = {r}: numeric D = {d_numeric}, closed form {d_closed} (tolerance {tolerance:e})"
            )));
        }
        Ok(UniversalRow {
            x: plus.scaled_loss(r),
            r,
            alpha: plus.alpha,
            phi: plus.phi,
            d_closed,
            d_numeric,
            f_numeric: f,
        })
    })
}

// ---------------------------------------------------------------------------
// Photon-number distributions

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub label: String,
    pub index_m: usize,
    /// `None` for single-mode distributions.
    pub index_n: Option<usize>,
    pub probability: f64,
}

/// P(n) of the lossy even cat |ψ_φ^+⟩ for each reflectivity in the grid.
pub fn run_cat_distributions(cfg: &SweepConfig) -> Result<Vec<DistributionRow>> {
    cfg.validate()?;
    let cat = cfg.cat(Sign::Plus)?;
    let rs = cfg.reflectivities(cat.alpha * cat.alpha * cat.phi.sin().powi(2))?;
    let rho = cat_state(&cat, &cfg.truncation)?.to_density();
    let tables = par_map(&rs, |&r| {
        let out = apply_loss_single_mode(&rho, LossSetting::from_reflectivity(r)?);
        check_sum(out.number_distribution().sum(), r)?;
        Ok(out.number_distribution())
    })?;
    let mut rows = Vec::new();
    for (r, dist) in rs.iter().zip(tables) {
        let label = format!("R={r:?}");
        for (m, &p) in dist.probabilities().iter().enumerate() {
            rows.push(DistributionRow { label: label.clone(), index_m: m, index_n: None, probability: p });
        }
    }
    Ok(rows)
}

fn check_sum(s: f64, r: f64) -> Result<()> {
    if (s - 1.0).abs() > 1e-10 {
        return Err(Error::OracleMismatch(format!("distribution at R = {r} sums to {s}")));
    }
    Ok(())
}

/// Joint P(m, n) of a QI-OPA macrostate after loss, by binomial thinning of
/// the lossless distribution. Labels read `g=…/T=…`.
pub fn run_qiopa_distributions(cfg: &SweepConfig) -> Result<Vec<DistributionRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for gain in cfg.gains()? {
        check_gain_budget(gain, &cfg.truncation)?;
        let state = match cfg.basis {
            DistributionBasis::Equatorial => qiopa_equatorial_state(gain, cfg.phi.unwrap_or(0.0), &cfg.truncation)?,
            DistributionBasis::Hv => qiopa_pole_state(gain, Pole::H, &cfg.truncation)?,
        };
        let lossless = state.number_distribution();
        let rs = cfg.reflectivities(lossless.mean())?;
        for r in rs {
            let loss = LossSetting::from_reflectivity(r)?;
            let dist = binomial_thinning(&lossless, loss);
            check_sum(dist.sum(), r)?;
            let d = state.n_max() + 1;
            let label = format!("g={:?}/T={:?}", gain.g(), loss.t());
            for (i, &p) in dist.probabilities().iter().enumerate() {
                rows.push(DistributionRow {
                    label: label.clone(),
                    index_m: i / d,
                    index_n: Some(i % d),
                    probability: p,
                });
            }
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// QI-OPA visibility

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QiopaRow {
    pub g: f64,
    pub r: f64,
    pub x: f64,
    pub fidelity: f64,
    pub distance: f64,
    pub mean_n: f64,
}

impl QiopaRow {
    pub fn point(&self) -> CurvePoint {
        let meta = VisibilityMeta {
            family: StateFamily::Qiopa,
            alpha: None,
            phi: None,
            g: Some(self.g),
            transmissivity: 1.0 - self.r,
            k: None,
        };
        VisibilityResult::from_fidelity(self.x, self.fidelity, meta)
    }
}

/// Lossy single-mode factors of Φ⁺ and Φ⁻ in the (π_+, π_−) basis.
struct LossyPair {
    plus: (SingleModeDensity, SingleModeDensity),
    minus: (SingleModeDensity, SingleModeDensity),
}

struct QiopaSource {
    plus: (SingleModeDensity, SingleModeDensity),
    minus: (SingleModeDensity, SingleModeDensity),
    mean_n: f64,
}

impl QiopaSource {
    fn new(gain: GainSetting, policy: &TruncationPolicy) -> Result<Self> {
        check_gain_budget(gain, policy)?;
        let [(a, b), (c, d)] = qiopa_phi_factors(gain, policy)?;
        let n = [&a, &b, &c, &d].iter().map(|s| s.n_max()).max().unwrap_or(0);
        let mean_n = a.mean_photon_number() + b.mean_photon_number();
        let dens = |s: &crate::fock::SingleModePureState| s.embed(n).to_density();
        Ok(Self { plus: (dens(&a), dens(&b)), minus: (dens(&c), dens(&d)), mean_n })
    }

    fn lossy(&self, loss: LossSetting) -> LossyPair {
        let l = |s: &SingleModeDensity| apply_loss_single_mode(s, loss);
        LossyPair { plus: (l(&self.plus.0), l(&self.plus.1)), minus: (l(&self.minus.0), l(&self.minus.1)) }
    }

    /// F(Φ⁺, Φ⁻) after loss, through the product structure.
    fn fidelity(&self, loss: LossSetting) -> Result<f64> {
        let p = self.lossy(loss);
        Ok(fidelity(&p.plus.0, &p.minus.0)? * fidelity(&p.plus.1, &p.minus.1)?)
    }
}

/// D(x) between the lossy amplified |1_+⟩ and |1_−⟩, x = R⟨n⟩.
///
/// Before sweeping, the lossless fidelity is checked against the pure
/// overlap |⟨Φ⁺|Φ⁻⟩|, which vanishes by parity.
pub fn run_qiopa_visibility(cfg: &SweepConfig) -> Result<Vec<QiopaRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for gain in cfg.gains()? {
        let src = QiopaSource::new(gain, &cfg.truncation)?;
        let f0 = src.fidelity(LossSetting::lossless())?;
        let (phi_plus, phi_minus) = qiopa_phi_pair(gain, &cfg.truncation)?;
        let overlap = pure_fidelity_two_mode(&phi_plus, &phi_minus)?;
        if (f0 - overlap).abs() > 1e-8 {
            return Err(Error::OracleMismatch(format!("g = {}: lossless F = {f0}, overlap {overlap}", gain.g())));
        }
        let rs = cfg.reflectivities(src.mean_n)?;
        let part = par_map(&rs, |&r| {
            let f = src.fidelity(LossSetting::from_reflectivity(r)?)?.clamp(0.0, 1.0);
            Ok(QiopaRow {
                g: gain.g(),
                r,
                x: r * src.mean_n,
                fidelity: f,
                distance: distance_from_fidelity(f),
                mean_n: src.mean_n,
            })
        })?;
        rows.extend(part);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Orthogonality filter

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OFilterRow {
    pub g: f64,
    pub k: usize,
    pub r: f64,
    pub x: f64,
    pub fidelity: f64,
    pub distance: f64,
    /// Success probability for the Φ⁺ input; Φ⁻ has the same value since its
    /// photon statistics are the mode-swapped ones.
    pub success_prob: f64,
}

/// Loss, then the filter on both macrostates, then the Bures distance.
pub fn run_ofilter_visibility(cfg: &SweepConfig) -> Result<Vec<OFilterRow>> {
    cfg.validate()?;
    if cfg.thresholds.is_empty() {
        return Err(Error::InvalidParameter("at least one threshold k is required".into()));
    }
    let mut rows = Vec::new();
    for gain in cfg.gains()? {
        let src = QiopaSource::new(gain, &cfg.truncation)?;
        let rs = cfg.reflectivities(src.mean_n)?;
        let cells: Vec<(usize, f64)> = cfg.thresholds.iter().flat_map(|&k| rs.iter().map(move |&r| (k, r))).collect();
        let part = par_map(&cells, |&(k, r)| {
            let p = src.lossy(LossSetting::from_reflectivity(r)?);
            let ff =
                filtered_product_fidelity((&p.plus.0, &p.plus.1), (&p.minus.0, &p.minus.1), FilterThreshold::new(k))?;
            Ok(OFilterRow {
                g: gain.g(),
                k,
                r,
                x: r * src.mean_n,
                fidelity: ff.fidelity,
                distance: distance_from_fidelity(ff.fidelity),
                success_prob: ff.success_probability[0],
            })
        })?;
        rows.extend(part);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Diagnostics

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inflection {
    pub x: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    /// |dD/dx| by central difference at the second-to-last point.
    pub end_slope: f64,
    /// Mean |dD/dx| over the last 5% of the x-range.
    pub tail_slope: f64,
    /// |dD/dx| by central difference at the point nearest mid-range.
    pub mid_slope: f64,
    pub inflections: Vec<Inflection>,
}

/// Slopes and inflection points of a sampled curve D(x). `points` must be
/// sorted by strictly increasing x.
pub fn slope_diagnostics(points: &[(f64, f64)]) -> Result<SlopeReport> {
    let n = points.len();
    if n < 5 {
        return Err(Error::InvalidParameter(format!("slope diagnostics need at least 5 points, got {n}")));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidParameter("curve x values must increase strictly".into()));
    }
    let secant = |i: usize, j: usize| ((points[j].1 - points[i].1) / (points[j].0 - points[i].0)).abs();
    let end_slope = secant(n - 3, n - 1);

    let (x0, x1) = (points[0].0, points[n - 1].0);
    let cut = x1 - 0.05 * (x1 - x0);
    let start = points.iter().rposition(|p| p.0 <= cut).unwrap_or(n - 2).min(n - 2);
    let tail_slope = secant(start, n - 1);

    let mid_x = 0.5 * (x0 + x1);
    let mid =
        (1..n - 1).min_by(|&a, &b| (points[a].0 - mid_x).abs().total_cmp(&(points[b].0 - mid_x).abs())).unwrap_or(1);
    let mid_slope = secant(mid - 1, mid + 1);

    // second divided differences at interior points
    let d2: Vec<f64> = (1..n - 1)
        .map(|i| {
            let (a, b, c) = (points[i - 1], points[i], points[i + 1]);
            2.0 * ((c.1 - b.1) / (c.0 - b.0) - (b.1 - a.1) / (b.0 - a.0)) / (c.0 - a.0)
        })
        .collect();
    let mut inflections = Vec::new();
    for w in 0..d2.len().saturating_sub(1) {
        let (u, v) = (d2[w], d2[w + 1]);
        if u != 0.0 && v != 0.0 && (u > 0.0) != (v > 0.0) {
            // interpolate between interior points w+1 and w+2
            let t = u / (u - v);
            let (p, q) = (points[w + 1], points[w + 2]);
            inflections.push(Inflection { x: p.0 + t * (q.0 - p.0), distance: p.1 + t * (q.1 - p.1) });
        }
    }
    Ok(SlopeReport { end_slope, tail_slope, mid_slope, inflections })
}

// ---------------------------------------------------------------------------
// CSV output

pub const UNIVERSAL_HEADER: &str = "x,R,alpha,phi,D_closed,D_numeric";
pub const QIOPA_HEADER: &str = "g,R,x,F,D,mean_n";
pub const OFILTER_HEADER: &str = "g,k,R,x,F,D,success_prob";
pub const DISTRIBUTION_HEADER: &str = "label,index_m,index_n,probability";

/// Shortest decimal that parses back to the same f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_universal_csv(rows: &[UniversalRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "{UNIVERSAL_HEADER}")?;
    for r in rows {
        let cells = [r.x, r.r, r.alpha, r.phi, r.d_closed, r.d_numeric].map(fmt_float);
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_qiopa_csv(rows: &[QiopaRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "{QIOPA_HEADER}")?;
    for r in rows {
        let cells = [r.g, r.r, r.x, r.fidelity, r.distance, r.mean_n].map(fmt_float);
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_ofilter_csv(rows: &[OFilterRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "{OFILTER_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_float(r.g),
            r.k,
            fmt_float(r.r),
            fmt_float(r.x),
            fmt_float(r.fidelity),
            fmt_float(r.distance),
            fmt_float(r.success_prob)
        )?;
    }
    Ok(())
}

pub fn write_distribution_csv(rows: &[DistributionRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "{DISTRIBUTION_HEADER}")?;
    for r in rows {
        let n = r.index_n.map(|n| n.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{}", r.label, r.index_m, n, fmt_float(r.probability))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat_cfg(alpha: f64, grid: Vec<f64>) -> SweepConfig {
        SweepConfig { family: StateFamily::Cat, alpha: Some(alpha), grid, ..SweepConfig::default() }
    }

    #[test]
    fn config_validation() {
        assert!(cat_cfg(3.0, vec![]).validate().is_err());
        assert!(cat_cfg(3.0, vec![1.5]).validate().is_err());
        assert!(cat_cfg(-1.0, vec![0.5]).validate().is_err());
        assert!(cat_cfg(3.0, vec![0.0, 0.5]).validate().is_ok());
    }

    #[test]
    fn config_json_defaults() {
        let c = SweepConfig::from_json(r#"{"family":"qiopa","gains":[0.8],"grid":[0.1]}"#).unwrap();
        assert_eq!(c.truncation, TruncationPolicy::default());
        assert_eq!(c.grid_variable, GridVariable::R);
        assert!(SweepConfig::from_json(r#"{"grid":[0.1],"bogus":1}"#).is_err());
    }

    #[test]
    fn universal_curve_endpoints() {
        let rows = run_universal_curve(&cat_cfg(3.0, vec![0.0, 1.0 / 9.0])).unwrap();
        assert_eq!(rows[0].d_numeric, 1.0);
        assert!((rows[1].d_numeric - 0.096).abs() < 1e-3);
    }

    #[test]
    fn x_grid_maps_to_reflectivity() {
        let mut c = cat_cfg(3.0, vec![1.0, 2.0]);
        c.grid_variable = GridVariable::X;
        let rows = run_universal_curve(&c).unwrap();
        assert!((rows[0].r - 1.0 / 9.0).abs() < 1e-15);
        c.grid = vec![10.0];
        assert!(run_universal_curve(&c).is_err());
    }

    #[test]
    fn slope_report_on_a_parabola() {
        let pts: Vec<(f64, f64)> = (0..=20).map(|i| i as f64 / 10.0).map(|x| (x, x * x)).collect();
        let r = slope_diagnostics(&pts).unwrap();
        assert!((r.end_slope - 3.8).abs() < 1e-12);
        assert!((r.mid_slope - 2.0).abs() < 1e-12);
        assert!(r.inflections.is_empty());
        assert!(slope_diagnostics(&pts[..4]).is_err());
    }

    #[test]
    fn slope_report_finds_cubic_inflection() {
        let pts: Vec<(f64, f64)> = (0..=21).map(|i| i as f64 / 10.0 - 1.05).map(|x| (x, x * x * x)).collect();
        let r = slope_diagnostics(&pts).unwrap();
        assert_eq!(r.inflections.len(), 1);
        assert!(r.inflections[0].x.abs() < 1e-9);
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0, 1e-7, 0.095_9, 123456.789, 5e-324] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn gain_budget_refusal() {
        let p = TruncationPolicy::new(1e-12, 30).unwrap();
        assert!(check_gain_budget(GainSetting::new(1.5).unwrap(), &p).is_err());
        assert!(check_gain_budget(GainSetting::new(0.5).unwrap(), &p).is_ok());
    }
}
