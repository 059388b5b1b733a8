//! Fixtures shared by the criterion benchmarks.

use std::f64::consts::FRAC_PI_2;

use mqs_core::generators::{cat_state, qiopa_phi_factors};
use mqs_core::loss::apply_loss_single_mode;
use mqs_core::{CatParams, GainSetting, LossSetting, Sign, SingleModeDensity, TruncationPolicy};

/// Even and odd cat densities at amplitude `alpha`, padded to one truncation.
pub fn cat_pair(alpha: f64) -> (SingleModeDensity, SingleModeDensity) {
    let p = TruncationPolicy::default();
    let a = cat_state(&CatParams::new(alpha, FRAC_PI_2, Sign::Plus).unwrap(), &p).unwrap();
    let b = cat_state(&CatParams::new(alpha, FRAC_PI_2, Sign::Minus).unwrap(), &p).unwrap();
    let n = a.n_max().max(b.n_max());
    (a.embed(n).to_density(), b.embed(n).to_density())
}

/// Lossy single-mode factors (Φ⁺ first, Φ⁻ first, Φ⁺ second, Φ⁻ second).
pub fn lossy_qiopa_factors(g: f64, reflectivity: f64) -> [SingleModeDensity; 4] {
    let p = TruncationPolicy::default();
    let [(a, b), (c, d)] = qiopa_phi_factors(GainSetting::new(g).unwrap(), &p).unwrap();
    let n = [&a, &b, &c, &d].iter().map(|s| s.n_max()).max().unwrap();
    let loss = LossSetting::from_reflectivity(reflectivity).unwrap();
    [a, c, b, d].map(|s| apply_loss_single_mode(&s.embed(n).to_density(), loss))
}
