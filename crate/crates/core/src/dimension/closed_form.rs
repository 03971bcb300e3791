//! Explicit dimension formulas for m = 3, the golden ratio and β = 2.

use super::{DimResult, Method};
use crate::error::{check_range, Error, Result};
use crate::expansion::BetaSystem;
use crate::markov::phi0;

/// Below this, a negative discriminant is treated as rounding noise.
const DISCRIMINANT_SLACK: f64 = 1e-14;

/// The three mass parameters `(c1, c2, c3)` of the m = 3 maximizer, with
/// `s = √(−8a² + 12a − 3)`.
pub fn m3_coefficients(a: f64) -> Result<[f64; 3]> {
    check_range("a", a, 1.0 / 3.0 - 1e-15, 1.0, "[1/3, 1]")?;
    let disc = -8.0 * a * a + 12.0 * a - 3.0;
    let s = if disc < 0.0 && disc > -DISCRIMINANT_SLACK {
        0.0
    } else {
        disc.sqrt()
    };
    Ok([
        (10.0 * a - 3.0 - s) / 6.0,
        (-2.0 * a + 3.0 - s) / 6.0,
        (-a + s) / 3.0,
    ])
}

/// `(a log a + φ(c1) + φ(c2) + φ(c3)) / log β` for the Tribonacci β.
pub fn closed_form_m3(sys: &BetaSystem, a: f64) -> Result<f64> {
    if sys.pseudo_golden_order() != Some(3) {
        return Err(Error::Unsupported(format!("closed form needs m = 3, got {sys}")));
    }
    let c = m3_coefficients(a)?;
    let h = -phi0(a) + c.iter().map(|&v| phi0(v)).sum::<f64>();
    Ok((h / sys.log_beta()).clamp(0.0, 1.0))
}

/// `(a log a + φ(2a − 1) + φ(1 − a)) / log((1+√5)/2)`; empty for `a < 1/2`.
pub fn golden_dim(a: f64) -> Result<DimResult> {
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    if a < 0.5 {
        return Ok(DimResult::empty(Method::Golden));
    }
    let h = -phi0(a) + phi0(2.0 * a - 1.0) + phi0(1.0 - a);
    Ok(DimResult::closed(
        (h / BetaSystem::golden().log_beta()).clamp(0.0, 1.0),
        Method::Golden,
    ))
}

/// Binary entropy of `a` in bits.
pub fn eggleston_dim(a: f64) -> Result<f64> {
    check_range("a", a, 0.0, 1.0, "[0, 1]")?;
    Ok(((phi0(a) + phi0(1.0 - a)) / std::f64::consts::LN_2).clamp(0.0, 1.0))
}
