//! Inversion of the `r = 2` season map `(delta, tau) -> (z, R_e)` for a known prior
//! attack ratio `p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{final_size_curve, DriftPair};
use crate::numeric::bisect_decreasing;

/// `R_e = tau (p delta + 1 - p)`.
pub fn re_r2(p: f64, pair: DriftPair) -> f64 {
    pair.tau * (p * pair.delta + 1.0 - p)
}

/// `G(delta, z, R_e) = p e^{-delta R_e z / D} + (1 - p) e^{-R_e z / D} + z - 1`
/// with `D = p delta + 1 - p`. Its root in `delta` inverts the season map.
pub fn g_function(delta: f64, z: f64, r_e: f64, p: f64) -> f64 {
    let d = p * delta + 1.0 - p;
    let k = r_e * z / d;
    // Written with expm1: the terms nearly cancel for small z.
    z + p * (-delta * k).exp_m1() + (1.0 - p) * (-k).exp_m1()
}

/// Closed-form partial derivatives `(dG/d delta, dG/d R_e, dG/dz)`.
pub fn g_partials(delta: f64, z: f64, r_e: f64, p: f64) -> (f64, f64, f64) {
    let d = p * delta + 1.0 - p;
    let e1 = (-delta * r_e * z / d).exp();
    let e2 = (-r_e * z / d).exp();
    let s = p * delta * e1 + (1.0 - p) * e2;
    let dg_ddelta = -p * (1.0 - p) * r_e * z / (d * d) * (e1 - e2);
    let dg_dre = -z / d * s;
    let dg_dz = 1.0 - r_e / d * s;
    (dg_ddelta, dg_dre, dg_dz)
}

/// Upper edge of the reachable region for `z < 1 - p`:
/// `R_e < -((1 - p)/z) ln(1 - z/(1 - p))`.
pub fn region_upper_re(p: f64, z: f64) -> Option<f64> {
    if z < 1.0 - p {
        let w = z / (1.0 - p);
        Some(final_size_curve(w))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionViolation {
    PriorOutOfRange,
    AttackRatioOutOfRange,
    /// `R_e <= -ln(1 - z)/z`
    BelowFinalSizeCurve,
    /// `z < 1 - p` and `R_e >= -((1 - p)/z) ln(1 - z/(1 - p))`
    AboveImmunityCurve,
}

impl RegionViolation {
    pub fn describe(self) -> &'static str {
        match self {
            RegionViolation::PriorOutOfRange => "prior attack ratio p must lie in (0, 1)",
            RegionViolation::AttackRatioOutOfRange => "attack ratio z must lie in (0, 1)",
            RegionViolation::BelowFinalSizeCurve => "R_e does not exceed -ln(1 - z)/z",
            RegionViolation::AboveImmunityCurve => {
                "z < 1 - p and R_e is not below -((1 - p)/z) ln(1 - z/(1 - p))"
            }
        }
    }
}

/// Checks membership of `(z, R_e)` in the image of the season map with `R_e > 1`.
pub fn region_check(p: f64, z: f64, r_e: f64) -> std::result::Result<(), RegionViolation> {
    if !(p > 0.0 && p < 1.0) {
        return Err(RegionViolation::PriorOutOfRange);
    }
    if !(z > 0.0 && z < 1.0) {
        return Err(RegionViolation::AttackRatioOutOfRange);
    }
    if !(r_e > final_size_curve(z)) {
        return Err(RegionViolation::BelowFinalSizeCurve);
    }
    match region_upper_re(p, z) {
        Some(upper) if !(r_e < upper) => Err(RegionViolation::AboveImmunityCurve),
        _ => Ok(()),
    }
}

pub fn in_region_a(p: f64, z: f64, r_e: f64) -> bool {
    region_check(p, z, r_e).is_ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversePoint {
    pub delta: f64,
    pub tau: f64,
}

/// Recovers the `(delta, tau)` pair that produced `(z, R_e)` from prior `p`.
///
/// `G` is strictly decreasing in `delta`, so the root is found by bisection on
/// `[0, 1]` to full precision.
pub fn solve_delta_star(p: f64, z: f64, r_e: f64) -> Result<InversePoint> {
    region_check(p, z, r_e).map_err(|v| Error::domain("solve_delta_star", v.describe()))?;
    let g = |d: f64| g_function(d, z, r_e, p);
    let delta = if g(0.0) <= 0.0 {
        0.0
    } else if g(1.0) >= 0.0 {
        1.0
    } else {
        bisect_decreasing("solve_delta_star", g, 0.0, 1.0)?
    };
    Ok(InversePoint { delta, tau: r_e / (p * delta + 1.0 - p) })
}
