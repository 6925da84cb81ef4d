use serde::{Deserialize, Serialize};

use super::chain::StationarySample;
use super::kde::quantile_sorted;
use crate::model::final_size_curve;

/// Violations smaller than this are attributed to the final-size root solver.
pub const SUPPORT_TOLERANCE: f64 = 1e-9;

/// Position of outbreak seasons relative to the curve `R_e = -ln(1 - z)/z`.
///
/// Distances are horizontal, `R_e - (-ln(1 - z)/z)`, so a sample on the curve has
/// distance zero and every outbreak should have a positive distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub checked: usize,
    pub skipped_zero: usize,
    pub violations: usize,
    pub max_violation: f64,
    pub median_distance: f64,
    pub mean_distance: f64,
    pub quartiles: (f64, f64),
}

pub fn curve_distance(r_e: f64, z: f64) -> f64 {
    r_e - final_size_curve(z)
}

pub fn scatter_support_check(samples: &[StationarySample]) -> SupportReport {
    let mut distances: Vec<f64> =
        samples.iter().filter(|s| s.z > 0.0).map(|s| curve_distance(s.r_e, s.z)).collect();
    let skipped_zero = samples.len() - distances.len();
    let violations = distances.iter().filter(|&&d| d < -SUPPORT_TOLERANCE).count();
    let max_violation = distances.iter().fold(0.0f64, |m, &d| m.max(-d));
    distances.sort_by(f64::total_cmp);
    let (median, mean, quartiles) = if distances.is_empty() {
        (f64::NAN, f64::NAN, (f64::NAN, f64::NAN))
    } else {
        (
            quantile_sorted(&distances, 0.5),
            distances.iter().sum::<f64>() / distances.len() as f64,
            (quantile_sorted(&distances, 0.25), quantile_sorted(&distances, 0.75)),
        )
    };
    SupportReport {
        checked: distances.len(),
        skipped_zero,
        violations,
        max_violation,
        median_distance: median,
        mean_distance: mean,
        quartiles,
    }
}
