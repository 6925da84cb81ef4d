use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POSITIVE_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// `0.9 min(sd, IQR/1.34) n^(-1/5)` on the positive samples.
    Silverman,
    Fixed(f64),
}

/// Gaussian kernel density of the positive samples on a uniform grid of `(0, 1)`,
/// scaled by `1 - defective_mass` so that it integrates with the atom to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeEstimate {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
    /// Fraction of samples at exactly zero.
    pub defective_mass: f64,
    pub n: usize,
}

impl KdeEstimate {
    pub fn grid_step(&self) -> f64 {
        1.0 / self.grid.len() as f64
    }

    /// Midpoint-rule integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid_step()
    }

    pub fn total_mass(&self) -> f64 {
        self.integral() + self.defective_mass
    }
}

/// Silverman bandwidth; zero spread falls back to the standard deviation, then to
/// the magnitude of the data, then to one.
pub fn silverman_bandwidth(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let magnitude = sorted[0].abs().max(sorted[sorted.len() - 1].abs());
    let rounding = 64.0 * f64::EPSILON * magnitude;
    let mut lo = sd.min(iqr / 1.34);
    if !(lo > rounding) {
        lo = if sd > rounding {
            sd
        } else if sorted[0] != 0.0 {
            sorted[0].abs()
        } else {
            1.0
        };
    }
    0.9 * lo * n.powf(-0.2)
}

/// Linear-interpolation sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let t = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + t * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}

pub fn kde(samples: &[f64], bandwidth: Bandwidth, grid_n: usize) -> Result<KdeEstimate> {
    const OP: &str = "kde";
    if grid_n == 0 {
        return Err(Error::invalid(OP, "grid must have at least one point"));
    }
    let positive: Vec<f64> = samples.iter().copied().filter(|&z| z > 0.0).collect();
    if positive.len() < MIN_POSITIVE_SAMPLES {
        return Err(Error::invalid(
            OP,
            format!("{} positive samples, at least {MIN_POSITIVE_SAMPLES} required", positive.len()),
        ));
    }
    let h = match bandwidth {
        Bandwidth::Silverman => silverman_bandwidth(&positive),
        Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        Bandwidth::Fixed(h) => return Err(Error::invalid(OP, format!("bandwidth {h} must be positive"))),
    };
    let defective_mass = 1.0 - positive.len() as f64 / samples.len() as f64;
    let scale = (1.0 - defective_mass) / (positive.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let grid: Vec<f64> = (0..grid_n).map(|i| (i as f64 + 0.5) / grid_n as f64).collect();
    let values = grid
        .par_iter()
        .map(|&x| scale * positive.iter().map(|&s| (-0.5 * ((x - s) / h).powi(2)).exp()).sum::<f64>())
        .collect();
    Ok(KdeEstimate { grid, values, bandwidth: h, defective_mass, n: samples.len() })
}
