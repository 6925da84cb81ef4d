//! Season-to-season dynamics for an arbitrary immunity memory `r >= 2`.
//!
//! The chain state is the community distribution over seasons since last infection
//! together with the immunity level of each group. A season is resolved only by its
//! final size: given the state and the season's `(delta, tau)` draw, the effective
//! reproduction number and the per-group attack ratios are deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::bisect_decreasing;

/// Tolerance on `sum(p) == 1` accepted when constructing a state.
pub const STATE_SUM_TOLERANCE: f64 = 1e-12;
/// Largest drift of `sum(p)` after a step that is silently corrected.
pub const RENORMALIZE_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    r: usize,
}

impl ModelConfig {
    pub fn new(r: usize) -> Result<Self> {
        if r < 2 {
            return Err(Error::invalid("ModelConfig::new", format!("r must be >= 2, got {r}")));
        }
        Ok(ModelConfig { r })
    }

    /// Seasons until immunity is fully lost.
    pub fn r(&self) -> usize {
        self.r
    }
}

/// One season's immunity drift and transmissibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftPair {
    pub delta: f64,
    pub tau: f64,
}

impl DriftPair {
    pub fn new(delta: f64, tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::invalid("DriftPair::new", format!("delta {delta} not in [0, 1]")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid("DriftPair::new", format!("tau {tau} must be positive")));
        }
        Ok(DriftPair { delta, tau })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmunityState {
    p: Vec<f64>,
    iota: Vec<f64>,
}

impl ImmunityState {
    /// Builds a validated state. `p[j-1]` is the share last infected `j` seasons ago,
    /// the final entry pooling everyone without immunity; `iota` holds the matching
    /// immunity levels.
    pub fn new(p: Vec<f64>, iota: Vec<f64>) -> Result<Self> {
        const OP: &str = "ImmunityState::new";
        let r = p.len();
        if r < 2 || iota.len() != r {
            return Err(Error::invalid(
                OP,
                format!("p and iota must have equal length >= 2 (got {} and {})", r, iota.len()),
            ));
        }
        if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::invalid(OP, "p entries must be finite and nonnegative"));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > STATE_SUM_TOLERANCE {
            return Err(Error::invalid(OP, format!("p sums to {sum}, expected 1")));
        }
        if iota[0] != 1.0 || iota[r - 1] != 0.0 {
            return Err(Error::invalid(OP, "iota must start at 1 and end at 0"));
        }
        if iota.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::invalid(OP, "iota entries must lie in [0, 1]"));
        }
        if iota.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid(OP, "iota must be non-increasing"));
        }
        Ok(ImmunityState { p, iota })
    }

    /// Immunity-free state: everyone in the pooled last group.
    pub fn naive(config: ModelConfig) -> Self {
        let r = config.r();
        let mut p = vec![0.0; r];
        p[r - 1] = 1.0;
        let mut iota = vec![0.0; r];
        iota[0] = 1.0;
        ImmunityState { p, iota }
    }

    /// The `r = 2` state with share `prior` infected last season.
    pub fn r2(prior: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&prior) {
            return Err(Error::invalid("ImmunityState::r2", format!("p {prior} not in [0, 1]")));
        }
        Ok(ImmunityState { p: vec![prior, 1.0 - prior], iota: vec![1.0, 0.0] })
    }

    pub fn r(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn iota(&self) -> &[f64] {
        &self.iota
    }

    /// Relative susceptibility of each group for drift `delta`: `1 - (1 - delta) iota_j`.
    fn exposures(&self, delta: f64) -> impl Iterator<Item = f64> + '_ {
        self.iota.iter().map(move |&i| 1.0 - (1.0 - delta) * i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonOutcome {
    pub r_e: f64,
    pub z_groups: Vec<f64>,
    pub z_overall: f64,
}

pub fn naive_state(config: ModelConfig) -> ImmunityState {
    ImmunityState::naive(config)
}

/// `R_e = tau * sum_j p_j (1 - (1 - delta) iota_j)`.
pub fn effective_reproduction(state: &ImmunityState, pair: DriftPair) -> f64 {
    let weighted: f64 = state.p.iter().zip(state.exposures(pair.delta)).map(|(p, a)| p * a).sum();
    pair.tau * weighted
}

/// Overall attack ratio: the positive root of `1 - z = sum_j p_j exp(-a_j tau z)`
/// when `R_e > 1`, otherwise zero.
///
/// The root is bracketed through `g(z) = (1 - z - sum_j p_j exp(-a_j tau z)) / z`,
/// which decreases from `R_e - 1` at `z = 0+` to a negative value near 1, so the
/// bracket is valid however close `R_e` is to 1.
pub fn solve_overall_final_size(state: &ImmunityState, pair: DriftPair) -> Result<f64> {
    let r_e = effective_reproduction(state, pair);
    if r_e <= 1.0 {
        return Ok(0.0);
    }
    let rates: Vec<(f64, f64)> =
        state.p.iter().zip(state.exposures(pair.delta)).map(|(&p, a)| (p, a * pair.tau)).collect();
    let g = |z: f64| -> f64 {
        let s: f64 = rates.iter().map(|&(p, k)| p * (-k * z).exp_m1()).sum();
        // 1 - z - sum p_j e^{-k_j z} = -z - sum p_j expm1(-k_j z), because sum p_j = 1.
        (-z - s) / z
    };
    let hi = 1.0 - 1e-15;
    if g(hi) > 0.0 {
        return Ok(hi);
    }
    bisect_decreasing("solve_overall_final_size", g, 0.0, hi)
}

/// Per-group attack ratios `z_j = 1 - exp(-a_j tau z)` for a solved overall ratio.
pub fn group_final_sizes(state: &ImmunityState, pair: DriftPair, z_overall: f64) -> Vec<f64> {
    state.exposures(pair.delta).map(|a| -(-a * pair.tau * z_overall).exp_m1()).collect()
}

/// Resolves one season and advances the chain.
pub fn step(state: &ImmunityState, pair: DriftPair) -> Result<(ImmunityState, SeasonOutcome)> {
    let r = state.r();
    let r_e = effective_reproduction(state, pair);
    let z = solve_overall_final_size(state, pair)?;
    let z_groups = group_final_sizes(state, pair, z);

    let mut p = vec![0.0; r];
    p[0] = z;
    for j in 1..r - 1 {
        p[j] = state.p[j - 1] * (1.0 - z_groups[j - 1]);
    }
    p[r - 1] =
        state.p[r - 1] * (1.0 - z_groups[r - 1]) + state.p[r - 2] * (1.0 - z_groups[r - 2]);

    let drift = p.iter().sum::<f64>() - 1.0;
    if drift.abs() > RENORMALIZE_LIMIT {
        return Err(Error::domain("step", format!("probability mass drifted by {drift:e}")));
    }
    if drift != 0.0 {
        // The pooled group is the complement of the others; absorb rounding there so
        // that p'_1 stays exactly equal to the solved overall attack ratio.
        if p[r - 1] >= drift {
            p[r - 1] -= drift;
        } else {
            let total = 1.0 + drift;
            p.iter_mut().for_each(|x| *x /= total);
        }
    }

    let mut iota = vec![0.0; r];
    iota[0] = 1.0;
    for (next, prev) in iota[1..r - 1].iter_mut().zip(&state.iota) {
        *next = prev * (1.0 - pair.delta);
    }

    let outcome = SeasonOutcome { r_e, z_groups, z_overall: z };
    Ok((ImmunityState { p, iota }, outcome))
}

/// The curve `R_e = -ln(1 - z)/z` that bounds every outbreak from below.
pub fn final_size_curve(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        -(-z).ln_1p() / z
    }
}

/// Attack ratio of a fully susceptible population: root of `1 - z = exp(-R z)`.
pub fn susceptible_final_size(r_e: f64) -> Result<f64> {
    let naive = ImmunityState::r2(0.0)?;
    solve_overall_final_size(&naive, DriftPair { delta: 1.0, tau: r_e })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(delta: f64, tau: f64) -> DriftPair {
        DriftPair::new(delta, tau).unwrap()
    }

    #[test]
    fn config_rejects_r_below_two() {
        assert!(ModelConfig::new(1).is_err());
        assert!(ModelConfig::new(2).is_ok());
    }

    #[test]
    fn naive_states() {
        let s = naive_state(ModelConfig::new(2).unwrap());
        assert_eq!(s.p(), &[0.0, 1.0]);
        assert_eq!(s.iota(), &[1.0, 0.0]);
        let s = naive_state(ModelConfig::new(3).unwrap());
        assert_eq!(s.p(), &[0.0, 0.0, 1.0]);
        assert_eq!(s.iota(), &[1.0, 0.0, 0.0]);
        let s = naive_state(ModelConfig::new(10).unwrap());
        assert_eq!(s.p()[9], 1.0);
        assert_eq!(s.p().iter().sum::<f64>(), 1.0);
        assert_eq!(s.iota()[0], 1.0);
        assert!(s.iota()[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn state_validation() {
        assert!(ImmunityState::new(vec![0.5, 0.4], vec![1.0, 0.0]).is_err());
        assert!(ImmunityState::new(vec![0.5, 0.5], vec![0.9, 0.0]).is_err());
        assert!(ImmunityState::new(vec![0.3, 0.2, 0.5], vec![1.0, 0.0, 0.0]).is_ok());
        assert!(ImmunityState::new(vec![0.3, 0.2, 0.5], vec![1.0, 0.2, 0.3]).is_err());
        assert!(ImmunityState::new(vec![-0.1, 1.1], vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn drift_pair_validation() {
        assert!(DriftPair::new(1.0, 2.0).is_ok());
        assert!(DriftPair::new(1.1, 2.0).is_err());
        assert!(DriftPair::new(0.5, 0.0).is_err());
    }

    #[test]
    fn effective_reproduction_examples() {
        let s = ImmunityState::r2(0.0).unwrap();
        assert_eq!(effective_reproduction(&s, pair(0.3, 2.0)), 2.0);
        let s = ImmunityState::r2(0.5).unwrap();
        assert!((effective_reproduction(&s, pair(0.4, 2.0)) - 1.4).abs() < 1e-15);
        let s = ImmunityState::new(vec![0.3, 0.2, 0.5], vec![1.0, 0.6, 0.0]).unwrap();
        assert!((effective_reproduction(&s, pair(0.5, 2.0)) - 1.58).abs() < 1e-14);
    }

    #[test]
    fn no_outbreak_below_threshold() {
        let s = ImmunityState::r2(0.0).unwrap();
        assert_eq!(solve_overall_final_size(&s, pair(0.2, 0.9)).unwrap(), 0.0);
        assert_eq!(solve_overall_final_size(&s, pair(0.2, 1.0)).unwrap(), 0.0);
        assert_eq!(group_final_sizes(&s, pair(0.2, 0.9), 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn outbreak_just_above_threshold_is_tiny_but_positive() {
        let s = ImmunityState::r2(0.0).unwrap();
        let z = solve_overall_final_size(&s, pair(0.2, 1.0 + 1e-12)).unwrap();
        assert!(z > 0.0 && z < 1e-10, "{z}");
    }

    #[test]
    fn group_sizes_equal_under_full_drift() {
        let s = ImmunityState::r2(0.4).unwrap();
        let pr = pair(1.0, 2.5);
        let z = solve_overall_final_size(&s, pr).unwrap();
        let zg = group_final_sizes(&s, pr, z);
        assert_eq!(zg[0], zg[1]);
    }

    #[test]
    fn full_drift_resets_immunity() {
        let s = ImmunityState::new(vec![0.2, 0.1, 0.1, 0.6], vec![1.0, 0.7, 0.3, 0.0]).unwrap();
        let (next, _) = step(&s, pair(1.0, 1.8)).unwrap();
        assert_eq!(next.iota(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn step_without_outbreak_shifts_mass() {
        let s = ImmunityState::new(vec![0.2, 0.1, 0.1, 0.6], vec![1.0, 0.7, 0.3, 0.0]).unwrap();
        let (next, out) = step(&s, pair(0.5, 0.5)).unwrap();
        assert_eq!(out.z_overall, 0.0);
        assert_eq!(next.p(), &[0.0, 0.2, 0.1, 0.7]);
        assert_eq!(next.iota(), &[1.0, 0.5, 0.35, 0.0]);
    }

    #[test]
    fn curve_inverts_susceptible_final_size() {
        for r in [1.1, 1.6, 2.0, 4.0] {
            let z = susceptible_final_size(r).unwrap();
            assert!((final_size_curve(z) - r).abs() < 1e-12);
        }
    }
}
