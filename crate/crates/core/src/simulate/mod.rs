//! Monte Carlo engine for any immunity memory `r`: seeded chains, stationary
//! samples, conditional windows, kernel density estimates and support checks.

mod chain;
mod kde;
mod support;

pub use chain::{
    conditional_window, draw_pairs, run_chain, run_chain_with_id, run_chains, sample_given_prior,
    season_rng, stationary_samples, ChainRun, SeasonRecord, StationarySample, DEFAULT_BURN_IN,
    DEFAULT_WINDOW,
};
pub use kde::{kde, quantile_sorted, silverman_bandwidth, Bandwidth, KdeEstimate, MIN_POSITIVE_SAMPLES};
pub use support::{curve_distance, scatter_support_check, SupportReport, SUPPORT_TOLERANCE};
