#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Multi-season epidemic model with random immunity drift and transmissibility.
//!
//! Each season draws a drift `delta` (the share of existing immunity lost to viral
//! evolution) and a transmissibility `tau`. The community immunity status forms a
//! Markov chain; this crate resolves seasons for any immunity memory `r`, computes the
//! exact transition kernel, bivariate and conditional laws and the stationary law for
//! `r = 2`, and provides a Monte Carlo engine that serves both as the general-`r` path
//! and as an oracle for the `r = 2` analysis.

pub mod analytic;
pub mod cli;
pub mod distribution;
pub mod error;
pub mod export;
pub mod model;
pub mod numeric;
pub mod simulate;

pub use distribution::{PairDistribution, PairMoments, PresetCase};
pub use error::{Error, Result};
pub use model::{
    effective_reproduction, group_final_sizes, naive_state, solve_overall_final_size, step,
    DriftPair, ImmunityState, ModelConfig, SeasonOutcome,
};
