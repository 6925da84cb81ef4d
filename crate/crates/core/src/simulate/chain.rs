use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::PairDistribution;
use crate::error::{Error, Result};
use crate::model::{step, DriftPair, ImmunityState, ModelConfig, SeasonOutcome};

pub const DEFAULT_BURN_IN: usize = 500;
pub const DEFAULT_WINDOW: f64 = 0.02;

/// Number of generator words reserved for each season; season `k` of a chain
/// starts at word `k << 32` of its ChaCha8 stream.
const SEASON_WORD_SHIFT: u32 = 32;

/// Generator for one season: ChaCha8 keyed by `seed`, stream `chain_id`, positioned
/// at the season's block. Any (seed, chain, season) triple can be reproduced
/// independently of how chains are scheduled.
pub fn season_rng(seed: u64, chain_id: u64, season: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain_id);
    rng.set_word_pos(u128::from(season) << SEASON_WORD_SHIFT);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonRecord {
    pub pair: DriftPair,
    pub outcome: SeasonOutcome,
    /// Immunity state after the season.
    pub state: ImmunityState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRun {
    pub config: ModelConfig,
    pub dist: PairDistribution,
    pub seed: u64,
    pub chain_id: u64,
    pub burn_in: usize,
    pub seasons: Vec<SeasonRecord>,
}

impl ChainRun {
    /// State entering season `k`.
    pub fn prior_state(&self, k: usize) -> ImmunityState {
        if k == 0 {
            ImmunityState::naive(self.config)
        } else {
            self.seasons[k - 1].state.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.seasons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seasons.is_empty()
    }
}

pub fn run_chain(
    config: ModelConfig,
    dist: PairDistribution,
    seed: u64,
    n_seasons: usize,
    burn_in: usize,
) -> Result<ChainRun> {
    run_chain_with_id(config, dist, seed, 0, n_seasons, burn_in)
}

/// Iterates the season map from the immunity-free state, one drawn pair per season.
pub fn run_chain_with_id(
    config: ModelConfig,
    dist: PairDistribution,
    seed: u64,
    chain_id: u64,
    n_seasons: usize,
    burn_in: usize,
) -> Result<ChainRun> {
    if n_seasons <= burn_in {
        return Err(Error::invalid(
            "run_chain",
            format!("n_seasons {n_seasons} must exceed burn_in {burn_in}"),
        ));
    }
    let mut state = ImmunityState::naive(config);
    let mut seasons = Vec::with_capacity(n_seasons);
    for k in 0..n_seasons {
        let mut rng = season_rng(seed, chain_id, k as u64);
        let pair = dist.sample(&mut rng);
        let (next, outcome) =
            step(&state, pair).map_err(|e| Error::Season { season: k, source: Box::new(e) })?;
        debug_assert!(ImmunityState::new(next.p().to_vec(), next.iota().to_vec()).is_ok());
        seasons.push(SeasonRecord { pair, outcome, state: next.clone() });
        state = next;
    }
    Ok(ChainRun { config, dist, seed, chain_id, burn_in, seasons })
}

/// Independent chains on streams `0..n_chains`, run in parallel, returned in order.
pub fn run_chains(
    config: ModelConfig,
    dist: PairDistribution,
    seed: u64,
    n_chains: usize,
    n_seasons: usize,
    burn_in: usize,
) -> Result<Vec<ChainRun>> {
    (0..n_chains as u64)
        .into_par_iter()
        .map(|id| run_chain_with_id(config, dist, seed, id, n_seasons, burn_in))
        .collect()
}

/// One post-burn-in observation: the season's `R_e`, its attack ratio and the
/// immunity distribution `p` it started from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarySample {
    pub r_e: f64,
    pub z: f64,
    pub prior: Vec<f64>,
}

pub fn stationary_samples(run: &ChainRun) -> Vec<StationarySample> {
    (run.burn_in..run.len())
        .map(|k| StationarySample {
            r_e: run.seasons[k].outcome.r_e,
            z: run.seasons[k].outcome.z_overall,
            prior: run.prior_state(k).p().to_vec(),
        })
        .collect()
}

/// Samples whose `R_e` lies within `window` of `target`.
pub fn conditional_window(
    samples: &[StationarySample],
    target: f64,
    window: f64,
) -> Result<Vec<StationarySample>> {
    if !(window > 0.0) {
        return Err(Error::invalid("conditional_window", format!("window {window} must be positive")));
    }
    Ok(samples.iter().filter(|s| (s.r_e - target).abs() <= window).cloned().collect())
}

/// Single-season draws `(R_e, z)` from a two-group state with last season's attack
/// ratio `p`: the Monte Carlo counterpart of the transition and bivariate laws.
pub fn sample_given_prior(dist: &PairDistribution, p: f64, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let state = ImmunityState::r2(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let pair = dist.sample(&mut rng);
            let (_, out) = step(&state, pair)?;
            Ok((out.r_e, out.z_overall))
        })
        .collect()
}

/// Draws `n` pairs from one seeded stream.
pub fn draw_pairs<R: Rng + ?Sized>(dist: &PairDistribution, rng: &mut R, n: usize) -> Vec<DriftPair> {
    (0..n).map(|_| dist.sample(rng)).collect()
}
