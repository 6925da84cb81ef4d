//! C ABI for the `seasonal-drift` library.
//!
//! Objects are exposed as opaque handles created by `sd_*_new`-style functions and
//! released with the matching `sd_*_free`. Every fallible function returns an
//! [`SdStatus`]; on failure a description is available from
//! [`sd_last_error_message`] on the same thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use seasonal_drift::analytic::{solve_delta_star, MixedDensity1D, R2Model};
use seasonal_drift::simulate::{run_chain, ChainRun};
use seasonal_drift::{step, DriftPair, Error, ImmunityState, ModelConfig, PairDistribution, PresetCase};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    NoConvergence = 4,
    Unsupported = 5,
    BufferTooSmall = 6,
    Io = 7,
    Panic = 8,
}

/// Pair distribution of drift and transmissibility.
pub struct SdDistribution(PairDistribution);
/// Immunity state of the population entering a season.
pub struct SdState(ImmunityState);
/// Exact analysis for immunity memory `r = 2`.
pub struct SdR2Model(R2Model);
/// Stationary law of last season's attack ratio (`r = 2`).
pub struct SdStationary(MixedDensity1D);
/// A simulated chain of seasons.
pub struct SdChain(ChainRun);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(SdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidParameter { .. } | Error::Config(_) => SdStatus::InvalidParameter,
            Error::Domain { .. } | Error::Season { .. } => SdStatus::Domain,
            Error::NoConvergence { .. } => SdStatus::NoConvergence,
            Error::Unsupported { .. } => SdStatus::Unsupported,
            Error::Io(_) | Error::Json(_) => SdStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> SdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SdStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SdStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slot<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn out_buffer<'a>(p: *mut f64, len: usize, needed: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    if len < needed {
        return Err(Failure(SdStatus::BufferTooSmall, format!("{what} holds {len}, needs {needed}")));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message describing the last failure on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------------------
// Distributions

/// Preset distribution number `preset` in 1..=4.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn sd_distribution_preset(preset: u32, out: *mut *mut SdDistribution) -> SdStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let c = match preset {
            1 => PresetCase::Case1,
            2 => PresetCase::Case2,
            3 => PresetCase::Case3,
            4 => PresetCase::Case4,
            _ => return Err(Failure(SdStatus::InvalidParameter, format!("preset {preset} not in 1..=4"))),
        };
        *slot = boxed(SdDistribution(c.distribution()));
        Ok(())
    })
}

/// `delta ~ Beta(a, b)` mixed with an atom at `delta = 1` of weight `delta_atom`;
/// given `delta`, `ln tau ~ Normal(mu0 + mu1 delta, sigma2)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn sd_distribution_new(
    a: f64,
    b: f64,
    mu0: f64,
    mu1: f64,
    sigma2: f64,
    delta_atom: f64,
    out: *mut *mut SdDistribution,
) -> SdStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        let d = PairDistribution::new(a, b, mu0, mu1, sigma2)?.with_delta_atom(delta_atom)?;
        *slot = boxed(SdDistribution(d));
        Ok(())
    })
}

/// # Safety
/// `dist` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sd_distribution_free(dist: *mut SdDistribution) {
    free(dist)
}

/// Joint density of the continuous part at `(delta, tau)`.
///
/// # Safety
/// `dist` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_distribution_density(
    dist: *const SdDistribution,
    delta: f64,
    tau: f64,
    out: *mut f64,
) -> SdStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        *out_slot(out, "out")? = d.0.density(delta, tau);
        Ok(())
    })
}

/// Writes `n` seeded draws into `deltas` and `taus`, each of length at least `n`.
///
/// # Safety
/// `dist` must be a live handle; `deltas` and `taus` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn sd_distribution_sample(
    dist: *const SdDistribution,
    seed: u64,
    n: usize,
    deltas: *mut f64,
    taus: *mut f64,
) -> SdStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        let ds = out_buffer(deltas, n, n, "deltas")?;
        let ts = out_buffer(taus, n, n, "taus")?;
        let mut rng = seasonal_drift::simulate::season_rng(seed, 0, 0);
        for (i, pair) in seasonal_drift::simulate::draw_pairs(&d.0, &mut rng, n).into_iter().enumerate() {
            ds[i] = pair.delta;
            ts[i] = pair.tau;
        }
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Immunity states and seasons

/// Immunity-free state with memory `r >= 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_state_naive(r: usize, out: *mut *mut SdState) -> SdStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        *slot = boxed(SdState(ImmunityState::naive(ModelConfig::new(r)?)));
        Ok(())
    })
}

/// State from group shares `p[0..r]` and immunity levels `iota[0..r]`.
///
/// # Safety
/// `p` and `iota` must point to `r` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_state_new(r: usize, p: *const f64, iota: *const f64, out: *mut *mut SdState) -> SdStatus {
    guard(|| {
        let slot = out_slot(out, "out")?;
        if p.is_null() || iota.is_null() {
            return Err(null("p or iota"));
        }
        let p = std::slice::from_raw_parts(p, r).to_vec();
        let iota = std::slice::from_raw_parts(iota, r).to_vec();
        *slot = boxed(SdState(ImmunityState::new(p, iota)?));
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_state_free(state: *mut SdState) {
    free(state)
}

/// Memory `r` of a state, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_state_r(state: *const SdState) -> usize {
    state.as_ref().map_or(0, |s| s.0.r())
}

/// Copies the group shares into `buf` (length `len >= r`).
///
/// # Safety
/// `state` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sd_state_shares(state: *const SdState, buf: *mut f64, len: usize) -> SdStatus {
    guard(|| {
        let s = handle(state, "state")?;
        out_buffer(buf, len, s.0.r(), "buf")?.copy_from_slice(s.0.p());
        Ok(())
    })
}

/// Resolves one season with drift `delta` and transmissibility `tau`. Writes the
/// next state, the effective reproduction number and the overall attack ratio.
///
/// # Safety
/// `state` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_step(
    state: *const SdState,
    delta: f64,
    tau: f64,
    next: *mut *mut SdState,
    r_e: *mut f64,
    z: *mut f64,
) -> SdStatus {
    guard(|| {
        let s = handle(state, "state")?;
        let (next, r_e, z) = (out_slot(next, "next")?, out_slot(r_e, "r_e")?, out_slot(z, "z")?);
        let (state, outcome) = step(&s.0, DriftPair::new(delta, tau)?)?;
        *r_e = outcome.r_e;
        *z = outcome.z_overall;
        *next = boxed(SdState(state));
        Ok(())
    })
}

/// Drift and transmissibility producing `(z, r_e)` from prior attack ratio `p`.
///
/// # Safety
/// Output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sd_solve_delta_star(p: f64, z: f64, r_e: f64, delta: *mut f64, tau: *mut f64) -> SdStatus {
    guard(|| {
        let (d, t) = (out_slot(delta, "delta")?, out_slot(tau, "tau")?);
        let point = solve_delta_star(p, z, r_e)?;
        *d = point.delta;
        *t = point.tau;
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Exact r = 2 analysis

/// # Safety
/// `dist` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_r2_model_new(dist: *const SdDistribution, out: *mut *mut SdR2Model) -> SdStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        let slot = out_slot(out, "out")?;
        *slot = boxed(SdR2Model(R2Model::new(d.0)?));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_r2_model_free(model: *mut SdR2Model) {
    free(model)
}

unsafe fn model_eval<F>(model: *const SdR2Model, out: *mut f64, f: F) -> SdStatus
where
    F: FnOnce(&R2Model) -> seasonal_drift::Result<f64>,
{
    guard(|| {
        let m = handle(model, "model")?;
        let slot = out_slot(out, "out")?;
        *slot = f(&m.0)?;
        Ok(())
    })
}

/// Probability of no outbreak given last season's attack ratio `p`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_prob_no_outbreak(model: *const SdR2Model, p: f64, out: *mut f64) -> SdStatus {
    model_eval(model, out, |m| m.prob_no_outbreak(p))
}

/// Density of this season's attack ratio `p_next` given last season's `p`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_transition_density(model: *const SdR2Model, p: f64, p_next: f64, out: *mut f64) -> SdStatus {
    model_eval(model, out, |m| m.transition_density(p, p_next))
}

/// `P(z <= c)` given last season's attack ratio `p`, the no-outbreak atom included.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_transition_cdf(model: *const SdR2Model, p: f64, c: f64, out: *mut f64) -> SdStatus {
    model_eval(model, out, |m| m.transition_cdf(p, c))
}

/// Joint density of `(z, r_e)` given prior `p`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_biv_density(model: *const SdR2Model, p: f64, z: f64, r_e: f64, out: *mut f64) -> SdStatus {
    model_eval(model, out, |m| m.biv_density(p, z, r_e))
}

/// Density of `z` given `r_e > 1` and prior `p > 0`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_conditional_density_z(
    model: *const SdR2Model,
    p: f64,
    r_e: f64,
    z: f64,
    out: *mut f64,
) -> SdStatus {
    model_eval(model, out, |m| m.conditional_density_z(p, r_e, z))
}

/// Solves for the stationary law on `grid_n` cells.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_stationary_solve(
    model: *const SdR2Model,
    grid_n: usize,
    out: *mut *mut SdStationary,
) -> SdStatus {
    guard(|| {
        let m = handle(model, "model")?;
        let slot = out_slot(out, "out")?;
        *slot = boxed(SdStationary(m.0.stationary_solve(grid_n)?.law));
        Ok(())
    })
}

/// # Safety
/// `law` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_stationary_free(law: *mut SdStationary) {
    free(law)
}

/// Stationary probability of a season without outbreak, or NaN for a null handle.
///
/// # Safety
/// `law` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_stationary_atom(law: *const SdStationary) -> f64 {
    law.as_ref().map_or(f64::NAN, |l| l.0.atom)
}

/// Continuous stationary density at `x`.
///
/// # Safety
/// `law` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_stationary_density_at(law: *const SdStationary, x: f64) -> f64 {
    law.as_ref().map_or(f64::NAN, |l| l.0.density_at(x))
}

// ---------------------------------------------------------------------------
// Simulation

/// Simulates `n_seasons` seasons with memory `r` from the immunity-free state.
///
/// # Safety
/// `dist` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_run_chain(
    dist: *const SdDistribution,
    r: usize,
    seed: u64,
    n_seasons: usize,
    burn_in: usize,
    out: *mut *mut SdChain,
) -> SdStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        let slot = out_slot(out, "out")?;
        *slot = boxed(SdChain(run_chain(ModelConfig::new(r)?, d.0, seed, n_seasons, burn_in)?));
        Ok(())
    })
}

/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_chain_free(chain: *mut SdChain) {
    free(chain)
}

/// Number of seasons in a chain, or 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sd_chain_len(chain: *const SdChain) -> usize {
    chain.as_ref().map_or(0, |c| c.0.len())
}

/// Copies per-season effective reproduction numbers and attack ratios (burn-in
/// included) into buffers of length `len >= sd_chain_len(chain)`.
///
/// # Safety
/// `chain` must be a live handle; `r_e` and `z` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sd_chain_outcomes(chain: *const SdChain, r_e: *mut f64, z: *mut f64, len: usize) -> SdStatus {
    guard(|| {
        let c = handle(chain, "chain")?;
        let n = c.0.len();
        let rs = out_buffer(r_e, len, n, "r_e")?;
        let zs = out_buffer(z, len, n, "z")?;
        for (i, s) in c.0.seasons.iter().enumerate() {
            rs[i] = s.outcome.r_e;
            zs[i] = s.outcome.z_overall;
        }
        Ok(())
    })
}
