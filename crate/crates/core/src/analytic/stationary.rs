//! Stationary law of the `r = 2` chain and the stationary forecast given `R_e`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::R2Model;
use super::mixed::MixedDensity1D;
use crate::error::{Error, Result};
use crate::model::{final_size_curve, susceptible_final_size};

/// Upper end of the grid when `tau` is unbounded.
pub const UNBOUNDED_SUPPORT_UPPER: f64 = 1.0 - 1e-9;
pub const DEFAULT_GRID: usize = 512;

/// How the kernel matrix is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelRoute {
    /// Exact cell probabilities from differences of the transition cdf.
    CellProbability,
    /// Transition density at cell centers times cell width (Nystrom).
    DensityNystrom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryOptions {
    pub grid_n: usize,
    pub tol: f64,
    pub max_sweeps: usize,
    pub route: KernelRoute,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions {
            grid_n: DEFAULT_GRID,
            tol: 1e-8,
            max_sweeps: 10_000,
            route: KernelRoute::CellProbability,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryLaw {
    /// Atom at zero plus the density of the last season's attack ratio.
    pub law: MixedDensity1D,
    pub sweeps: usize,
    pub last_change: f64,
}

/// Discretised transition kernel: row 0 is the atom at zero, rows `1..=n` the cell
/// centers; column 0 is "no outbreak", columns `1..=n` the grid cells.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub n: usize,
    pub upper: f64,
    rows: Vec<Vec<f64>>,
}

impl KernelMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }
}

/// Stationary forecast of `z` given only `R_e`: an atom at `z(R_e)` (seasons following
/// a season without outbreak) and a continuous part on `(0, z(R_e))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryConditional {
    pub r_e: f64,
    pub law: MixedDensity1D,
    /// Stationary density of `R_e`, used as the normaliser.
    pub re_density: f64,
}

impl R2Model {
    /// Upper end `z_bar` of the stationary support.
    pub fn support_upper(&self) -> f64 {
        // The log-normal family has unbounded tau.
        UNBOUNDED_SUPPORT_UPPER
    }

    pub fn kernel_matrix(&self, grid_n: usize, route: KernelRoute) -> Result<KernelMatrix> {
        let upper = self.support_upper();
        let h = upper / grid_n as f64;
        let priors: Vec<f64> =
            std::iter::once(0.0).chain((0..grid_n).map(|i| (i as f64 + 0.5) * h)).collect();
        let rows = priors
            .par_iter()
            .map(|&p| match route {
                KernelRoute::CellProbability => self.cell_probability_row(p, grid_n, h),
                KernelRoute::DensityNystrom => self.nystrom_row(p, grid_n, h),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelMatrix { n: grid_n, upper, rows })
    }

    fn cell_probability_row(&self, p: f64, n: usize, h: f64) -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(n + 1);
        let atom = self.prob_no_outbreak(p)?;
        row.push(atom);
        let mut prev = atom;
        for k in 1..=n {
            let cur = self.transition_cdf(p, k as f64 * h)?;
            row.push((cur - prev).max(0.0));
            prev = cur;
        }
        // Mass beyond z_bar joins the last cell.
        row[n] += (1.0 - prev).max(0.0);
        Ok(row)
    }

    fn nystrom_row(&self, p: f64, n: usize, h: f64) -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(n + 1);
        row.push(self.prob_no_outbreak(p)?);
        for k in 0..n {
            row.push(self.transition_density(p, (k as f64 + 0.5) * h)? * h);
        }
        Ok(row)
    }

    pub fn stationary_solve(&self, grid_n: usize) -> Result<StationaryLaw> {
        self.stationary_solve_with(StationaryOptions { grid_n, ..Default::default() })
    }

    /// Fixed-point iteration of the stationarity system on a uniform grid, starting
    /// from the immunity-free state and renormalising every sweep.
    pub fn stationary_solve_with(&self, opts: StationaryOptions) -> Result<StationaryLaw> {
        const OP: &str = "stationary_solve";
        if opts.grid_n < 64 {
            return Err(Error::invalid(OP, format!("grid_n {} < 64", opts.grid_n)));
        }
        let kernel = self.kernel_matrix(opts.grid_n, opts.route)?;
        let (weights, sweeps, change) = iterate_fixed_point(&kernel, opts.tol, opts.max_sweeps)
            .ok_or(Error::NoConvergence { op: OP, iterations: opts.max_sweeps })?;
        let law = MixedDensity1D {
            atom_location: 0.0,
            atom: weights[0],
            lower: 0.0,
            upper: kernel.upper,
            cell_mass: weights[1..].to_vec(),
        };
        Ok(StationaryLaw { law, sweeps, last_change: change })
    }

    /// Continuous part of the stationary bivariate density of `(z, R_e)`:
    /// the prior-`x` density mixed over the stationary law of `x`.
    pub fn stationary_biv_density(&self, stationary: &MixedDensity1D, z: f64, r_e: f64) -> Result<f64> {
        if !(r_e > 1.0 && z > 0.0 && z < 1.0) || final_size_curve(z) >= r_e {
            return Ok(0.0);
        }
        let zr = susceptible_final_size(r_e)?;
        // (z, R_e) is reachable from prior x exactly when x > 1 - z / z(R_e).
        let lo = (1.0 - z / zr).max(0.0);
        let hi = stationary.upper;
        if lo >= hi {
            return Ok(0.0);
        }
        self.integrate_checked(|x| Ok(stationary.density_at(x) * self.biv_density(x, z, r_e)?), lo, hi)
    }

    /// Stationary density of `R_e` for `R_e > 1`: the curve part from seasons after no
    /// outbreak plus the mixture of the prior-`x` densities.
    pub fn stationary_re_density(&self, stationary: &MixedDensity1D, r_e: f64) -> Result<f64> {
        let curve = stationary.atom_at_zero() * self.distribution().marginal_tau_density(r_e);
        let mixed = self.integrate_checked(
            |x| Ok(stationary.density_at(x) * self.re_density_given_p(x, r_e)?),
            0.0,
            stationary.upper,
        )?;
        Ok(curve + mixed)
    }

    /// Forecast of `z` given `R_e` under the stationary law of the prior.
    pub fn stationary_conditional_z(
        &self,
        stationary: &MixedDensity1D,
        r_e: f64,
        cells: usize,
    ) -> Result<StationaryConditional> {
        const OP: &str = "stationary_conditional_z";
        if r_e <= 1.0 {
            return Err(Error::domain(OP, format!("R_e {r_e} must exceed 1")));
        }
        let zr = susceptible_final_size(r_e)?;
        let norm = self.stationary_re_density(stationary, r_e)?;
        if norm <= 0.0 {
            return Err(Error::domain(OP, format!("R_e {r_e} has zero stationary density")));
        }
        let atom = stationary.atom_at_zero() * self.distribution().marginal_tau_density(r_e) / norm;
        let h = zr / cells as f64;
        let masses = (0..cells)
            .into_par_iter()
            .map(|i| {
                let a = i as f64 * h;
                self.integrate_checked(|z| self.stationary_biv_density(stationary, z, r_e), a, a + h)
                    .map(|m| m / norm)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StationaryConditional {
            r_e,
            law: MixedDensity1D { atom_location: zr, atom, lower: 0.0, upper: zr, cell_mass: masses },
            re_density: norm,
        })
    }
}

/// Power iteration `v <- v K`, renormalised each sweep, until the L1 change drops
/// below `tol`. Returns the weights, sweep count and final change.
fn iterate_fixed_point(kernel: &KernelMatrix, tol: f64, max_sweeps: usize) -> Option<(Vec<f64>, usize, f64)> {
    let m = kernel.n + 1;
    let mut v = vec![0.0; m];
    v[0] = 1.0;
    for sweep in 1..=max_sweeps {
        let mut next = vec![0.0; m];
        for (i, &w) in v.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (acc, k) in next.iter_mut().zip(kernel.row(i)) {
                *acc += w * k;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let change: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if change < tol {
            return Some((v, sweep, change));
        }
    }
    None
}
