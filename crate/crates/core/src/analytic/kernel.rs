use serde::{Deserialize, Serialize};

use super::inverse::{region_check, solve_delta_star, RegionViolation};
use super::mixed::MixedDensity1D;
use crate::distribution::PairDistribution;
use crate::error::{Error, Result};
use crate::model::{final_size_curve, susceptible_final_size};
use crate::numeric::{integrate_endpoint_smoothed, newton_increasing, normal_cdf, Tolerance};

/// Truncated tail mass used to bound every `tau` integral.
pub const TAU_TAIL_MASS: f64 = 1e-10;
/// `delta*` closer than this to 1 is reported as a boundary evaluation.
pub const BOUNDARY_GAP: f64 = 1e-10;
const TAU_BRACKET_LIMIT: f64 = 1e6;

/// Exact results for immunity lasting one season, for a given `(delta, tau)` law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R2Model {
    dist: PairDistribution,
    tau_max: f64,
    tol: Tolerance,
}

/// One evaluation of the bivariate density of `(z, R_e)` given the prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub value: f64,
    /// `delta*` lies within `BOUNDARY_GAP` of 1, on the edge `R_e = -ln(1 - z)/z`.
    pub boundary: bool,
}

impl R2Model {
    pub fn new(dist: PairDistribution) -> Result<Self> {
        if dist.delta_atom() > 0.0 {
            return Err(Error::Unsupported {
                op: "R2Model::new",
                reason: "closed-form r = 2 results need a (delta, tau) density without an atom"
                    .into(),
            });
        }
        Ok(R2Model { dist, tau_max: dist.tau_support_bound(TAU_TAIL_MASS)?, tol: Tolerance::default() })
    }

    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    pub fn distribution(&self) -> &PairDistribution {
        &self.dist
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    /// Truncation point for `tau` integrals.
    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    fn delta_integral<F: FnMut(f64) -> f64>(&self, f: F) -> f64 {
        integrate_endpoint_smoothed(f, 0.0, 1.0, self.tol).value
    }

    /// `P(z = 0 | p) = P(R_e <= 1 | p)`; the inner `tau` integral is the log-normal cdf.
    pub fn prob_no_outbreak(&self, p: f64) -> Result<f64> {
        check_prior("prob_no_outbreak", p, true)?;
        let d = &self.dist;
        if d.mu1() == 0.0 && p == 0.0 {
            return Ok(d.tau_cdf_given_delta(1.0, 0.0));
        }
        Ok(self.delta_integral(|x| {
            d.beta_density(x) * d.tau_cdf_given_delta(1.0 / (p * x + 1.0 - p), x)
        }))
    }

    /// Atom at zero of the transition law from prior `p`.
    pub fn transition_atom(&self, p: f64) -> Result<f64> {
        self.prob_no_outbreak(p)
    }

    /// Density of `R_e` given the prior: `int_0^1 q(x, R_e/D(x)) / D(x) dx`.
    pub fn re_density_given_p(&self, p: f64, r_e: f64) -> Result<f64> {
        check_prior("re_density_given_p", p, true)?;
        if r_e <= 0.0 {
            return Ok(0.0);
        }
        if p == 0.0 {
            return Ok(self.dist.marginal_tau_density(r_e));
        }
        Ok(self.delta_integral(|x| {
            let d = p * x + 1.0 - p;
            self.dist.density(x, r_e / d) / d
        }))
    }

    /// Density of `R_e` on the no-outbreak segment `{z = 0, 0 < R_e <= 1}`.
    pub fn segment_density(&self, p: f64, r_e: f64) -> Result<f64> {
        if !(r_e > 0.0 && r_e <= 1.0) {
            return Err(Error::domain("segment_density", format!("R_e {r_e} not in (0, 1]")));
        }
        self.re_density_given_p(p, r_e)
    }

    /// Bivariate density of `(z, R_e)` given prior `p`, zero outside the reachable
    /// region.
    pub fn biv_density(&self, p: f64, z: f64, r_e: f64) -> Result<f64> {
        Ok(self.biv_density_point(p, z, r_e)?.value)
    }

    pub fn biv_density_point(&self, p: f64, z: f64, r_e: f64) -> Result<DensityPoint> {
        match region_check(p, z, r_e) {
            Ok(()) => {}
            Err(RegionViolation::PriorOutOfRange) => {
                return Err(Error::domain("biv_density", RegionViolation::PriorOutOfRange.describe()))
            }
            Err(_) => return Ok(DensityPoint { value: 0.0, boundary: false }),
        }
        let inv = solve_delta_star(p, z, r_e)?;
        let (delta, tau) = (inv.delta, inv.tau);
        let q = self.dist.density(delta, tau);
        let d = p * delta + 1.0 - p;
        let e2 = (-tau * z).exp();
        let e1 = (-delta * tau * z).exp();
        let numerator = d - r_e * (p * delta * e1 + (1.0 - p) * e2);
        // e1 - e2 without cancellation as delta* -> 1.
        let gap = e2 * ((1.0 - delta) * tau * z).exp_m1();
        let denominator = p * (1.0 - p) * r_e * z * gap;
        let boundary = 1.0 - delta <= BOUNDARY_GAP;
        let value = if q == 0.0 || numerator <= 0.0 {
            0.0
        } else if denominator > 0.0 {
            q * numerator / denominator
        } else {
            // Exactly on the lower edge; the measure-zero set carries no mass.
            0.0
        };
        Ok(DensityPoint { value, boundary })
    }

    /// `tau*` solving `p e^{-x tau c} + (1 - p) e^{-tau c} + c - 1 = 0`, i.e. the
    /// transmissibility that yields attack ratio `c` under drift `x`. `None` when no
    /// finite transmissibility reaches `c`.
    pub fn tau_star(&self, p: f64, x: f64, c: f64) -> Result<Option<f64>> {
        tau_star(p, x, c)
    }

    /// Transition density of the next prior `p' > 0` given the current prior `p`.
    pub fn transition_density(&self, p: f64, p_next: f64) -> Result<f64> {
        const OP: &str = "transition_density";
        check_prior(OP, p, false)?;
        if !(p_next > 0.0 && p_next < 1.0) {
            return Err(Error::domain(OP, format!("p' = {p_next} not in (0, 1)")));
        }
        if p == 0.0 {
            // No immunity: z is a deterministic function of tau = R_e.
            let t = final_size_curve(p_next);
            return Ok(self.dist.marginal_tau_density(t) * curve_slope(p_next));
        }
        let mut failure = None;
        let value = self.delta_integral(|x| match tau_star(p, x, p_next) {
            Ok(Some(tau)) => {
                let s = p * x * (-tau * x * p_next).exp() + (1.0 - p) * (-tau * p_next).exp();
                let v = self.dist.density(x, tau) * (1.0 - tau * s) / (p_next * s);
                v.max(0.0)
            }
            Ok(None) => 0.0,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }

    /// `P(z <= c | p)` including the atom at zero. `z` grows with `tau` for fixed drift,
    /// so the inner integral is the log-normal cdf at `tau*(x, c)`.
    pub fn transition_cdf(&self, p: f64, c: f64) -> Result<f64> {
        const OP: &str = "transition_cdf";
        check_prior(OP, p, false)?;
        if c <= 0.0 {
            return self.prob_no_outbreak(p);
        }
        if c >= 1.0 {
            return Ok(1.0);
        }
        let d = &self.dist;
        if p == 0.0 && d.mu1() == 0.0 {
            return Ok(d.tau_cdf_given_delta(final_size_curve(c), 0.0));
        }
        let mut failure = None;
        let value = self.delta_integral(|x| {
            let cdf = match tau_star(p, x, c) {
                Ok(Some(tau)) => d.tau_cdf_given_delta(tau, x),
                Ok(None) => 1.0,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            };
            d.beta_density(x) * cdf
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(value.min(1.0)),
        }
    }

    /// Transition law from prior `p` on `cells` uniform cells over `(0, 1)`, with cell
    /// masses from differences of the transition cdf.
    pub fn transition_law(&self, p: f64, cells: usize) -> Result<MixedDensity1D> {
        let atom = self.prob_no_outbreak(p)?;
        let mut masses = Vec::with_capacity(cells);
        let mut prev = atom;
        for k in 1..=cells {
            let edge = k as f64 / cells as f64;
            let cur = self.transition_cdf(p, edge)?;
            masses.push((cur - prev).max(0.0));
            prev = cur;
        }
        Ok(MixedDensity1D { atom_location: 0.0, atom, lower: 0.0, upper: 1.0, cell_mass: masses })
    }

    /// Support of `z` given `(R_e, p)`: `((1 - p) z(R_e), z(R_e))`.
    pub fn conditional_support(&self, p: f64, r_e: f64) -> Result<(f64, f64)> {
        let zr = susceptible_final_size(r_e)?;
        Ok(((1.0 - p) * zr, zr))
    }

    /// Density of `z` given `R_e > 1` and prior `p`.
    pub fn conditional_density_z(&self, p: f64, r_e: f64, z: f64) -> Result<f64> {
        const OP: &str = "conditional_density_z";
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(OP, format!("p {p} not in (0, 1)")));
        }
        if r_e <= 1.0 {
            return Err(Error::domain(OP, format!("R_e {r_e} must exceed 1")));
        }
        let norm = self.re_density_given_p(p, r_e)?;
        if norm <= 0.0 {
            return Err(Error::domain(OP, format!("R_e {r_e} has zero density given p = {p}")));
        }
        Ok(self.biv_density(p, z, r_e)? / norm)
    }

    /// Forecast law of this season's attack ratio given last season's `p` and the
    /// observed `R_e`. Degenerates to a point mass at 0 when `R_e <= 1` and at `z(R_e)`
    /// when `p = 0`.
    pub fn conditional_law(&self, p: f64, r_e: f64, cells: usize) -> Result<MixedDensity1D> {
        check_prior("conditional_law", p, false)?;
        if r_e <= 1.0 {
            return Ok(MixedDensity1D::point_mass(0.0));
        }
        if p == 0.0 {
            return Ok(MixedDensity1D::point_mass(susceptible_final_size(r_e)?));
        }
        let (lo, hi) = self.conditional_support(p, r_e)?;
        let norm = self.re_density_given_p(p, r_e)?;
        let h = (hi - lo) / cells as f64;
        let mut masses = Vec::with_capacity(cells);
        for i in 0..cells {
            let a = lo + i as f64 * h;
            let m = self.integrate_checked(|z| self.biv_density(p, z, r_e), a, a + h)?;
            masses.push(m / norm);
        }
        Ok(MixedDensity1D { atom_location: 0.0, atom: 0.0, lower: lo, upper: hi, cell_mass: masses })
    }

    /// Mean and variance of a density given pointwise on `(a, b)`, by quadrature.
    pub fn density_moments<F>(&self, f: F, a: f64, b: f64) -> Result<(f64, f64, f64)>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let m0 = self.integrate_checked(&f, a, b)?;
        let m1 = self.integrate_checked(|z| Ok(z * f(z)?), a, b)?;
        let m2 = self.integrate_checked(|z| Ok(z * z * f(z)?), a, b)?;
        Ok((m0, m1, m2))
    }

    pub(crate) fn integrate_checked<F>(&self, f: F, a: f64, b: f64) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let mut failure = None;
        let v = integrate_endpoint_smoothed(
            |x| match f(x) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
            self.tol,
        )
        .value;
        match failure {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }
}

fn check_prior(op: &'static str, p: f64, allow_one: bool) -> Result<()> {
    let ok = if allow_one { (0.0..=1.0).contains(&p) } else { (0.0..1.0).contains(&p) };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(op, format!("prior attack ratio {p} out of range")))
    }
}

/// `d/dz [-ln(1 - z)/z]`.
pub(crate) fn curve_slope(z: f64) -> f64 {
    if z < 1e-4 {
        // 1/2 + 2z/3 + 3z^2/4 + ...
        (1..=6).map(|k| k as f64 * z.powi(k - 1) / (k + 1) as f64).sum()
    } else {
        (z / (1.0 - z) + (-z).ln_1p()) / (z * z)
    }
}

pub(crate) fn tau_star(p: f64, x: f64, c: f64) -> Result<Option<f64>> {
    let h = |tau: f64| -> (f64, f64) {
        let e1 = -x * tau * c;
        let e2 = -tau * c;
        let value = (-p * e1.exp_m1() - (1.0 - p) * e2.exp_m1()) / c - 1.0;
        let slope = p * x * e1.exp() + (1.0 - p) * e2.exp();
        (value, slope)
    };
    // h(0) = -1 and h is concave with h'(0) = p x + 1 - p, so h <= 0 up to 1/h'(0).
    let lo = 1.0 / (p * x + 1.0 - p);
    if h(lo).0 >= 0.0 {
        return Ok(Some(lo));
    }
    let mut hi = 2.0 * lo;
    while h(hi).0 <= 0.0 {
        hi *= 2.0;
        if hi > TAU_BRACKET_LIMIT {
            return Ok(None);
        }
    }
    newton_increasing("tau_star", h, lo, hi).map(Some)
}

/// Log-normal cdf with log-mean `mu` and log-variance `sigma2`.
pub fn lognormal_cdf(x: f64, mu: f64, sigma2: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        normal_cdf((x.ln() - mu) / sigma2.sqrt())
    }
}
