//! Joint laws of the seasonal drift and transmissibility.
//!
//! `delta ~ Beta(a, b)` and, given `delta`, `tau ~ LogNormal(mu0 + mu1 * delta, sigma2)`.
//! `mu1 = 0` makes the two independent; a negative `mu1` correlates them negatively.
//! An optional atom at `delta = 1` (full loss of immunity) is supported for chains
//! that need a regeneration state.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::model::DriftPair;
use crate::numeric::{integrate_endpoint_smoothed, normal_cdf, normal_upper_quantile, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDistribution {
    a: f64,
    b: f64,
    mu0: f64,
    mu1: f64,
    sigma2: f64,
    delta_atom: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetCase {
    Case1,
    Case2,
    Case3,
    Case4,
}

impl PresetCase {
    pub const ALL: [PresetCase; 4] =
        [PresetCase::Case1, PresetCase::Case2, PresetCase::Case3, PresetCase::Case4];

    pub fn name(self) -> &'static str {
        match self {
            PresetCase::Case1 => "case1",
            PresetCase::Case2 => "case2",
            PresetCase::Case3 => "case3",
            PresetCase::Case4 => "case4",
        }
    }

    pub fn distribution(self) -> PairDistribution {
        let (a, b, mu0, mu1) = match self {
            PresetCase::Case1 => (3.0, 7.0, 0.683, 0.0),
            PresetCase::Case2 => (4.0, 6.0, 1.08, 0.0),
            PresetCase::Case3 => (0.5, 1.5, 0.6, -0.4),
            PresetCase::Case4 => (3.0, 7.0, 0.7, -0.5),
        };
        PairDistribution { a, b, mu0, mu1, sigma2: 0.02, delta_atom: 0.0 }
    }
}

impl fmt::Display for PresetCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "case1" | "1" => Ok(PresetCase::Case1),
            "case2" | "2" => Ok(PresetCase::Case2),
            "case3" | "3" => Ok(PresetCase::Case3),
            "case4" | "4" => Ok(PresetCase::Case4),
            other => Err(Error::Config(format!("unknown preset case {other:?}"))),
        }
    }
}

impl PairDistribution {
    pub fn new(a: f64, b: f64, mu0: f64, mu1: f64, sigma2: f64) -> Result<Self> {
        const OP: &str = "PairDistribution::new";
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::invalid(OP, format!("Beta shapes must be positive (a={a}, b={b})")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::invalid(OP, format!("sigma2 must be positive, got {sigma2}")));
        }
        if !(mu0.is_finite() && mu1.is_finite()) {
            return Err(Error::invalid(OP, "log-mean coefficients must be finite"));
        }
        Ok(PairDistribution { a, b, mu0, mu1, sigma2, delta_atom: 0.0 })
    }

    pub fn preset(case: PresetCase) -> Self {
        case.distribution()
    }

    /// Adds probability `weight` of a season with `delta = 1` exactly.
    pub fn with_delta_atom(mut self, weight: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&weight) {
            return Err(Error::invalid(
                "PairDistribution::with_delta_atom",
                format!("atom weight {weight} not in [0, 1)"),
            ));
        }
        self.delta_atom = weight;
        Ok(self)
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn mu0(&self) -> f64 {
        self.mu0
    }
    pub fn mu1(&self) -> f64 {
        self.mu1
    }
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
    pub fn delta_atom(&self) -> f64 {
        self.delta_atom
    }

    fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Log-mean of `tau` given `delta`.
    pub fn log_mean(&self, delta: f64) -> f64 {
        self.mu0 + self.mu1 * delta
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DriftPair {
        let delta = if self.delta_atom > 0.0 && rng.random::<f64>() < self.delta_atom {
            1.0
        } else {
            let beta = Beta::new(self.a, self.b).expect("validated shapes");
            beta.sample(rng)
        };
        let n: f64 = StandardNormal.sample(rng);
        let tau = (self.log_mean(delta) + self.sigma() * n).exp();
        DriftPair { delta, tau }
    }

    /// Beta density of the continuous part of `delta`, without the atom weight.
    pub fn beta_density(&self, delta: f64) -> f64 {
        if !(delta > 0.0 && delta < 1.0) {
            return 0.0;
        }
        ((self.a - 1.0) * delta.ln() + (self.b - 1.0) * (-delta).ln_1p() - ln_beta(self.a, self.b))
            .exp()
    }

    pub fn tau_density_given_delta(&self, tau: f64, delta: f64) -> f64 {
        lognormal_pdf(tau, self.log_mean(delta), self.sigma())
    }

    pub fn tau_cdf_given_delta(&self, tau: f64, delta: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        normal_cdf((tau.ln() - self.log_mean(delta)) / self.sigma())
    }

    /// Joint density `q(delta, tau)` of the continuous part (scaled by `1 - delta_atom`).
    pub fn density(&self, delta: f64, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        (1.0 - self.delta_atom) * self.beta_density(delta) * self.tau_density_given_delta(tau, delta)
    }

    /// `q_tau(tau) = int_0^1 q(x, tau) dx`, plus the atom's contribution if present.
    pub fn marginal_tau_density(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        let atom = self.delta_atom * self.tau_density_given_delta(tau, 1.0);
        if self.mu1 == 0.0 {
            return atom + (1.0 - self.delta_atom) * self.tau_density_given_delta(tau, 0.0);
        }
        let cont = integrate_endpoint_smoothed(
            |x| self.density(x, tau),
            0.0,
            1.0,
            Tolerance::new(1e-300, 1e-10),
        );
        atom + cont.value
    }

    /// `tau_M*` with `P(tau > tau_M*) <= mass_tol`, from the larger of the two extreme
    /// log-means over `delta in [0, 1]`.
    pub fn tau_support_bound(&self, mass_tol: f64) -> Result<f64> {
        if !(mass_tol > 0.0 && mass_tol <= 1e-3) {
            return Err(Error::invalid(
                "tau_support_bound",
                format!("mass_tol {mass_tol} not in (0, 1e-3]"),
            ));
        }
        let mu = self.mu0.max(self.mu0 + self.mu1);
        Ok((mu + normal_upper_quantile(mass_tol) * self.sigma()).exp())
    }

    /// Mean and standard deviation of `delta` and `tau`, and their correlation,
    /// computed from closed forms.
    pub fn moments(&self) -> PairMoments {
        let (a, b) = (self.a, self.b);
        let w = self.delta_atom;
        let m1 = a / (a + b);
        let m2 = a * (a + 1.0) / ((a + b) * (a + b + 1.0));
        let e_delta = (1.0 - w) * m1 + w;
        let e_delta2 = (1.0 - w) * m2 + w;
        // E[tau^k | delta] = exp(k mu(delta) + k^2 sigma2 / 2); E[exp(c delta)] needs the
        // Beta moment generating function, integrated numerically.
        let mgf = |c: f64| -> f64 {
            let cont = integrate_endpoint_smoothed(
                |x| self.beta_density(x) * (c * x).exp(),
                0.0,
                1.0,
                Tolerance::new(1e-300, 1e-12),
            )
            .value;
            (1.0 - w) * cont + w * c.exp()
        };
        let mgf_x = |c: f64| -> f64 {
            let cont = integrate_endpoint_smoothed(
                |x| self.beta_density(x) * x * (c * x).exp(),
                0.0,
                1.0,
                Tolerance::new(1e-300, 1e-12),
            )
            .value;
            (1.0 - w) * cont + w * c.exp()
        };
        let s2 = self.sigma2;
        let e_tau = (self.mu0 + s2 / 2.0).exp() * mgf(self.mu1);
        let e_tau2 = (2.0 * self.mu0 + 2.0 * s2).exp() * mgf(2.0 * self.mu1);
        let e_delta_tau = (self.mu0 + s2 / 2.0).exp() * mgf_x(self.mu1);
        let sd_delta = (e_delta2 - e_delta * e_delta).max(0.0).sqrt();
        let sd_tau = (e_tau2 - e_tau * e_tau).max(0.0).sqrt();
        let corr = (e_delta_tau - e_delta * e_tau) / (sd_delta * sd_tau);
        PairMoments { mean_delta: e_delta, sd_delta, mean_tau: e_tau, sd_tau, corr }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairMoments {
    pub mean_delta: f64,
    pub sd_delta: f64,
    pub mean_tau: f64,
    pub sd_tau: f64,
    pub corr: f64,
}

impl PairMoments {
    /// Sample moments of a set of draws.
    pub fn from_draws(draws: &[DriftPair]) -> Self {
        let n = draws.len() as f64;
        let md = draws.iter().map(|d| d.delta).sum::<f64>() / n;
        let mt = draws.iter().map(|d| d.tau).sum::<f64>() / n;
        let (mut vd, mut vt, mut cv) = (0.0, 0.0, 0.0);
        for d in draws {
            let (x, y) = (d.delta - md, d.tau - mt);
            vd += x * x;
            vt += y * y;
            cv += x * y;
        }
        let denom = n - 1.0;
        let (sd_delta, sd_tau) = ((vd / denom).sqrt(), (vt / denom).sqrt());
        PairMoments {
            mean_delta: md,
            sd_delta,
            mean_tau: mt,
            sd_tau,
            corr: cv / denom / (sd_delta * sd_tau),
        }
    }
}

fn lognormal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let u = (x.ln() - mu) / sigma;
    (-0.5 * u * u).exp() / (x * sigma * (2.0 * PI).sqrt())
}
