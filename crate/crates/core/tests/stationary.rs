use std::sync::OnceLock;

use seasonal_drift::analytic::{KernelRoute, R2Model, StationaryLaw, StationaryOptions};
use seasonal_drift::numeric::{integrate, Tolerance};
use seasonal_drift::simulate::{
    conditional_window, kde, run_chain, stationary_samples, Bandwidth, DEFAULT_BURN_IN,
};
use seasonal_drift::model::ModelConfig;
use seasonal_drift::PresetCase;

fn model() -> &'static R2Model {
    static M: OnceLock<R2Model> = OnceLock::new();
    M.get_or_init(|| R2Model::new(PresetCase::Case1.distribution()).unwrap())
}

fn law() -> &'static StationaryLaw {
    static L: OnceLock<StationaryLaw> = OnceLock::new();
    L.get_or_init(|| model().stationary_solve(512).unwrap())
}

#[test]
fn stationary_law_is_normalised_fixed_point() {
    let s = law();
    assert!((s.law.total_mass() - 1.0).abs() < 1e-9);
    assert!(s.last_change < 1e-8 && s.sweeps > 1);
    assert!(s.law.cell_mass.iter().all(|&m| m >= 0.0));
    assert!((s.law.atom - 0.25).abs() < 0.02, "atom {}", s.law.atom);
}

#[test]
fn nystrom_and_cell_routes_agree() {
    let nys = model()
        .stationary_solve_with(StationaryOptions { route: KernelRoute::DensityNystrom, ..Default::default() })
        .unwrap();
    let cell = law();
    assert!((nys.law.atom - cell.law.atom).abs() < 5e-3, "{} vs {}", nys.law.atom, cell.law.atom);
    let l1: f64 = nys.law.cell_mass.iter().zip(&cell.law.cell_mass).map(|(a, b)| (a - b).abs()).sum();
    assert!(l1 < 0.02, "{l1}");
}

#[test]
fn coarser_grid_converges_to_same_law() {
    let coarse = model().stationary_solve(256).unwrap();
    assert!((coarse.law.atom - law().law.atom).abs() < 2e-3);
    assert!((coarse.law.mean() - law().law.mean()).abs() < 2e-3);
}

#[test]
fn stationary_re_density_accounts_for_all_mass() {
    let m = model();
    let s = &law().law;
    let mass = integrate(
        |r| m.stationary_re_density(s, r).unwrap(),
        1.0,
        m.tau_max(),
        Tolerance::new(1e-8, 1e-6),
    )
    .value;
    let total = mass + s.atom_at_zero_below_threshold(m);
    assert!((total - 1.0).abs() < 5e-3, "{total}");
}

trait BelowThreshold {
    fn atom_at_zero_below_threshold(&self, m: &R2Model) -> f64;
}

impl BelowThreshold for seasonal_drift::analytic::MixedDensity1D {
    /// Stationary probability of `R_e <= 1`, which is the mass of the next season's atom.
    fn atom_at_zero_below_threshold(&self, m: &R2Model) -> f64 {
        let cont = integrate(
            |x| self.density_at(x) * m.prob_no_outbreak(x).unwrap(),
            0.0,
            self.upper,
            Tolerance::new(1e-10, 1e-8),
        )
        .value;
        self.atom_at_zero() * m.prob_no_outbreak(0.0).unwrap() + cont
    }
}

#[test]
fn stationary_conditional_is_normalised() {
    for r in [1.3, 1.6] {
        let c = model().stationary_conditional_z(&law().law, r, 100).unwrap();
        assert!((c.law.total_mass() - 1.0).abs() < 1e-3, "R={r}: {}", c.law.total_mass());
        assert!(c.law.atom > 0.0 && c.law.atom < 1.0);
        assert!(c.law.quantile(0.99) <= c.law.atom_location + 1e-12);
    }
    assert!(model().stationary_conditional_z(&law().law, 0.9, 10).is_err());
}

#[test]
fn simulated_chain_matches_stationary_law() {
    let dist = PresetCase::Case1.distribution();
    let run = run_chain(ModelConfig::new(2).unwrap(), dist, 99, 20_500, DEFAULT_BURN_IN).unwrap();
    let zs: Vec<f64> = run.seasons.iter().map(|s| s.outcome.z_overall).collect();
    let est = kde(&zs, Bandwidth::Silverman, 200).unwrap();
    let s = &law().law;
    let step = est.grid_step();
    let l1: f64 = est
        .grid
        .iter()
        .zip(&est.values)
        .map(|(&x, &v)| (v - s.density_at(x)).abs() * step)
        .sum::<f64>()
        + (est.defective_mass - s.atom).abs();
    assert!(l1 < 0.08, "L1 {l1}");

    let samples = stationary_samples(&run);
    let window = conditional_window(&samples, 1.6, 0.02).unwrap();
    let analytic = model().stationary_conditional_z(s, 1.6, 100).unwrap();
    let n = window.len() as f64;
    assert!(window.len() > 200, "{}", window.len());
    let mean = window.iter().map(|w| w.z).sum::<f64>() / n;
    let se = (analytic.law.variance() / n).sqrt();
    assert!((mean - analytic.law.mean()).abs() < 4.0 * se + 5e-3, "{mean} vs {} (se {se})", analytic.law.mean());
}
