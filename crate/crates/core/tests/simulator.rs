use seasonal_drift::analytic::R2Model;
use seasonal_drift::export::{chain_table, Format};
use seasonal_drift::model::ModelConfig;
use seasonal_drift::simulate::{
    conditional_window, kde, run_chain, run_chains, sample_given_prior, scatter_support_check, stationary_samples,
    Bandwidth, StationarySample, DEFAULT_BURN_IN,
};
use seasonal_drift::{PairDistribution, PresetCase};

fn cfg(r: usize) -> ModelConfig {
    ModelConfig::new(r).unwrap()
}

fn export(run: &seasonal_drift::simulate::ChainRun, format: Format) -> Vec<u8> {
    let mut buf = Vec::new();
    chain_table(run).write(&mut buf, format).unwrap();
    buf
}

#[test]
fn same_seed_gives_identical_export() {
    let d = PresetCase::Case3.distribution();
    let a = run_chain(cfg(4), d, 11, 2_000, 100).unwrap();
    let b = run_chain(cfg(4), d, 11, 2_000, 100).unwrap();
    assert_eq!(a, b);
    assert_eq!(export(&a, Format::Csv), export(&b, Format::Csv));
    assert_eq!(export(&a, Format::Json), export(&b, Format::Json));
    let c = run_chain(cfg(4), d, 12, 2_000, 100).unwrap();
    assert_ne!(export(&a, Format::Csv), export(&c, Format::Csv));
    // Scheduling does not matter: chain 0 of a parallel batch equals a lone run.
    let batch = run_chains(cfg(4), d, 11, 3, 2_000, 100).unwrap();
    assert_eq!(batch[0], a);
}

#[test]
fn states_stay_valid_along_chain() {
    let run = run_chain(cfg(10), PresetCase::Case2.distribution(), 5, 5_000, 0).unwrap();
    for rec in &run.seasons {
        let p = rec.state.p();
        assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((0.0..1.0).contains(&rec.outcome.z_overall));
    }
}

#[test]
fn parallel_chains_are_uncorrelated() {
    let n = 20_000;
    let runs = run_chains(cfg(2), PresetCase::Case1.distribution(), 2024, 4, n + 500, 500).unwrap();
    let zs: Vec<Vec<f64>> = runs.iter().map(|r| stationary_samples(r).iter().map(|s| s.z).collect()).collect();
    for i in 0..zs.len() {
        for j in i + 1..zs.len() {
            let corr = pearson(&zs[i], &zs[j]);
            // Within-chain autocorrelation inflates the null standard error.
            let rho_i = lag1(&zs[i]);
            let rho_j = lag1(&zs[j]);
            let inflation = ((1.0 + rho_i * rho_j) / (1.0 - rho_i * rho_j)).sqrt();
            let se = inflation / (n as f64).sqrt();
            assert!(corr.abs() < 3.0 * se, "chains {i},{j}: corr {corr} se {se}");
        }
    }
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn lag1(x: &[f64]) -> f64 {
    pearson(&x[..x.len() - 1], &x[1..])
}

#[test]
fn case1_outbreak_free_fraction() {
    let run = run_chain(cfg(2), PresetCase::Case1.distribution(), 2024, 20_500, DEFAULT_BURN_IN).unwrap();
    let s = stationary_samples(&run);
    assert_eq!(s.len(), 20_000);
    let atom = s.iter().filter(|x| x.z == 0.0).count() as f64 / s.len() as f64;
    assert!((atom - 0.25).abs() < 0.02, "{atom}");
    let report = scatter_support_check(&s);
    assert_eq!(report.violations, 0);
    assert!(report.max_violation <= 1e-9);
    let est = kde(&s.iter().map(|x| x.z).collect::<Vec<_>>(), Bandwidth::Silverman, 256).unwrap();
    assert!((est.total_mass() - 1.0).abs() < 2e-2, "{}", est.total_mass());
    assert!((est.defective_mass - atom).abs() < 1e-15);
}

#[test]
fn more_groups_shift_positive_attack_ratios_down() {
    let d = PresetCase::Case1.distribution();
    let mean_pos = |r: usize| {
        let run = run_chain(cfg(r), d, 77, 20_500, DEFAULT_BURN_IN).unwrap();
        let pos: Vec<f64> = stationary_samples(&run).iter().map(|s| s.z).filter(|&z| z > 0.0).collect();
        pos.iter().sum::<f64>() / pos.len() as f64
    };
    let (m2, m10) = (mean_pos(2), mean_pos(10));
    assert!(m10 < m2, "r=10 {m10} vs r=2 {m2}");
}

#[test]
fn window_selection() {
    let run = run_chain(cfg(2), PresetCase::Case1.distribution(), 8, 20_500, DEFAULT_BURN_IN).unwrap();
    let s = stationary_samples(&run);
    assert!(!conditional_window(&s, 1.6, 0.02).unwrap().is_empty());
    assert_eq!(conditional_window(&s, 1.6, 1e9).unwrap(), s);
    assert!(conditional_window(&s, 1.6, 0.0).is_err());
    let burned = run_chain(cfg(2), PresetCase::Case1.distribution(), 8, 100, 99).unwrap();
    assert_eq!(stationary_samples(&burned).len(), 1);
}

#[test]
fn narrower_windows_approach_the_conditional_density() {
    let model = R2Model::new(PresetCase::Case1.distribution()).unwrap();
    let (p, target) = (0.5, 1.6);
    let samples: Vec<StationarySample> = sample_given_prior(model.distribution(), p, 400_000, 13)
        .unwrap()
        .into_iter()
        .map(|(r_e, z)| StationarySample { r_e, z, prior: vec![p, 1.0 - p] })
        .collect();
    let law = model.conditional_law(p, target, 20).unwrap();
    let (lo, hi) = (law.lower, law.upper);
    let l1 = |window: f64| {
        let sel = conditional_window(&samples, target, window).unwrap();
        let mut hist = [0.0; 20];
        let h = (hi - lo) / 20.0;
        let mut outside = 0.0;
        for s in &sel {
            let k = ((s.z - lo) / h).floor();
            if (0.0..20.0).contains(&k) {
                hist[k as usize] += 1.0;
            } else {
                outside += 1.0;
            }
        }
        let n = sel.len() as f64;
        hist.iter().zip(&law.cell_mass).map(|(c, m)| (c / n - m).abs()).sum::<f64>() + outside / n
    };
    let (wide, mid, narrow) = (l1(0.4), l1(0.1), l1(0.02));
    assert!(wide > mid && mid > narrow, "{wide} {mid} {narrow}");
}

#[test]
fn subcritical_transmissibility_never_spreads() {
    let d = PairDistribution::new(2.0, 5.0, 0.5f64.ln(), 0.0, 1e-12).unwrap();
    let run = run_chain(cfg(3), d, 1, 50, 0).unwrap();
    assert!(run.seasons.iter().all(|s| s.outcome.z_overall == 0.0));
    assert!((run.seasons[0].pair.tau - 0.5).abs() < 1e-5);
    for rec in &run.seasons[3..] {
        assert_eq!(rec.state.p(), &[0.0, 0.0, 1.0]);
    }
}
