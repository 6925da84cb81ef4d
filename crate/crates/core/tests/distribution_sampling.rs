use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use seasonal_drift::numeric::{integrate, normal_cdf, normal_upper_quantile, Tolerance};
use seasonal_drift::simulate::draw_pairs;
use seasonal_drift::{DriftPair, PairDistribution, PairMoments, PresetCase};
use statrs::distribution::{Beta, ContinuousCDF};

const N: usize = 100_000;
/// Kolmogorov-Smirnov critical value at significance 1e-3 is 1.949 / sqrt(n).
const KS_1E3: f64 = 1.949;

fn draws(case: PresetCase, seed: u64) -> Vec<DriftPair> {
    draw_pairs(&case.distribution(), &mut ChaCha8Rng::seed_from_u64(seed), N)
}

fn ks_statistic(mut x: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn drift_marginal_matches_beta_cdf() {
    for (k, case) in PresetCase::ALL.into_iter().enumerate() {
        let d = case.distribution();
        let beta = Beta::new(d.a(), d.b()).unwrap();
        let s = draws(case, 100 + k as u64);
        let ks = ks_statistic(s.iter().map(|p| p.delta).collect(), |x| beta.cdf(x));
        assert!(ks < KS_1E3 / (N as f64).sqrt(), "{case}: KS {ks}");
    }
}

#[test]
fn transmissibility_given_drift_bins_is_lognormal() {
    for (k, case) in PresetCase::ALL.into_iter().enumerate() {
        let d = case.distribution();
        let s = draws(case, 200 + k as u64);
        let mut sorted = s.clone();
        sorted.sort_by(|a, b| a.delta.total_cmp(&b.delta));
        for bin in sorted.chunks(N / 5) {
            let resid: Vec<f64> = bin.iter().map(|p| (p.tau.ln() - d.log_mean(p.delta)) / d.sigma2().sqrt()).collect();
            let ks = ks_statistic(resid, normal_cdf);
            assert!(ks < KS_1E3 / (bin.len() as f64).sqrt(), "{case}: KS {ks}");
        }
    }
}

#[test]
fn sample_moments_match_closed_form() {
    for (k, case) in PresetCase::ALL.into_iter().enumerate() {
        let exact = case.distribution().moments();
        let m = PairMoments::from_draws(&draws(case, 300 + k as u64));
        let n = (N as f64).sqrt();
        assert!((m.mean_delta - exact.mean_delta).abs() < 4.0 * exact.sd_delta / n, "{case} {m:?}");
        assert!((m.mean_tau - exact.mean_tau).abs() < 4.0 * exact.sd_tau / n, "{case} {m:?}");
        assert!((m.sd_delta - exact.sd_delta).abs() < 0.005, "{case}");
        assert!((m.sd_tau - exact.sd_tau).abs() < 0.005, "{case}");
        assert!((m.corr - exact.corr).abs() < 0.02, "{case}");
    }
}

#[test]
fn independent_cases_match_reference_moments() {
    // (E delta, sd delta, E tau, sd tau, corr) as reference with two decimals.
    let reference = [(0.3, 0.14, 2.0, 0.28, 0.0), (0.4, 0.15, 2.97, 0.42, 0.0)];
    for (case, t) in [PresetCase::Case1, PresetCase::Case2].into_iter().zip(reference) {
        let m = case.distribution().moments();
        for (got, want) in [m.mean_delta, m.sd_delta, m.mean_tau, m.sd_tau, m.corr].into_iter().zip([t.0, t.1, t.2, t.3, t.4]) {
            assert!((got - want).abs() <= 0.005, "{case}: {got} vs {want}");
        }
    }
    let case1 = PresetCase::Case1.distribution().moments();
    assert!((case1.mean_tau - (0.693f64).exp()).abs() < 1e-12);
}

#[test]
fn drift_moments_of_correlated_cases_match_reference() {
    let m3 = PresetCase::Case3.distribution().moments();
    assert!((m3.mean_delta - 0.25).abs() < 1e-12 && (m3.sd_delta - 0.25).abs() < 1e-12);
    let m4 = PresetCase::Case4.distribution().moments();
    assert!((m4.mean_delta - 0.3).abs() < 1e-12 && (m4.sd_delta - 0.14).abs() < 0.005);
}

#[test]
fn degenerate_lognormal_sampling() {
    let d = PairDistribution::new(2.0, 5.0, 0.4, 0.0, 1e-12).unwrap();
    let s = draw_pairs(&d, &mut ChaCha8Rng::seed_from_u64(1), 1000);
    assert!(s.iter().all(|p| (p.tau - 0.4f64.exp()).abs() < 1e-4));
}

#[test]
fn joint_density_normalises() {
    let tol = Tolerance::new(1e-12, 1e-10);
    for case in [PresetCase::Case1, PresetCase::Case3] {
        let d = case.distribution();
        let total = integrate(
            |x| integrate(|t| d.density(x, t), 0.0, 50.0, tol).value,
            0.0,
            1.0,
            Tolerance::new(1e-10, 1e-9),
        )
        .value;
        assert!((total - 1.0).abs() < 1e-6, "{case}: {total}");
    }
}

#[test]
fn marginal_tau_density_normalises_and_factorises() {
    let d4 = PresetCase::Case4.distribution();
    let total = integrate(|t| d4.marginal_tau_density(t), 0.0, 50.0, Tolerance::new(1e-12, 1e-10)).value;
    assert!((total - 1.0).abs() < 1e-6, "{total}");

    let d1 = PresetCase::Case1.distribution();
    let s = 0.02f64.sqrt();
    let lognormal = (-(2f64.ln() - 0.683).powi(2) / 0.04).exp() / (2.0 * s * (2.0 * std::f64::consts::PI).sqrt());
    assert!((d1.marginal_tau_density(2.0) - lognormal).abs() < 1e-12 * lognormal.max(1.0));

    let d3 = PresetCase::Case3.distribution();
    for t in [0.1, 1.0, 1.7, 4.0] {
        let v = d3.marginal_tau_density(t);
        assert!(v > 0.0 && v.is_finite());
    }
}

#[test]
fn density_support_and_uniform_drift() {
    let d = PairDistribution::new(1.0, 1.0, 0.5, 0.0, 0.02).unwrap();
    assert_eq!(d.density(0.2, 1.5), d.density(0.9, 1.5));
    assert_eq!(d.density(0.2, 0.0), 0.0);
    assert_eq!(d.density(0.2, -1.0), 0.0);
    let c1 = PresetCase::Case1.distribution();
    assert_eq!(c1.density(0.0, 1.5), 0.0);
    assert_eq!(c1.density(1.0, 1.5), 0.0);
}

#[test]
fn tau_support_bound_uses_largest_log_mean() {
    let c1 = PresetCase::Case1.distribution();
    let z = normal_upper_quantile(1e-10);
    let want = (0.683 + z * 0.02f64.sqrt()).exp();
    assert!((c1.tau_support_bound(1e-10).unwrap() - want).abs() < 1e-12 * want);
    let c3 = PresetCase::Case3.distribution();
    let want3 = (0.6 + z * 0.02f64.sqrt()).exp();
    assert!((c3.tau_support_bound(1e-10).unwrap() - want3).abs() < 1e-12 * want3);
    let tight = PairDistribution::new(2.0, 2.0, 0.3, 0.0, 1e-12).unwrap();
    let b = tight.tau_support_bound(1e-10).unwrap();
    assert!(b > 0.3f64.exp() && b < 0.3f64.exp() * 1.0001);
    assert!(c1.tau_support_bound(0.01).is_err());
}

#[test]
fn correlated_cases_follow_their_parameters() {
    let m3 = PresetCase::Case3.distribution().moments();
    let m4 = PresetCase::Case4.distribution().moments();
    assert!((m3.corr + 0.5538).abs() < 1e-3 && (m3.mean_tau - 1.6734).abs() < 1e-3, "{m3:?}");
    assert!((m4.corr + 0.4303).abs() < 1e-3 && (m4.mean_tau - 1.7548).abs() < 1e-3, "{m4:?}");
}
