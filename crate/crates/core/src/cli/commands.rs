use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::RunConfig;
use super::output::{CommandReport, Output};
use super::Command;
use crate::analytic::{in_region_a, MixedDensity1D, R2Model};
use crate::distribution::PairMoments;
use crate::error::{Error, Result};
use crate::export::{chain_table, kde_sidecar, kde_table, Table};
use crate::model::{final_size_curve, ModelConfig};
use crate::simulate::{
    conditional_window, draw_pairs, kde, run_chain, sample_given_prior, scatter_support_check,
    stationary_samples, Bandwidth, KdeEstimate, StationarySample,
};

pub(crate) fn execute(cfg: &RunConfig, command: &Command, gnuplot: bool) -> Result<CommandReport> {
    let mut out = Output::new(&cfg.output_dir, cfg.format)?;
    let (args, summary) = match command {
        Command::Draw { n } => (json!({ "n": n }), draw(cfg, &mut out, *n)?),
        Command::Bivariate { priors, grid2d, re_max, overlay } => (
            json!({ "p": priors, "grid2d": grid2d, "re_max": re_max, "overlay": overlay }),
            bivariate(cfg, &mut out, priors, *grid2d, *re_max, *overlay)?,
        ),
        Command::Transition { priors, re } => {
            (json!({ "p": priors, "re": re }), transition(cfg, &mut out, priors, *re)?)
        }
        Command::Stationary { re, window, cond_cells } => (
            json!({ "re": re, "window": window, "cond_cells": cond_cells }),
            stationary(cfg, &mut out, re, *window, *cond_cells)?,
        ),
        Command::Scatter => (json!({}), scatter(cfg, &mut out)?),
        Command::Forecast { prior, re } => (json!({ "p": prior, "re": re }), forecast(cfg, &mut out, *prior, *re)?),
        Command::Simulate => (json!({}), simulate(cfg, &mut out)?),
    };
    out.finish(command.name(), cfg, args, summary, gnuplot)
}

fn r2_model(cfg: &RunConfig, op: &'static str) -> Result<R2Model> {
    if cfg.r != 2 {
        return Err(Error::Unsupported { op, reason: format!("exact analysis needs r = 2, got r = {}", cfg.r) });
    }
    R2Model::new(cfg.case.distribution())
}

fn tag(x: f64) -> String {
    format!("{x}")
}

fn law_summary(law: &MixedDensity1D) -> Value {
    json!({
        "atom": law.atom,
        "atom_location": law.atom_location,
        "continuous_mass": law.continuous_mass(),
        "total_mass": law.total_mass(),
        "mean": law.mean(),
        "sd": law.variance().max(0.0).sqrt(),
        "median": law.quantile(0.5),
        "q05": law.quantile(0.05),
        "q95": law.quantile(0.95),
    })
}

fn simulate_samples(cfg: &RunConfig) -> Result<Vec<StationarySample>> {
    let run = run_chain(ModelConfig::new(cfg.r)?, cfg.case.distribution(), cfg.seed, cfg.n_seasons, cfg.burn_in)?;
    Ok(stationary_samples(&run))
}

fn zero_fraction(samples: &[StationarySample]) -> f64 {
    samples.iter().filter(|s| s.z == 0.0).count() as f64 / samples.len() as f64
}

fn mean_positive(samples: &[StationarySample]) -> f64 {
    let pos: Vec<f64> = samples.iter().map(|s| s.z).filter(|&z| z > 0.0).collect();
    pos.iter().sum::<f64>() / pos.len() as f64
}

fn draw(cfg: &RunConfig, out: &mut Output, n: usize) -> Result<Value> {
    let dist = cfg.case.distribution();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs = draw_pairs(&dist, &mut rng, n);
    let mut t = Table::new(["delta", "tau"]);
    pairs.iter().for_each(|p| t.push(vec![p.delta, p.tau]));
    out.table("draws", &t)?;
    let sample = (n >= 2).then(|| PairMoments::from_draws(&pairs));
    Ok(json!({ "case": cfg.case.label(), "n": n, "sample": sample, "theoretical": dist.moments() }))
}

fn bivariate(
    cfg: &RunConfig,
    out: &mut Output,
    priors: &[f64],
    grid2d: usize,
    re_max: f64,
    overlay: usize,
) -> Result<Value> {
    const OP: &str = "bivariate";
    let model = r2_model(cfg, OP)?;
    if !(re_max > 1.0) || grid2d == 0 {
        return Err(Error::invalid(OP, "need re_max > 1 and a nonempty grid"));
    }
    let mut results = Vec::new();
    for &p in priors {
        let zs: Vec<f64> = (0..grid2d).map(|i| (i as f64 + 0.5) / grid2d as f64).collect();
        let res: Vec<f64> = (0..grid2d).map(|j| 1.0 + (re_max - 1.0) * (j as f64 + 0.5) / grid2d as f64).collect();
        let rows = zs
            .par_iter()
            .map(|&z| res.iter().map(|&r| Ok(vec![z, r, model.biv_density(p, z, r)?])).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut t = Table::new(["z", "r_e", "density"]);
        rows.into_iter().flatten().for_each(|r| t.push(r));
        let positive = t.rows.iter().filter(|r| r[2] > 0.0).count();
        out.table(&format!("bivariate_p{}", tag(p)), &t)?;

        let sims = sample_given_prior(model.distribution(), p, overlay, cfg.seed)?;
        let mut o = Table::new(["r_e", "z", "in_support"]);
        let mut outbreaks = 0;
        let mut inside = 0;
        for &(r, z) in &sims {
            let ok = z > 0.0 && in_region_a(p, z, r);
            outbreaks += usize::from(z > 0.0);
            inside += usize::from(ok);
            o.push(vec![r, z, f64::from(u8::from(ok))]);
        }
        out.table(&format!("overlay_p{}", tag(p)), &o)?;
        results.push(json!({
            "p": p,
            "support_fraction": positive as f64 / t.rows.len() as f64,
            "min_density": t.rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min),
            "overlay_outbreaks": outbreaks,
            "overlay_in_support": inside,
        }));
    }
    Ok(json!({ "case": cfg.case.label(), "densities": results }))
}

fn transition(cfg: &RunConfig, out: &mut Output, priors: &[f64], re: Option<f64>) -> Result<Value> {
    let model = r2_model(cfg, "transition")?;
    let n = cfg.grid_n;
    let mut results = Vec::new();
    for &p in priors {
        let law = model.transition_law(p, n)?;
        let centers = law.centers();
        let dens = centers.par_iter().map(|&x| model.transition_density(p, x)).collect::<Result<Vec<_>>>()?;
        let mut t = Table::new(["p_next", "density"]);
        centers.iter().zip(&dens).for_each(|(&x, &d)| t.push(vec![x, d]));
        out.table(&format!("transition_p{}", tag(p)), &t)?;
        let mut entry = json!({ "p": p, "transition": law_summary(&law) });
        if let Some(r) = re {
            let cond = model.conditional_law(p, r, n)?;
            let centers = cond.centers();
            let dens = centers
                .par_iter()
                .map(|&z| model.conditional_density_z(p, r, z))
                .collect::<Result<Vec<_>>>()?;
            let mut c = Table::new(["z", "density"]);
            centers.iter().zip(&dens).for_each(|(&z, &d)| c.push(vec![z, d]));
            out.table(&format!("conditional_p{}_re{}", tag(p), tag(r)), &c)?;
            entry["conditional"] = law_summary(&cond);
            entry["re"] = json!(r);
        }
        results.push(entry);
    }
    Ok(json!({ "case": cfg.case.label(), "results": results }))
}

fn kde_or_note(zs: &[f64], grid: usize) -> std::result::Result<KdeEstimate, String> {
    kde(zs, Bandwidth::Silverman, grid).map_err(|e| e.to_string())
}

fn stationary(cfg: &RunConfig, out: &mut Output, res: &[f64], window: f64, cond_cells: usize) -> Result<Value> {
    let samples = simulate_samples(cfg)?;
    let zs: Vec<f64> = samples.iter().map(|s| s.z).collect();
    let sim_kde = kde(&zs, Bandwidth::Silverman, cfg.grid_n)?;
    out.table("stationary_simulated", &kde_table(&sim_kde))?;
    out.json("stationary_simulated_meta", &kde_sidecar(&sim_kde))?;
    let mut summary = json!({
        "case": cfg.case.label(),
        "r": cfg.r,
        "samples": samples.len(),
        "atom_simulated": zero_fraction(&samples),
        "mean_positive_z": mean_positive(&samples),
    });

    let analytic = if cfg.r == 2 {
        let model = r2_model(cfg, "stationary")?;
        let law = model.stationary_solve(cfg.grid_n)?;
        let mut t = Table::new(["z", "density"]);
        law.law.centers().iter().zip(law.law.density_values()).for_each(|(&z, d)| t.push(vec![z, d]));
        out.table("stationary_analytic", &t)?;
        let h = sim_kde.grid_step();
        let l1: f64 =
            sim_kde.grid.iter().zip(&sim_kde.values).map(|(&x, &v)| (v - law.law.density_at(x)).abs() * h).sum();
        summary["atom_analytic"] = json!(law.law.atom);
        summary["sweeps"] = json!(law.sweeps);
        summary["l1_analytic_vs_kde"] = json!(l1);
        Some((model, law.law))
    } else {
        None
    };

    let mut conds = Vec::new();
    for &r in res {
        let window_samples = conditional_window(&samples, r, window)?;
        let wz: Vec<f64> = window_samples.iter().map(|s| s.z).collect();
        let mut entry = json!({ "re": r, "window": window, "window_count": wz.len() });
        if !wz.is_empty() {
            entry["simulated_mean"] = json!(wz.iter().sum::<f64>() / wz.len() as f64);
        }
        match kde_or_note(&wz, cfg.grid_n) {
            Ok(k) => {
                out.table(&format!("stationary_conditional_simulated_re{}", tag(r)), &kde_table(&k))?;
            }
            Err(note) => entry["simulated_kde"] = json!(note),
        }
        if let Some((model, law)) = &analytic {
            let c = model.stationary_conditional_z(law, r, cond_cells)?;
            let mut t = Table::new(["z", "density"]);
            c.law.centers().iter().zip(c.law.density_values()).for_each(|(&z, d)| t.push(vec![z, d]));
            out.table(&format!("stationary_conditional_analytic_re{}", tag(r)), &t)?;
            entry["analytic"] = law_summary(&c.law);
        }
        conds.push(entry);
    }
    summary["conditionals"] = json!(conds);
    Ok(summary)
}

fn scatter(cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    let samples = simulate_samples(cfg)?;
    let mut t = Table::new(["r_e", "z"]);
    samples.iter().for_each(|s| t.push(vec![s.r_e, s.z]));
    out.table("scatter", &t)?;
    let mut c = Table::new(["z", "r_e_curve"]);
    (0..cfg.grid_n).map(|i| (i as f64 + 0.5) / cfg.grid_n as f64).for_each(|z| c.push(vec![z, final_size_curve(z)]));
    out.table("curve", &c)?;
    let report = scatter_support_check(&samples);
    Ok(json!({ "case": cfg.case.label(), "r": cfg.r, "samples": samples.len(), "support": report }))
}

fn forecast(cfg: &RunConfig, out: &mut Output, p: f64, re: f64) -> Result<Value> {
    let model = r2_model(cfg, "forecast")?;
    let law = model.conditional_law(p, re, cfg.grid_n)?;
    let mut t = Table::new(["z", "density"]);
    if law.cells() > 0 {
        let centers = law.centers();
        let dens = centers.par_iter().map(|&z| model.conditional_density_z(p, re, z)).collect::<Result<Vec<_>>>()?;
        centers.iter().zip(&dens).for_each(|(&z, &d)| t.push(vec![z, d]));
    }
    out.table(&format!("forecast_p{}_re{}", tag(p), tag(re)), &t)?;
    Ok(json!({ "case": cfg.case.label(), "p": p, "re": re, "forecast": law_summary(&law) }))
}

fn simulate(cfg: &RunConfig, out: &mut Output) -> Result<Value> {
    let run = run_chain(ModelConfig::new(cfg.r)?, cfg.case.distribution(), cfg.seed, cfg.n_seasons, cfg.burn_in)?;
    out.table("chain", &chain_table(&run))?;
    let samples = stationary_samples(&run);
    let zs: Vec<f64> = samples.iter().map(|s| s.z).collect();
    let mut summary = json!({
        "case": cfg.case.label(),
        "r": cfg.r,
        "seasons": run.len(),
        "retained": samples.len(),
        "atom": zero_fraction(&samples),
        "mean_positive_z": mean_positive(&samples),
        "support": scatter_support_check(&samples),
    });
    match kde_or_note(&zs, cfg.grid_n) {
        Ok(k) => {
            out.table("stationary_kde", &kde_table(&k))?;
            out.json("stationary_kde_meta", &kde_sidecar(&k))?;
        }
        Err(note) => summary["kde"] = json!(note),
    }
    Ok(summary)
}
