//! Command-line front end. Each subcommand writes figure data as CSV (or JSON)
//! tables plus a JSON manifest of its inputs and outputs, and prints a JSON
//! summary on stdout.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::distribution::PresetCase;
use crate::error::{Error, Result};
use crate::export::Format;

pub use config::{
    parse_config_text, resolve, CaseSpec, Overrides, RunConfig, DEFAULT_OUT, DEFAULT_SEASONS, DEFAULT_SEED,
    OUT_ENV,
};
pub use output::CommandReport;

#[derive(Debug, Parser)]
#[command(name = "seasonal-drift", version, about = "Seasonal epidemics with random immunity drift and transmissibility")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Preset (delta, tau) distribution: case1..case4.
    #[arg(long, global = true)]
    pub case: Option<PresetCase>,
    /// Immunity memory in seasons.
    #[arg(long, global = true)]
    pub r: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Total simulated seasons, burn-in included.
    #[arg(long, global = true)]
    pub seasons: Option<usize>,
    #[arg(long = "burn-in", global = true)]
    pub burn_in: Option<usize>,
    /// Points of one-dimensional grids.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Output directory (default: $SEASONAL_DRIFT_OUT, else ./seasonal-drift-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<FormatArg>,
    /// Flat key=value configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also write a gnuplot script plotting the CSV outputs.
    #[arg(long, global = true)]
    pub gnuplot: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Sample (delta, tau) pairs.
    Draw {
        #[arg(long, default_value_t = 200)]
        n: usize,
    },
    /// Bivariate density of (z, R_e) given last season's attack ratio p (r = 2).
    Bivariate {
        #[arg(long = "p", value_delimiter = ',', default_values_t = [0.1, 0.5])]
        priors: Vec<f64>,
        /// Points per axis of the (z, R_e) grid.
        #[arg(long, default_value_t = 200)]
        grid2d: usize,
        #[arg(long, default_value_t = 3.0)]
        re_max: f64,
        /// Simulated seasons overlaid on each density.
        #[arg(long, default_value_t = 500)]
        overlay: usize,
    },
    /// Transition law of the attack ratio given p, optionally conditioned on R_e (r = 2).
    Transition {
        #[arg(long = "p", value_delimiter = ',', default_values_t = [0.1, 0.5])]
        priors: Vec<f64>,
        #[arg(long)]
        re: Option<f64>,
    },
    /// Stationary law of the attack ratio and its forecasts given R_e.
    Stationary {
        #[arg(long = "re", value_delimiter = ',', default_values_t = [1.3, 1.6])]
        re: Vec<f64>,
        /// Half-width of the R_e window for simulated conditionals.
        #[arg(long, default_value_t = crate::simulate::DEFAULT_WINDOW)]
        window: f64,
        /// Cells of the analytic stationary conditional laws.
        #[arg(long, default_value_t = 100)]
        cond_cells: usize,
    },
    /// Stationary (R_e, z) pairs against the curve R_e = -ln(1 - z)/z.
    Scatter,
    /// Forecast this season's attack ratio from last season's p and observed R_e (r = 2).
    Forecast {
        #[arg(long = "p")]
        prior: f64,
        #[arg(long)]
        re: f64,
    },
    /// Run one chain and export every season.
    Simulate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Draw { .. } => "draw",
            Command::Bivariate { .. } => "bivariate",
            Command::Transition { .. } => "transition",
            Command::Stationary { .. } => "stationary",
            Command::Scatter => "scatter",
            Command::Forecast { .. } => "forecast",
            Command::Simulate => "simulate",
        }
    }
}

impl Cli {
    pub fn resolve_config(&self) -> Result<RunConfig> {
        let c = &self.common;
        let flags = Overrides {
            case: c.case,
            r: c.r,
            seed: c.seed,
            n_seasons: c.seasons,
            burn_in: c.burn_in,
            grid_n: c.grid,
            output_dir: c.out.clone(),
            format: c.format.map(Format::from),
        };
        let env_out = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        resolve(self.common.config.as_deref(), flags, env_out)
    }
}

/// Parses arguments, runs the command and returns its report.
pub fn run_from<I, T>(args: I) -> Result<CommandReport>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    run(&cli)
}

pub fn run(cli: &Cli) -> Result<CommandReport> {
    let cfg = cli.resolve_config()?;
    commands::execute(&cfg, &cli.command, cli.common.gnuplot)
}

/// Entry point of the binary: usage errors exit with 2, failures with 1 after a
/// JSON error record on stderr naming the failing operation.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report.summary_json()).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = json!({
                "error": {
                    "command": cli.command.name(),
                    "operation": e.operation(),
                    "message": e.to_string(),
                }
            });
            eprintln!("{record}");
            ExitCode::from(1)
        }
    }
}
