use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distribution::{PairDistribution, PresetCase};
use crate::error::{Error, Result};
use crate::export::Format;
use crate::simulate::DEFAULT_BURN_IN;

/// Environment variable that replaces the default output directory.
pub const OUT_ENV: &str = "SEASONAL_DRIFT_OUT";
pub const DEFAULT_OUT: &str = "seasonal-drift-out";
pub const DEFAULT_SEED: u64 = 20_240_601;
/// 20,000 retained seasons after the default burn-in.
pub const DEFAULT_SEASONS: usize = 20_000 + DEFAULT_BURN_IN;
pub const DEFAULT_GRID: usize = 512;

const CUSTOM_KEYS: [&str; 6] = ["a", "b", "mu0", "mu1", "sigma2", "delta_atom"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseSpec {
    Preset(PresetCase),
    Custom(PairDistribution),
}

impl CaseSpec {
    pub fn distribution(&self) -> PairDistribution {
        match *self {
            CaseSpec::Preset(c) => c.distribution(),
            CaseSpec::Custom(d) => d,
        }
    }

    pub fn label(&self) -> String {
        match self {
            CaseSpec::Preset(c) => c.name().to_owned(),
            CaseSpec::Custom(_) => "custom".to_owned(),
        }
    }
}

/// Fully resolved settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub case: CaseSpec,
    pub r: usize,
    pub seed: u64,
    pub n_seasons: usize,
    pub burn_in: usize,
    pub grid_n: usize,
    pub output_dir: PathBuf,
    pub format: Format,
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub case: Option<PresetCase>,
    pub r: Option<usize>,
    pub seed: Option<u64>,
    pub n_seasons: Option<usize>,
    pub burn_in: Option<usize>,
    pub grid_n: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Parses `key = value` lines; blank lines and `#` comments are ignored.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {raw:?}", no + 1)))?;
        let key = k.trim().replace('-', "_");
        if map.insert(key.clone(), v.trim().to_owned()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key}", no + 1)));
        }
    }
    Ok(map)
}

fn take<T: FromStr>(map: &mut BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.remove(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("key {key}: cannot parse {v:?}"))),
    }
}

fn parse_format(s: &str) -> Result<Format> {
    match s.to_ascii_lowercase().as_str() {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(Error::Config(format!("format must be csv or json, got {s:?}"))),
    }
}

/// Merges defaults, the optional config file and command-line overrides, in
/// increasing order of precedence.
pub fn resolve(file: Option<&Path>, flags: Overrides, env_out: Option<PathBuf>) -> Result<RunConfig> {
    let mut map = match file {
        Some(path) => parse_config_text(&std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.display()))
        })?)?,
        None => BTreeMap::new(),
    };
    let file_case: Option<String> = take(&mut map, "case")?;
    let mut custom = BTreeMap::new();
    for key in CUSTOM_KEYS {
        if let Some(v) = take::<f64>(&mut map, key)? {
            custom.insert(key, v);
        }
    }
    let file_r = take(&mut map, "r")?;
    let file_seed = take(&mut map, "seed")?;
    let file_seasons = take(&mut map, "seasons")?;
    let file_burn = take(&mut map, "burn_in")?;
    let file_grid = take(&mut map, "grid")?;
    let file_out: Option<String> = take(&mut map, "out")?;
    let file_format = take::<String>(&mut map, "format")?.map(|s| parse_format(&s)).transpose()?;
    if let Some(k) = map.keys().next() {
        return Err(Error::Config(format!("unknown key {k}")));
    }

    let case = match (flags.case, file_case, custom.is_empty()) {
        (Some(c), _, _) => CaseSpec::Preset(c),
        (None, Some(_), false) => {
            return Err(Error::Config("give either case or custom a, b, mu0, mu1, sigma2, not both".into()))
        }
        (None, Some(name), true) => CaseSpec::Preset(name.parse()?),
        (None, None, false) => CaseSpec::Custom(custom_distribution(&custom)?),
        (None, None, true) => CaseSpec::Preset(PresetCase::Case1),
    };

    let cfg = RunConfig {
        case,
        r: flags.r.or(file_r).unwrap_or(2),
        seed: flags.seed.or(file_seed).unwrap_or(DEFAULT_SEED),
        n_seasons: flags.n_seasons.or(file_seasons).unwrap_or(DEFAULT_SEASONS),
        burn_in: flags.burn_in.or(file_burn).unwrap_or(DEFAULT_BURN_IN),
        grid_n: flags.grid_n.or(file_grid).unwrap_or(DEFAULT_GRID),
        output_dir: flags
            .output_dir
            .or(file_out.map(PathBuf::from))
            .or(env_out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        format: flags.format.or(file_format).unwrap_or(Format::Csv),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn custom_distribution(custom: &BTreeMap<&str, f64>) -> Result<PairDistribution> {
    let get = |k: &str| {
        custom.get(k).copied().ok_or_else(|| Error::Config(format!("custom distribution needs key {k}")))
    };
    let d = PairDistribution::new(get("a")?, get("b")?, get("mu0")?, get("mu1")?, get("sigma2")?)?;
    match custom.get("delta_atom") {
        Some(&w) => d.with_delta_atom(w),
        None => Ok(d),
    }
}

fn validate(cfg: &RunConfig) -> Result<()> {
    if cfg.r < 2 {
        return Err(Error::Config(format!("r must be at least 2, got {}", cfg.r)));
    }
    if cfg.n_seasons <= cfg.burn_in {
        return Err(Error::Config(format!(
            "seasons {} must exceed burn_in {}",
            cfg.n_seasons, cfg.burn_in
        )));
    }
    if cfg.grid_n < 2 {
        return Err(Error::Config(format!("grid must have at least 2 points, got {}", cfg.grid_n)));
    }
    Ok(())
}
