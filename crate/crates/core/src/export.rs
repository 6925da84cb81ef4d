//! Versioned CSV and JSON table output.
//!
//! Every CSV starts with a `# schema=1` comment line followed by a header row.
//! Floating-point cells carry 17 significant digits, so values round-trip exactly.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::Result;
use crate::simulate::{ChainRun, KdeEstimate};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# schema={SCHEMA_VERSION}")?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: &mut W) -> Result<()> {
        let rows: Vec<Vec<serde_json::Value>> =
            self.rows.iter().map(|r| r.iter().map(|&x| json_number(x)).collect()).collect();
        serde_json::to_writer_pretty(
            &mut *w,
            &json!({ "schema": SCHEMA_VERSION, "columns": self.columns, "rows": rows }),
        )?;
        writeln!(w)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, w: &mut W, format: Format) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }

    /// Parses a table written by [`Table::write_csv`].
    pub fn read_csv(text: &str) -> Option<Table> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let columns = lines.next()?.split(',').map(str::to_owned).collect();
        let rows = lines
            .map(|l| l.split(',').map(parse_number).collect::<Option<Vec<f64>>>())
            .collect::<Option<Vec<_>>>()?;
        Some(Table { columns, rows })
    }
}

/// Integers print plainly; everything else uses 17 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_owned()
    } else if x > 0.0 {
        "inf".to_owned()
    } else {
        "-inf".to_owned()
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}

fn json_number(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map(serde_json::Value::Number).unwrap_or(json!(format_number(x)))
}

/// Columns `season, delta, tau, r_e, z_overall, p_1..p_r`, with `p` the state after
/// the season.
pub fn chain_table(run: &ChainRun) -> Table {
    let r = run.config.r();
    let mut t = Table::new(
        ["season", "delta", "tau", "r_e", "z_overall"]
            .into_iter()
            .map(String::from)
            .chain((1..=r).map(|j| format!("p_{j}"))),
    );
    for (k, s) in run.seasons.iter().enumerate() {
        let mut row = vec![k as f64, s.pair.delta, s.pair.tau, s.outcome.r_e, s.outcome.z_overall];
        row.extend_from_slice(s.state.p());
        t.push(row);
    }
    t
}

pub fn kde_table(k: &KdeEstimate) -> Table {
    let mut t = Table::new(["grid", "value"]);
    for (&x, &v) in k.grid.iter().zip(&k.values) {
        t.push(vec![x, v]);
    }
    t
}

pub fn kde_sidecar(k: &KdeEstimate) -> serde_json::Value {
    json!({ "atom": k.defective_mass, "bandwidth": k.bandwidth, "n": k.n })
}
