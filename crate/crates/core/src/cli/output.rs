use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::RunConfig;
use crate::error::Result;
use crate::export::{Format, Table};

#[derive(Debug, Clone, Serialize)]
pub struct CommandReport {
    pub command: String,
    pub manifest: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

impl CommandReport {
    pub fn summary_json(&self) -> Value {
        json!({
            "command": self.command,
            "manifest": self.manifest,
            "files": self.files,
            "summary": self.summary,
        })
    }
}

enum PlotKind {
    Lines,
    Points,
    Surface,
}

/// Collects the files written by one command.
pub(crate) struct Output {
    dir: PathBuf,
    format: Format,
    files: Vec<PathBuf>,
    plots: Vec<(String, PlotKind, String)>,
}

impl Output {
    pub fn new(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), format, files: Vec::new(), plots: Vec::new() })
    }

    fn create(&mut self, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.dir.join(name);
        let file = BufWriter::new(File::create(&path)?);
        self.files.push(path.clone());
        Ok((path, file))
    }

    pub fn table(&mut self, stem: &str, table: &Table) -> Result<PathBuf> {
        let name = format!("{stem}.{}", self.format.extension());
        let (path, mut w) = self.create(&name)?;
        table.write(&mut w, self.format)?;
        w.flush()?;
        let kind = match table.columns.len() {
            3 => PlotKind::Surface,
            _ if stem.contains("scatter") || stem.contains("overlay") || stem.contains("draw") => PlotKind::Points,
            _ => PlotKind::Lines,
        };
        self.plots.push((name, kind, table.columns.join(" vs ")));
        Ok(path)
    }

    pub fn json(&mut self, stem: &str, value: &Value) -> Result<PathBuf> {
        let (path, mut w) = self.create(&format!("{stem}.json"))?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(path)
    }

    fn gnuplot(&mut self, command: &str) -> Result<()> {
        let mut script = String::from(
            "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n",
        );
        for (name, kind, title) in &self.plots {
            script.push_str(&format!("\n# {title}\n"));
            script.push_str(&match kind {
                PlotKind::Lines => format!("plot '{name}' using 1:2 with lines\npause -1\n"),
                PlotKind::Points => format!("plot '{name}' using 1:2 with points pt 7 ps 0.4\npause -1\n"),
                PlotKind::Surface => {
                    format!("set view map\nsplot '{name}' using 2:1:3 with points pt 5 ps 0.3 palette\nunset view\npause -1\n")
                }
            });
        }
        let (_, mut w) = self.create(&format!("{command}.gp"))?;
        w.write_all(script.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    /// Writes the manifest (inputs, outputs, summary) and returns the report.
    pub fn finish(
        mut self,
        command: &str,
        cfg: &RunConfig,
        args: Value,
        summary: Value,
        gnuplot: bool,
    ) -> Result<CommandReport> {
        if gnuplot && self.format == Format::Csv {
            self.gnuplot(command)?;
        }
        let manifest_path = self.dir.join(format!("{command}-manifest.json"));
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "schema": crate::export::SCHEMA_VERSION,
            "command": command,
            "config": cfg,
            "args": args,
            "outputs": self.files,
            "summary": summary,
        });
        let mut w = BufWriter::new(File::create(&manifest_path)?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        writeln!(w)?;
        w.flush()?;
        Ok(CommandReport { command: command.to_owned(), manifest: manifest_path, files: self.files, summary })
    }
}
