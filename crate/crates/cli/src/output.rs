use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use edge_spectra::degennes::{DeGennesConfig, THRESHOLD_GAP};
use edge_spectra::diskmode::REFINEMENT_TOL;
use edge_spectra::effective::{EDGE_MASS_TOL, MIN_SLOPE, TABLE_SPACING};
use edge_spectra::geometry::GAUSS_BONNET_TOL;
use serde::Serialize;
use serde_json::{json, Value};

/// A CSV table with `# key = value` metadata lines above the header.
pub struct Table {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }
}

/// Formats any cell value.
#[macro_export]
macro_rules! cells {
    ($($x:expr),* $(,)?) => { vec![$($x.to_string()),*] };
}

/// Output directory of one run; records what was written and what failed.
pub struct Run {
    pub dir: PathBuf,
    pub command: String,
    outputs: Vec<String>,
    failures: Vec<String>,
}

impl Run {
    pub fn new(dir: &Path, command: &str) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            outputs: Vec::new(),
            failures: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> anyhow::Result<fs::File> {
        let path = self.dir.join(name);
        let f = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(f)
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> anyhow::Result<()> {
        let mut f = self.create(name)?;
        for (k, v) in &table.meta {
            writeln!(f, "# {k} = {v}")?;
        }
        let mut w = csv::Writer::from_writer(f);
        w.write_record(&table.header)?;
        for r in &table.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut f = self.create(name)?;
        serde_json::to_writer_pretty(&mut f, value)?;
        writeln!(f)?;
        Ok(())
    }

    /// Records a failed item; the run continues and exits nonzero.
    pub fn fail(&mut self, item: impl std::fmt::Display, err: impl std::fmt::Display) {
        self.failures.push(format!("{item}: {err}"));
    }

    /// Writes `<command>.manifest.json`; returns its path and the failures.
    pub fn finish(mut self, args: Value, config: Option<&ConfigEcho>) -> anyhow::Result<(PathBuf, Vec<String>)> {
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "arguments": args,
            "config": config,
            "tolerances": tolerances(),
            "outputs": self.outputs,
            "status": if self.failures.is_empty() { "ok" } else { "partial" },
            "failures": self.failures,
        });
        let name = format!("{}.manifest.json", self.command);
        let mut f = fs::File::create(self.dir.join(&name))?;
        serde_json::to_writer_pretty(&mut f, &manifest)?;
        writeln!(f)?;
        self.outputs.push(name.clone());
        Ok((self.dir.join(name), self.failures))
    }
}

/// The config file as read, for the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub path: String,
    pub entries: Vec<(String, String)>,
}

fn tolerances() -> Value {
    json!({
        "half_line_solver": DeGennesConfig::default(),
        "threshold_gap": THRESHOLD_GAP,
        "dispersion_table_spacing": TABLE_SPACING,
        "weyl_min_slope": MIN_SLOPE,
        "matrix_edge_mass": EDGE_MASS_TOL,
        "gauss_bonnet": GAUSS_BONNET_TOL,
        "radial_refinement_over_h": REFINEMENT_TOL,
    })
}
