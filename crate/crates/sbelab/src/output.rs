use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use sha2::{Digest, Sha256};

use crate::config::ExperimentSpec;
use crate::error::{HarnessError, Result};

/// The self-describing columns that lead every CSV row.
pub const KEY_COLUMNS: [&str; 7] = ["experiment", "seed", "model", "theta", "N", "dt", "T"];

#[derive(Debug, Clone, PartialEq)]
pub struct RowKey {
    cells: [String; 7],
}

impl RowKey {
    pub fn new(spec: &ExperimentSpec) -> Self {
        let m = &spec.model;
        RowKey {
            cells: [
                spec.kind.to_string(),
                spec.seed.to_string(),
                m.kind.to_string(),
                m.theta.to_string(),
                m.n.to_string(),
                m.dt.to_string(),
                m.horizon.to_string(),
            ],
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.cells[4] = n.to_string();
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.cells[5] = dt.to_string();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &RowKey, values: Vec<String>) {
        assert_eq!(values.len(), self.columns.len(), "row width of table {}", self.name);
        let mut row = key.cells.to_vec();
        row.extend(values);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = KEY_COLUMNS.iter().map(|c| c.to_string()).chain(self.columns.iter().cloned());
        w.write_record(header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))
    }
}

/// One acceptance check of a run. Report-only entries never fail the run.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub target: String,
    pub passed: bool,
    pub gated: bool,
}

impl Gate {
    pub fn check(name: impl Into<String>, value: f64, target: impl Into<String>, passed: bool) -> Self {
        Gate {
            name: name.into(),
            value,
            target: target.into(),
            passed,
            gated: true,
        }
    }

    /// `|value - centre| <= tol`.
    pub fn within(name: impl Into<String>, value: f64, centre: f64, tol: f64) -> Self {
        Self::check(name, value, format!("{centre} ± {tol}"), (value - centre).abs() <= tol)
    }

    pub fn report(name: impl Into<String>, value: f64, note: impl Into<String>) -> Self {
        Gate {
            name: name.into(),
            value,
            target: note.into(),
            passed: true,
            gated: false,
        }
    }

    pub fn status(&self) -> &'static str {
        match (self.gated, self.passed) {
            (false, _) => "report",
            (true, true) => "pass",
            (true, false) => "fail",
        }
    }
}

/// Tables and gates produced by one experiment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub gates: Vec<Gate>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| !g.gated || g.passed)
    }

    pub fn gate_table(&self, key: &RowKey) -> Table {
        let mut t = Table::new("summary", &["gate", "value", "target", "status"]);
        for g in &self.gates {
            t.push(key, vec![g.name.clone(), g.value.to_string(), g.target.clone(), g.status().to_string()]);
        }
        t
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

/// Writes every table plus `summary.csv` and `manifest.txt` into `spec.out`.
/// Returns the paths written.
pub fn write_run(spec: &ExperimentSpec, outcome: &Outcome, wall: Duration) -> Result<Vec<PathBuf>> {
    let dir = &spec.out;
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let summary = outcome.gate_table(&RowKey::new(spec));
    let mut written = Vec::new();
    let mut sums = Vec::new();
    for t in outcome.tables.iter().chain(std::iter::once(&summary)) {
        let bytes = t.to_csv()?;
        let path = dir.join(t.file_name());
        write(&path, &bytes)?;
        sums.push((t.file_name(), sha256_hex(&bytes)));
        written.push(path);
    }

    let mut m = String::new();
    let _ = writeln!(m, "sbelab {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "seed = {}", spec.seed);
    let _ = writeln!(m, "wall_time_s = {:.3}", wall.as_secs_f64());
    let _ = writeln!(m, "\n[spec]");
    for (k, v) in spec.snapshot() {
        let _ = writeln!(m, "{k} = {v}");
    }
    let _ = writeln!(m, "\n[files]");
    for (name, sum) in &sums {
        let _ = writeln!(m, "{sum}  {name}");
    }
    let path = dir.join("manifest.txt");
    write(&path, m.as_bytes())?;
    written.push(path);
    Ok(written)
}
