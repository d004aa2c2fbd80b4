//! Seeded experiment drivers and their serialized records.
//!
//! Every driver expands its configuration into independent trials, runs them
//! on the rayon pool, and aggregates in trial-index order, so output rows do
//! not depend on the number of worker threads.

mod condition;
mod convergence;
mod interp;
mod recovery;
mod weil_study;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_sets::tensor_cardinality;

pub use condition::{condition_trial, run_condition_study, ConditionConfig};
pub use convergence::{run_convergence_study, ConvergenceConfig, ConvergenceTarget, LsVariant};
pub use interp::{run_interp_study, InterpConfig, MeshConfig};
pub use recovery::{run_recovery_study, RecoveryArm, RecoveryConfig, RecoveryPreset};
pub use weil_study::{run_weil_study, WeilConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One CSV cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(i64::from(x))
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Float(x) => Some(x),
            Cell::Int(i) => Some(i as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Int(i) => write!(f, "{i}"),
            // Both forms print the shortest string that round-trips.
            Cell::Float(x) if *x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&x.abs()) => write!(f, "{x}"),
            Cell::Float(x) => write!(f, "{x:e}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

/// Output of one experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub version: String,
    /// The fully resolved configuration, seeds included.
    pub config: serde_json::Value,
    /// Derived quantities needed to re-derive rows, such as random draws.
    pub metadata: BTreeMap<String, serde_json::Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Only in the JSON form; the CSV must be reproducible byte for byte.
    pub wall_time_seconds: f64,
}

impl ExperimentRecord {
    pub(crate) fn new<C: Serialize>(experiment: &str, config: &C, columns: &[&str]) -> Result<Self> {
        Ok(Self {
            experiment: experiment.to_owned(),
            version: VERSION.to_owned(),
            config: serde_json::to_value(config)?,
            metadata: BTreeMap::new(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
            wall_time_seconds: 0.0,
        })
    }

    pub(crate) fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows whose text cells match every `(column, value)` pair.
    pub fn select(&self, filters: &[(&str, &str)]) -> Vec<&[Cell]> {
        let idx: Vec<(usize, &str)> = filters
            .iter()
            .map(|(c, v)| (self.column(c).unwrap_or(usize::MAX), *v))
            .collect();
        self.rows
            .iter()
            .filter(|row| {
                idx.iter()
                    .all(|&(i, v)| row.get(i).is_some_and(|cell| cell.to_string() == v))
            })
            .map(Vec::as_slice)
            .collect()
    }

    /// `#`-prefixed header lines echoing the configuration, then the table.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# experiment: {}", self.experiment)?;
        writeln!(out, "# version: {}", self.version)?;
        writeln!(out, "# config: {}", serde_json::to_string(&self.config)?)?;
        for (key, value) in &self.metadata {
            writeln!(out, "# {key}: {}", serde_json::to_string(value)?)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_string))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Sample-count rule `M(N)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ScalingRule {
    /// `M = 2N`.
    #[serde(rename = "linear_2")]
    Linear2,
    /// `M = 5N/2`.
    #[serde(rename = "linear_2p5")]
    Linear2p5,
    /// `M = 1.5 N ln N`.
    #[serde(rename = "loglinear_1p5")]
    Loglinear1p5,
    /// `M = 0.3 N ln³ N`.
    #[serde(rename = "logcubed_0p3")]
    Logcubed0p3,
    /// `M = factor · N · (ln N)^log_power`.
    Custom { factor: f64, log_power: f64 },
}

/// Result of applying a [`ScalingRule`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleCount {
    pub m: usize,
    /// The rule gave at most `N` and was raised to `N + 1`.
    pub clamped: bool,
}

impl ScalingRule {
    pub fn tag(&self) -> String {
        match *self {
            ScalingRule::Linear2 => "linear_2".into(),
            ScalingRule::Linear2p5 => "linear_2p5".into(),
            ScalingRule::Loglinear1p5 => "loglinear_1p5".into(),
            ScalingRule::Logcubed0p3 => "logcubed_0p3".into(),
            ScalingRule::Custom { factor, log_power } => format!("custom_{factor}_{log_power}"),
        }
    }

    /// Unrounded `M(N)`.
    pub fn raw(&self, n: usize) -> f64 {
        let n = n as f64;
        let (factor, power) = match *self {
            ScalingRule::Linear2 => (2.0, 0.0),
            ScalingRule::Linear2p5 => (2.5, 0.0),
            ScalingRule::Loglinear1p5 => (1.5, 1.0),
            ScalingRule::Logcubed0p3 => (0.3, 3.0),
            ScalingRule::Custom { factor, log_power } => (factor, log_power),
        };
        if power == 0.0 {
            factor * n
        } else {
            factor * n * n.ln().powf(power)
        }
    }

    /// `⌈M(N)⌉`, raised to `N + 1` when smaller.
    pub fn count(&self, n: usize) -> Result<SampleCount> {
        let raw = self.raw(n);
        if !raw.is_finite() || raw < 0.0 {
            return Err(Error::InvalidArgument(format!("rule {} gives M = {raw} at N = {n}", self.tag())));
        }
        let m = raw.ceil() as usize;
        Ok(if m <= n {
            SampleCount { m: n + 1, clamped: true }
        } else {
            SampleCount { m, clamped: false }
        })
    }
}

/// Candidate grid size relative to the sample count. Drawing about half of a
/// grid gives occasional near-singular designs at `M = 2N`; a quarter does not.
const GRID_OVERSAMPLING: u128 = 4;

/// Per-axis degree of a Gauss candidate grid for `m` samples: the smallest
/// `n ≥ k` with `(n+1)^d ≥ 4m`.
pub(crate) fn gauss_grid_degree(k: u32, dimension: usize, m: usize) -> u32 {
    (k..)
        .find(|&n| tensor_cardinality(dimension, n).is_none_or(|t| t >= GRID_OVERSAMPLING * m as u128))
        .expect("grid grows without bound")
}

/// Mean and sample (n−1) standard deviation, summed in slice order.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    match xs.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (xs[0], 0.0),
        n => {
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (mean, var.sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_rules() {
        assert_eq!(ScalingRule::Linear2p5.count(10).unwrap(), SampleCount { m: 25, clamped: false });
        assert_eq!(ScalingRule::Linear2.count(7).unwrap().m, 14);
        // 1.5·20·ln 20 = 89.87
        assert_eq!(ScalingRule::Loglinear1p5.count(20).unwrap().m, 90);
        // 0.3·5·ln³5 = 6.24 > 5
        assert_eq!(ScalingRule::Logcubed0p3.count(5).unwrap(), SampleCount { m: 7, clamped: false });
        assert_eq!(ScalingRule::Logcubed0p3.count(3).unwrap(), SampleCount { m: 4, clamped: true });
        assert_eq!(ScalingRule::Loglinear1p5.count(1).unwrap(), SampleCount { m: 2, clamped: true });
        let custom = ScalingRule::Custom { factor: 3.0, log_power: 0.0 };
        assert_eq!(custom.count(4).unwrap().m, 12);
        let json = serde_json::to_string(&ScalingRule::Logcubed0p3).unwrap();
        assert_eq!(json, r#"{"rule":"logcubed_0p3"}"#);
        assert_eq!(serde_json::from_str::<ScalingRule>(&json).unwrap(), ScalingRule::Logcubed0p3);
    }

    #[test]
    fn grid_degree_covers_four_times_the_samples() {
        assert_eq!(gauss_grid_degree(2, 2, 12), 6);
        // 43² = 1849 is the first square above 4 · 462.
        assert_eq!(gauss_grid_degree(20, 2, 462), 42);
        assert_eq!(gauss_grid_degree(0, 4, 2), 1);
    }

    #[test]
    fn sample_statistics() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
        assert!(mean_std(&[]).0.is_nan());
    }

    #[test]
    fn cells_round_trip_through_text() {
        for x in [0.1, 1e-17, 123456.75, 3e20, -2.5e-9, 0.0] {
            let text = Cell::Float(x).to_string();
            assert_eq!(text.parse::<f64>().unwrap(), x, "{text}");
        }
        assert_eq!(Cell::from(Some(3usize)).to_string(), "3");
        assert_eq!(Cell::from(None::<u64>).to_string(), "");
    }

    #[test]
    fn csv_layout() {
        let mut rec = ExperimentRecord::new("demo", &serde_json::json!({"seed": 1}), &["a", "b"]).unwrap();
        rec.metadata.insert("draw".into(), serde_json::json!([0.5]));
        rec.push(vec!["x".into(), 1.5.into()]);
        rec.wall_time_seconds = 9.0;
        let text = rec.to_csv_string().unwrap();
        let want = format!(
            "# experiment: demo\n# version: {VERSION}\n# config: {{\"seed\":1}}\n# draw: [0.5]\na,b\nx,1.5\n"
        );
        assert_eq!(text, want);
        assert_eq!(rec.select(&[("a", "x")]).len(), 1);
        let mut json = Vec::new();
        rec.write_json(&mut json).unwrap();
        let back: ExperimentRecord = serde_json::from_slice(&json).unwrap();
        assert_eq!(back, rec);
    }
}
