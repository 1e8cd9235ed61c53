//! On-disk layout of a run directory:
//!
//! ```text
//! <run>/config.json        normalized scenario
//! <run>/series/meta.json   grid, evolve settings, drift summary, snapshot index
//! <run>/series/snap_NNNNNN.txt
//! <run>/track.csv          modulation track
//! <run>/functionals.csv    monitored functionals per snapshot
//! <run>/report.json
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gkdv_core::evolve::{DriftSummary, EvolveConfig, Snapshot, Termination, TimeSeries};
use gkdv_core::io::{read_field, write_field};
use gkdv_core::modulation::TrackRecord;
use gkdv_core::Grid;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

pub const CONFIG_FILE: &str = "config.json";
pub const SERIES_DIR: &str = "series";
pub const META_FILE: &str = "meta.json";
pub const TRACK_FILE: &str = "track.csv";
pub const FUNCTIONALS_FILE: &str = "functionals.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub evolve: EvolveConfig,
    pub drift: DriftSummary,
    pub termination: Termination,
    pub times: Vec<f64>,
    pub files: Vec<String>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> LabResult<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| LabError::Json { path: path.to_path_buf(), source: e })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| LabError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> LabResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| LabError::Json { path: path.to_path_buf(), source: e })
}

pub fn create_dir(path: &Path) -> LabResult<()> {
    std::fs::create_dir_all(path).map_err(|e| LabError::io(path, e))
}

pub fn save_series(dir: &Path, series: &TimeSeries) -> LabResult<()> {
    create_dir(dir)?;
    let files: Vec<String> = (0..series.records.len()).map(|i| format!("snap_{i:06}.txt")).collect();
    for (rec, name) in series.records.iter().zip(&files) {
        let path = dir.join(name);
        write_field(&path, &rec.field).map_err(|e| LabError::io(&path, e))?;
    }
    let meta = SeriesMeta {
        length: series.grid.length(),
        n: series.grid.len(),
        evolve: series.config,
        drift: series.drift,
        termination: series.termination,
        times: series.times(),
        files,
    };
    write_json(&dir.join(META_FILE), &meta)
}

pub fn load_series(dir: &Path) -> LabResult<TimeSeries> {
    let meta_path = dir.join(META_FILE);
    let meta: SeriesMeta = read_json(&meta_path)?;
    if meta.times.len() != meta.files.len() {
        return Err(LabError::Corrupt {
            path: meta_path,
            message: format!("{} times but {} snapshot files", meta.times.len(), meta.files.len()),
        });
    }
    let grid = Grid::new(meta.length, meta.n)?;
    let mut records = Vec::with_capacity(meta.files.len());
    for (&t, name) in meta.times.iter().zip(&meta.files) {
        let path = dir.join(name);
        let field = read_field(&path).map_err(|e| LabError::Corrupt { path: path.clone(), message: e.to_string() })?;
        if field.grid() != &grid {
            return Err(LabError::Corrupt { path, message: "snapshot grid differs from meta.json".into() });
        }
        records.push(Snapshot { t, field });
    }
    let mut series = TimeSeries::from_records(&grid, meta.evolve, records)?;
    series.drift = meta.drift;
    series.termination = meta.termination;
    Ok(series)
}

/// Shortest round-trip representation; `NaN` for missing values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:e}")
    }
}

/// Column order of `track.csv`.
pub const TRACK_COLUMNS: [&str; 14] = [
    "t",
    "s",
    "lambda",
    "x",
    "eps_l2",
    "eps_h1",
    "eps_l8",
    "rho1",
    "rho2",
    "rate_a",
    "rate_b",
    "condition",
    "converged",
    "departed",
];

pub fn track_csv(records: &[TrackRecord]) -> String {
    let mut out = TRACK_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let nums =
            [r.t, r.s, r.lambda, r.x, r.eps_l2, r.eps_h1, r.eps_l8, r.rho1, r.rho2, r.rate_a, r.rate_b, r.condition];
        let cells: Vec<String> = nums.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "{},{},{}", cells.join(","), r.converged as u8, r.departed as u8);
    }
    out
}

/// A CSV table of floats with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn write_text(path: &Path, text: &str) -> LabResult<()> {
    std::fs::write(path, text).map_err(|e| LabError::io(path, e))
}

/// Checks that `dir` can be created and written to.
pub fn ensure_writable(dir: &Path) -> LabResult<()> {
    create_dir(dir)?;
    let probe: PathBuf = dir.join(".write-probe");
    std::fs::write(&probe, b"").map_err(|e| LabError::io(&probe, e))?;
    std::fs::remove_file(&probe).map_err(|e| LabError::io(&probe, e))
}
