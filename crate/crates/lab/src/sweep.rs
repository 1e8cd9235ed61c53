//! Runs every scenario file of a directory concurrently, one worker per
//! scenario.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::load_config;
use crate::error::{LabError, LabResult};
use crate::run::{run_scenario, RunReport};

#[derive(Debug, Serialize)]
pub struct SweepEntry {
    pub config: PathBuf,
    pub output: Option<PathBuf>,
    /// The run's report, or the error that stopped it.
    pub outcome: Result<RunReport, String>,
}

/// `*.toml` files of `dir`, sorted by name.
pub fn scenario_files(dir: &Path) -> LabResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| LabError::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| LabError::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "toml") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn sweep(dir: &Path) -> LabResult<Vec<SweepEntry>> {
    let files = scenario_files(dir)?;
    let configs: Vec<_> = files.iter().map(|f| load_config(f)).collect();
    let mut owners: BTreeMap<PathBuf, &Path> = BTreeMap::new();
    for (file, cfg) in files.iter().zip(&configs) {
        if let Ok(cfg) = cfg {
            if let Some(other) = owners.insert(cfg.output.clone(), file) {
                return Err(LabError::Corrupt {
                    path: file.clone(),
                    message: format!("output {} is shared with {}", cfg.output.display(), other.display()),
                });
            }
        }
    }
    Ok(files
        .into_par_iter()
        .zip(configs)
        .map(|(config, cfg)| match cfg {
            Ok(cfg) => SweepEntry {
                config,
                output: Some(cfg.output.clone()),
                outcome: run_scenario(&cfg).map(|r| r.analysis.report).map_err(|e| e.to_string()),
            },
            Err(e) => SweepEntry { config, output: None, outcome: Err(e.to_string()) },
        })
        .collect())
}
