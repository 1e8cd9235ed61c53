//! Scenario execution: initial data, evolution, modulation tracking and the
//! monitored functionals, plus the offline `report` that rebuilds every
//! number from a persisted run directory.

use std::path::{Path, PathBuf};

use gkdv_core::evolve::{evolve, DriftSummary, EvolveConfig, Termination, TimeSeries};
use gkdv_core::functionals::{
    energy, mass, mass_gap, mass_identity_residual, morawetz_derivative_check, morawetz_rate, tail_mass, virial_j,
    virial_m, weighted_mass, Side, WeightKind,
};
use gkdv_core::io::read_field;
use gkdv_core::modulation::{rates_consistency, rates_envelope, track_with, ModulationTrack, RatesConsistency};
use gkdv_core::soliton::{q_direction, q_profile, soliton_on_grid};
use gkdv_core::{Field, Frame, Grid};
use serde::{Deserialize, Serialize};

use crate::config::{Monitor, Recipe, ScenarioConfig};
use crate::error::{LabError, LabResult};
use crate::persist::{
    ensure_writable, load_series, read_json, save_series, track_csv, write_json, write_text, Table, CONFIG_FILE,
    FUNCTIONALS_FILE, REPORT_FILE, SERIES_DIR, TRACK_FILE,
};

/// Thresholds of the invariant checks recorded in every report.
pub const MASS_DRIFT_TOL: f64 = 1e-10;
pub const ENERGY_DRIFT_TOL: f64 = 1e-8;
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
pub const MASS_IDENTITY_TOL: f64 = 1e-8;
pub const MORAWETZ_TOL: f64 = 1e-5;
/// Records with `||eps||_2` below this are left out of the rates envelope.
pub const ENVELOPE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapSign {
    Positive,
    Zero,
    Negative,
}

impl GapSign {
    pub fn of(gap: f64) -> Self {
        if gap > 0.0 {
            GapSign::Positive
        } else if gap < 0.0 {
            GapSign::Negative
        } else {
            GapSign::Zero
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= threshold` (a NaN value fails).
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, passed: value <= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFiles {
    pub config: String,
    pub series: String,
    pub track: String,
    pub functionals: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEnvelope {
    pub offset: f64,
    /// Largest `tail_mass / e^{-x0/6}` over the close snapshots.
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelopes {
    /// Smallest `C` bounding the modulation rates by the `eps` norms.
    pub rates_c: Option<f64>,
    pub rates_consistency: Option<RatesConsistency>,
    pub decay_ratio: Option<f64>,
    pub tails: Vec<TailEnvelope>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub mass_gap: f64,
    pub mass_gap_sign: GapSign,
    pub termination: Termination,
    pub drift: DriftSummary,
    pub snapshots: usize,
    pub departure_time: Option<f64>,
    pub rescued_snapshots: usize,
    /// Largest `||eps||_2` before departure.
    pub max_eps_l2: Option<f64>,
    pub files: ReportFiles,
    pub envelopes: Envelopes,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Everything derived from one series.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: RunReport,
    pub track: ModulationTrack,
    pub functionals: Table,
}

/// A finished scenario together with its in-memory data.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub dir: PathBuf,
    pub series: TimeSeries,
    pub analysis: Analysis,
}

pub fn initial_data(config: &ScenarioConfig) -> LabResult<Field> {
    let grid = Grid::new(config.grid.length, config.grid.n)?;
    let u0 = match &config.initial {
        Recipe::ScaledQ { a } => q_profile(&grid).scale(*a),
        Recipe::FramedQ { lambda, x } => soliton_on_grid(&grid, Frame::new(*lambda, *x)?)?,
        Recipe::PerturbedQ { direction, coefficient } => {
            let d = q_direction(&grid, *direction);
            q_profile(&grid).zip_map(&d, |q, e| q + coefficient * e)?
        }
        Recipe::File { path } => {
            let f = read_field(path)?;
            if f.grid() != &grid {
                return Err(LabError::Corrupt {
                    path: path.clone(),
                    message: format!(
                        "field grid (L={}, N={}) differs from the configured grid",
                        f.grid().length(),
                        f.grid().len()
                    ),
                });
            }
            f
        }
    };
    Ok(u0)
}

fn initial_guess(config: &ScenarioConfig) -> Frame {
    match config.initial {
        Recipe::FramedQ { lambda, x } => Frame { lambda, x },
        _ => Frame::IDENTITY,
    }
}

fn functional_columns(config: &ScenarioConfig) -> Vec<String> {
    let m = &config.monitors;
    let mut cols: Vec<String> = vec!["t".into(), "mass".into(), "energy".into()];
    if m.has(Monitor::VirialJ) {
        cols.push("virial_j".into());
    }
    if m.has(Monitor::VirialM) {
        cols.push("virial_m".into());
    }
    if m.has(Monitor::MassIdentity) {
        cols.push("mass_identity".into());
    }
    if m.has(Monitor::Morawetz) {
        cols.push("morawetz".into());
        cols.push("morawetz_rate".into());
    }
    if m.has(Monitor::Tails) {
        for x0 in &m.tail_offsets {
            cols.push(format!("tail_{x0}"));
        }
    }
    cols
}

/// Decomposes every snapshot, evaluates the enabled monitors and assembles
/// the report. Depends only on `config` and `series`.
pub fn analyze(config: &ScenarioConfig, series: &TimeSeries) -> LabResult<Analysis> {
    let m = &config.monitors;
    let u0 = &series.records[0].field;
    let gap = mass_gap(u0);
    let nan = f64::NAN;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(series.records.len());
    let mut index = 0usize;
    let mut tail_max = vec![0.0f64; m.tail_offsets.len()];
    let mut any_close = false;
    let mut any_converged = false;

    let track = track_with(series, initial_guess(config), config.delta, |rec, dec| {
        let u = &series.records[index].field;
        index += 1;
        let mut row = vec![rec.t, mass(u), energy(u)];
        // Identities of eps hold wherever the decomposition converged; the
        // tail envelope only makes sense inside the tube.
        let conv = dec.filter(|d| d.converged);
        let close = conv.filter(|_| !rec.departed);
        let frame = close.map(|d| d.frame);
        if m.has(Monitor::VirialJ) {
            row.push(conv.and_then(|d| virial_j(&d.eps, d.frame.lambda).ok()).unwrap_or(nan));
        }
        if m.has(Monitor::VirialM) {
            row.push(conv.and_then(|d| virial_m(&d.eps, d.frame.lambda).ok()).unwrap_or(nan));
        }
        if m.has(Monitor::MassIdentity) {
            row.push(conv.map(|d| mass_identity_residual(&d.eps, gap)).unwrap_or(nan));
        }
        if m.has(Monitor::Morawetz) {
            let (r, c) = (m.morawetz_radius, m.morawetz_center);
            row.push(weighted_mass(u, WeightKind::Cutoff, r, c).unwrap_or(nan));
            row.push(morawetz_rate(u, WeightKind::Cutoff, r, c).unwrap_or(nan));
        }
        if m.has(Monitor::Tails) {
            for (j, &x0) in m.tail_offsets.iter().enumerate() {
                let tail = frame.and_then(|f| tail_mass(u, f, x0, Side::Left).ok());
                if let Some(v) = tail {
                    tail_max[j] = tail_max[j].max(v / (-x0 / 6.0).exp());
                }
                row.push(tail.unwrap_or(nan));
            }
        }
        any_close |= close.is_some();
        any_converged |= conv.is_some();
        rows.push(row);
    });

    let mut checks = vec![
        Check::at_most("mass_drift", series.drift.max_rel_mass_drift, MASS_DRIFT_TOL),
        Check::at_most("energy_drift", series.drift.max_rel_energy_drift, ENERGY_DRIFT_TOL),
    ];
    let close = track.close_records();
    let converged: Vec<_> = track.records.iter().filter(|r| r.converged).collect();
    let ortho = converged.iter().map(|r| (r.rho1.abs() + r.rho2.abs()) / (1.0 + r.eps_l2)).fold(0.0, f64::max);
    if !converged.is_empty() {
        checks.push(Check::at_most("orthogonality", ortho, ORTHOGONALITY_TOL));
    }
    let table = Table { columns: functional_columns(config), rows };
    if m.has(Monitor::MassIdentity) && any_converged {
        let worst =
            table.column("mass_identity").unwrap_or_default().into_iter().filter(|v| !v.is_nan()).fold(0.0, f64::max);
        checks.push(Check::at_most("mass_identity", worst, MASS_IDENTITY_TOL));
    }
    if m.has(Monitor::Morawetz) && series.records.len() >= 3 {
        let mc = morawetz_derivative_check(series, WeightKind::Cutoff, m.morawetz_radius, m.morawetz_center)?;
        checks.push(Check::at_most("morawetz", mc.max_mismatch, MORAWETZ_TOL));
    }

    let max_eps_l2 = close.iter().map(|r| r.eps_l2).filter(|v| v.is_finite()).reduce(f64::max);
    let rates_c = m.has(Monitor::Rates).then(|| rates_envelope([&track], ENVELOPE_FLOOR));
    let consistency = m.has(Monitor::Rates).then(|| rates_consistency(&track));
    if let Some(c) = rates_c {
        checks.push(Check::at_most("rates_envelope_finite", if c.is_finite() { 0.0 } else { 1.0 }, 0.0));
    }
    let tails: Vec<TailEnvelope> = if m.has(Monitor::Tails) && any_close {
        m.tail_offsets.iter().zip(&tail_max).map(|(&offset, &max_ratio)| TailEnvelope { offset, max_ratio }).collect()
    } else {
        vec![]
    };
    let decay_ratio = tails.iter().map(|t| t.max_ratio).reduce(f64::max);
    if let Some(d) = decay_ratio {
        checks.push(Check::at_most("decay_ratio_finite", if d.is_finite() { 0.0 } else { 1.0 }, 0.0));
    }

    let report = RunReport {
        config: config.clone(),
        mass_gap: gap,
        mass_gap_sign: GapSign::of(gap),
        termination: series.termination,
        drift: series.drift,
        snapshots: series.records.len(),
        departure_time: track.departure_time,
        rescued_snapshots: track.rescued,
        max_eps_l2,
        files: ReportFiles {
            config: CONFIG_FILE.into(),
            series: SERIES_DIR.into(),
            track: TRACK_FILE.into(),
            functionals: FUNCTIONALS_FILE.into(),
        },
        envelopes: Envelopes { rates_c, rates_consistency: consistency, decay_ratio, tails },
        checks,
    };
    Ok(Analysis { report, track, functionals: table })
}

fn write_outputs(dir: &Path, analysis: &Analysis) -> LabResult<()> {
    write_text(&dir.join(TRACK_FILE), &track_csv(&analysis.track.records))?;
    write_text(&dir.join(FUNCTIONALS_FILE), &analysis.functionals.to_csv())?;
    write_json(&dir.join(REPORT_FILE), &analysis.report)
}

/// Evolves the configured initial data, persists the series and every
/// derived output under `config.output`, and returns the run.
pub fn run_scenario(config: &ScenarioConfig) -> LabResult<ScenarioRun> {
    config.validate()?;
    let dir = config.output.clone();
    ensure_writable(&dir)?;
    let u0 = initial_data(config)?;
    let ev = EvolveConfig::new(config.evolve.dt, config.evolve.t_final, config.evolve.stride);
    let series = evolve(&u0, &ev, |_, _| {})?;
    write_json(&dir.join(CONFIG_FILE), config)?;
    save_series(&dir.join(SERIES_DIR), &series)?;
    // Analyze the persisted series so `report` reproduces the same numbers.
    let series = load_series(&dir.join(SERIES_DIR))?;
    let analysis = analyze(config, &series)?;
    write_outputs(&dir, &analysis)?;
    Ok(ScenarioRun { dir, series, analysis })
}

/// Rebuilds the track, functionals and report of a run directory from its
/// persisted config and series, rewriting the derived files.
pub fn report(run_dir: &Path) -> LabResult<RunReport> {
    let config: ScenarioConfig = read_json(&run_dir.join(CONFIG_FILE))?;
    let series = load_series(&run_dir.join(SERIES_DIR))?;
    if series.records.is_empty() {
        return Err(LabError::Corrupt { path: run_dir.join(SERIES_DIR), message: "no snapshots".into() });
    }
    let analysis = analyze(&config, &series)?;
    write_outputs(run_dir, &analysis)?;
    Ok(analysis.report)
}
