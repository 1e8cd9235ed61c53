//! Scenario configuration: a TOML file with `[grid]`, `[initial]`,
//! `[evolve]` and `[monitors]` sections. See the README for the grammar.

use std::path::{Path, PathBuf};

use gkdv_core::evolve::{DEFAULT_DT, DEFAULT_STRIDE};
use gkdv_core::modulation::DEFAULT_DELTA;
use gkdv_core::soliton::Direction;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::ConfigError;

/// Environment variable that replaces the directory holding run outputs.
pub const OUTPUT_ENV: &str = "GKDV_OUTPUT_DIR";

pub const DEFAULT_LENGTH: f64 = 100.0;
pub const DEFAULT_N: usize = 4096;
pub const DEFAULT_T: f64 = 1.0;
pub const DEFAULT_MORAWETZ_RADIUS: f64 = 20.0;
pub const DEFAULT_TAIL_OFFSETS: [f64; 6] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "camelCase")]
pub enum Recipe {
    /// `a Q`.
    ScaledQ { a: f64 },
    /// `lambda^{-1/2} Q((x - x0) / lambda)`.
    FramedQ { lambda: f64, x: f64 },
    /// `Q + coefficient * direction`.
    PerturbedQ { direction: Direction, coefficient: f64 },
    /// A field file in the columnar text format.
    File { path: PathBuf },
}

impl Recipe {
    pub const NAMES: [&'static str; 4] = ["scaledQ", "framedQ", "perturbedQ", "file"];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Monitor {
    VirialJ,
    VirialM,
    Morawetz,
    Tails,
    Rates,
    MassIdentity,
}

impl Monitor {
    pub const ALL: [Monitor; 6] =
        [Monitor::VirialJ, Monitor::VirialM, Monitor::Morawetz, Monitor::Tails, Monitor::Rates, Monitor::MassIdentity];

    pub fn name(self) -> &'static str {
        match self {
            Monitor::VirialJ => "virialJ",
            Monitor::VirialM => "virialM",
            Monitor::Morawetz => "morawetz",
            Monitor::Tails => "tails",
            Monitor::Rates => "rates",
            Monitor::MassIdentity => "massIdentity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveSettings {
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSettings {
    pub enabled: Vec<Monitor>,
    pub morawetz_radius: f64,
    pub morawetz_center: f64,
    pub tail_offsets: Vec<f64>,
}

impl MonitorSettings {
    pub fn has(&self, m: Monitor) -> bool {
        self.enabled.contains(&m)
    }
}

impl Default for MonitorSettings {
    fn default() -> Self {
        Self {
            enabled: Monitor::ALL.to_vec(),
            morawetz_radius: DEFAULT_MORAWETZ_RADIUS,
            morawetz_center: 0.0,
            tail_offsets: DEFAULT_TAIL_OFFSETS.to_vec(),
        }
    }
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: GridConfig,
    pub initial: Recipe,
    pub evolve: EvolveSettings,
    pub delta: f64,
    pub monitors: MonitorSettings,
    pub output: PathBuf,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Defaults around the given recipe, writing to `runs/<name>`.
    pub fn new(name: &str, initial: Recipe) -> Self {
        Self {
            name: name.to_string(),
            grid: GridConfig { length: DEFAULT_LENGTH, n: DEFAULT_N },
            initial,
            evolve: EvolveSettings { dt: DEFAULT_DT, t_final: DEFAULT_T, stride: DEFAULT_STRIDE },
            delta: DEFAULT_DELTA,
            monitors: MonitorSettings::default(),
            output: Path::new("runs").join(name),
            seed: 0,
        }
    }

    /// Checks every field; the error names the offending one.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &str, message: String| Err(ConfigError::invalid(field, message));
        let GridConfig { length, n } = self.grid;
        if !(length.is_finite() && length > 0.0) {
            return bad("grid.L", format!("L must be positive, got {length}"));
        }
        if n % 2 != 0 {
            return bad("grid.N", "N must be even".into());
        }
        if n < 16 {
            return bad("grid.N", format!("N must be at least 16, got {n}"));
        }
        let e = self.evolve;
        if !(e.dt.is_finite() && e.dt > 0.0) {
            return bad("evolve.dt", format!("dt must be positive, got {}", e.dt));
        }
        if !(e.t_final.is_finite() && e.t_final > 0.0) {
            return bad("evolve.T", format!("T must be positive, got {}", e.t_final));
        }
        if e.stride == 0 {
            return bad("evolve.stride", "stride must be at least 1".into());
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad("delta", format!("delta must be positive, got {}", self.delta));
        }
        match &self.initial {
            Recipe::ScaledQ { a } if !a.is_finite() => return bad("initial.a", format!("a must be finite, got {a}")),
            Recipe::FramedQ { lambda, x } => {
                if !(lambda.is_finite() && *lambda > 0.0) {
                    return bad("initial.lambda", format!("lambda must be positive, got {lambda}"));
                }
                if !x.is_finite() {
                    return bad("initial.x", format!("x must be finite, got {x}"));
                }
            }
            Recipe::PerturbedQ { coefficient, .. } if !coefficient.is_finite() => {
                return bad("initial.coefficient", format!("coefficient must be finite, got {coefficient}"));
            }
            _ => {}
        }
        let m = &self.monitors;
        if m.has(Monitor::Morawetz) {
            let r = m.morawetz_radius;
            if !(r > 0.0 && r <= 0.25 * length) {
                return bad(
                    "monitors.morawetz_radius",
                    format!("radius must lie in (0, L/4 = {}], got {r}", 0.25 * length),
                );
            }
            if !m.morawetz_center.is_finite() {
                return bad("monitors.morawetz_center", "center must be finite".into());
            }
        }
        if m.has(Monitor::Tails) {
            if m.tail_offsets.is_empty() {
                return bad("monitors.tail_offsets", "at least one offset is required".into());
            }
            if let Some(x0) = m.tail_offsets.iter().find(|&&x0| !(x0 >= 0.0 && x0 <= 0.5 * length)) {
                return bad("monitors.tail_offsets", format!("offset {x0} not in [0, L/2]"));
            }
        }
        if self.output.as_os_str().is_empty() {
            return bad("output", "output directory must not be empty".into());
        }
        Ok(())
    }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Removes and returns `key` from `table`, typed.
struct Section<'a> {
    name: &'a str,
    table: Table,
}

impl<'a> Section<'a> {
    fn new(name: &'a str, table: Table) -> Self {
        Self { name, table }
    }

    fn field(&self, key: &str) -> String {
        if self.name.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.name)
        }
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn float(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(v)),
            Some(Value::Integer(v)) => Ok(Some(v as f64)),
            Some(other) => Err(ConfigError::invalid(&self.field(key), format!("expected a number, got {other}"))),
        }
    }

    fn uint(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Integer(v)) if v >= 0 => Ok(Some(v as u64)),
            Some(other) => {
                Err(ConfigError::invalid(&self.field(key), format!("expected a non-negative integer, got {other}")))
            }
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(other) => Err(ConfigError::invalid(&self.field(key), format!("expected a string, got {other}"))),
        }
    }

    fn subsection(&mut self, key: &'a str) -> Result<Section<'a>, ConfigError> {
        match self.take(key) {
            None => Ok(Section::new(key, Table::new())),
            Some(Value::Table(t)) => Ok(Section::new(key, t)),
            Some(other) => Err(ConfigError::invalid(key, format!("expected a table, got {other}"))),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.table.keys().next() {
            Some(k) => Err(ConfigError::invalid(&self.field(k), "unknown key".into())),
            None => Ok(()),
        }
    }
}

/// Splits `"scaledQ a=0.99"` into the recipe name and its inline parameters.
fn split_recipe(spec: &str) -> Result<(String, Table), ConfigError> {
    let mut tokens = spec.split_whitespace();
    let name = tokens.next().ok_or_else(|| ConfigError::invalid("initial.recipe", "empty recipe".into()))?;
    let mut params = Table::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| ConfigError::invalid("initial.recipe", format!("expected key=value, got `{tok}`")))?;
        let value = match v.parse::<f64>() {
            Ok(x) => Value::Float(x),
            Err(_) => Value::String(v.to_string()),
        };
        if params.insert(k.to_string(), value).is_some() {
            return Err(ConfigError::invalid(&format!("initial.{k}"), "given twice".into()));
        }
    }
    Ok((name.to_string(), params))
}

fn parse_recipe(mut sec: Section, base_dir: &Path) -> Result<Recipe, ConfigError> {
    let spec = sec.string("recipe")?.ok_or_else(|| {
        ConfigError::invalid("initial.recipe", format!("missing; one of {}", Recipe::NAMES.join(", ")))
    })?;
    let (name, inline) = split_recipe(&spec)?;
    for (k, v) in inline {
        if sec.table.insert(k.clone(), v).is_some() {
            return Err(ConfigError::invalid(&format!("initial.{k}"), "given both inline and as a key".into()));
        }
    }
    let need = |sec: &mut Section, key: &str| -> Result<f64, ConfigError> {
        sec.float(key)?.ok_or_else(|| ConfigError::invalid(&format!("initial.{key}"), format!("required by {name}")))
    };
    let recipe = match name.as_str() {
        "scaledQ" => Recipe::ScaledQ { a: need(&mut sec, "a")? },
        "framedQ" => Recipe::FramedQ { lambda: need(&mut sec, "lambda")?, x: sec.float("x")?.unwrap_or(0.0) },
        "perturbedQ" => {
            let dname = sec
                .string("direction")?
                .ok_or_else(|| ConfigError::invalid("initial.direction", "required by perturbedQ".into()))?;
            let direction = Direction::parse(&dname).ok_or_else(|| {
                let valid: Vec<&str> = Direction::ALL.iter().map(|d| d.name()).collect();
                ConfigError::invalid(
                    "initial.direction",
                    format!("unknown direction `{dname}`; valid: {}", valid.join(", ")),
                )
            })?;
            Recipe::PerturbedQ { direction, coefficient: need(&mut sec, "coefficient")? }
        }
        "file" => {
            let path =
                sec.string("path")?.ok_or_else(|| ConfigError::invalid("initial.path", "required by file".into()))?;
            Recipe::File { path: base_dir.join(path) }
        }
        other => {
            return Err(ConfigError::invalid(
                "initial.recipe",
                format!("unknown recipe `{other}`; valid: {}", Recipe::NAMES.join(", ")),
            ))
        }
    };
    sec.finish()?;
    Ok(recipe)
}

fn parse_monitors(mut sec: Section) -> Result<MonitorSettings, ConfigError> {
    let mut m = MonitorSettings::default();
    if let Some(v) = sec.take("enabled") {
        let Value::Array(items) = v else {
            return Err(ConfigError::invalid("monitors.enabled", "expected an array of names".into()));
        };
        m.enabled.clear();
        for item in items {
            let name = item.as_str().unwrap_or_default();
            let mon = Monitor::parse(name).ok_or_else(|| {
                let valid: Vec<&str> = Monitor::ALL.iter().map(|m| m.name()).collect();
                ConfigError::invalid(
                    "monitors.enabled",
                    format!("unknown monitor `{item}`; valid monitors: {}", valid.join(", ")),
                )
            })?;
            if !m.enabled.contains(&mon) {
                m.enabled.push(mon);
            }
        }
    }
    if let Some(r) = sec.float("morawetz_radius")? {
        m.morawetz_radius = r;
    }
    if let Some(c) = sec.float("morawetz_center")? {
        m.morawetz_center = c;
    }
    if let Some(v) = sec.take("tail_offsets") {
        let offsets = v.as_array().map(|a| {
            a.iter().map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64))).collect::<Option<Vec<f64>>>()
        });
        m.tail_offsets = offsets
            .flatten()
            .ok_or_else(|| ConfigError::invalid("monitors.tail_offsets", "expected an array of numbers".into()))?;
    }
    sec.finish()?;
    Ok(m)
}

/// Parses configuration text. `name` seeds the default output directory
/// and `base_dir` resolves relative field-file paths.
pub fn parse_config(text: &str, name: &str, base_dir: &Path) -> Result<ScenarioConfig, ConfigError> {
    let table: Table = toml::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let mut root = Section::new("", table);
    let initial = parse_recipe(root.subsection("initial")?, base_dir)?;
    let mut cfg = ScenarioConfig::new(name, initial);
    if let Some(n) = root.string("name")? {
        cfg.name = n;
        cfg.output = Path::new("runs").join(&cfg.name);
    }
    let mut grid = root.subsection("grid")?;
    if let Some(l) = grid.float("L")? {
        cfg.grid.length = l;
    }
    if let Some(n) = grid.uint("N")? {
        cfg.grid.n = n as usize;
    }
    grid.finish()?;
    let mut ev = root.subsection("evolve")?;
    if let Some(dt) = ev.float("dt")? {
        cfg.evolve.dt = dt;
    }
    if let Some(t) = ev.float("T")? {
        cfg.evolve.t_final = t;
    }
    if let Some(s) = ev.uint("stride")? {
        cfg.evolve.stride = s as usize;
    }
    ev.finish()?;
    cfg.monitors = parse_monitors(root.subsection("monitors")?)?;
    if let Some(d) = root.float("delta")? {
        cfg.delta = d;
    }
    if let Some(o) = root.string("output")? {
        cfg.output = PathBuf::from(o);
    }
    if let Some(s) = root.uint("seed")? {
        cfg.seed = s;
    }
    root.finish()?;
    if let Some(dir) = std::env::var_os(OUTPUT_ENV) {
        let leaf = cfg.output.file_name().map(PathBuf::from).unwrap_or_else(|| PathBuf::from(&cfg.name));
        cfg.output = PathBuf::from(dir).join(leaf);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and validates a scenario file; the file stem names the scenario.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, name, base)
}
