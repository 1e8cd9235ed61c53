//! Time integration of `u_t = -(u_xx + u^5)_x` on the periodic grid.
//!
//! The dispersive part `-u_xxx` is integrated exactly by the integrating
//! factor `exp(i k^3 t)`, which is unitary; the quintic flux is dealiased
//! and advanced with classical RK4 in the twisted variable.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{energy_with, mass};
use crate::grid::{Field, Grid, DEALIAS_FACTOR};

pub const DEFAULT_DT: f64 = 2e-4;
pub const DEFAULT_STRIDE: usize = 50;
pub const DEFAULT_BLOWUP_CEILING: f64 = 1e6;
/// Relative per-step mass change that triggers step halving.
pub const DEFAULT_MASS_STEP_TOL: f64 = 1e-13;
const MAX_HALVINGS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Steps between recorded snapshots.
    pub stride: usize,
    pub blowup_ceiling: f64,
    /// `false` flips the sign of the nonlinearity (defocusing), for testing.
    pub focusing: bool,
    /// Halve the step whenever the relative mass change of a step exceeds
    /// this; `None` disables the adaptation.
    pub mass_step_tol: Option<f64>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_final: 1.0,
            stride: DEFAULT_STRIDE,
            blowup_ceiling: DEFAULT_BLOWUP_CEILING,
            focusing: true,
            mass_step_tol: Some(DEFAULT_MASS_STEP_TOL),
        }
    }
}

impl EvolveConfig {
    pub fn new(dt: f64, t_final: f64, stride: usize) -> Self {
        Self { dt, t_final, stride, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::InvalidConfig(format!("T must be positive, got {}", self.t_final)));
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("stride must be at least 1".into()));
        }
        if !(self.blowup_ceiling > 0.0) {
            return Err(Error::InvalidConfig("blow-up ceiling must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps actually taken; the step is shrunk so they tile `T`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_final / self.steps() as f64
    }
}

/// Free Airy evolution `e^{-t d_x^3}`: multiplies the transform by `e^{i t k^3}`.
pub fn airy_propagator(f: &Field, t: f64) -> Field {
    let grid = f.grid();
    let mut spec = f.spectrum();
    for (c, k) in spec.iter_mut().zip(odd_wavenumbers(grid)) {
        *c *= C64::from_polar(1.0, t * k * k * k);
    }
    Field::from_spectrum(grid, spec)
}

fn odd_wavenumbers(grid: &Grid) -> Vec<f64> {
    let n = grid.len();
    grid.wavenumbers().iter().enumerate().map(|(j, &k)| if j == n / 2 { 0.0 } else { k }).collect()
}

#[derive(Debug, Clone)]
pub enum StepOutcome {
    Advanced(Field),
    /// `||u||_inf` crossed the ceiling (or became non-finite).
    BlowUp {
        sup_norm: f64,
    },
}

/// Integrating-factor RK4 stepper working in Fourier space.
pub struct Stepper {
    grid: Grid,
    k: Vec<f64>,
    /// `-1` for the focusing flux `-(u^5)_x`, `+1` for defocusing.
    flux_sign: f64,
}

impl Stepper {
    pub fn new(grid: &Grid, focusing: bool) -> Self {
        Self { grid: grid.clone(), k: odd_wavenumbers(grid), flux_sign: if focusing { -1.0 } else { 1.0 } }
    }

    /// `-/+ i k F[u^5]`, with `u^5` computed on the 3x padded grid.
    fn flux(&self, spec: &[C64]) -> Vec<C64> {
        let g = &self.grid;
        let size = DEALIAS_FACTOR * g.len();
        let mut phys = g.inverse_real(g.pad_spectrum(spec, size));
        phys.iter_mut().for_each(|v| *v = v.powi(5));
        let mut out = g.truncate_spectrum(&g.forward(&phys));
        for (c, &k) in out.iter_mut().zip(&self.k) {
            *c *= C64::new(0.0, self.flux_sign * k);
        }
        out
    }

    /// One IFRK4 step of size `dt` (negative `dt` integrates backwards).
    pub fn advance(&self, spec: &[C64], dt: f64) -> Vec<C64> {
        let half: Vec<C64> = self.k.iter().map(|k| C64::from_polar(1.0, 0.5 * dt * k * k * k)).collect();
        let full: Vec<C64> = half.iter().map(|e| e * e).collect();
        let scale = |v: Vec<C64>| -> Vec<C64> { v.into_iter().map(|c| c * dt).collect() };

        let a = scale(self.flux(spec));
        let arg: Vec<C64> = (0..spec.len()).map(|j| half[j] * (spec[j] + 0.5 * a[j])).collect();
        let b = scale(self.flux(&arg));
        let arg: Vec<C64> = (0..spec.len()).map(|j| half[j] * spec[j] + 0.5 * b[j]).collect();
        let c = scale(self.flux(&arg));
        let arg: Vec<C64> = (0..spec.len()).map(|j| full[j] * spec[j] + half[j] * c[j]).collect();
        let d = scale(self.flux(&arg));
        (0..spec.len())
            .map(|j| full[j] * spec[j] + (full[j] * a[j] + 2.0 * half[j] * (b[j] + c[j]) + d[j]) / 6.0)
            .collect()
    }

    fn spectral_mass(&self, spec: &[C64]) -> f64 {
        let n = self.grid.len() as f64;
        spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.length() / (n * n)
    }
}

/// `dt * k_max * ||u||_inf^4`; the step is accepted when this is at most one.
pub fn stability_number(u: &Field, dt: f64) -> f64 {
    dt.abs() * u.grid().max_wavenumber() * u.sup_norm().powi(4)
}

/// One focusing IFRK4 step.
pub fn step(u: &Field, dt: f64) -> Result<StepOutcome> {
    step_with(u, dt, true, DEFAULT_BLOWUP_CEILING)
}

pub fn step_with(u: &Field, dt: f64, focusing: bool, ceiling: f64) -> Result<StepOutcome> {
    let value = stability_number(u, dt);
    if value > 1.0 {
        return Err(Error::Unstable { dt, value });
    }
    let stepper = Stepper::new(u.grid(), focusing);
    let spec = stepper.advance(&u.spectrum(), dt);
    let vals = u.grid().inverse_real(spec);
    Ok(check_ceiling(u.grid(), vals, ceiling))
}

fn check_ceiling(grid: &Grid, vals: Vec<f64>, ceiling: f64) -> StepOutcome {
    let sup = vals.iter().fold(0.0_f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
    if sup > ceiling {
        StepOutcome::BlowUp { sup_norm: sup }
    } else {
        StepOutcome::Advanced(Field::from_raw(grid, vals))
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct DriftSummary {
    pub mass0: f64,
    pub energy0: f64,
    /// Normalization of the energy drift: `max(|E(u0)|, ||u0_x||^2 / 2)`.
    pub energy_scale: f64,
    pub max_rel_mass_drift: f64,
    pub max_rel_energy_drift: f64,
    /// Number of macro steps that had to be subdivided.
    pub halved_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    BlowUp { t: f64, sup_norm: f64 },
}

/// Snapshots of one evolution, all on the same grid.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub grid: Grid,
    pub config: EvolveConfig,
    pub records: Vec<Snapshot>,
    pub drift: DriftSummary,
    pub termination: Termination,
}

impl TimeSeries {
    pub fn from_records(grid: &Grid, config: EvolveConfig, records: Vec<Snapshot>) -> Result<Self> {
        for w in records.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::InvalidConfig("snapshot times must increase".into()));
            }
        }
        for r in &records {
            if r.field.grid() != grid {
                return Err(Error::GridMismatch);
            }
        }
        Ok(Self {
            grid: grid.clone(),
            config,
            records,
            drift: DriftSummary::default(),
            termination: Termination::Completed,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self.termination, Termination::BlowUp { .. })
    }
}

/// Runs the flow from `u0`, calling `observer(t, u)` on every snapshot
/// (including `t = 0`).
pub fn evolve(u0: &Field, config: &EvolveConfig, mut observer: impl FnMut(f64, &Field)) -> Result<TimeSeries> {
    config.validate()?;
    let grid = u0.grid().clone();
    let stepper = Stepper::new(&grid, config.focusing);
    let steps = config.steps();
    let dt = config.effective_dt();

    let mass0 = mass(u0);
    let energy0 = energy_with(u0, config.focusing);
    let kinetic0 = 0.5 * crate::grid::h1_norm(u0).powi(2) - 0.5 * mass0;
    let energy_scale = energy0.abs().max(kinetic0).max(f64::MIN_POSITIVE);
    let mut drift = DriftSummary { mass0, energy0, energy_scale, ..Default::default() };

    observer(0.0, u0);
    let mut records = vec![Snapshot { t: 0.0, field: u0.clone() }];
    let mut spec = u0.spectrum();
    let mut sup = u0.sup_norm();
    let mut termination = Termination::Completed;

    for i in 0..steps {
        let t = (i + 1) as f64 * dt;
        let m_before = stepper.spectral_mass(&spec);
        let mut halvings = 0u32;
        let next = loop {
            let sub = 1usize << halvings;
            let h = dt / sub as f64;
            if h * grid.max_wavenumber() * sup.powi(4) > 1.0 && halvings < MAX_HALVINGS {
                halvings += 1;
                continue;
            }
            let mut s = spec.clone();
            for _ in 0..sub {
                s = stepper.advance(&s, h);
            }
            let m_after = stepper.spectral_mass(&s);
            let rel = if m_before > 0.0 { (m_after - m_before).abs() / m_before } else { 0.0 };
            match config.mass_step_tol {
                Some(tol) if rel > tol && halvings < MAX_HALVINGS && m_after.is_finite() => {
                    halvings += 1;
                }
                _ => break s,
            }
        };
        if halvings > 0 {
            drift.halved_steps += 1;
        }
        let vals = grid.inverse_real(next.clone());
        match check_ceiling(&grid, vals, config.blowup_ceiling) {
            StepOutcome::BlowUp { sup_norm } => {
                termination = Termination::BlowUp { t, sup_norm };
                let last_t = i as f64 * dt;
                if records.last().map(|r| r.t) != Some(last_t) {
                    let field = Field::from_raw(&grid, grid.inverse_real(spec.clone()));
                    observer(last_t, &field);
                    records.push(Snapshot { t: last_t, field });
                }
                break;
            }
            StepOutcome::Advanced(field) => {
                sup = field.sup_norm();
                spec = next;
                if (i + 1) % config.stride == 0 || i + 1 == steps {
                    let m = mass(&field);
                    let e = energy_with(&field, config.focusing);
                    if mass0 > 0.0 {
                        drift.max_rel_mass_drift = drift.max_rel_mass_drift.max((m - mass0).abs() / mass0);
                    }
                    drift.max_rel_energy_drift = drift.max_rel_energy_drift.max((e - energy0).abs() / energy_scale);
                    observer(t, &field);
                    records.push(Snapshot { t, field });
                }
            }
        }
    }

    Ok(TimeSeries { grid, config: *config, records, drift, termination })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::l2_norm;

    fn bump(grid: &Grid, amp: f64) -> Field {
        Field::from_fn(grid, |x| amp * (-(x - 1.0) * (x - 1.0) / 2.0).exp())
    }

    #[test]
    fn config_validation() {
        assert!(EvolveConfig::new(0.0, 1.0, 1).validate().is_err());
        assert!(EvolveConfig::new(1e-3, -1.0, 1).validate().is_err());
        assert!(EvolveConfig::new(1e-3, 1.0, 0).validate().is_err());
        assert!(EvolveConfig::new(1e-3, 1.0, 5).validate().is_ok());
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::new(50.0, 256).unwrap();
        match step(&Field::zeros(&g), 1e-3).unwrap() {
            StepOutcome::Advanced(f) => assert_eq!(f.sup_norm(), 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn airy_is_unitary_and_a_group() {
        let g = Grid::new(50.0, 256).unwrap();
        let f = bump(&g, 1.0);
        assert!((&airy_propagator(&f, 0.0) - &f).sup_norm() < 1e-15);
        let n0 = l2_norm(&f);
        let ft = airy_propagator(&f, 0.7);
        assert!((l2_norm(&ft) - n0).abs() < 1e-12 * n0);
        let two = airy_propagator(&airy_propagator(&f, 0.3), 0.4);
        assert!((&two - &ft).sup_norm() < 1e-12);
    }

    #[test]
    fn unstable_step_is_rejected() {
        let g = Grid::new(50.0, 256).unwrap();
        let f = bump(&g, 10.0);
        assert!(matches!(step(&f, 0.1), Err(Error::Unstable { .. })));
    }

    #[test]
    fn blowup_ceiling_is_reported() {
        let g = Grid::new(50.0, 256).unwrap();
        let f = bump(&g, 1.0);
        let out = step_with(&f, 1e-3, true, 0.5).unwrap();
        assert!(matches!(out, StepOutcome::BlowUp { .. }));
        let cfg = EvolveConfig { blowup_ceiling: 0.5, ..EvolveConfig::new(1e-3, 0.01, 2) };
        let ts = evolve(&f, &cfg, |_, _| {}).unwrap();
        assert!(ts.is_blowup());
        assert_eq!(ts.records.len(), 1);
        assert!(ts.records[0].field.is_finite());
    }

    #[test]
    fn snapshots_follow_the_stride() {
        let g = Grid::new(50.0, 128).unwrap();
        let cfg = EvolveConfig::new(1e-3, 0.02, 5);
        let mut seen = Vec::new();
        let ts = evolve(&bump(&g, 0.5), &cfg, |t, _| seen.push(t)).unwrap();
        assert_eq!(ts.records.len(), 5);
        assert_eq!(seen, ts.times());
        assert!((ts.records[4].t - 0.02).abs() < 1e-15);
    }
}
