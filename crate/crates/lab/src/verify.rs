//! The identity battery: exact identities of the ground state, recovery of
//! the modulation parameters, and the flow identities on short runs.

use gkdv_core::evolve::{evolve, EvolveConfig, TimeSeries};
use gkdv_core::functionals::{energy, l2, mass_gap, mass_identity_residual, morawetz_derivative_check, WeightKind};
use gkdv_core::linearized::apply_l;
use gkdv_core::modulation::{decompose, track_with, NewtonOptions, DEFAULT_DELTA};
use gkdv_core::soliton::{elliptic_residual, q_direction, q_profile, soliton_on_grid, Direction};
use gkdv_core::{Field, Frame, Grid, Result};
use serde::{Deserialize, Serialize};

use crate::run::Check;

pub const ELLIPTIC_TOL: f64 = 1e-10;
pub const L_QY_TOL: f64 = 1e-9;
pub const L_LAMBDA_Q_TOL: f64 = 1e-8;
pub const ENERGY_TOL: f64 = 1e-10;
pub const RECOVERY_TOL: f64 = 1e-9;

/// Frames recovered by the decomposition check.
pub const RECOVERY_FRAMES: [(f64, f64); 3] = [(0.5, -10.0), (0.75, 2.5), (1.0, 10.0)];

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub length: f64,
    pub n: usize,
    /// The linearized operator under test; replaceable for mutation tests.
    pub apply_l: fn(&Field) -> Field,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { length: 100.0, n: 4096, apply_l }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn or_nan(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::NAN)
}

fn recovery_error(grid: &Grid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (lambda, x) in RECOVERY_FRAMES {
        let u = soliton_on_grid(grid, Frame::new(lambda, x)?)?;
        let guess = Frame { lambda: 1.1 * lambda, x: x + 0.2 * lambda };
        let d = decompose(&u, guess, NewtonOptions::default())?;
        if !d.converged {
            return Ok(f64::INFINITY);
        }
        worst = worst.max((d.frame.lambda - lambda).abs()).max((d.frame.x - x).abs()).max(l2(&d.eps));
    }
    Ok(worst)
}

fn short_run(u0: &Field, t_final: f64) -> Result<TimeSeries> {
    evolve(u0, &EvolveConfig::new(2e-4, t_final, 50), |_, _| {})
}

/// `(max orthogonality defect, max mass-identity residual)` along a short
/// run of `0.99 Q`.
fn flow_identities(grid: &Grid) -> Result<(f64, f64)> {
    let u0 = q_profile(grid).scale(0.99);
    let gap = mass_gap(&u0);
    let series = short_run(&u0, 0.25)?;
    let (mut ortho, mut ident) = (0.0f64, 0.0f64);
    let track = track_with(&series, Frame::IDENTITY, DEFAULT_DELTA, |rec, dec| {
        if let Some(d) = dec.filter(|d| d.converged && !rec.departed) {
            ortho = ortho.max((rec.rho1.abs() + rec.rho2.abs()) / (1.0 + rec.eps_l2));
            ident = ident.max(mass_identity_residual(&d.eps, gap));
        }
    });
    if track.departed() || track.records.iter().any(|r| !r.converged) {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    Ok((ortho, ident))
}

pub fn verify_suite() -> VerifyReport {
    verify_with(&VerifyOptions::default())
}

/// Runs every check at the requested resolution; failures are recorded,
/// never raised.
pub fn verify_with(opts: &VerifyOptions) -> VerifyReport {
    let mut checks = Vec::new();
    let grid = match Grid::new(opts.length, opts.n) {
        Ok(g) => g,
        Err(_) => {
            checks.push(Check::at_most("grid", f64::NAN, 0.0));
            return VerifyReport { length: opts.length, n: opts.n, checks };
        }
    };
    let q = q_profile(&grid);
    checks.push(Check::at_most("elliptic_identity", elliptic_residual(&grid), ELLIPTIC_TOL));
    let l_qy = (opts.apply_l)(&q_direction(&grid, Direction::Qy)).sup_norm();
    checks.push(Check::at_most("L_Qy", l_qy, L_QY_TOL));
    let l_lq = (opts.apply_l)(&q_direction(&grid, Direction::LambdaQ));
    let l_lq = or_nan(l_lq.zip_map(&q, |a, b| a + 2.0 * b).map(|f| f.sup_norm()));
    checks.push(Check::at_most("L_LambdaQ_plus_2Q", l_lq, L_LAMBDA_Q_TOL));
    checks.push(Check::at_most("ground_state_energy", energy(&q).abs(), ENERGY_TOL));
    checks.push(Check::at_most("decomposition_recovery", or_nan(recovery_error(&grid)), RECOVERY_TOL));
    let morawetz = short_run(&q, 0.5)
        .and_then(|s| morawetz_derivative_check(&s, WeightKind::Cutoff, 20.0, 0.0))
        .map(|c| c.max_mismatch);
    checks.push(Check::at_most("morawetz_identity", or_nan(morawetz), crate::run::MORAWETZ_TOL));
    let (ortho, ident) = flow_identities(&grid).unwrap_or((f64::NAN, f64::NAN));
    checks.push(Check::at_most("orthogonality_along_flow", ortho, crate::run::ORTHOGONALITY_TOL));
    checks.push(Check::at_most("mass_identity", ident, crate::run::MASS_IDENTITY_TOL));
    VerifyReport { length: opts.length, n: opts.n, checks }
}
