//! Modulation near the soliton family: the decomposition
//! `u(x) = lambda^{-1/2} (Q + eps)((x - x0)/lambda)` with `eps` orthogonal to
//! `y Q_y` and `y Lambda Q`, the rescaled time `s`, the modulation rates and
//! the `eps` equation.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::TimeSeries;
use crate::grid::{dot, dx, h1_norm, interpolate, l2_norm, lp_norm, Field, Grid};
use crate::linearized::{apply_l, nonlinear_remainder};
use crate::soliton::{q_eval, q_profile, soliton_constants, Direction, Frame};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50;
pub const DEFAULT_DELTA: f64 = 0.1;
const MAX_HALVINGS: u32 = 8;
/// Profiles are treated as zero beyond this `|y|`.
const PROFILE_CUTOFF: f64 = 60.0;

/// `Q, Q', Q''` at `y` from one evaluation of `Q`.
fn q_jet(y: f64) -> (f64, f64, f64) {
    let q = q_eval(y);
    (q, -q * (2.0 * y).tanh(), q - q.powi(5))
}

/// Weights `w1 = y Q_y`, `w2 = y Lambda Q` and their derivatives.
fn weights(y: f64) -> [f64; 4] {
    let (q, q1, q2) = q_jet(y);
    [y * q1, 0.5 * y * q + y * y * q1, q1 + y * q2, 0.5 * q + 2.5 * y * q1 + y * y * q2]
}

/// Profile combinations entering the rates system.
#[derive(Debug, Clone, Copy)]
enum Profile {
    /// `2y Q_y + y^2 Q_yy`
    A1,
    /// `y Q_yy + Q_y`
    B1,
    /// `y Q + (7/2) y^2 Q_y + y^3 Q_yy`
    A2,
    /// `Q/2 + (5/2) y Q_y + y^2 Q_yy`
    B2,
}

fn profile(grid: &Grid, p: Profile) -> Field {
    Field::from_fn(grid, |y| {
        let (q, q1, q2) = q_jet(y);
        match p {
            Profile::A1 => 2.0 * y * q1 + y * y * q2,
            Profile::B1 => y * q2 + q1,
            Profile::A2 => y * q + 3.5 * y * y * q1 + y.powi(3) * q2,
            Profile::B2 => 0.5 * q + 2.5 * y * q1 + y * y * q2,
        }
    })
}

/// `∫ Q w_i` on the grid.
fn reference_integrals(grid: &Grid) -> [f64; 2] {
    let mut c = [0.0; 2];
    for &y in grid.nodes() {
        let w = weights(y);
        let q = q_eval(y);
        c[0] += q * w[0];
        c[1] += q * w[1];
    }
    [c[0] * grid.spacing(), c[1] * grid.spacing()]
}

/// Residuals and Jacobian evaluated in physical variables:
/// `rho_i = lambda^{-1/2} ∫ u(x) w_i((x - x0)/lambda) dx - ∫ Q w_i`.
struct Evaluation {
    rho: Vector2<f64>,
    jac: Matrix2<f64>,
}

fn evaluate(u: &Field, frame: Frame, reference: &[f64; 2]) -> Evaluation {
    let grid = u.grid();
    let (lam, x0) = (frame.lambda, frame.x);
    let mut s = [0.0; 2];
    let mut t = [0.0; 2];
    let mut r = [0.0; 2];
    for (&x, &v) in grid.nodes().iter().zip(u.values()) {
        let d = grid.wrap(x - x0);
        let z = d / lam;
        if z.abs() > PROFILE_CUTOFF || v == 0.0 {
            continue;
        }
        let w = weights(z);
        for i in 0..2 {
            s[i] += v * w[i];
            t[i] += v * w[i + 2];
            r[i] += v * w[i + 2] * d;
        }
    }
    let h = grid.spacing();
    let isq = lam.powf(-0.5);
    let mut rho = Vector2::zeros();
    let mut jac = Matrix2::zeros();
    for i in 0..2 {
        let (si, ti, ri) = (s[i] * h, t[i] * h, r[i] * h);
        rho[i] = isq * si - reference[i];
        jac[(i, 0)] = -0.5 * isq / lam * si - isq / (lam * lam) * ri;
        jac[(i, 1)] = -isq / lam * ti;
    }
    Evaluation { rho, jac }
}

/// `(rho1, rho2) = (<eps, y Q_y>, <eps, y Lambda Q>)` for the frame.
pub fn orthogonality_residuals(u: &Field, frame: Frame) -> Result<(f64, f64)> {
    let frame = Frame::new(frame.lambda, frame.x)?;
    frame.check_resolved(u.grid())?;
    let eps = epsilon_field(u, frame)?;
    Ok(residuals_of(&eps))
}

fn residuals_of(eps: &Field) -> (f64, f64) {
    let grid = eps.grid();
    let (mut r1, mut r2) = (0.0, 0.0);
    for (&y, &e) in grid.nodes().iter().zip(eps.values()) {
        let w = weights(y);
        r1 += e * w[0];
        r2 += e * w[1];
    }
    (r1 * grid.spacing(), r2 * grid.spacing())
}

/// `eps(y) = lambda^{1/2} u(lambda y + x0) - Q(y)` on the same grid, with
/// `u` interpolated trigonometrically on the period centered at `x0` and
/// read as zero outside it.
pub fn epsilon_field(u: &Field, frame: Frame) -> Result<Field> {
    let grid = u.grid();
    frame.check_resolved(grid)?;
    let half = 0.5 * grid.length();
    let ys = grid.nodes();
    let inside: Vec<usize> = (0..ys.len()).filter(|&j| (frame.lambda * ys[j]).abs() < half).collect();
    let pts: Vec<f64> = inside.iter().map(|&j| frame.lambda * ys[j] + frame.x).collect();
    let vals = interpolate(u, &pts);
    let mut out: Vec<f64> = vec![0.0; ys.len()];
    for (&j, v) in inside.iter().zip(vals) {
        out[j] = frame.lambda.sqrt() * v;
    }
    for (o, &y) in out.iter_mut().zip(ys) {
        *o -= q_eval(y);
    }
    Field::new(grid, out)
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub frame: Frame,
    pub eps: Field,
    /// Orthogonality residuals `<eps, y Q_y>`, `<eps, y Lambda Q>` on the grid.
    pub rho: (f64, f64),
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

/// Damped Newton iteration on `(lambda, x0)` for the orthogonality
/// conditions. Returns an unconverged decomposition (best iterate) when the
/// iteration stalls; a non-positive scale is an error.
pub fn decompose(u: &Field, guess: Frame, opts: NewtonOptions) -> Result<Decomposition> {
    let grid = u.grid();
    let mut frame = Frame::new(guess.lambda, grid.wrap(guess.x))?;
    frame.check_resolved(grid)?;
    let reference = reference_integrals(grid);
    let min_lambda = Frame::min_lambda(grid);
    let mut ev = evaluate(u, frame, &reference);
    let mut iterations = 0;
    let mut converged = false;
    let size = |r: &Vector2<f64>| r[0].abs() + r[1].abs();
    while iterations < opts.max_iter {
        if ev.rho[0].abs() < opts.tol && ev.rho[1].abs() < opts.tol {
            converged = true;
            break;
        }
        let scale = ev.jac.norm();
        if !(scale > 0.0) || ev.jac.determinant().abs() <= 1e-14 * scale * scale {
            break;
        }
        let Some(step) = ev.jac.lu().solve(&(-ev.rho)) else { break };
        if !step.iter().all(|v| v.is_finite()) {
            break;
        }
        iterations += 1;
        let mut factor = 1.0;
        let mut accepted = None;
        let mut last_lambda = f64::NAN;
        for _ in 0..=MAX_HALVINGS {
            let lam = frame.lambda + factor * step[0];
            let x = grid.wrap(frame.x + factor * step[1]);
            last_lambda = lam;
            if lam > min_lambda && lam.is_finite() {
                let trial = Frame { lambda: lam, x };
                let tev = evaluate(u, trial, &reference);
                let better = size(&tev.rho) < size(&ev.rho);
                accepted = Some((trial, tev));
                if better {
                    break;
                }
            } else {
                accepted = None;
            }
            factor *= 0.5;
        }
        match accepted {
            Some((f, e)) => {
                frame = f;
                ev = e;
            }
            None if last_lambda <= 0.0 => {
                return Err(Error::Divergence(format!("Newton iterate reached lambda = {last_lambda:.3e}")));
            }
            None => break,
        }
    }
    if !converged && ev.rho[0].abs() < opts.tol && ev.rho[1].abs() < opts.tol {
        converged = true;
    }
    let eps = epsilon_field(u, frame)?;
    let rho = residuals_of(&eps);
    Ok(Decomposition { frame, eps, rho, iterations, converged })
}

/// `a = lambda_s / lambda`, `b = x_s / lambda - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub a: f64,
    pub b: f64,
    /// 2-norm condition number of the system matrix.
    pub condition: f64,
}

/// Solves the 2x2 system obtained by differentiating the orthogonality
/// conditions along the `eps` equation.
pub fn modulation_rates(eps: &Field) -> Result<Rates> {
    let grid = eps.grid();
    let h = grid.spacing();
    let ip = |f: &Field| dot(f.values(), eps.values()) * h;
    let (a1, b1, a2, b2) = (
        profile(grid, Profile::A1),
        profile(grid, Profile::B1),
        profile(grid, Profile::A2),
        profile(grid, Profile::B2),
    );
    let norm = soliton_constants(grid).scaling_norm;
    let r = nonlinear_remainder(eps);
    let rhs = Vector2::new(
        ip(&apply_l(&b1)) - dot(r.values(), b1.values()) * h,
        ip(&apply_l(&b2)) - dot(r.values(), b2.values()) * h,
    );
    let m = Matrix2::new(norm - ip(&a1), -ip(&b1), -ip(&a2), norm - ip(&b2));
    let sv = m.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-10 * norm) {
        return Err(Error::SingularSystem { smallest_singular_value: smin });
    }
    let sol = m.lu().solve(&rhs).ok_or(Error::SingularSystem { smallest_singular_value: smin })?;
    Ok(Rates { a: sol[0], b: sol[1], condition: smax / smin })
}

/// Right side of the `eps` equation:
/// `(L eps)_y + a Lambda Q + b Q_y + a(eps/2 + y eps_y) + b eps_y - R(eps)_y`.
pub fn epsilon_equation_rhs(eps: &Field, rates: Rates) -> Field {
    let grid = eps.grid();
    let le_y = dx(&apply_l(eps));
    let r_y = dx(&nonlinear_remainder(eps));
    let ey = dx(eps);
    let vals = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, &y)| {
            let e = eps.values()[j];
            let d = ey.values()[j];
            le_y.values()[j]
                + rates.a * Direction::LambdaQ.eval(y)
                + rates.b * Direction::Qy.eval(y)
                + rates.a * (0.5 * e + y * d)
                + rates.b * d
                - r_y.values()[j]
        })
        .collect();
    Field::new(grid, vals).expect("finite inputs give finite output")
}

/// `|| eps_s - rhs(eps, rates) ||_2`.
pub fn epsilon_equation_residual(eps: &Field, eps_s: &Field, rates: Rates) -> Result<f64> {
    eps.check_same_grid(eps_s)?;
    let rhs = epsilon_equation_rhs(eps, rates);
    Ok(l2_norm(&(eps_s - &rhs)))
}

/// `s(t) = ∫_0^t lambda^{-3}` by the trapezoid rule on the samples.
pub fn rescaled_time(times: &[f64], lambdas: &[f64]) -> Result<Vec<f64>> {
    if times.len() != lambdas.len() {
        return Err(Error::LengthMismatch { expected: times.len(), got: lambdas.len() });
    }
    if let Some(&bad) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::NonPositiveScale(bad));
    }
    let mut s = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for i in 0..times.len() {
        if i > 0 {
            let dt = times[i] - times[i - 1];
            acc += 0.5 * dt * (lambdas[i].powi(-3) + lambdas[i - 1].powi(-3));
        }
        s.push(acc);
    }
    Ok(s)
}

/// Best frame from a coarse scan of
/// `||u - lambda^{-1/2} Q((. - x0)/lambda)||^2` over log-spaced scales and
/// every grid node as center. The correlation over centers is one FFT per
/// scale.
pub fn coarse_frame_scan(u: &Field, lambda_range: (f64, f64), scales: usize) -> Option<(Frame, f64)> {
    let grid = u.grid();
    let n = grid.len();
    let h = grid.spacing();
    let mass_u = dot(u.values(), u.values()) * h;
    let mass_q = soliton_constants(grid).mass_q;
    let uhat = u.spectrum();
    let lo = lambda_range.0.max(Frame::min_lambda(grid) * 1.01);
    let hi = lambda_range.1.max(lo);
    let mut best: Option<(Frame, f64)> = None;
    for k in 0..scales {
        let frac = if scales > 1 { k as f64 / (scales - 1) as f64 } else { 0.0 };
        let lam = lo * (hi / lo).powf(frac);
        let kernel: Vec<f64> = (0..n).map(|j| q_eval(grid.wrap(j as f64 * h) / lam)).collect();
        let khat = grid.forward(&kernel);
        let prod = uhat.iter().zip(&khat).map(|(a, b)| a * b.conj()).collect();
        let corr = grid.inverse_real(prod);
        for (m, c) in corr.iter().enumerate() {
            let dist = mass_u + mass_q - 2.0 * lam.powf(-0.5) * c * h;
            if best.is_none_or(|(_, d)| dist < d) {
                best = Some((Frame { lambda: lam, x: grid.nodes()[m] }, dist));
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub t: f64,
    pub s: f64,
    pub lambda: f64,
    /// Center, unwrapped across periodic crossings.
    pub x: f64,
    pub eps_l2: f64,
    pub eps_h1: f64,
    pub eps_l8: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rate_a: f64,
    pub rate_b: f64,
    pub condition: f64,
    pub converged: bool,
    pub departed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulationTrack {
    pub delta: f64,
    pub records: Vec<TrackRecord>,
    /// Time of the first snapshot flagged as departed.
    pub departure_time: Option<f64>,
    /// Snapshots where the continuation branch failed but the global scan
    /// recovered a close frame.
    pub rescued: usize,
}

impl ModulationTrack {
    pub fn departed(&self) -> bool {
        self.departure_time.is_some()
    }

    /// Records up to (excluding) departure.
    pub fn close_records(&self) -> &[TrackRecord] {
        let end = self.records.iter().position(|r| r.departed).unwrap_or(self.records.len());
        &self.records[..end]
    }
}

fn attempt(u: &Field, guess: Frame) -> Option<Decomposition> {
    decompose(u, guess, NewtonOptions::default()).ok()
}

fn is_close(d: &Option<Decomposition>, delta: f64) -> bool {
    matches!(d, Some(d) if d.converged && l2_norm(&d.eps) <= delta)
}

/// Decomposes each snapshot by continuation from the previous frame and
/// flags departure once Newton fails or `||eps||_2 > delta` and a global
/// frame scan confirms it. The flag persists.
pub fn track(series: &TimeSeries, guess: Frame, delta: f64) -> ModulationTrack {
    track_with(series, guess, delta, |_, _| {})
}

/// [`track`], handing each snapshot's record and decomposition (if any) to
/// `observer` as it is produced.
pub fn track_with(
    series: &TimeSeries,
    guess: Frame,
    delta: f64,
    mut observer: impl FnMut(&TrackRecord, Option<&Decomposition>),
) -> ModulationTrack {
    let grid = &series.grid;
    let mut out = ModulationTrack { delta, records: vec![], departure_time: None, rescued: 0 };
    let mut prev = guess;
    let mut x_unwrapped = guess.x;
    let mut s = 0.0;
    let mut prev_t_lambda: Option<(f64, f64)> = None;
    for snap in &series.records {
        let mut dec = attempt(&snap.field, prev);
        if out.departure_time.is_none() && !is_close(&dec, delta) {
            let scan = coarse_frame_scan(&snap.field, (0.1, 0.25 * grid.length()), 40);
            let rescue = scan.and_then(|(f, _)| attempt(&snap.field, f));
            if is_close(&rescue, delta) {
                out.rescued += 1;
                dec = rescue;
            } else {
                out.departure_time = Some(snap.t);
                if dec.is_none() {
                    dec = rescue;
                }
            }
        }
        let departed = out.departure_time.is_some();
        let mut rec = TrackRecord {
            t: snap.t,
            s: f64::NAN,
            lambda: f64::NAN,
            x: f64::NAN,
            eps_l2: f64::NAN,
            eps_h1: f64::NAN,
            eps_l8: f64::NAN,
            rho1: f64::NAN,
            rho2: f64::NAN,
            rate_a: f64::NAN,
            rate_b: f64::NAN,
            condition: f64::NAN,
            converged: false,
            departed,
        };
        if let Some(d) = &dec {
            let shift = grid.wrap(d.frame.x - prev.x);
            x_unwrapped += shift;
            prev = d.frame;
            if let Some((t0, l0)) = prev_t_lambda {
                s += 0.5 * (snap.t - t0) * (l0.powi(-3) + d.frame.lambda.powi(-3));
            }
            prev_t_lambda = Some((snap.t, d.frame.lambda));
            rec.s = s;
            rec.lambda = d.frame.lambda;
            rec.x = x_unwrapped;
            rec.eps_l2 = l2_norm(&d.eps);
            rec.eps_h1 = h1_norm(&d.eps);
            rec.eps_l8 = lp_norm(&d.eps, 8.0).unwrap_or(f64::NAN);
            rec.rho1 = d.rho.0;
            rec.rho2 = d.rho.1;
            rec.converged = d.converged;
            if let Ok(r) = modulation_rates(&d.eps) {
                rec.rate_a = r.a;
                rec.rate_b = r.b;
                rec.condition = r.condition;
            }
        } else {
            prev_t_lambda = None;
        }
        observer(&rec, dec.as_ref());
        out.records.push(rec);
    }
    out
}

/// Smallest `C` with `|a| + |b| <= C (||eps||_2 + ||eps||_2 ||eps||_8^4)` over
/// the close part of each track; records with `||eps||_2 < floor` are skipped.
pub fn rates_envelope<'a>(tracks: impl IntoIterator<Item = &'a ModulationTrack>, floor: f64) -> f64 {
    let mut c: f64 = 0.0;
    for t in tracks {
        for r in t.close_records() {
            if !(r.eps_l2 >= floor) || !r.rate_a.is_finite() {
                continue;
            }
            let bound = r.eps_l2 + r.eps_l2 * r.eps_l8.powi(4);
            c = c.max((r.rate_a.abs() + r.rate_b.abs()) / bound);
        }
    }
    c
}

/// Derivative at the middle of three (possibly unevenly spaced) samples.
pub fn centered_difference(s: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = s[1] - s[0];
    let h2 = s[2] - s[1];
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

/// Mismatch between the solved rates and centered differences of
/// `log lambda(s)` and `x(s)` on the close part of a track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesConsistency {
    pub max_mismatch_a: f64,
    pub max_mismatch_b: f64,
    pub max_eps_l2: f64,
    pub max_ds: f64,
    pub samples: usize,
}

pub fn rates_consistency(track: &ModulationTrack) -> RatesConsistency {
    let recs = track.close_records();
    let mut out =
        RatesConsistency { max_mismatch_a: 0.0, max_mismatch_b: 0.0, max_eps_l2: 0.0, max_ds: 0.0, samples: 0 };
    for w in recs.windows(3) {
        if !w.iter().all(|r| r.s.is_finite() && r.rate_a.is_finite()) {
            continue;
        }
        let s = [w[0].s, w[1].s, w[2].s];
        let da = centered_difference(s, [w[0].lambda.ln(), w[1].lambda.ln(), w[2].lambda.ln()]);
        let dxs = centered_difference(s, [w[0].x, w[1].x, w[2].x]);
        let db = dxs / w[1].lambda - 1.0;
        out.max_mismatch_a = out.max_mismatch_a.max((da - w[1].rate_a).abs());
        out.max_mismatch_b = out.max_mismatch_b.max((db - w[1].rate_b).abs());
        out.max_eps_l2 = out.max_eps_l2.max(w[1].eps_l2);
        out.max_ds = out.max_ds.max(s[1] - s[0]).max(s[2] - s[1]);
        out.samples += 1;
    }
    out
}

/// `Q` itself, for callers building perturbations on the `eps` grid.
pub fn ground_state(grid: &Grid) -> Field {
    q_profile(grid)
}
