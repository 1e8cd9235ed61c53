//! Scalar functionals monitored along the flow: conserved quantities, the
//! virials `J` and `M`, the Morawetz potential, exponential tail masses,
//! scattering size and mixed norms, plus the symmetry group `G` and the
//! asymptotic-orthogonality gauge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{Snapshot, TimeSeries};
use crate::grid::{
    antiderivative_mean_zero, dot, dx, integrate, interpolate, interval_integral, l2_norm, padded_integral, Field,
    Grid, DEALIAS_FACTOR,
};
use crate::soliton::{q_eval, q_profile, q_second, soliton_constants, Frame};

/// `|eps|` at the box edge must stay below this for the virials.
pub const DECAY_TOL: f64 = 1e-8;

/// Minimum snapshot density (per unit time) for the mixed norms.
pub const MIN_SNAPSHOTS_PER_TIME: f64 = 16.0;

/// `∫ u^2`.
pub fn mass(u: &Field) -> f64 {
    dot(u.values(), u.values()) * u.grid().spacing()
}

/// `E(u) = (1/2)∫u_x^2 - (1/6)∫u^6`.
pub fn energy(u: &Field) -> f64 {
    energy_with(u, true)
}

/// Energy with the sign of the sixth-power term chosen by `focusing`.
pub fn energy_with(u: &Field, focusing: bool) -> f64 {
    let ux = dx(u);
    let kinetic = 0.5 * dot(ux.values(), ux.values()) * u.grid().spacing();
    let sixth = padded_integral(&[u], |v| v[0].powi(6)).expect("single field");
    if focusing {
        kinetic - sixth / 6.0
    } else {
        kinetic + sixth / 6.0
    }
}

/// `M = ||Q||^2/2 - ||u0||^2/2`, positive below the ground-state mass.
pub fn mass_gap(u0: &Field) -> f64 {
    0.5 * soliton_constants(u0.grid()).mass_q - 0.5 * mass(u0)
}

/// `|<eps, Q> + M + ||eps||^2 / 2|`.
pub fn mass_identity_residual(eps: &Field, mass_gap: f64) -> f64 {
    let q = q_profile(eps.grid());
    (dot(eps.values(), q.values()) * eps.grid().spacing() + mass_gap + 0.5 * mass(eps)).abs()
}

/// Terms of `E(Q + eps)` split into the mass-gap/quadratic part and the
/// cubic-and-higher remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyExpansion {
    /// `E(Q + eps)` computed directly.
    pub total: f64,
    /// `M(Q + eps) = ||Q||^2/2 - ||Q + eps||^2/2`.
    pub mass_gap: f64,
    /// `(1/2)∫eps_x^2 + (1/2)∫eps^2 - (5/2)∫Q^4 eps^2`.
    pub quadratic: f64,
    /// `-(10/3)∫Q^3eps^3 - (5/2)∫Q^2eps^4 - ∫Q eps^5 - (1/6)∫eps^6`.
    pub higher: f64,
}

impl EnergyExpansion {
    /// `total - (mass_gap + quadratic) - higher`; zero up to `E(Q)` and the
    /// elliptic residual of `Q` on the grid.
    pub fn defect(&self) -> f64 {
        self.total - (self.mass_gap + self.quadratic) - self.higher
    }
}

pub fn energy_expansion(eps: &Field) -> EnergyExpansion {
    let grid = eps.grid();
    let q = q_profile(grid);
    let u = &q + eps;
    let ex = dx(eps);
    let h = grid.spacing();
    let quad_pot = padded_integral(&[&q, eps], |v| v[0].powi(4) * v[1] * v[1]).expect("same grid");
    let higher = padded_integral(&[&q, eps], |v| {
        let (q, e) = (v[0], v[1]);
        -(10.0 / 3.0) * q.powi(3) * e.powi(3) - 2.5 * q * q * e.powi(4) - q * e.powi(5) - e.powi(6) / 6.0
    })
    .expect("same grid");
    EnergyExpansion {
        total: energy(&u),
        mass_gap: mass_gap(&u),
        quadratic: 0.5 * dot(ex.values(), ex.values()) * h + 0.5 * mass(eps) - 2.5 * quad_pot,
        higher,
    }
}

fn check_decay(eps: &Field) -> Result<()> {
    let v = eps.values();
    let boundary = v[0].abs().max(v[v.len() - 1].abs());
    if boundary > DECAY_TOL {
        return Err(Error::NonDecaying { boundary, tolerance: DECAY_TOL });
    }
    Ok(())
}

/// `y -> ∫_{-inf}^y (Q/2 + z Q_z) dz` on the grid. The integral tends to
/// `-(1/2)∫Q` on the right, so it is built from `yQ` and a spectral
/// antiderivative of `Q`.
pub fn lambda_q_antiderivative(grid: &Grid) -> Result<Field> {
    // Lambda Q = (yQ)' - Q/2, so F = yQ - (1/2)∫_{-L/2}^y Q.
    let qf = q_profile(grid);
    let mean = integrate(&qf) / grid.length();
    let left = -0.5 * grid.length();
    let periodic = antiderivative_mean_zero(&qf.map(|v| v - mean));
    let anti: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(qf.values())
        .zip(periodic.values())
        .map(|((&y, &q), &p)| y * q - 0.5 * (p + mean * (y - left)))
        .collect();
    Field::new(grid, anti)
}

/// `J = lambda^{1/2} ∫ eps(y) ∫_{-inf}^y Lambda Q - lambda^{1/2} kappa`.
pub fn virial_j(eps: &Field, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveScale(lambda));
    }
    check_decay(eps)?;
    let grid = eps.grid();
    let anti = lambda_q_antiderivative(grid)?;
    let kappa = soliton_constants(grid).kappa;
    let ip = dot(eps.values(), anti.values()) * grid.spacing();
    Ok(lambda.sqrt() * (ip - kappa))
}

/// `M = (1/2) lambda ∫ y eps^2`.
pub fn virial_m(eps: &Field, lambda: f64) -> Result<f64> {
    check_decay(eps)?;
    let grid = eps.grid();
    let s: f64 = grid.nodes().iter().zip(eps.values()).map(|(&y, &e)| y * e * e).sum();
    Ok(0.5 * lambda * s * grid.spacing())
}

// ---------------------------------------------------------------------------
// Weights

/// `K = 3 sqrt(2)`.
pub const DECAY_K: f64 = 3.0 * std::f64::consts::SQRT_2;

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Composite 8-point Gauss-Legendre on `[a, b]` with `panels` panels.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * w;
            let mid = lo + 0.5 * w;
            GL_NODES.iter().zip(&GL_WEIGHTS).map(|(x, wt)| wt * f(mid + 0.5 * w * x)).sum::<f64>() * 0.5 * w
        })
        .sum()
}

fn smooth_step_part(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// `phi` for the Morawetz cutoff: 1 on `|x| <= 1`, 0 on `|x| >= 2`, `C^inf`.
fn cutoff_phi(x: f64) -> f64 {
    let r = x.abs();
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = smooth_step_part(2.0 - r);
        a / (a + smooth_step_part(r - 1.0))
    }
}

/// Second derivative of [`cutoff_phi`].
fn cutoff_phi_second(x: f64) -> f64 {
    let r = x.abs();
    if r <= 1.0 || r >= 2.0 {
        return 0.0;
    }
    // f(t) = e^{-1/t}: f' = f/t^2, f'' = f (1/t^4 - 2/t^3)
    let d = |t: f64| {
        let f = (-1.0 / t).exp();
        (f, f / (t * t), f * (1.0 / t.powi(4) - 2.0 / t.powi(3)))
    };
    let (fa, fa1, fa2) = d(2.0 - r);
    let (fb, fb1, fb2) = d(r - 1.0);
    // numerator N(r) = f(2 - r), denominator D(r) = f(2 - r) + f(r - 1)
    let (n, n1, n2) = (fa, -fa1, fa2);
    let (dd, d1, d2) = (fa + fb, -fa1 + fb1, fa2 + fb2);
    n2 / dd - 2.0 * n1 * d1 / (dd * dd) - n * d2 / (dd * dd) + 2.0 * n * d1 * d1 / dd.powi(3)
}

/// `psi(x) = ∫_0^x phi` for the cutoff.
fn cutoff_psi(x: f64) -> f64 {
    let r = x.abs();
    let v = if r <= 1.0 { r } else { 1.0 + gauss_legendre(cutoff_phi, 1.0, r.min(2.0), 16) };
    v.copysign(x)
}

fn int_q_closed() -> f64 {
    gauss_legendre(q_eval, -40.0, 40.0, 160)
}

/// Weight families for `∫ psi((x - c)/R) u^2` and its time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// Compactly supported cutoff; `psi` odd, constant beyond `|x| >= 2`.
    Cutoff,
    /// `phi = c Q(x/K)` with `K = 3 sqrt 2`, `c = 1/(K ∫Q)`; `psi` rises from 0 to 1.
    SolitonDecay,
}

impl WeightKind {
    pub fn name(self) -> &'static str {
        match self {
            WeightKind::Cutoff => "cutoff",
            WeightKind::SolitonDecay => "soliton-decay",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [WeightKind::Cutoff, WeightKind::SolitonDecay].into_iter().find(|w| w.name() == s)
    }

    pub fn phi(self, x: f64) -> f64 {
        match self {
            WeightKind::Cutoff => cutoff_phi(x),
            WeightKind::SolitonDecay => q_eval(x / DECAY_K) / (DECAY_K * int_q_closed()),
        }
    }

    pub fn phi_second(self, x: f64) -> f64 {
        match self {
            WeightKind::Cutoff => cutoff_phi_second(x),
            WeightKind::SolitonDecay => q_second(x / DECAY_K) / (DECAY_K.powi(3) * int_q_closed()),
        }
    }

    pub fn psi(self, x: f64) -> f64 {
        match self {
            WeightKind::Cutoff => cutoff_psi(x),
            WeightKind::SolitonDecay => {
                let z = x / DECAY_K;
                let lo = (-40.0_f64).min(z - 1.0);
                let panels = ((z - lo).ceil() as usize).max(1) * 2;
                gauss_legendre(q_eval, lo, z, panels) / int_q_closed()
            }
        }
    }
}

/// Sampled weight `psi((x - c)/R)` together with `phi` and `phi''`.
struct SampledWeight {
    psi: Vec<f64>,
    phi: Vec<f64>,
    phi2: Vec<f64>,
}

fn sample_weight(grid: &Grid, kind: WeightKind, radius: f64, center: f64) -> Result<SampledWeight> {
    if !(radius > 0.0) || radius > 0.25 * grid.length() {
        return Err(Error::RadiusTooLarge { radius, length: grid.length() });
    }
    let mut w = SampledWeight { psi: vec![], phi: vec![], phi2: vec![] };
    let int_q = int_q_closed();
    for &x in grid.nodes() {
        let s = grid.wrap(x - center) / radius;
        match kind {
            WeightKind::Cutoff => {
                w.psi.push(cutoff_psi(s));
                w.phi.push(cutoff_phi(s));
                w.phi2.push(cutoff_phi_second(s));
            }
            WeightKind::SolitonDecay => {
                w.psi.push(kind.psi(s));
                w.phi.push(q_eval(s / DECAY_K) / (DECAY_K * int_q));
                w.phi2.push(q_second(s / DECAY_K) / (DECAY_K.powi(3) * int_q));
            }
        }
    }
    Ok(w)
}

/// Morawetz potential `∫ psi((x - c)/R) u^2` with the cutoff weight.
pub fn morawetz_potential(u: &Field, radius: f64, center: f64) -> Result<f64> {
    weighted_mass(u, WeightKind::Cutoff, radius, center)
}

pub fn weighted_mass(u: &Field, kind: WeightKind, radius: f64, center: f64) -> Result<f64> {
    let w = sample_weight(u.grid(), kind, radius, center)?;
    let s: f64 = w.psi.iter().zip(u.values()).map(|(p, v)| p * v * v).sum();
    Ok(s * u.grid().spacing())
}

/// Right side of the Morawetz identity for `d/dt ∫psi(x/R)u^2`:
/// `R^{-1} [ -3∫phi u_x^2 + R^{-2}∫phi'' u^2 + (5/3)∫phi u^6 ]`.
pub fn morawetz_rate(u: &Field, kind: WeightKind, radius: f64, center: f64) -> Result<f64> {
    let w = sample_weight(u.grid(), kind, radius, center)?;
    let ux = dx(u);
    let mut kin = 0.0;
    let mut curv = 0.0;
    let mut nonlin = 0.0;
    for i in 0..u.grid().len() {
        let v = u.values()[i];
        let d = ux.values()[i];
        kin += w.phi[i] * d * d;
        curv += w.phi2[i] * v * v;
        nonlin += w.phi[i] * v.powi(6);
    }
    let h = u.grid().spacing();
    Ok((-3.0 * kin + curv / (radius * radius) + 5.0 / 3.0 * nonlin) * h / radius)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorawetzCheck {
    /// Interior snapshot times where the comparison was made.
    pub times: Vec<f64>,
    /// Centered finite-difference `dM/dt` at those times.
    pub finite_difference: Vec<f64>,
    /// Right side of the identity at those times.
    pub identity: Vec<f64>,
    pub max_mismatch: f64,
}

/// Compares centered differences of the potential with the identity's right
/// side at every interior snapshot.
pub fn morawetz_derivative_check(
    series: &TimeSeries,
    kind: WeightKind,
    radius: f64,
    center: f64,
) -> Result<MorawetzCheck> {
    let pots: Vec<f64> =
        series.records.iter().map(|r| weighted_mass(&r.field, kind, radius, center)).collect::<Result<_>>()?;
    let mut check = MorawetzCheck { times: vec![], finite_difference: vec![], identity: vec![], max_mismatch: 0.0 };
    for i in 1..series.records.len().saturating_sub(1) {
        let (r0, r1, r2) = (&series.records[i - 1], &series.records[i], &series.records[i + 1]);
        let fd = (pots[i + 1] - pots[i - 1]) / (r2.t - r0.t);
        let rhs = morawetz_rate(&r1.field, kind, radius, center)?;
        check.max_mismatch = check.max_mismatch.max((fd - rhs).abs());
        check.times.push(r1.t);
        check.finite_difference.push(fd);
        check.identity.push(rhs);
    }
    Ok(check)
}

// ---------------------------------------------------------------------------
// Tails

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

/// Mass of `u` on `{x <= x(t) - x0}` (left) or `{x >= x(t) + x0}` (right),
/// the window closing at the antipode of `x(t)` in the periodic box. The
/// integral is exact for the trigonometric interpolant of `u^2`.
pub fn tail_mass(u: &Field, frame: Frame, x0: f64, side: Side) -> Result<f64> {
    let grid = u.grid();
    let half = 0.5 * grid.length();
    if !(x0 >= 0.0) || x0 > half {
        return Err(Error::WindowOutsideBox(format!("offset {x0} not in [0, {half}]")));
    }
    if !frame.x.is_finite() {
        return Err(Error::WindowOutsideBox(format!("center {}", frame.x)));
    }
    let size = DEALIAS_FACTOR * grid.len();
    let fine = grid.refine(u.values(), DEALIAS_FACTOR);
    let sq: Vec<f64> = fine.iter().map(|v| v * v).collect();
    debug_assert_eq!(sq.len(), size);
    let c = frame.x;
    let (a, b) = match side {
        Side::Left => (c - half, c - x0),
        Side::Right => (c + x0, c + half),
    };
    Ok(interval_integral(grid.length(), grid.left_edge(), &sq, a, b))
}

/// `tail_mass / e^{-x0/6}`.
pub fn decay_bound_ratio(u: &Field, frame: Frame, x0: f64, side: Side) -> Result<f64> {
    Ok(tail_mass(u, frame, x0, side)? / (-x0 / 6.0).exp())
}

// ---------------------------------------------------------------------------
// Mixed space-time norms

fn simpson_weights(m: usize, dt: f64) -> Vec<f64> {
    // m samples, m - 1 uniform intervals
    let intervals = m - 1;
    let mut w = vec![0.0; m];
    if intervals == 1 {
        w[0] = 0.5 * dt;
        w[1] = 0.5 * dt;
        return w;
    }
    let (simpson_end, tail) = if intervals.is_multiple_of(2) { (intervals, 0) } else { (intervals - 3, 3) };
    for i in (0..simpson_end).step_by(2) {
        w[i] += dt / 3.0;
        w[i + 1] += 4.0 * dt / 3.0;
        w[i + 2] += dt / 3.0;
    }
    if tail == 3 {
        let s = simpson_end;
        let c = 3.0 * dt / 8.0;
        w[s] += c;
        w[s + 1] += 3.0 * c;
        w[s + 2] += 3.0 * c;
        w[s + 3] += c;
    }
    w
}

fn select_interval(series: &TimeSeries, interval: (f64, f64)) -> Result<&[Snapshot]> {
    let (t0, t1) = interval;
    let tol = 1e-9 * (1.0 + t1.abs());
    let recs = &series.records;
    let start = recs.iter().position(|r| (r.t - t0).abs() <= tol);
    let end = recs.iter().position(|r| (r.t - t1).abs() <= tol);
    match (start, end) {
        (Some(s), Some(e)) if e > s => {
            let slice = &recs[s..=e];
            let density = (slice.len() - 1) as f64 / (t1 - t0);
            if density < MIN_SNAPSHOTS_PER_TIME {
                return Err(Error::TooSparse { per_unit_time: density, required: MIN_SNAPSHOTS_PER_TIME });
            }
            let dt = (t1 - t0) / (slice.len() - 1) as f64;
            for (i, r) in slice.iter().enumerate() {
                if (r.t - (t0 + i as f64 * dt)).abs() > 1e-6 * dt {
                    return Err(Error::InvalidConfig("snapshots are not uniformly spaced".into()));
                }
            }
            Ok(slice)
        }
        _ => Err(Error::IntervalOutsideSeries { start: t0, end: t1 }),
    }
}

/// `|| ||u(., x)||_{L^q_t(I)} ||_{L^p_x}`, Simpson in time and grid
/// quadrature in space.
pub fn mixed_norm(series: &TimeSeries, interval: (f64, f64), p: f64, q: f64) -> Result<f64> {
    if p < 1.0 || p.is_nan() {
        return Err(Error::InvalidExponent(p));
    }
    if q < 1.0 || q.is_nan() {
        return Err(Error::InvalidExponent(q));
    }
    let slice = select_interval(series, interval)?;
    let dt = (interval.1 - interval.0) / (slice.len() - 1) as f64;
    let w = simpson_weights(slice.len(), dt);
    let n = series.grid.len();
    let mut acc = 0.0;
    for i in 0..n {
        let inner: f64 = slice.iter().zip(&w).map(|(r, wt)| wt * r.field.values()[i].abs().powf(q)).sum();
        acc += inner.max(0.0).powf(p / q);
    }
    Ok((acc * series.grid.spacing()).powf(1.0 / p))
}

/// `S_I(u) = ||u||^5_{L^5_x L^10_t}`.
pub fn scattering_size(series: &TimeSeries, interval: (f64, f64)) -> Result<f64> {
    Ok(mixed_norm(series, interval, 5.0, 10.0)?.powi(5))
}

// ---------------------------------------------------------------------------
// Symmetry group

/// `g_{x0, lambda} f(x) = lambda^{-1/2} f((x - x0)/lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub x0: f64,
    pub lambda: f64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { x0: 0.0, lambda: 1.0 };

    pub fn new(x0: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !x0.is_finite() {
            return Err(Error::InvalidFrame(format!("bad group element ({x0}, {lambda})")));
        }
        Ok(Self { x0, lambda })
    }

    pub fn inverse(self) -> Self {
        Self { x0: -self.x0 / self.lambda, lambda: 1.0 / self.lambda }
    }
}

/// The element acting as `g` after `h`.
pub fn group_compose(g: GroupElement, h: GroupElement) -> GroupElement {
    GroupElement { x0: g.x0 + g.lambda * h.x0, lambda: g.lambda * h.lambda }
}

/// Applies `g` by trigonometric interpolation; the box stands for the line,
/// so arguments falling outside `[-L/2, L/2)` read as zero.
pub fn group_apply(g: GroupElement, f: &Field) -> Result<Field> {
    let grid = f.grid();
    if g.lambda < 1.0 {
        Frame { lambda: g.lambda, x: 0.0 }.check_resolved(grid)?;
    }
    let args: Vec<f64> = grid.nodes().iter().map(|&x| (x - g.x0) / g.lambda).collect();
    let inside: Vec<f64> = args.iter().copied().filter(|&a| grid.contains(a)).collect();
    let mut vals = interpolate(f, &inside).into_iter();
    let amp = g.lambda.powf(-0.5);
    let out = args.iter().map(|&a| if grid.contains(a) { amp * vals.next().expect("counted") } else { 0.0 }).collect();
    Field::new(grid, out)
}

/// `T_g u(t, x) = lambda^{-1/2} u(lambda^{-3} t, (x - x0)/lambda)`.
pub fn spacetime_action(g: GroupElement, series: &TimeSeries) -> Result<TimeSeries> {
    let l3 = g.lambda.powi(3);
    let records = series
        .records
        .iter()
        .map(|r| Ok(Snapshot { t: l3 * r.t, field: group_apply(g, &r.field)? }))
        .collect::<Result<Vec<_>>>()?;
    let mut config = series.config;
    config.dt *= l3;
    config.t_final *= l3;
    let mut out = TimeSeries::from_records(&series.grid, config, records)?;
    out.termination = series.termination;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Asymptotic orthogonality

/// `(lambda, xi, x, t)` parameters of an Airy profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParameters {
    pub lambda: f64,
    pub xi: f64,
    pub x: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityGauge {
    /// `lambda1/lambda2`
    pub ratio_12: f64,
    /// `lambda2/lambda1`
    pub ratio_21: f64,
    /// `sqrt(lambda1 lambda2) |xi1 - xi2|`
    pub frequency: f64,
    /// `<lambda1 xi1 lambda2 xi2>^{1/2} |(lambda1^3 t1 - lambda2^3 t2)/(lambda1 lambda2)^{3/2}|`
    pub time: f64,
    /// `(lambda1 lambda2)^{-1/2} |x1 - x2 + (3/2)(lambda1^3 t1 - lambda2^3 t2)(xi1^2 + xi2^2)|`
    pub space: f64,
    pub total: f64,
}

pub fn asym_orthogonality_gauge(g1: ProfileParameters, g2: ProfileParameters) -> Result<OrthogonalityGauge> {
    if !(g1.lambda > 0.0 && g2.lambda > 0.0) {
        return Err(Error::NonPositiveScale(g1.lambda.min(g2.lambda)));
    }
    let (l1, l2) = (g1.lambda, g2.lambda);
    let prod = l1 * l2;
    let dt = l1.powi(3) * g1.t - l2.powi(3) * g2.t;
    let bracket = (1.0 + (l1 * g1.xi * l2 * g2.xi).powi(2)).sqrt();
    let ratio_12 = l1 / l2;
    let ratio_21 = l2 / l1;
    let frequency = prod.sqrt() * (g1.xi - g2.xi).abs();
    let time = bracket.sqrt() * (dt / prod.powf(1.5)).abs();
    let space = (g1.x - g2.x + 1.5 * dt * (g1.xi * g1.xi + g2.xi * g2.xi)).abs() / prod.sqrt();
    Ok(OrthogonalityGauge {
        ratio_12,
        ratio_21,
        frequency,
        time,
        space,
        total: ratio_12 + ratio_21 + frequency + time + space,
    })
}

/// `||f||_2`, exposed for callers that already hold a field.
pub fn l2(f: &Field) -> f64 {
    l2_norm(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff_phi(0.5), 1.0);
        assert_eq!(cutoff_phi(-1.0), 1.0);
        assert_eq!(cutoff_phi(2.5), 0.0);
        assert!((cutoff_phi(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(cutoff_psi(0.7), 0.7);
        assert_eq!(cutoff_psi(-3.0), -cutoff_psi(3.0));
        // psi' = phi, phi'' by finite differences
        let h = 1e-5;
        for x in [1.2, 1.5, 1.8, -1.3] {
            let d = (cutoff_psi(x + h) - cutoff_psi(x - h)) / (2.0 * h);
            assert!((d - cutoff_phi(x)).abs() < 1e-8, "{x}");
            let d2 = (cutoff_phi(x + h) - 2.0 * cutoff_phi(x) + cutoff_phi(x - h)) / (h * h);
            assert!((d2 - cutoff_phi_second(x)).abs() < 1e-4, "{x}: {d2} {}", cutoff_phi_second(x));
        }
    }

    #[test]
    fn decay_weight_limits() {
        let w = WeightKind::SolitonDecay;
        assert!(w.psi(-200.0).abs() < 1e-12);
        assert!((w.psi(200.0) - 1.0).abs() < 1e-12);
        assert!((w.psi(0.0) - 0.5).abs() < 1e-13);
        let h = 1e-4;
        let d = (w.psi(1.0 + h) - w.psi(1.0 - h)) / (2.0 * h);
        assert!((d - w.phi(1.0)).abs() < 1e-9);
    }

    #[test]
    fn simpson_weights_integrate_cubics() {
        for m in [2usize, 3, 4, 5, 8, 17] {
            let dt = 0.1;
            let w = simpson_weights(m, dt);
            let t_end = (m - 1) as f64 * dt;
            let s: f64 = w.iter().enumerate().map(|(i, wt)| wt * (i as f64 * dt).powi(if m > 2 { 3 } else { 1 })).sum();
            let exact = if m > 2 { t_end.powi(4) / 4.0 } else { t_end * t_end / 2.0 };
            assert!((s - exact).abs() < 1e-12, "m={m}: {s} vs {exact}");
        }
    }

    #[test]
    fn group_inverse_and_identity() {
        let g = GroupElement::new(3.0, 0.5).unwrap();
        let id = group_compose(g, g.inverse());
        assert!((id.x0).abs() < 1e-15 && (id.lambda - 1.0).abs() < 1e-15);
        assert_eq!(group_compose(GroupElement::IDENTITY, g), g);
        assert!(GroupElement::new(0.0, -1.0).is_err());
    }

    #[test]
    fn gauge_of_equal_parameters() {
        let p = ProfileParameters { lambda: 1.0, xi: 0.0, x: 0.0, t: 0.0 };
        let g = asym_orthogonality_gauge(p, p).unwrap();
        assert_eq!(g.total, 2.0);
        assert_eq!((g.frequency, g.time, g.space), (0.0, 0.0, 0.0));
        let far = ProfileParameters { x: 7.5, ..p };
        assert_eq!(asym_orthogonality_gauge(p, far).unwrap().total, 2.0 + 7.5);
        let big = ProfileParameters { lambda: 10.0, ..p };
        assert!((asym_orthogonality_gauge(p, big).unwrap().total - 10.1).abs() < 1e-12);
        assert!(asym_orthogonality_gauge(p, ProfileParameters { lambda: 0.0, ..p }).is_err());
    }
}
