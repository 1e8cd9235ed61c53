//! Periodic pseudospectral toolkit.
//!
//! A [`Grid`] discretizes the truncated line `[-L/2, L/2)` with `N` uniform
//! nodes; a [`Field`] is a real function sampled on those nodes. Everything
//! else in the crate (derivatives, dealiased products, quadrature, norms,
//! trigonometric interpolation) is built from the transforms defined here.
//!
//! Transforms are unnormalized forward / `1/N` inverse, with the spectrum
//! referenced to the left edge `x_0 = -L/2`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Zero-padding factor used for dealiased products of degree up to five.
pub const DEALIAS_FACTOR: usize = 3;

/// Padding factor for exact quadrature of sixth-degree products.
pub const QUADRATURE_PAD_FACTOR: usize = 4;

const MIN_POINTS: usize = 16;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    fn new(planner: &mut FftPlanner<f64>, n: usize) -> Self {
        Self { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }
}

struct GridInner {
    length: f64,
    n: usize,
    nodes: Vec<f64>,
    /// Wavenumbers in FFT order; the Nyquist entry carries `-pi N / L`.
    k: Vec<f64>,
    /// Same as `k` but with the Nyquist entry zeroed (odd-order operators).
    k_odd: Vec<f64>,
    native: Plans,
    dealias: Plans,
    quadrature: Plans,
}

/// Uniform periodic discretization of `[-L/2, L/2)`.
///
/// Cheap to clone: the node table and FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("length", &self.inner.length).field("n", &self.inner.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.length.to_bits() == other.inner.length.to_bits())
    }
}

/// Wavenumbers `2 pi j / L` in FFT order for a transform of size `n`.
fn fft_wavenumbers(length: f64, n: usize) -> Vec<f64> {
    let dk = 2.0 * PI / length;
    (0..n)
        .map(|j| {
            let signed = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
            dk * signed as f64
        })
        .collect()
}

impl Grid {
    /// Builds the grid on `[-L/2, L/2)` with `n` nodes.
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("L must be positive, got {length}")));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid("N must be even".into()));
        }
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("N must be at least {MIN_POINTS}, got {n}")));
        }
        let h = length / n as f64;
        let nodes = (0..n).map(|i| -0.5 * length + i as f64 * h).collect();
        let k = fft_wavenumbers(length, n);
        let mut k_odd = k.clone();
        k_odd[n / 2] = 0.0;
        let mut planner = FftPlanner::new();
        let native = Plans::new(&mut planner, n);
        let dealias = Plans::new(&mut planner, DEALIAS_FACTOR * n);
        let quadrature = Plans::new(&mut planner, QUADRATURE_PAD_FACTOR * n);
        Ok(Self { inner: Arc::new(GridInner { length, n, nodes, k, k_odd, native, dealias, quadrature }) })
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node spacing, which is also the quadrature weight.
    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    pub fn left_edge(&self) -> f64 {
        -0.5 * self.inner.length
    }

    pub fn nodes(&self) -> &[f64] {
        &self.inner.nodes
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.k
    }

    /// Largest resolved wavenumber magnitude, `pi N / L`.
    pub fn max_wavenumber(&self) -> f64 {
        PI * self.inner.n as f64 / self.inner.length
    }

    /// Reduces a displacement to the periodic representative in `[-L/2, L/2)`.
    pub fn wrap(&self, d: f64) -> f64 {
        let l = self.inner.length;
        d - l * ((d + 0.5 * l) / l).floor()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.left_edge() && x < -self.left_edge()
    }

    fn plans(&self, size: usize) -> &Plans {
        let n = self.inner.n;
        if size == n {
            &self.inner.native
        } else if size == DEALIAS_FACTOR * n {
            &self.inner.dealias
        } else if size == QUADRATURE_PAD_FACTOR * n {
            &self.inner.quadrature
        } else {
            unreachable!("no FFT plan for size {size}")
        }
    }

    /// Unnormalized forward transform of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<C64> {
        let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.plans(buf.len()).forward.process(&mut buf);
        buf
    }

    /// Inverse transform (with `1/size` normalization), keeping the real part.
    pub fn inverse_real(&self, mut spectrum: Vec<C64>) -> Vec<f64> {
        let size = spectrum.len();
        self.plans(size).inverse.process(&mut spectrum);
        let scale = 1.0 / size as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }

    /// Embeds a native spectrum into a zero-padded spectrum of `size` modes,
    /// rescaled so that the inverse transform interpolates the same function.
    /// The Nyquist coefficient is split evenly between `+N/2` and `-N/2`.
    pub fn pad_spectrum(&self, spectrum: &[C64], size: usize) -> Vec<C64> {
        let n = self.inner.n;
        debug_assert_eq!(spectrum.len(), n);
        let scale = size as f64 / n as f64;
        let mut out = vec![C64::new(0.0, 0.0); size];
        for j in 0..n / 2 {
            out[j] = spectrum[j] * scale;
        }
        for j in 1..n / 2 {
            out[size - j] = spectrum[n - j] * scale;
        }
        let nyq = spectrum[n / 2] * (0.5 * scale);
        out[n / 2] = nyq;
        out[size - n / 2] = nyq;
        out
    }

    /// Keeps the modes `|j| < N/2` of a padded spectrum (Nyquist dropped).
    pub fn truncate_spectrum(&self, padded: &[C64]) -> Vec<C64> {
        let n = self.inner.n;
        let size = padded.len();
        let scale = n as f64 / size as f64;
        let mut out = vec![C64::new(0.0, 0.0); n];
        for j in 0..n / 2 {
            out[j] = padded[j] * scale;
        }
        for j in 1..n / 2 {
            out[n - j] = padded[size - j] * scale;
        }
        out
    }

    /// Samples of the trigonometric interpolant on the `factor`-times finer grid.
    pub fn refine(&self, values: &[f64], factor: usize) -> Vec<f64> {
        let spec = self.forward(values);
        self.inverse_real(self.pad_spectrum(&spec, factor * self.inner.n))
    }
}

/// Real function sampled at every node of a [`Grid`].
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    /// Internal constructor for values produced by finite arithmetic.
    pub(crate) fn from_raw(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid: grid.clone(), values }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(grid, grid.nodes().iter().map(|&x| f(x)).collect())
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::from_raw(grid, vec![0.0; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_raw(&self.grid, self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect()))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn spectrum(&self) -> Vec<C64> {
        self.grid.forward(&self.values)
    }

    pub(crate) fn from_spectrum(grid: &Grid, spectrum: Vec<C64>) -> Self {
        Self::from_raw(grid, grid.inverse_real(spectrum))
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a + b).expect("field addition across grids")
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a - b).expect("field subtraction across grids")
    }
}

impl Mul<&Field> for f64 {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        rhs.scale(self)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(-1.0)
    }
}

/// Spectral derivative of order 1, 2 or 3.
pub fn derivative(f: &Field, order: u32) -> Result<Field> {
    if !(1..=3).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    let grid = f.grid();
    let ks = if order % 2 == 1 { &grid.inner.k_odd } else { &grid.inner.k };
    let mut spec = f.spectrum();
    for (c, &k) in spec.iter_mut().zip(ks) {
        let ik = C64::new(0.0, k);
        *c *= ik.powu(order);
    }
    Ok(Field::from_spectrum(grid, spec))
}

/// Infallible first derivative, used where the order is fixed in code.
pub(crate) fn dx(f: &Field) -> Field {
    derivative(f, 1).expect("order 1 is supported")
}

pub(crate) fn dxx(f: &Field) -> Field {
    derivative(f, 2).expect("order 2 is supported")
}

/// `(L/N) * sum_i f_i g_i`.
pub fn inner_product(f: &Field, g: &Field) -> Result<f64> {
    f.check_same_grid(g)?;
    Ok(dot(f.values(), g.values()) * f.grid().spacing())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quadrature of a sampled function: `(L/N) * sum_i f_i`.
pub fn integrate(f: &Field) -> f64 {
    f.values().iter().sum::<f64>() * f.grid().spacing()
}

/// Discrete `L^p` norm; `p = f64::INFINITY` gives the sup norm.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(f.sup_norm());
    }
    let h = f.grid().spacing();
    if p == 2.0 {
        return Ok((dot(f.values(), f.values()) * h).sqrt());
    }
    let s: f64 = f.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((s * h).powf(1.0 / p))
}

pub(crate) fn l2_norm(f: &Field) -> f64 {
    (dot(f.values(), f.values()) * f.grid().spacing()).sqrt()
}

/// `(||f||_2^2 + ||f_x||_2^2)^{1/2}` with the spectral derivative.
pub fn h1_norm(f: &Field) -> f64 {
    let fx = dx(f);
    let h = f.grid().spacing();
    ((dot(f.values(), f.values()) + dot(fx.values(), fx.values())) * h).sqrt()
}

/// `(L / N^2) * sum_k |f_k|^2`, the spectral side of Parseval.
pub fn spectral_mass(f: &Field) -> f64 {
    let n = f.grid().len() as f64;
    f.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>() * f.grid().length() / (n * n)
}

/// Applies a pointwise function of several fields on the 3x padded grid and
/// truncates the result back to the native modes. Alias-free for polynomials
/// of total degree up to five.
pub fn dealiased_map(fields: &[&Field], f: impl Fn(&[f64]) -> f64) -> Result<Field> {
    let first = fields.first().expect("at least one field");
    for g in &fields[1..] {
        first.check_same_grid(g)?;
    }
    let grid = first.grid();
    let size = DEALIAS_FACTOR * grid.len();
    let padded: Vec<Vec<f64>> =
        fields.iter().map(|g| grid.inverse_real(grid.pad_spectrum(&g.spectrum(), size))).collect();
    let mut args = vec![0.0; fields.len()];
    let mapped: Vec<f64> = (0..size)
        .map(|i| {
            for (a, p) in args.iter_mut().zip(&padded) {
                *a = p[i];
            }
            f(&args)
        })
        .collect();
    let spec = grid.forward(&mapped);
    Ok(Field::from_spectrum(grid, grid.truncate_spectrum(&spec)))
}

/// `f^p` for `p` in `2..=5`, computed without aliasing.
pub fn pow_dealiased(f: &Field, p: u32) -> Result<Field> {
    if !(2..=5).contains(&p) {
        return Err(Error::InvalidPower(p));
    }
    dealiased_map(&[f], |v| v[0].powi(p as i32))
}

/// Exact integral of a pointwise function of the trigonometric interpolants,
/// evaluated on the 4x padded grid. Exact for polynomials of degree <= 7.
pub fn padded_integral(fields: &[&Field], f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let first = fields.first().expect("at least one field");
    for g in &fields[1..] {
        first.check_same_grid(g)?;
    }
    let grid = first.grid();
    let padded: Vec<Vec<f64>> = fields.iter().map(|g| grid.refine(g.values(), QUADRATURE_PAD_FACTOR)).collect();
    let size = QUADRATURE_PAD_FACTOR * grid.len();
    let mut args = vec![0.0; fields.len()];
    let mut sum = 0.0;
    for i in 0..size {
        for (a, p) in args.iter_mut().zip(&padded) {
            *a = p[i];
        }
        sum += f(&args);
    }
    Ok(sum * grid.length() / size as f64)
}

/// Evaluates the periodic trigonometric interpolant of `f` at arbitrary points.
pub fn interpolate(f: &Field, points: &[f64]) -> Vec<f64> {
    let grid = f.grid();
    let spec = f.spectrum();
    interpolate_spectrum(grid, &spec, points)
}

pub(crate) fn interpolate_spectrum(grid: &Grid, spec: &[C64], points: &[f64]) -> Vec<f64> {
    const RESEED: usize = 32;
    let n = grid.len();
    let half = n / 2;
    let dk = 2.0 * PI / grid.length();
    let x0 = grid.left_edge();
    let inv_n = 1.0 / n as f64;
    points
        .iter()
        .map(|&z| {
            let theta = z - x0;
            let step = C64::from_polar(1.0, dk * theta);
            let mut acc = 0.0;
            let mut phase = C64::new(1.0, 0.0);
            for (j, c) in spec.iter().enumerate().take(half).skip(1) {
                if j % RESEED == 0 {
                    phase = C64::from_polar(1.0, dk * j as f64 * theta);
                } else {
                    phase *= step;
                }
                acc += c.re * phase.re - c.im * phase.im;
            }
            let nyq = spec[half].re * (dk * half as f64 * theta).cos();
            (spec[0].re + 2.0 * acc + nyq) * inv_n
        })
        .collect()
}

/// Periodic antiderivative of a mean-zero field, pinned to zero at the left
/// edge. The mean is discarded; callers check it first.
pub fn antiderivative_mean_zero(f: &Field) -> Field {
    let grid = f.grid();
    let mut spec = f.spectrum();
    spec[0] = C64::new(0.0, 0.0);
    for (c, &k) in spec.iter_mut().zip(&grid.inner.k_odd).skip(1) {
        if k == 0.0 {
            *c = C64::new(0.0, 0.0);
        } else {
            *c /= C64::new(0.0, k);
        }
    }
    let mut vals = grid.inverse_real(spec);
    let left = vals[0];
    vals.iter_mut().for_each(|v| *v -= left);
    Field::from_raw(grid, vals)
}

/// Exact integral over `[a, b]` of the trigonometric interpolant of uniform
/// samples spanning one period `[x0, x0 + length)`.
pub fn interval_integral(length: f64, x0: f64, samples: &[f64], a: f64, b: f64) -> f64 {
    let m = samples.len();
    let mut buf: Vec<C64> = samples.iter().map(|&v| C64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let dk = 2.0 * PI / length;
    let half = m / 2;
    let (ta, tb) = (a - x0, b - x0);
    let mut acc = buf[0].re * (b - a);
    for (j, c) in buf.iter().enumerate().take(half).skip(1) {
        let k = dk * j as f64;
        let eb = C64::from_polar(1.0, k * tb);
        let ea = C64::from_polar(1.0, k * ta);
        let term = *c * (eb - ea) / C64::new(0.0, k);
        acc += 2.0 * term.re;
    }
    if m.is_multiple_of(2) {
        let k = dk * half as f64;
        acc += buf[half].re * ((k * tb).sin() - (k * ta).sin()) / k;
    }
    acc / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> Grid {
        Grid::new(100.0, 256).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(Grid::new(100.0, 15).unwrap_err(), Error::InvalidGrid("N must be even".into()));
        assert!(Grid::new(0.0, 64).is_err());
        assert!(Grid::new(-1.0, 64).is_err());
        assert!(Grid::new(10.0, 8).is_err());
    }

    #[test]
    fn spacing_and_max_wavenumber() {
        let g = Grid::new(100.0, 4096).unwrap();
        assert_eq!(g.spacing(), 100.0 / 4096.0);
        let g = Grid::new(1.0, 16).unwrap();
        assert_abs_diff_eq!(g.max_wavenumber(), 16.0 * PI, epsilon = 1e-12);
        let kmax = g.wavenumbers().iter().fold(0.0_f64, |m, k| m.max(k.abs()));
        assert!(kmax <= g.max_wavenumber() + 1e-12);
    }

    #[test]
    fn derivative_of_sine_and_constant() {
        let g = grid();
        let w = 2.0 * PI / g.length();
        let f = Field::from_fn(&g, |x| (w * x).sin());
        let df = derivative(&f, 1).unwrap();
        for (x, v) in g.nodes().iter().zip(df.values()) {
            assert!((v - w * (w * x).cos()).abs() < 1e-12);
        }
        let one = Field::from_fn(&g, |_| 1.0);
        assert!(derivative(&one, 1).unwrap().sup_norm() < 1e-14);
        assert_eq!(derivative(&one, 4).unwrap_err(), Error::UnsupportedOrder(4));
    }

    #[test]
    fn field_validation() {
        let g = grid();
        assert!(matches!(Field::new(&g, vec![0.0; 3]), Err(Error::LengthMismatch { .. })));
        let mut v = vec![0.0; g.len()];
        v[7] = f64::NAN;
        assert_eq!(Field::new(&g, v).unwrap_err(), Error::NonFinite(7));
        let other = Grid::new(50.0, 256).unwrap();
        assert_eq!(inner_product(&Field::zeros(&g), &Field::zeros(&other)).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn norms_of_zero_and_bad_exponent() {
        let g = grid();
        let z = Field::zeros(&g);
        assert_eq!(lp_norm(&z, 8.0).unwrap(), 0.0);
        assert_eq!(inner_product(&z, &z).unwrap(), 0.0);
        assert_eq!(lp_norm(&z, 0.5).unwrap_err(), Error::InvalidExponent(0.5));
    }

    #[test]
    fn square_of_cosine_is_resolved() {
        let g = grid();
        let w = 2.0 * PI / g.length();
        let f = Field::from_fn(&g, |x| (w * x).cos());
        let sq = pow_dealiased(&f, 2).unwrap();
        for (x, v) in g.nodes().iter().zip(sq.values()) {
            assert!((v - (0.5 + 0.5 * (2.0 * w * x).cos())).abs() < 1e-12);
        }
        assert_eq!(pow_dealiased(&Field::zeros(&g), 5).unwrap().sup_norm(), 0.0);
        assert_eq!(pow_dealiased(&f, 6).unwrap_err(), Error::InvalidPower(6));
    }

    #[test]
    fn interpolation_reproduces_nodes_and_band_limited_values() {
        let g = grid();
        let w = 2.0 * PI / g.length();
        let f = Field::from_fn(&g, |x| (3.0 * w * x).sin() + 0.5 * (7.0 * w * x).cos());
        let at_nodes = interpolate(&f, g.nodes());
        for (a, b) in at_nodes.iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let pts = [0.123, -17.3, 49.9, 3.0 * g.length() + 0.123];
        let vals = interpolate(&f, &pts);
        for (&z, v) in pts.iter().zip(vals) {
            let exact = (3.0 * w * z).sin() + 0.5 * (7.0 * w * z).cos();
            assert!((v - exact).abs() < 1e-12, "{z}: {v} vs {exact}");
        }
    }

    #[test]
    fn interval_integral_of_trig_polynomial() {
        let g = grid();
        let w = 2.0 * PI / g.length();
        let f = Field::from_fn(&g, |x| 1.0 + (w * x).cos());
        let (a, b) = (-10.0, 20.0);
        let exact = (b - a) + ((w * b).sin() - (w * a).sin()) / w;
        let got = interval_integral(g.length(), g.left_edge(), f.values(), a, b);
        assert_abs_diff_eq!(got, exact, epsilon = 1e-11);
    }

    #[test]
    fn antiderivative_of_cosine() {
        let g = grid();
        let w = 2.0 * PI / g.length();
        let f = Field::from_fn(&g, |x| (w * x).cos());
        let big_f = antiderivative_mean_zero(&f);
        let x0 = g.left_edge();
        for (x, v) in g.nodes().iter().zip(big_f.values()) {
            let exact = ((w * x).sin() - (w * x0).sin()) / w;
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn wrap_is_periodic() {
        let g = grid();
        assert_abs_diff_eq!(g.wrap(51.0), -49.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.wrap(-50.0), -50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.wrap(250.5), 50.5 - 100.0, epsilon = 1e-12);
    }
}
