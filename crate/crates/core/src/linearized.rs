//! Linearized operator around `Q`, the nonlinear remainder, the virial
//! quadratic form `H` and a constrained coercivity estimator for it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dealiased_map, dot, dx, dxx, Field, Grid};
use crate::soliton::{q_eval, q_prime, q_profile};

/// Eigenvalues within this distance of zero do not count as one-signed.
pub const DEFINITENESS_TOL: f64 = 1e-9;

/// `L eps = -eps_yy + eps - 5 Q^4 eps`, with `Q^4` from the closed form.
pub fn apply_l(eps: &Field) -> Field {
    let grid = eps.grid();
    let exx = dxx(eps);
    let vals = grid
        .nodes()
        .iter()
        .zip(eps.values())
        .zip(exx.values())
        .map(|((&y, &e), &d2)| -d2 + e - 5.0 * q_eval(y).powi(4) * e)
        .collect();
    Field::from_raw(grid, vals)
}

/// `R(eps) = 10 Q^3 eps^2 + 10 Q^2 eps^3 + 5 Q eps^4 + eps^5`, dealiased.
pub fn nonlinear_remainder(eps: &Field) -> Field {
    let q = q_profile(eps.grid());
    dealiased_map(&[&q, eps], |v| {
        let (q, e) = (v[0], v[1]);
        let e2 = e * e;
        e2 * (10.0 * q.powi(3) + e * (10.0 * q * q + e * (5.0 * q + e)))
    })
    .expect("same grid")
}

/// Multiplier of `eps^2` in the potential part of `H`:
/// `10 Q^3 Q_y y + (5/2) Q^4`.
fn h_potential(y: f64) -> f64 {
    let q = q_eval(y);
    10.0 * q.powi(3) * q_prime(y) * y + 2.5 * q.powi(4)
}

/// Bilinear form
/// `H(f, g) = -(3/2)∫f_y g_y - (1/2)∫f g - 10∫Q^3 Q_y y f g - (5/2)∫Q^4 f g`.
pub fn bilinear_h(f: &Field, g: &Field) -> Result<f64> {
    f.check_same_grid(g)?;
    let grid = f.grid();
    let (fy, gy) = (dx(f), dx(g));
    let pot: f64 =
        grid.nodes().iter().zip(f.values().iter().zip(g.values())).map(|(&y, (&a, &b))| h_potential(y) * a * b).sum();
    let h = grid.spacing();
    Ok(h * (-1.5 * dot(fy.values(), gy.values()) - 0.5 * dot(f.values(), g.values()) - pot))
}

/// `H(eps, eps)`.
pub fn quadratic_form_h(eps: &Field) -> f64 {
    bilinear_h(eps, eps).expect("same grid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Definiteness {
    PositiveDefinite,
    NegativeDefinite,
    Indefinite,
}

/// Result of the constrained Rayleigh-quotient extremization of `H` against
/// the `H^1` norm.
#[derive(Debug, Clone)]
pub struct ConstrainedSpectrum {
    /// The extremal Rayleigh value on the definite side (closest to zero).
    /// For an indefinite form this is the lowest value.
    pub extremal: f64,
    pub lowest: f64,
    pub highest: f64,
    pub sign: Definiteness,
    /// Unit-`H^1` field attaining `extremal`.
    pub extremizer: Field,
}

impl ConstrainedSpectrum {
    /// `|extremal|` when strictly one-signed, zero otherwise.
    pub fn delta1(&self) -> f64 {
        match self.sign {
            Definiteness::Indefinite => 0.0,
            _ => self.extremal.abs(),
        }
    }
}

/// Real symmetric circulant matrix with the given Fourier symbol.
fn circulant_from_symbol(grid: &Grid, symbol: &[f64]) -> Vec<f64> {
    let spec: Vec<C64> = symbol.iter().map(|&s| C64::new(s, 0.0)).collect();
    grid.inverse_real(spec)
}

fn apply_symbol_to_columns(grid: &Grid, m: &DMatrix<f64>, symbol: &[f64]) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, m.ncols());
    for j in 0..m.ncols() {
        let col: Vec<f64> = m.column(j).iter().copied().collect();
        let mut spec = grid.forward(&col);
        for (c, &s) in spec.iter_mut().zip(symbol) {
            *c *= s;
        }
        let v = grid.inverse_real(spec);
        out.column_mut(j).copy_from_slice(&v);
    }
    out
}

/// Householder reflector `I - 2 v v^T` acting on rows/cols `offset..`.
struct Reflector {
    offset: usize,
    v: DVector<f64>,
}

impl Reflector {
    fn apply_left(&self, m: &mut DMatrix<f64>) {
        let rows = self.v.len();
        for j in 0..m.ncols() {
            let mut s = 0.0;
            for i in 0..rows {
                s += self.v[i] * m[(self.offset + i, j)];
            }
            for i in 0..rows {
                m[(self.offset + i, j)] -= 2.0 * s * self.v[i];
            }
        }
    }

    fn apply_right(&self, m: &mut DMatrix<f64>) {
        let cols = self.v.len();
        for i in 0..m.nrows() {
            let mut s = 0.0;
            for j in 0..cols {
                s += m[(i, self.offset + j)] * self.v[j];
            }
            for j in 0..cols {
                m[(i, self.offset + j)] -= 2.0 * s * self.v[j];
            }
        }
    }

    fn apply_vec(&self, x: &mut DVector<f64>) {
        let s: f64 = (0..self.v.len()).map(|i| self.v[i] * x[self.offset + i]).sum();
        for i in 0..self.v.len() {
            x[self.offset + i] -= 2.0 * s * self.v[i];
        }
    }
}

/// Extremizes `H(e,e) / ||e||_{H^1}^2` over grid fields orthogonal (in `L^2`)
/// to every constraint.
///
/// The pencil `(H, G)` with `G` the `H^1` Gram matrix is symmetrized with the
/// circulant `G^{-1/2}`; in those coordinates the constraints become vectors
/// that are deflated by Householder reflections, and the compressed matrix is
/// diagonalized densely. Cost is `O(N^3)`; intended for `N <= 1024`.
pub fn coercivity_estimate(grid: &Grid, constraints: &[Field]) -> Result<ConstrainedSpectrum> {
    let n = grid.len();
    let h = grid.spacing();
    for c in constraints {
        if c.grid() != grid {
            return Err(Error::GridMismatch);
        }
    }
    check_independent(constraints)?;

    // -d^2 as the circulant with symbol k^2. The product D^T D of first
    // derivatives would zero the Nyquist mode and admit a spurious
    // grid-scale extremizer.
    let k2: Vec<f64> = grid.wavenumbers().iter().map(|k| k * k).collect();
    let dtd = circulant_from_symbol(grid, &k2);
    let g_symbol: Vec<f64> = k2.iter().map(|k2| h * (1.0 + k2)).collect();
    if g_symbol.iter().any(|&s| s <= 0.0) {
        return Err(Error::SingularGram);
    }
    let inv_sqrt: Vec<f64> = g_symbol.iter().map(|s| s.powf(-0.5)).collect();

    let pot: Vec<f64> = grid.nodes().iter().map(|&y| h_potential(y)).collect();
    let hmat = DMatrix::from_fn(n, n, |i, j| {
        let circ = dtd[(i + n - j) % n];
        let diag = if i == j { 0.5 + pot[i] } else { 0.0 };
        h * (-1.5 * circ - diag)
    });
    let sh = apply_symbol_to_columns(grid, &hmat, &inv_sqrt);
    let mut hhat = apply_symbol_to_columns(grid, &sh.transpose(), &inv_sqrt);
    // Symmetrize away rounding.
    hhat = (&hhat + hhat.transpose()) * 0.5;

    let k = constraints.len();
    let mut dmat = DMatrix::zeros(n, k);
    for (j, c) in constraints.iter().enumerate() {
        let a = DMatrix::from_column_slice(n, 1, &c.values().iter().map(|v| h * v).collect::<Vec<_>>());
        let d = apply_symbol_to_columns(grid, &a, &inv_sqrt);
        dmat.set_column(j, &d.column(0));
    }

    let mut reflectors = Vec::with_capacity(k);
    for j in 0..k {
        let x = dmat.view((j, j), (n - j, 1)).column(0).clone_owned();
        let norm = x.norm();
        if norm < 1e-14 {
            return Err(Error::DependentConstraints);
        }
        let mut v = x.clone();
        v[0] += norm.copysign(x[0]);
        let vn = v.norm();
        v /= vn;
        let r = Reflector { offset: j, v };
        r.apply_left(&mut dmat);
        r.apply_left(&mut hhat);
        r.apply_right(&mut hhat);
        reflectors.push(r);
    }

    let block = hhat.view((k, k), (n - k, n - k)).clone_owned();
    let eig = SymmetricEigen::new(block);
    let (mut imin, mut imax) = (0, 0);
    for i in 0..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
        if eig.eigenvalues[i] > eig.eigenvalues[imax] {
            imax = i;
        }
    }
    let (lowest, highest) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
    let (sign, idx) = if lowest > DEFINITENESS_TOL {
        (Definiteness::PositiveDefinite, imin)
    } else if highest < -DEFINITENESS_TOL {
        (Definiteness::NegativeDefinite, imax)
    } else {
        (Definiteness::Indefinite, imin)
    };

    let mut w = DVector::zeros(n);
    w.rows_mut(k, n - k).copy_from(&eig.eigenvectors.column(idx));
    for r in reflectors.iter().rev() {
        r.apply_vec(&mut w);
    }
    let wm = DMatrix::from_column_slice(n, 1, w.as_slice());
    let v = apply_symbol_to_columns(grid, &wm, &inv_sqrt);
    let extremizer = Field::new(grid, v.column(0).iter().copied().collect())?;

    Ok(ConstrainedSpectrum { extremal: eig.eigenvalues[idx], lowest, highest, sign, extremizer })
}

fn check_independent(constraints: &[Field]) -> Result<()> {
    let k = constraints.len();
    if k == 0 {
        return Ok(());
    }
    let gram = DMatrix::from_fn(k, k, |i, j| dot(constraints[i].values(), constraints[j].values()));
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let max = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if max == 0.0 || min <= 1e-10 * max {
        return Err(Error::DependentConstraints);
    }
    Ok(())
}
