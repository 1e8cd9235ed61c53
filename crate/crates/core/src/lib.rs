//! Numerical laboratory for the focusing mass-critical generalized KdV
//! equation `u_t = -(u_xx + u^5)_x` near its soliton.
//!
//! Modules, bottom-up:
//! - [`grid`]: periodic pseudospectral grid, fields, transforms, quadrature.
//! - [`soliton`]: the ground state `Q`, its derived directions and constants.
//! - [`linearized`]: the operator `L`, the remainder `R`, the virial form `H`
//!   and its constrained coercivity.
//! - [`evolve`]: integrating-factor RK4 time stepping and the Airy propagator.
//! - [`modulation`]: `(lambda, x, eps)` decomposition, modulation rates and
//!   tracking along a flow.
//! - [`functionals`]: mass, energy, virials, Morawetz, tails, mixed norms and
//!   the symmetry group.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolve;
pub mod functionals;
pub mod grid;
pub mod io;
pub mod linearized;
pub mod modulation;
pub mod soliton;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use soliton::Frame;
