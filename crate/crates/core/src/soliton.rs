//! The ground state `Q(x) = 3^{1/4} cosh(2x)^{-1/2}`, its closed-form
//! derivatives, the modulated family and the soliton constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dot, dxx, integrate, Field, Grid};

/// Frame width must exceed this many grid spacings (width = lambda / 2).
pub const RESOLUTION_SPACINGS: f64 = 4.0;

/// `Q(x)`, evaluated without overflow for large `|x|`.
pub fn q_eval(x: f64) -> f64 {
    // cosh(2x)^{-1/2} = sqrt(2 e^{-2|x|} / (1 + e^{-4|x|}))
    let e = (-2.0 * x.abs()).exp();
    3f64.powf(0.25) * (2.0 * e / (1.0 + e * e)).sqrt()
}

/// `Q'(x) = -Q tanh(2x)`.
pub fn q_prime(x: f64) -> f64 {
    -q_eval(x) * (2.0 * x).tanh()
}

/// `Q''(x) = Q - Q^5`.
pub fn q_second(x: f64) -> f64 {
    let q = q_eval(x);
    q - q.powi(5)
}

/// `Q'''(x) = Q'(1 - 5Q^4)`.
pub fn q_third(x: f64) -> f64 {
    let q = q_eval(x);
    q_prime(x) * (1.0 - 5.0 * q.powi(4))
}

/// `Q''''(x) = Q''(1 - 5Q^4) - 20 Q^3 Q'^2`.
pub fn q_fourth(x: f64) -> f64 {
    let q = q_eval(x);
    let qp = q_prime(x);
    q_second(x) * (1.0 - 5.0 * q.powi(4)) - 20.0 * q.powi(3) * qp * qp
}

/// `Lambda Q = Q/2 + y Q_y`, the generator of the scaling symmetry.
pub fn lambda_q(y: f64) -> f64 {
    0.5 * q_eval(y) + y * q_prime(y)
}

/// Profile directions sampled from closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Q,
    Qy,
    LambdaQ,
    YQy,
    YLambdaQ,
}

impl Direction {
    pub const ALL: [Direction; 5] =
        [Direction::Q, Direction::Qy, Direction::LambdaQ, Direction::YQy, Direction::YLambdaQ];

    pub fn eval(self, y: f64) -> f64 {
        match self {
            Direction::Q => q_eval(y),
            Direction::Qy => q_prime(y),
            Direction::LambdaQ => lambda_q(y),
            Direction::YQy => y * q_prime(y),
            Direction::YLambdaQ => y * lambda_q(y),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Q => "Q",
            Direction::Qy => "Qy",
            Direction::LambdaQ => "LambdaQ",
            Direction::YQy => "yQy",
            Direction::YLambdaQ => "yLambdaQ",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name().eq_ignore_ascii_case(s))
    }
}

/// Scale `lambda > 0` and center `x` of a member of the modulated family
/// `lambda^{-1/2} Q((x - x0) / lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub lambda: f64,
    pub x: f64,
}

impl Frame {
    pub const IDENTITY: Frame = Frame { lambda: 1.0, x: 0.0 };

    pub fn new(lambda: f64, x: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidFrame(format!("lambda must be positive, got {lambda}")));
        }
        if !x.is_finite() {
            return Err(Error::InvalidFrame(format!("center must be finite, got {x}")));
        }
        Ok(Self { lambda, x })
    }

    /// Smallest scale resolvable on `grid`.
    pub fn min_lambda(grid: &Grid) -> f64 {
        2.0 * RESOLUTION_SPACINGS * grid.spacing()
    }

    pub fn check_resolved(&self, grid: &Grid) -> Result<()> {
        let min_lambda = Self::min_lambda(grid);
        if self.lambda <= min_lambda {
            return Err(Error::UnderResolved { lambda: self.lambda, min_lambda });
        }
        Ok(())
    }
}

pub fn q_profile(grid: &Grid) -> Field {
    Field::from_fn(grid, q_eval)
}

pub fn q_direction(grid: &Grid, kind: Direction) -> Field {
    Field::from_fn(grid, |y| kind.eval(y))
}

/// `lambda^{-1/2} Q((x - x0)/lambda)` with the displacement taken periodically.
pub fn soliton_on_grid(grid: &Grid, frame: Frame) -> Result<Field> {
    let frame = Frame::new(frame.lambda, frame.x)?;
    frame.check_resolved(grid)?;
    if !grid.contains(frame.x) {
        return Err(Error::OutsideBox(frame.x));
    }
    let amp = frame.lambda.powf(-0.5);
    Ok(Field::from_fn(grid, |x| amp * q_eval(grid.wrap(x - frame.x) / frame.lambda)))
}

/// `sup |f'' + f^5 - f|` with the spectral second derivative.
pub fn elliptic_residual_of(f: &Field) -> f64 {
    let fxx = dxx(f);
    fxx.values().iter().zip(f.values()).fold(0.0_f64, |m, (&d2, &v)| m.max((d2 + v.powi(5) - v).abs()))
}

pub fn elliptic_residual(grid: &Grid) -> f64 {
    elliptic_residual_of(&q_profile(grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonConstants {
    /// `∫ Q`
    pub int_q: f64,
    /// `∫ Q^2`
    pub mass_q: f64,
    /// `(∫ Q)^2 / 4`
    pub kappa: f64,
    /// `∫ (Q/2 + y Q_y)^2`
    pub scaling_norm: f64,
}

pub fn soliton_constants(grid: &Grid) -> SolitonConstants {
    let q = q_profile(grid);
    let lq = q_direction(grid, Direction::LambdaQ);
    let h = grid.spacing();
    let int_q = integrate(&q);
    SolitonConstants {
        int_q,
        mass_q: dot(q.values(), q.values()) * h,
        kappa: 0.25 * int_q * int_q,
        scaling_norm: dot(lq.values(), lq.values()) * h,
    }
}
