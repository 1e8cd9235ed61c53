use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {got} samples but the grid has {expected} points")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field contains a non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("unsupported derivative order {0} (expected 1, 2 or 3)")]
    UnsupportedOrder(u32),

    #[error("invalid Lebesgue exponent {0} (expected p >= 1)")]
    InvalidExponent(f64),

    #[error("invalid power {0} (expected 2..=5)")]
    InvalidPower(u32),

    #[error("under-resolved frame: lambda = {lambda} but the grid needs lambda > {min_lambda}")]
    UnderResolved { lambda: f64, min_lambda: f64 },

    #[error("position {0} lies outside the periodic box")]
    OutsideBox(f64),

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("dependent constraints")]
    DependentConstraints,

    #[error("singular Gram matrix")]
    SingularGram,

    #[error("Newton iteration diverged: {0}")]
    Divergence(String),

    #[error("singular modulation system (smallest singular value {smallest_singular_value:e})")]
    SingularSystem { smallest_singular_value: f64 },

    #[error("field does not decay at the box edge (|f| = {boundary:e} > {tolerance:e})")]
    NonDecaying { boundary: f64, tolerance: f64 },

    #[error("window outside the box: {0}")]
    WindowOutsideBox(String),

    #[error("snapshots too sparse: {per_unit_time:.2} per unit time, need at least {required}")]
    TooSparse { per_unit_time: f64, required: f64 },

    #[error("interval [{start}, {end}] is not covered by the series")]
    IntervalOutsideSeries { start: f64, end: f64 },

    #[error("non-positive scale sample {0}")]
    NonPositiveScale(f64),

    #[error("invalid time-stepping configuration: {0}")]
    InvalidConfig(String),

    #[error("time step {dt} violates the stability heuristic ({value:.3} > 1)")]
    Unstable { dt: f64, value: f64 },

    #[error("radius {radius} exceeds a quarter of the box length {length}")]
    RadiusTooLarge { radius: f64, length: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
