use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid needs at least 2 cells, got {0}")]
    TooFewCells(usize),
    #[error("grid length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("density value {value} at cell {index} is negative or not finite")]
    BadValue { index: usize, value: f64 },
    #[error("density mass {mass} differs from 1 by more than {tolerance}")]
    NotNormalized { mass: f64, tolerance: f64 },
    #[error("value array has {got} entries, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("densities live on different grids")]
    GridMismatch,
    #[error("quantile at level {level} is not unique: the CDF is flat there")]
    UndefinedQuantile { level: f64 },
    #[error("density must be strictly positive, cell {index} holds {value}")]
    NotPositive { index: usize, value: f64 },
    #[error("epsilon {epsilon} is below {min_ratio} grid cells ({min})")]
    EpsilonTooSmall { epsilon: f64, min: f64, min_ratio: f64 },
    #[error("parameter {name} out of range: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("scaling iteration did not converge after {iterations} iterations, marginal error {marginal_error}")]
    NotConverged { iterations: usize, marginal_error: f64 },
    #[error("log-domain potential reached {value}, above the guard {bound}")]
    PotentialOverflow { value: f64, bound: f64 },
    #[error("density is not inside A_delta: sup |rho - 1/L| = {sup}, delta = {delta}")]
    NotInADelta { sup: f64, delta: f64 },
    #[error("first marginal of the tilde coupling vanishes at cell {index}")]
    VanishingMarginal { index: usize },
    #[error("sample point {0} lies outside the admissible range")]
    OutOfRange(f64),
    #[error("Newton iteration did not converge: gradient norm {gradient_norm} after {iterations} iterations")]
    NewtonNotConverged { iterations: usize, gradient_norm: f64 },
    #[error("quantile profile lost strict monotonicity at index {index}")]
    MonotonicityViolation { index: usize },
    #[error("no particle landed inside the histogram grid")]
    EmptyHistogram,
}
