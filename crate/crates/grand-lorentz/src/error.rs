//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exponent component must be strictly positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("theta components have mixed signs ({0}, {1}); only all-nonnegative or all-negative pairs are defined")]
    MixedThetaSigns(f64, f64),
    #[error("infinite p component requires strictly positive theta and both p components infinite")]
    InfPWithNonPosTheta,
    #[error("p components must be both finite or both infinite, got ({0}, {1})")]
    MixedPInfinity(f64, f64),
    #[error("q components must be both finite or both infinite, got ({0}, {1})")]
    MixedQInfinity(f64, f64),
    #[error("conjugate exponent requires components >= 1, got {0}")]
    ComponentBelowOne(f64),
    #[error("negative sample {value} at row {row}, column {col}")]
    NegativeValue { row: usize, col: usize, value: f64 },
    #[error("non-finite sample at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("profile is not non-increasing near t = {0}")]
    NonMonotone(f64),
    #[error("evaluation point ({0}, {1}) lies outside (0,1]^2")]
    OutOfDomain(f64, f64),
    #[error("integrand is not finite at (t1, t2) = ({0}, {1})")]
    NonFiniteIntegrand(f64, f64),
    #[error("dyadic term is not finite at (m1, m2) = ({0}, {1})")]
    NonFiniteTerm(i64, i64),
    #[error("integral exceeds the representable range")]
    Overflow,
    #[error("refinement schedule is empty")]
    EmptySchedule,
    #[error("objective is non-finite on the entire search grid")]
    SearchFailed,
    #[error("norm did not converge under refinement")]
    Diverged,
    #[error("optimal epsilon is undefined at t = {0}; need 0 < t < 1")]
    TAtOne(f64),
    #[error("parameter relation violated: {0}")]
    ParameterRelationViolated(String),
    #[error("test family `{0}` is empty")]
    FamilyEmpty(String),
    #[error("invalid sweep axis `{0}`")]
    InvalidAxis(String),
    #[error("grid csv: {0}")]
    Csv(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
