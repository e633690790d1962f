//! Error type shared by all core modules.

use core::fmt;

/// Errors produced by the core geometric and extension operations.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A vector did not match the ambient dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// The norm exponent must lie strictly between 1 and infinity.
    InvalidNormExponent(f64),
    /// The point set is empty.
    EmptyPointSet,
    /// Two points of the set coincide.
    DuplicatePoint { first: usize, second: usize },
    /// A per-point weight is not strictly positive.
    NonPositiveWeight { index: usize },
    /// The query coincides with a point of X; the projection there is the
    /// Dirac mass and the cell machinery does not apply.
    QueryOnSet { nearest: usize },
    /// No query lies off the point set, so no dyadic range can be derived.
    NoOffSetQueries,
    /// dist(y, X) falls outside the dyadic range covered by the complex.
    ScaleOutOfRange { scale: i32, n_min: i32, n_max: i32 },
    /// The cutoff function failed its differential-inequality grid check.
    InvalidCutoff { max_violation: f64 },
    /// Total masses of the two measures differ beyond tolerance.
    MassMismatch { left: f64, right: f64 },
    /// A measure refers to an index outside the point set.
    SupportOutOfBounds { index: usize, len: usize },
    /// A value/differential table does not match the point count.
    FieldSizeMismatch { expected: usize, got: usize },
    /// Remainder is undefined on the diagonal.
    DiagonalRemainder { index: usize },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            CoreError::InvalidNormExponent(p) => {
                write!(f, "norm exponent must satisfy 1 < p < inf, got {p}")
            }
            CoreError::EmptyPointSet => write!(f, "point set is empty"),
            CoreError::DuplicatePoint { first, second } => {
                write!(f, "points {first} and {second} coincide")
            }
            CoreError::NonPositiveWeight { index } => {
                write!(f, "weight at index {index} is not strictly positive")
            }
            CoreError::QueryOnSet { nearest } => {
                write!(f, "query coincides with point {nearest} of the set")
            }
            CoreError::NoOffSetQueries => {
                write!(f, "every query lies on the point set; dyadic range is empty")
            }
            CoreError::ScaleOutOfRange { scale, n_min, n_max } => {
                write!(f, "required scale {scale} outside built range [{n_min}, {n_max}]")
            }
            CoreError::InvalidCutoff { max_violation } => {
                write!(f, "cutoff grid check failed: xi' - f(xi) up to {max_violation}")
            }
            CoreError::MassMismatch { left, right } => {
                write!(f, "measure masses differ: {left} vs {right}")
            }
            CoreError::SupportOutOfBounds { index, len } => {
                write!(f, "support index {index} out of bounds for {len} points")
            }
            CoreError::FieldSizeMismatch { expected, got } => {
                write!(f, "field has {got} entries but the point set has {expected}")
            }
            CoreError::DiagonalRemainder { index } => {
                write!(f, "remainder R(x, x) is undefined (index {index})")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}
