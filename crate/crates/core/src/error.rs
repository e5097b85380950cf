//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by geometric constructions and computations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    /// Point outside the upper half-plane (y <= 0 or non-finite).
    #[error("invalid half-plane point ({x}, {y}): y must be positive and finite")]
    InvalidPoint { x: f64, y: f64 },

    /// Matrix is not (normalizable to) a unit-determinant real matrix.
    #[error("matrix determinant {det} cannot be normalized to 1")]
    InvalidMatrix { det: f64 },

    /// Element has |trace| <= 2 - tol: a rotation, no translation axis.
    #[error("elliptic element (|trace| = {trace_abs} < 2)")]
    EllipticElement { trace_abs: f64 },

    /// Element has |trace| within tolerance of 2: no axis, zero translation.
    #[error("parabolic element (|trace| = {trace_abs} ~ 2)")]
    ParabolicElement { trace_abs: f64 },

    /// Geodesics cross; no positive distance exists.
    #[error("geodesics intersect; distance undefined")]
    IntersectingGeodesics,

    /// Geodesic construction with non-positive radius or coincident points.
    #[error("degenerate geodesic: {0}")]
    DegenerateGeodesic(String),

    /// Generator fails the hyperbolicity requirement.
    #[error("generator {index} is not hyperbolic (|trace| = {trace_abs})")]
    NotHyperbolicGenerator { index: usize, trace_abs: f64 },

    /// Monte-Carlo area certificate disagrees with 4*pi*(genus-1).
    #[error("area certificate failed: estimate {estimate} vs expected {expected} (3-sigma = {three_sigma})")]
    AreaMismatch {
        estimate: f64,
        expected: f64,
        three_sigma: f64,
    },

    /// Two short words move the basepoint to nearly the same point.
    #[error("discreteness tripwire fired: orbit points within {separation}")]
    DiscretenessSuspect { separation: f64 },

    /// Pants curve length outside the supported range.
    #[error("degenerate curve length {length}: must lie in [1e-4, 30]")]
    DegenerateLength { length: f64 },

    /// Orbit enumeration exceeded the configured element budget.
    #[error("enumeration budget exceeded: {count} elements (cap {cap}) at radius {radius}")]
    EnumerationBudgetExceeded { count: usize, cap: usize, radius: f64 },

    /// Requested enumeration radius above the hard cap.
    #[error("enumeration radius {radius} exceeds hard cap {cap}")]
    RadiusCapExceeded { radius: f64, cap: f64 },

    /// Systole search cannot certify completeness at the given cutoff.
    #[error("inconclusive cutoff {cutoff}: shortest found {found} needs cutoff > {required}")]
    InconclusiveCutoff {
        cutoff: f64,
        found: f64,
        required: f64,
    },

    /// Collar query outside the collar region.
    #[error("point at distance {rho} is outside the collar of half-width {half_width}")]
    OutsideCollar { rho: f64, half_width: f64 },

    /// Formula evaluated outside its stated hypothesis regime.
    #[error("out of regime: {0}")]
    OutOfRegime(String),

    /// Arc-length or similar parameter outside its valid interval.
    #[error("parameter {value} outside [{min}, {max}]")]
    ParameterOutOfRange { value: f64, min: f64, max: f64 },

    /// Proposition hypothesis violated by the inputs.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// Monte-Carlo budget outside the supported range.
    #[error("MC budget {requested} exceeds cap {cap}")]
    McBudget { requested: usize, cap: usize },

    /// Function argument outside its mathematical domain.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Sampler could not find enough points with small injectivity radius.
    #[error("insufficient thin points: found {found} of {needed}")]
    InsufficientThinPoints { found: usize, needed: usize },

    /// Sampler could not find enough points with large injectivity radius.
    #[error("insufficient thick points: found {found} of {needed}")]
    InsufficientThickPoints { found: usize, needed: usize },

    /// Empty or otherwise unusable generator list.
    #[error("invalid generator list: {0}")]
    InvalidGenerators(String),

    /// Word refers to a generator index that does not exist.
    #[error("word index {index} out of range for {count} generators")]
    WordIndexOutOfRange { index: i32, count: usize },
}

pub type Result<T> = std::result::Result<T, GeomError>;
