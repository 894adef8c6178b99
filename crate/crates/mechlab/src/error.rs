use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building distributions or evaluating
/// mechanisms. Numeric preconditions fail loudly rather than propagating NaN.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{field} out of range: {message}")]
    InvalidParameter {
        field: &'static str,
        message: String,
    },

    #[error("probability out of [0, 1]: {q}")]
    InvalidProbability { q: f64 },

    #[error("infinite quantile: q = 1 with unbounded support")]
    InfiniteQuantile,

    #[error("no density: {family} carries atoms")]
    NoDensity { family: &'static str },

    #[error("hazard undefined: density vanishes at v = {v}")]
    HazardUndefined { v: f64 },

    #[error("divergent expectation: {what}")]
    DivergentExpectation { what: String },

    #[error("order-statistic rank out of range: k = {k}, n = {n}")]
    RankOutOfRange { k: u32, n: u32 },

    #[error("regular case has unbounded constant: alpha = {alpha}")]
    UnboundedConstant { alpha: f64 },

    #[error("non-regular marginal: {family} (virtual value decreases on the test grid)")]
    NotRegular { family: &'static str },

    #[error(
        "positive tail revenue mass: {family} keeps lim v(1 - F(v)) = {mass} > 0, \
         so the requested estimator is undefined here"
    )]
    HeavyTail { family: &'static str, mass: f64 },

    #[error("quadrature unavailable: {what}")]
    QuadratureUnavailable { what: String },

    #[error("degenerate core: the conditioning event has probability zero")]
    DegenerateCore,

    #[error("enumeration too large: exact game evaluation requires m <= 3, got m = {m}")]
    EnumerationTooLarge { m: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-identical marginals: the symmetric tariff requires i.i.d. items")]
    NonIdenticalMarginals,

    #[error("invalid grid: {message}")]
    InvalidGrid { message: String },

    #[error("invalid configuration: {message}")]
    InvalidConfig { message: String },
}
