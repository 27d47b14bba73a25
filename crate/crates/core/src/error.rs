use thiserror::Error;

/// Errors raised by the model, solver and metric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{field}` out of range: {reason}")]
    OutOfRange { field: &'static str, reason: String },

    #[error("sustained-growth condition violated: tfp = {tfp} must exceed 2 + theta = {bound}")]
    GrowthConditionViolated { tfp: f64, bound: f64 },

    #[error("non-positive input `{what}` = {value}")]
    NonPositiveInput { what: &'static str, value: f64 },

    #[error("AK technology needs the economy-wide mean capital frozen in the view")]
    MissingContextMean,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("market bequest for household {household} is non-positive ({value})")]
    NegativeBequest { household: usize, value: f64 },

    #[error("operation `{op}` is not defined for regime {regime}")]
    WrongRegime { op: &'static str, regime: String },

    #[error("exogenous Ramsey steady state needs theta > 0 (capital diverges at theta = 0)")]
    ThetaZeroNoSteadyState,

    #[error("state left the positive orthant at t = {time}: {detail}")]
    StateLeftDomain { time: f64, detail: String },

    #[error("shooting failed after {iterations} iterations: {detail}")]
    ShootingFailed { iterations: usize, detail: String },

    #[error("household decomposition does not aggregate: relative gap {gap:e} at t = {time}")]
    DecompositionInconsistent { time: f64, gap: f64 },

    #[error("grid step {step} too coarse, must be <= {limit}")]
    GridTooCoarse { step: f64, limit: f64 },

    #[error("all entries are zero")]
    AllZero,

    #[error("transfer would leave the donor with non-positive holdings ({remaining})")]
    WouldViolatePositivity { remaining: f64 },

    #[error("transfer from {donor} to {recipient} does not increase dispersion")]
    NotSpreadIncreasing { donor: usize, recipient: usize },

    #[error("input matrix is not productive (spectral radius {radius} >= 1)")]
    NotProductive { radius: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
