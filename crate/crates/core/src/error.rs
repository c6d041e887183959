use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Error type shared by every numerical stage of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(i64),

    #[error("invalid model-space parameters: {0}")]
    InvalidSpace(String),

    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),

    #[error("{what} must be finite")]
    NonFinite { what: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "ODE step budget exhausted after {steps} steps at r = {r:.3} (tol {tol:.1e}); \
         requested accuracy is not reachable"
    )]
    OdeBudget { steps: usize, r: f64, tol: f64 },

    #[error(
        "c-function extraction unstable at lambda = {lambda}: |c(R) - c(R+5)|/|c| = {drift:.3e} \
         exceeds {tol:.1e} at R = {radius}"
    )]
    ExtractionUnstable {
        lambda: f64,
        drift: f64,
        tol: f64,
        radius: f64,
    },

    #[error("c-function extraction ill-conditioned at lambda = {lambda}: {reason}")]
    ExtractionIllConditioned { lambda: f64, reason: String },

    #[error("Plancherel data is not calibrated; run calibration before inversion")]
    NotCalibrated,

    #[error("calibration spread {spread:.3e} exceeds {limit:.1e}; density or grid is suspect")]
    CalibrationSpread { spread: f64, limit: f64 },

    #[error("tail budget exceeded for {what}: tail fraction {fraction:.3e} > {budget:.1e}{hint}")]
    TailBudget {
        what: &'static str,
        fraction: f64,
        budget: f64,
        hint: String,
    },

    #[error("oscillation budget exceeded: {0}")]
    OscillationBudget(String),

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("decay fit rejected: {0}")]
    FitRejected(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown check name `{0}`")]
    UnknownCheck(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
