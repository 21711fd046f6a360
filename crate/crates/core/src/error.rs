use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not symmetric: max asymmetry {max_asymmetry:e}")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("entrywise function must satisfy f(0) = 0, got f(0) = {value}")]
    NonVanishingAtZero { value: f64 },

    #[error("dimension {dim} exceeds dense materialization cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("negative eigenvalue {value:e} below stability tolerance: system is unstable")]
    UnstableSystem { value: f64 },

    #[error("initial amplitudes are not collinear in phase; cannot fix a global phase")]
    NonCollinearPhase,

    #[error("initial amplitudes must be purely real for this reduction")]
    NonRealAmplitudes,

    #[error("row {row} violates spring-matrix conditions: {detail}")]
    InvalidSpringMatrix { row: usize, detail: String },

    #[error("total energy is zero; output distribution undefined")]
    ZeroEnergy,

    #[error("wall spring {value:e} at mass {index} below tolerance; shift gamma is too small")]
    VanishingWallSpring { index: usize, value: f64 },

    #[error("shift gamma must be positive, got {0}")]
    NonPositiveGamma(f64),

    #[error("antisymmetry violated: max |z1 + z2| = {max_violation:e} exceeds tol {tol:e}")]
    AntisymmetryViolation { max_violation: f64, tol: f64 },

    #[error("negative entry {value:e} where non-negative entries are required (row {row})")]
    NegativeEntry { row: usize, value: f64 },

    #[error("reconstructed probability {value:e} is significantly negative at outcome {outcome}")]
    NegativeProbability { outcome: String, value: f64 },

    #[error("integrator exceeded step budget ({budget} steps)")]
    StepBudgetExceeded { budget: usize },

    #[error("transition matrix has negative entries; direct sample mapping refused")]
    NegativeTransitionEntries,

    #[error("decision gap {gap} smaller than twice the estimator precision {precision}")]
    GapTooSmall { gap: f64, precision: f64 },

    #[error("estimator precision {precision} insufficient for requested fidelity")]
    InsufficientPrecision { precision: f64 },

    #[error("unknown instance kind {0:?}")]
    UnknownInstanceKind(String),

    #[error("invalid instance file: {0}")]
    InvalidInstance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
