use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("mode not present in sector: {0}")]
    ModeAbsent(String),

    #[error("operator is not Hermitian: {0}")]
    NonHermitian(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("algebra residual exceeds tolerance: {0}")]
    AlgebraResidual(String),

    #[error("state norm drifted by {drift:.3e} (limit {limit:.1e}) at {steps_per_unit:.1} steps per unit time; refine the step size")]
    NormDrift {
        drift: f64,
        limit: f64,
        steps_per_unit: f64,
    },
}

pub type Result<T> = std::result::Result<T, CoreError>;
