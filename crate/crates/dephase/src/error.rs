use thiserror::Error;

/// Toolkit-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the simulation and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A model or operation parameter violates its documented domain.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Inputs that make an expression singular (e.g. the second-order
    /// nuclear term at zero external field).
    #[error("singular input: {0}")]
    SingularInput(String),

    /// The requested model has no closed-form spectral density.
    #[error("no analytic PSD for this noise model: {0}")]
    NoAnalyticPsd(String),

    /// Trajectory or grid resolution is too coarse for the requested
    /// operation.
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    /// The analytic engine cannot treat this configuration (non-Gaussian
    /// noise or a nonlinear coupling); use the Monte-Carlo engine instead.
    #[error("engine rejection: {0}")]
    EngineRejection(String),

    /// A fit failed to converge or the data cannot constrain the model.
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// Configuration file failed schema validation; `field` names the
    /// offending entry.
    #[error("config validation failed at `{field}`: {reason}")]
    ConfigValidation { field: String, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code used by the CLI harness: 2 for configuration
    /// errors, 3 for engine rejections, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigValidation { .. } | Error::InvalidParameter { .. } => 2,
            Error::EngineRejection(_) => 3,
            Error::Numerical(_) | Error::FitFailure(_) | Error::SingularInput(_) => 4,
            Error::InsufficientResolution(_) | Error::NoAnalyticPsd(_) => 3,
            Error::MissingInput(_) => 2,
            Error::Io(_) | Error::Json(_) => 4,
        }
    }
}
