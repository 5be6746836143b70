use thiserror::Error;

/// Errors produced by the array model, solvers and sweep runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is outside the domain of the model.
    #[error("model domain error: {0}")]
    Domain(String),

    #[error("invalid array geometry: {0}")]
    Geometry(String),

    /// Scattering/impedance conversion hit a singular matrix.
    #[error("network conversion failed: {0}")]
    Conversion(String),

    #[error("impedance file: {0}")]
    Format(String),

    /// `Z_P + Z_R` is too ill-conditioned to solve reliably.
    #[error("parasitic network near resonance (1-norm condition number {condition:.3e})")]
    Resonance { condition: f64 },

    /// A quadratic power form that must be positive definite is not.
    #[error("{what} is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { what: &'static str, min_eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
