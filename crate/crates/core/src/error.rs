use num_complex::Complex64;
use thiserror::Error;

/// Errors reported by every module of the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("point ({x}, {y}) has margin {margin} but the stencil needs {needed}")]
    InsufficientMargin { x: f64, y: f64, margin: f64, needed: f64 },
    #[error("function has no analytic partials; pass a finite-difference stencil")]
    MissingPartials,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("first integral is not injective: {0}")]
    NotInjective(String),
    #[error("dZ vanishes at ({x}, {y})")]
    DegenerateDifferential { x: f64, y: f64 },
    #[error("psi is negative at ({x}, {y})")]
    NegativePsi { x: f64, y: f64 },
    #[error("unsupported factor: {0}")]
    UnsupportedFactor(String),
    #[error("unsupported region: {0}")]
    UnsupportedRegion(String),
    #[error("fit failed: {0}")]
    FitFailed(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("integral did not converge (value {value}, error estimate {error_estimate:e})")]
    NotConverged { value: Complex64, error_estimate: f64 },
    #[error("kernel is singular: evaluation point equals ({x}, {y})")]
    Singular { x: f64, y: f64 },
    #[error("calibration failed: residual {residual:e}")]
    CalibrationFailed { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
