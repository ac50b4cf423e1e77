use thiserror::Error;

/// Errors raised anywhere in the mapping pipeline.
#[derive(Debug, Error)]
pub enum MapError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resolution guard violated: {0}")]
    Resolution(String),

    #[error("boundary is not admissible: {0}")]
    Boundary(String),

    #[error("non-finite kernel value at (tau={tau}, t={t})")]
    NonFiniteKernel { tau: f64, t: f64 },

    #[error("boundary degeneracy: regular factor vanishes at (tau={tau}, t={t})")]
    Degenerate { tau: f64, t: f64 },

    #[error("linear system is numerically singular (condition estimate {condition:.3e}): {diagnostics}")]
    Singular { condition: f64, diagnostics: String },

    #[error("fold near t0={t0} is not localizable: interval grew past half a period")]
    FoldNotLocalizable { t0: f64 },

    #[error("spline is not monotone on [{a}, {b}]: {reason}")]
    NotMonotone { a: f64, b: f64, reason: String },

    #[error("correction intervals overlap near t0={first} and t0={second}")]
    OverlappingCorrections { first: f64, second: f64 },

    #[error("value {value} outside range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("point {re}+{im}i lies outside the trusted disk |zeta| <= {limit}")]
    OutsideTrustedRegion { re: f64, im: f64, limit: f64 },

    #[error("point lies within {distance:.3e} of the curve")]
    OnCurve { distance: f64 },
}

pub type Result<T> = std::result::Result<T, MapError>;
