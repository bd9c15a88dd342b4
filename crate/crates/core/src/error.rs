use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A model or estimator parameter is out of its valid range.
    InvalidParameter(&'static str),
    /// An evaluation location lies outside the estimator's domain.
    OutOfDomain { value: f64, lo: f64, hi: f64 },
    /// A point lies outside the observation window.
    PointOutsideWindow { index: usize, x: f64, y: f64 },
    /// Adaptive quadrature did not reach its tolerance.
    QuadratureNotConverged { estimate: f64, error: f64 },
    /// Not enough points to fit.
    TooFewPoints { needed: usize, got: usize },
    /// Every candidate bandwidth produced a degenerate criterion.
    NoUsableBandwidth,
    EmptyInput(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::OutOfDomain { value, lo, hi } => {
                write!(f, "location {value} outside domain [{lo}, {hi}]")
            }
            Error::PointOutsideWindow { index, x, y } => {
                write!(f, "point {index} at ({x}, {y}) lies outside the window")
            }
            Error::QuadratureNotConverged { estimate, error } => write!(
                f,
                "quadrature did not converge (estimate {estimate}, error bound {error})"
            ),
            Error::TooFewPoints { needed, got } => {
                write!(f, "need at least {needed} points, got {got}")
            }
            Error::NoUsableBandwidth => f.write_str("all candidate bandwidths are degenerate"),
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
        }
    }
}

impl core::error::Error for Error {}
