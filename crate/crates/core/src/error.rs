use thiserror::Error;

/// Errors shared across the library.
///
/// Numerical routines distinguish inputs that are outside a function's domain
/// from requests that are structurally fine but too large to honor exactly
/// (`Capacity`), and from grids whose certified accuracy cannot reach the
/// requested tolerance (`Tail`, `Coverage`).
#[derive(Debug, Error)]
pub enum Error {
    /// Log-gamma evaluated at a pole (zero or a negative integer).
    #[error("log-gamma pole at z = {0}")]
    Pole(f64),

    /// Argument outside the documented domain of the routine.
    #[error("domain: {0}")]
    Domain(String),

    /// Request exceeds an exactness or resource guard (for example a digit
    /// prefix that does not fit in 53 bits, or an interval enumeration that
    /// would produce more than the configured cap).
    #[error("capacity: {0}")]
    Capacity(String),

    /// The truncated Fourier inversion cannot certify the requested tail mass.
    #[error("tail: {0}")]
    Tail(String),

    /// A density grid does not cover the region a query needs.
    #[error("coverage: {0}")]
    Coverage(String),

    /// Malformed serialized data.
    #[error("format: {0}")]
    Format(String),
}
