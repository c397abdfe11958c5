use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported profile: {0}")]
    UnsupportedProfile(String),

    #[error("quadrature did not reach tolerance {tolerance:e}: estimates {coarse} and {fine}")]
    Accuracy {
        coarse: f64,
        fine: f64,
        tolerance: f64,
    },

    #[error("conditional phase undefined: overlap vanishes at C1 = {c1}, phi = {phi}")]
    DegeneratePhase { c1: f64, phi: f64 },

    #[error("invalid overlap coefficients C1 = {c1}, C2 = {c2}: fidelity denominator {denominator} is not positive")]
    InvalidCoefficients { c1: f64, c2: f64, denominator: f64 },

    #[error("propagation mode mismatch: {0}")]
    Mode(String),

    #[error("degenerate two-particle state: squared norm {0:e}")]
    DegenerateState(f64),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("series not converged after {order} orders: last term sup-norm {last_term:e}")]
    Truncation { order: usize, last_term: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_)
            | Error::UnsupportedProfile(_)
            | Error::Mode(_)
            | Error::Config(_)
            | Error::Io { .. } => 2,
            Error::Accuracy { .. }
            | Error::DegeneratePhase { .. }
            | Error::InvalidCoefficients { .. }
            | Error::DegenerateState(_)
            | Error::Contract(_)
            | Error::Truncation { .. } => 3,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
