use thiserror::Error;

use crate::problem::AssumptionReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The generator would produce a semigroup with negative entries.
    #[error("invalid generator: entry ({row}, {col}) = {value}")]
    InvalidGenerator { row: usize, col: usize, value: f64 },

    #[error("no root of {what} found below {ceiling:e}")]
    NoRoot { what: &'static str, ceiling: f64 },

    #[error("invalid iterate: u({point}, node {node}) = {value:e} is negative")]
    InvalidIterate { point: usize, node: usize, value: f64 },

    #[error("invalid shift: shifted nonlinearity at the left endpoint is {0:e}, expected 0")]
    InvalidShift(f64),

    #[error("certificate failure: {0}")]
    CertificateFailure(String),

    #[error("assumption check failed: {}", .0.failing_names().join(", "))]
    AssumptionsFailed(Box<AssumptionReport>),

    #[error("uniqueness probe inconclusive: {0}")]
    ProbeInconclusive(String),

    #[error("oracle failure: {0}")]
    OracleFailure(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
