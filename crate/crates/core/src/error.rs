use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
///
/// The `Display` form always starts with the variant name so that command
/// line front ends can surface it verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("DimensionError: {0}")]
    Dimension(String),
    #[error("Singular: |det| = {det:e} is within 1e-14 of zero")]
    Singular { det: f64 },
    #[error("NotExpansive: eigenvalue modulus {modulus} does not exceed 1")]
    NotExpansive { modulus: f64 },
    #[error("SeriesDivergence: ellipsoid series did not reach tolerance within {terms} terms")]
    SeriesDivergence { terms: usize },
    #[error("OutOfRange: point lies outside the dilation scales [{k_min}, {k_max}]")]
    OutOfRange { k_min: i32, k_max: i32 },
    #[error("UnsupportedKind: {0}")]
    UnsupportedKind(String),
    #[error("BisectionFailure: {0}")]
    BisectionFailure(String),
    #[error("GramSingular: moment Gram matrix condition number {cond:e} exceeds 1e12")]
    GramSingular { cond: f64 },
    #[error("NotConverged: {0}")]
    NotConverged(String),
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("IoError: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
