use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |m_jk - conj(m_kj)| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix within {iterations} iterations")]
    NoConvergence { dim: usize, iterations: usize },

    #[error("function evaluation failed at {at}")]
    Evaluation { at: String },

    #[error("invalid spectral measure: {0}")]
    InvalidMeasure(String),

    #[error("grid too coarse for band {band}: inner radius {radius} exceeds Nyquist frequency {nyquist}")]
    Nyquist { band: i32, radius: f64, nyquist: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("size {n}: {source}")]
    AtSize { n: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_size(self, n: usize) -> Self {
        Error::AtSize {
            n,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
