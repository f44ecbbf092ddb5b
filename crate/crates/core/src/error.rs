use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid mass: {0}")]
    InvalidMass(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid L^p exponent {0} (need p >= 1 or infinity)")]
    InvalidExponent(f64),
    #[error("non-positive entry {value} at cell {index}")]
    NotPositive { index: usize, value: f64 },
    #[error("linear solve did not reach tolerance {tol:e} after {iterations} iterations (residual {residual:e})")]
    LinSolveFailure {
        iterations: usize,
        residual: f64,
        tol: f64,
    },
    #[error("numerical blowup at t = {t}: {what}")]
    NumericalBlowup { t: f64, what: String },
    #[error("equilibrium has a zero component; relative entropy is undefined")]
    DegenerateEquilibrium,
    #[error("oracle step left the positive orthant at t = {t}")]
    StepTooLarge { t: f64 },
    #[error("all samples are below the fitting floor")]
    AlreadyConverged,
    #[error("no decaying envelope fits the samples")]
    NonDecaying,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid sampling: {0}")]
    InvalidSampling(String),
    #[error("missing diagnostic `{0}`")]
    MissingDiagnostic(String),
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
