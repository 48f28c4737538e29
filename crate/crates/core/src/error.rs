use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("matrix is not Hermitian (defect {defect:.3e}, allowed {allowed:.3e})")]
    NotHermitian { defect: f64, allowed: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimated error {estimate:.3e} above tolerance {tolerance:.3e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("steady state is not unique: numerical kernel dimension {kernel_dim}")]
    DegenerateKernel { kernel_dim: usize },

    #[error("steady-state solve failed: {0}")]
    Solver(String),

    #[error("time step {dt:.3e} exceeds stability bound {bound:.3e}")]
    Stability { dt: f64, bound: f64 },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{failed} of {total} flux points failed")]
    SweepFailed { failed: usize, total: usize },

    #[error("file error at {}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { key: key.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
