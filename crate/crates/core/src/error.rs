//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the range a module accepts.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller broke an operation precondition (e.g. asked for the normal of
    /// a node that is not on the seabed).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The background state has N² < 0 somewhere.
    #[error("unstable stratification: N² = {n2:.3e} s⁻² at z = {z:.2} m")]
    UnstableStratification { z: f64, n2: f64 },

    /// An iterative numerical procedure failed.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// The time loop produced non-finite values.
    #[error("solution diverged at step {step} (t = {time:.4} s)")]
    Divergence { step: usize, time: f64 },

    /// Evaluation outside of a tabulated range.
    #[error("evaluation out of range: {0}")]
    OutOfRange(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed input file.
    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
