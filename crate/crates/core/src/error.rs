use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid initial condition: |c_R|^2 + |c_L|^2 = {norm_sq}, expected 1")]
    InitNotNormalized { norm_sq: f64 },

    #[error("state capacity exceeded: cannot advance past t_max = {t_max}")]
    CapacityExceeded { t_max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("path-sum oracle limited to {max} steps, got {steps}")]
    OracleTooLong { steps: usize, max: usize },

    #[error("snapshot mismatch: expected t = {expected}/width {expected_width}, got t = {got}/width {got_width}")]
    SnapshotMismatch {
        expected: usize,
        expected_width: usize,
        got: usize,
        got_width: usize,
    },

    #[error("degenerate fit window [{start}, {end}]: {points} points, need at least {needed}")]
    DegenerateWindow {
        start: usize,
        end: usize,
        points: usize,
        needed: usize,
    },

    #[error("mean not saturated over [{start}, {end}]: relative drift {drift:.4} exceeds {limit}")]
    NotSaturated {
        start: usize,
        end: usize,
        drift: f64,
        limit: f64,
        n_alpha: f64,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
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
