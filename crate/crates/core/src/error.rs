use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty point cloud")]
    EmptyCloud,

    #[error("point cloud does not fit the domain: {0}")]
    OutOfDomain(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unknown shape `{0}`")]
    UnknownShape(String),

    #[error("singular pointwise system at node {node:?} (det = {det:e}); dt * eta2 is too large")]
    SingularPointwise { node: Vec<usize>, det: f64 },

    #[error("divergence at iteration {iteration}: non-finite level set, reduce dt")]
    Divergence { iteration: usize },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
