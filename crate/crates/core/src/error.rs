use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh request: {0}")]
    InvalidMesh(String),

    #[error("unknown boundary tag `{0}`")]
    UnknownBoundary(String),

    #[error("node {node} does not exist (mesh has {n_nodes} nodes)")]
    UnknownNode { node: usize, n_nodes: usize },

    #[error("element {element} has non-positive Jacobian determinant {det_j:e}")]
    SingularElement { element: usize, det_j: f64 },

    #[error("field length {got} does not match expected {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite: non-positive pivot at dof {index}")]
    NotPositiveDefinite { index: usize },

    #[error("matrix is singular: zero pivot at dof {index}")]
    SingularMatrix { index: usize },

    #[error("iterative solver stalled after {iterations} iterations (relative residual {residual:e})")]
    IterativeStall { iterations: usize, residual: f64 },

    #[error("linear algebra backend failure: {0}")]
    Backend(String),

    #[error("{solve} Newton-Raphson did not converge in {iterations} iterations; residual history {history:?}")]
    NewtonDiverged {
        solve: &'static str,
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("staggered loop did not converge in {iterations} iterations (last relative residual {last:e})")]
    StaggeredDiverged { iterations: usize, last: f64 },

    #[error("step {step} (t = {time}): {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
