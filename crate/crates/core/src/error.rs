use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    /// Requested time step exceeds the CFL bound of the scheme.
    #[error("CFL violation: dt = {dt:e} exceeds the stable bound {bound:e}")]
    Cfl { dt: f64, bound: f64 },

    /// NaN or Inf appeared while marching the value function.
    #[error("non-finite value encountered at horizon t = {time} (node {node})")]
    NonFinite { time: f64, node: usize },

    #[error("query ({coord}) lies outside the interpolation hull")]
    OutOfHull { coord: String },

    /// The start state is not inside the (slackened) feasible set.
    #[error("infeasible start: interpolated value {value:e} exceeds slack {slack:e}")]
    Infeasible { value: f64, slack: f64 },

    /// Trajectory left the solver grid; the partial trajectory is kept.
    #[error("trajectory left the grid hull at step {step} of {steps}")]
    LeftGrid {
        step: usize,
        steps: usize,
        partial: Box<crate::trajectory::Trajectory>,
    },

    #[error("no feasible point found in the scanned bounds: {0}")]
    EmptyFront(String),

    #[error("integration failed: {0}")]
    Integration(String),

    /// Malformed value-field file.
    #[error("field file parse error at byte {offset}: {reason}")]
    FieldFormat { offset: u64, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
