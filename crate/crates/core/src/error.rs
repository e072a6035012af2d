use thiserror::Error;

/// Errors raised by the planning pipeline.
///
/// Infeasibility is split out from ordinary failures: [`Error::UnreachableTask`],
/// [`Error::DisconnectedRoadmap`] and [`Error::Infeasible`] describe a mission that
/// cannot be carried out, not a bug or a bad input file.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("point ({x:.3}, {y:.3}) lies outside the grid")]
    OutOfBounds { x: f64, y: f64 },

    #[error("task cluster {cluster} has no reachable inspection point")]
    UnreachableTask { cluster: usize },

    #[error("roadmap is disconnected; unreachable tasks: {unreachable:?}")]
    DisconnectedRoadmap { unreachable: Vec<usize> },

    #[error("no feasible routing; unplaceable tasks: {unplaceable:?}")]
    Infeasible { unplaceable: Vec<usize> },

    #[error("instance too large for the exact solver: {tasks} tasks, {robots} robots (limit 10 tasks, 3 robots)")]
    TooLarge { tasks: usize, robots: usize },

    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error("validation error at {field}: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error describes an infeasible mission rather than a failure.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::UnreachableTask { .. } | Error::DisconnectedRoadmap { .. } | Error::Infeasible { .. }
        )
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
