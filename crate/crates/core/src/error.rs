use std::path::PathBuf;

use thiserror::Error;

use crate::geom::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("point ({x}, {y}, {z}) lies outside the domain", x = .0.x(), y = .0.y(), z = .0.z())]
    OutsideDomain(Point),

    #[error("frontier of radius {radius} lies entirely outside the domain")]
    FrontierEmpty { radius: f64 },

    #[error("invalid tracer state: {0}")]
    InvalidState(String),

    #[error("steepest ascent did not converge after {steps} steps (last point {last:?}, value {value})")]
    NonConvergence { steps: usize, last: Point, value: f64 },

    #[error("medial path exceeded {0} steps without terminating")]
    OpenPath(usize),

    #[error("malformed path: {0}")]
    MalformedPath(String),

    #[error("grid of {cells} cells exceeds the cap of {cap} cells")]
    GridTooFine { cells: u128, cap: u128 },

    #[error("cannot compare: {0}")]
    Incomparable(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("export check failed: {0}")]
    Export(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Schema { path: path.into(), message: message.into() }
    }
}
