use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("mesh generation failed: {0}")]
    Generation(String),

    #[error("mesh validation failed: {0}")]
    Validation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("inverted element {cell} in {region} mesh (J = {jacobian:e})")]
    InvertedElement {
        region: &'static str,
        cell: usize,
        jacobian: f64,
    },

    #[error("degenerate fiber direction in cell {cell}")]
    DegenerateFiber { cell: usize },

    #[error("degenerate valve geometry: {0}")]
    DegenerateGeometry(String),

    #[error("valve `{valve}` has lost contact with the structure (V = {volume:e} < {threshold:e})")]
    AssumptionViolation {
        valve: String,
        volume: f64,
        threshold: f64,
    },

    #[error("non-finite local entry in cell {cell}")]
    NonFinite { cell: usize },

    #[error("non-finite residual at Newton iteration {iteration}")]
    NonFiniteResidual { iteration: usize },

    #[error("Newton did not converge in {iterations} iterations (residual history {history:?})")]
    NonConvergence {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
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

    /// Short category label used for CLI exit codes and run manifests.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parameter(_) | Error::Config(_) => "config",
            Error::Generation(_) | Error::Validation(_) | Error::Shape(_) => "mesh",
            Error::InvertedElement { .. } | Error::DegenerateFiber { .. } => "geometry",
            Error::DegenerateGeometry(_) | Error::AssumptionViolation { .. } => "valve",
            Error::NonFinite { .. }
            | Error::NonFiniteResidual { .. }
            | Error::NonConvergence { .. }
            | Error::LinearSolve(_) => "solver",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
