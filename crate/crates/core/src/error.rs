use std::io;

use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is singular (pivot breakdown near row {row})")]
    Singular { row: usize },

    #[error("coercivity violated: c - div(b)/2 = {value} < sigma = {sigma} at ({x}, {y})")]
    Coercivity { value: f64, sigma: f64, x: f64, y: f64 },

    #[error("degenerate cell {cell} (signed area {area})")]
    DegenerateCell { cell: usize, area: f64 },

    #[error("mesh is not conforming: {0}")]
    NonConforming(String),

    #[error("stabilization matrix has no entry for mesh edge ({0}, {1})")]
    MissingEdgeEntry(usize, usize),

    #[error("sigma must be positive for the energy norm and the estimator (got {0})")]
    NonPositiveSigma(f64),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("config: {0}")]
    Config(String),

    #[error("parse: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
