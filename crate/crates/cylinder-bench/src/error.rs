use ns2d::GridError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error("y = {y} is outside the inlet [0, {h}]")]
    Domain { y: f64, h: f64 },
    #[error("invalid benchmark setup: {0}")]
    Setup(String),
    #[error("invalid control volume: {0}")]
    ControlVolume(String),
    #[error("state is {got:?}, grid is {expected:?}")]
    StateMismatch {
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("series lengths differ: {parareal} vs {reference}")]
    LengthMismatch { parareal: usize, reference: usize },
    #[error("empty series")]
    Empty,
    #[error("reference series has zero norm, relative error is undefined")]
    UndefinedReference,
    #[error(transparent)]
    Grid(#[from] GridError),
}
