use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("time domain must satisfy t_end > t_start (got [{t_start}, {t_end}])")]
    EmptyInterval { t_start: f64, t_end: f64 },
    #[error("number of time slices must be at least 1")]
    NoSlices,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("state length mismatch in parareal update: {lengths:?}")]
pub struct LengthMismatch {
    pub lengths: [usize; 3],
}

type BoxError = Box<dyn std::error::Error + Send + Sync + 'static>;

#[derive(Debug, Error)]
pub enum PararealError {
    #[error("invalid options: {0}")]
    Options(String),
    /// `iteration` is `None` for the initial coarse sweep and the serial reference.
    #[error("{stage} propagator failed on slice {slice} (iteration {iteration:?}): {source}")]
    Propagation {
        stage: &'static str,
        slice: usize,
        iteration: Option<usize>,
        #[source]
        source: BoxError,
    },
    #[error("parareal update failed on slice {slice} (iteration {iteration}): {source}")]
    Update {
        slice: usize,
        iteration: usize,
        #[source]
        source: BoxError,
    },
}
