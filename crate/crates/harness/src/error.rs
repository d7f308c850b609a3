use std::path::PathBuf;

use cylinder_bench::BenchError;
use ns2d::StepError;
use thiserror::Error;
use timeparallel::PararealError;

use crate::checkpoint::CheckpointError;
use crate::config::ConfigError;
use crate::order::OrderError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("benchmark setup: {0}")]
    Setup(BenchError),
    #[error("observables at t = {t}: {source}")]
    Observables {
        t: f64,
        #[source]
        source: BenchError,
    },
    #[error("defect evaluation: {0}")]
    Defect(BenchError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("serial reference, slice {slice}: {source}")]
    Serial {
        slice: usize,
        #[source]
        source: StepError,
    },
    #[error(transparent)]
    Parareal(#[from] PararealError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }

    /// Process exit code: 2 for configuration problems, 3 for failures while
    /// running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Setup(_) => 2,
            _ => 3,
        }
    }
}
