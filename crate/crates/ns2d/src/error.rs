use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 3 cells per direction, got {nx}x{ny}")]
    TooSmall { nx: usize, ny: usize },
    #[error("domain extents must be positive, got {lx} x {ly}")]
    Extent { lx: f64, ly: f64 },
    #[error("obstacle must lie strictly inside the channel")]
    Obstacle,
    #[error("grid has no free velocity faces")]
    NoFluid,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("{solver} did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        /// Relative residual after every iteration.
        history: Vec<f64>,
    },
    #[error("{solver} broke down at iteration {iteration}")]
    Breakdown {
        solver: &'static str,
        iteration: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("state does not match the grid: {0}")]
    GridMismatch(String),
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("Picard iteration stalled after {sweeps} sweeps (relative change {change:e})")]
    Picard { sweeps: usize, change: f64 },
    #[error("momentum solve failed: {0}")]
    Momentum(#[source] SolverError),
    #[error("pressure solve failed: {0}")]
    Pressure(#[source] SolverError),
    #[error("step {step} of {steps} failed: {source}")]
    Propagation {
        step: usize,
        steps: usize,
        #[source]
        source: Box<StepError>,
    },
    #[error("invalid propagator configuration: {0}")]
    Config(String),
}
