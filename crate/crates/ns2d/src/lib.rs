//! Two-dimensional incompressible Navier-Stokes solver on a staggered
//! (MAC) grid, with a ghost-cell immersed circular obstacle.
//!
//! Velocities live on cell faces and pressure at cell centres. Channel
//! layouts use a prescribed inflow on the left, no-slip walls at the top and
//! bottom, and a zero-gradient outflow with zero pressure on the right.

mod coupled;
mod error;
pub mod grid;
pub mod integrators;
pub mod linalg;
pub mod operators;
pub mod poisson;
mod state;

pub use error::{GridError, SolverError, StepError};
pub use grid::{Boundaries, Circle, Component, FaceKind, Grid};
pub use integrators::{
    fractional_step, implicit_euler_step, propagate, propagate_observed, step, Discretization, Linearization, Method,
    NsPropagator, Scheme, SolverOptions,
};
pub use operators::{divergence, max_divergence, momentum_rate};
pub use poisson::{PoissonPreconditioner, PoissonSolver};
pub use state::{FlowState, FluidParams, InflowProfile, NoInflow};
