//! The unsteady flow-around-a-cylinder benchmark in a 2D channel.
//!
//! A cylinder of diameter `d = 0.1` sits in a channel of height `h = 0.41`.
//! The parabolic inflow is modulated by `sin(πt/8)` over `t ∈ [0, 8]`, so the
//! Reynolds number rises from zero to `d/ν` at `t = 4` and falls back.
//!
//! This crate defines the setup, evaluates the drag, lift and pressure-drop
//! observables on a [`ns2d::FlowState`], and provides the slice-weighted time
//! norm used to compare Parareal iterates against a serial reference.

mod error;
mod forces;
mod observables;
mod setup;

pub use error::BenchError;
pub use forces::{coefficients, compute_forces, pressure_difference, pressure_probes, probe_pressure, ControlVolume};
pub use observables::{error_norm, observe, time_norm, DefectReport, ObservableSeries, Observables, Quantity};
pub use setup::{BenchmarkSetup, DEFAULT_GRID, REDUCED_GRID, U_REF};
