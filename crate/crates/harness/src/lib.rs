//! Experiment harness for Parareal on the cylinder benchmark.
//!
//! A run is described by a flat `key = value` [`RunConfig`]. Three modes
//! exist: a serial fine reference, a Parareal experiment that measures the
//! per-iteration defect against that reference, and a time-step refinement
//! study of the two integrators.

pub mod checkpoint;
pub mod config;
mod error;
pub mod experiment;
pub mod order;
pub mod output;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};
pub use config::{load_config, parse_config, ConfigError, Mode, RunConfig};
pub use error::HarnessError;
pub use experiment::{run_parareal_experiment, run_serial, run_serial_in, Context, ExperimentOutput, SerialOutput};
pub use order::{mms_order_study, observed_order, OrderError, OrderRow, OrderTable};
