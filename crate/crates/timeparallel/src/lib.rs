//! Parareal: parallel-in-time integration by iterating a cheap serial coarse
//! propagator against an accurate fine propagator run concurrently on every
//! time slice.
//!
//! The driver is generic over the propagated state. A state type implements
//! [`PararealState`] (the correction update and a convergence measure) and a
//! time integrator implements [`Propagator`]. Propagators must be pure
//! functions of `(state, t0, t1)`; that is what allows the fine propagations of
//! one iteration to run in any order, on any thread, with bit-identical results.

mod domain;
mod error;
mod parareal;

pub use domain::TimeDomain;
pub use error::{DomainError, PararealError};
pub use parareal::{
    initial_coarse_sweep, run_parareal, serial_reference, PararealOptions, PararealRun, Schedule,
};

/// A propagator advances a state across `[t0, t1]`.
///
/// Implementations must not carry mutable state between calls.
pub trait Propagator<S>: Sync {
    type Error: std::error::Error + Send + Sync + 'static;

    fn propagate(&self, state: &S, t0: f64, t1: f64) -> Result<S, Self::Error>;
}

/// State that can be combined by the Parareal correction.
pub trait PararealState: Clone + Send + Sync {
    type Error: std::error::Error + Send + Sync + 'static;

    /// `c_new + f_old - c_old`, evaluated componentwise.
    fn parareal_update(c_new: &Self, f_old: &Self, c_old: &Self) -> Result<Self, Self::Error>;

    /// Relative change of `self` with respect to `previous`, used for the
    /// iteration stopping test.
    fn relative_change(&self, previous: &Self) -> f64;
}

/// Scalar states, mostly useful for model problems such as `u' = λu`.
impl PararealState for f64 {
    type Error = std::convert::Infallible;

    fn parareal_update(c_new: &Self, f_old: &Self, c_old: &Self) -> Result<Self, Self::Error> {
        Ok(c_new + f_old - c_old)
    }

    fn relative_change(&self, previous: &Self) -> f64 {
        let scale = self.abs().max(previous.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self - previous).abs() / scale
        }
    }
}

impl PararealState for Vec<f64> {
    type Error = error::LengthMismatch;

    fn parareal_update(c_new: &Self, f_old: &Self, c_old: &Self) -> Result<Self, Self::Error> {
        if c_new.len() != f_old.len() || c_new.len() != c_old.len() {
            return Err(error::LengthMismatch {
                lengths: [c_new.len(), f_old.len(), c_old.len()],
            });
        }
        Ok(c_new
            .iter()
            .zip(f_old)
            .zip(c_old)
            .map(|((c, f), o)| c + f - o)
            .collect())
    }

    fn relative_change(&self, previous: &Self) -> f64 {
        let diff = self
            .iter()
            .zip(previous)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = self
            .iter()
            .chain(previous)
            .fold(0.0_f64, |m, a| m.max(a.abs()));
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}
