use std::f64::consts::PI;

use ns2d::{Circle, FluidParams, Grid, InflowProfile};

use crate::error::BenchError;

/// Cells along x and y of the default grid (about 13k unknowns).
pub const DEFAULT_GRID: (usize, usize) = (154, 29);
/// Coarser grid for quick runs (about 3k unknowns).
pub const REDUCED_GRID: (usize, usize) = (72, 14);

/// Reference velocity of the force coefficients: the time maximum of the
/// mean inflow.
pub const U_REF: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkSetup {
    /// Channel height (m).
    pub h: f64,
    /// Channel length (m).
    pub l: f64,
    /// Cylinder diameter (m).
    pub d: f64,
    pub center: (f64, f64),
    /// Peak inflow velocity on the channel axis (m/s).
    pub u_in_max: f64,
    /// Angular frequency of the inflow modulation (1/s).
    pub period_factor: f64,
    /// End of the time interval (s).
    pub t_end: f64,
    pub rho: f64,
    /// Kinematic viscosity (m²/s).
    pub nu: f64,
}

impl BenchmarkSetup {
    pub fn schafer_turek(nu: f64) -> Result<Self, BenchError> {
        Self::with_geometry(nu, 2.2, (0.2, 0.2))
    }

    /// Same constants, with a different channel length or cylinder position.
    pub fn with_geometry(nu: f64, l: f64, center: (f64, f64)) -> Result<Self, BenchError> {
        let setup = Self {
            h: 0.41,
            l,
            d: 0.1,
            center,
            u_in_max: 1.5,
            period_factor: PI / 8.0,
            t_end: 8.0,
            rho: 1.0,
            nu,
        };
        setup.validate()?;
        Ok(setup)
    }

    fn validate(&self) -> Result<(), BenchError> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(BenchError::Setup(format!("viscosity must be positive, got {}", self.nu)));
        }
        let r = 0.5 * self.d;
        let (x, y) = self.center;
        let clearance = [x - r, self.l - x - r, y - r, self.h - y - r];
        if !clearance.iter().all(|c| *c > self.d) {
            return Err(BenchError::Setup(format!(
                "cylinder at ({x}, {y}) needs clearance > {} to every boundary of [0, {}] x [0, {}]",
                self.d, self.l, self.h
            )));
        }
        Ok(())
    }

    pub fn cylinder(&self) -> Circle {
        Circle {
            center: self.center,
            radius: 0.5 * self.d,
        }
    }

    pub fn fluid(&self) -> FluidParams {
        FluidParams {
            nu: self.nu,
            rho: self.rho,
        }
    }

    pub fn grid(&self, nx: usize, ny: usize) -> Result<Grid, BenchError> {
        Ok(Grid::channel(nx, ny, self.l, self.h, Some(self.cylinder()))?)
    }

    fn modulation(&self, t: f64) -> f64 {
        (self.period_factor * t).sin()
    }

    /// Inflow velocity `(u, v)` at height `y` of the inlet.
    pub fn inflow_velocity(&self, t: f64, y: f64) -> Result<(f64, f64), BenchError> {
        if !(0.0..=self.h).contains(&y) {
            return Err(BenchError::Domain { y, h: self.h });
        }
        Ok((self.inflow_u(t, y), 0.0))
    }

    /// Mean of the parabolic inflow over the inlet, `2/3` of its peak.
    pub fn mean_inflow(&self, t: f64) -> f64 {
        2.0 / 3.0 * self.inflow_u(t, 0.5 * self.h)
    }

    /// `ū(t)·d/ν`.
    pub fn reynolds(&self, t: f64) -> f64 {
        self.mean_inflow(t) * self.d / self.nu
    }
}

impl InflowProfile for BenchmarkSetup {
    fn inflow_u(&self, t: f64, y: f64) -> f64 {
        4.0 * self.u_in_max * self.modulation(t) * y * (self.h - y) / (self.h * self.h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_is_validated() {
        assert!(BenchmarkSetup::schafer_turek(0.001).is_ok());
        assert!(BenchmarkSetup::schafer_turek(0.0).is_err());
        assert!(BenchmarkSetup::with_geometry(0.1, 2.2, (0.12, 0.2)).is_err());
        assert!(BenchmarkSetup::with_geometry(0.1, 0.3, (0.2, 0.2)).is_err());
        assert!(BenchmarkSetup::with_geometry(0.1, 2.2, (0.2, 0.3)).is_err());
    }

    #[test]
    fn default_grid_has_about_13k_unknowns() {
        let s = BenchmarkSetup::schafer_turek(0.1).unwrap();
        let g = s.grid(DEFAULT_GRID.0, DEFAULT_GRID.1).unwrap();
        assert!((12_000..14_000).contains(&g.fluid_unknowns()), "{}", g.fluid_unknowns());
        let g = s.grid(REDUCED_GRID.0, REDUCED_GRID.1).unwrap();
        assert!((2_500..3_500).contains(&g.fluid_unknowns()), "{}", g.fluid_unknowns());
    }
}
