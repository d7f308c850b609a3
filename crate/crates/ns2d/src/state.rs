use timeparallel::PararealState;

use crate::error::StepError;
use crate::grid::{Component, FaceKind, Grid};

/// Kinematic viscosity and density. Pressure is stored per unit density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    pub nu: f64,
    pub rho: f64,
}

impl FluidParams {
    pub fn new(nu: f64) -> Self {
        Self { nu, rho: 1.0 }
    }
}

/// Inflow profile `u_in(t, y)` on the `x = 0` boundary.
pub trait InflowProfile: Sync {
    fn inflow_u(&self, t: f64, y: f64) -> f64;
}

/// Closed inlet.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoInflow;

impl InflowProfile for NoInflow {
    fn inflow_u(&self, _t: f64, _y: f64) -> f64 {
        0.0
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> InflowProfile for F {
    fn inflow_u(&self, t: f64, y: f64) -> f64 {
        self(t, y)
    }
}

/// Velocity and pressure snapshot on a staggered grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub nx: usize,
    pub ny: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
}

impl FlowState {
    pub fn zeros(grid: &Grid, t: f64) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            t,
            u: vec![0.0; grid.faces(Component::U).len()],
            v: vec![0.0; grid.faces(Component::V).len()],
            p: vec![0.0; grid.n_cells()],
        }
    }

    pub fn field(&self, c: Component) -> &[f64] {
        match c {
            Component::U => &self.u,
            Component::V => &self.v,
        }
    }

    pub fn field_mut(&mut self, c: Component) -> &mut [f64] {
        match c {
            Component::U => &mut self.u,
            Component::V => &mut self.v,
        }
    }

    pub fn check(&self, grid: &Grid) -> Result<(), StepError> {
        let nu = grid.faces(Component::U).len();
        let nv = grid.faces(Component::V).len();
        if self.nx != grid.nx || self.ny != grid.ny {
            return Err(StepError::GridMismatch(format!(
                "state is {}x{}, grid is {}x{}",
                self.nx, self.ny, grid.nx, grid.ny
            )));
        }
        if self.u.len() != nu || self.v.len() != nv || self.p.len() != grid.n_cells() {
            return Err(StepError::GridMismatch(format!(
                "field lengths ({}, {}, {}) vs grid ({nu}, {nv}, {})",
                self.u.len(),
                self.v.len(),
                self.p.len(),
                grid.n_cells()
            )));
        }
        Ok(())
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.u.len() == other.u.len()
            && self.v.len() == other.v.len()
            && self.p.len() == other.p.len()
    }

    /// Writes the inflow profile at time `t` into the inlet faces.
    pub fn apply_inflow(&mut self, grid: &Grid, inflow: &dyn InflowProfile, t: f64) {
        let faces = grid.faces(Component::U);
        for f in 0..faces.len() {
            if faces.kind[f] == FaceKind::Inflow {
                let (i, j) = faces.coords(f);
                let y = grid.face_position(Component::U, i, j).1;
                self.u[f] = inflow.inflow_u(t, y);
            }
        }
    }

    pub fn max_speed(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).chain(&self.p).all(|x| x.is_finite())
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn relative(a: &[f64], b: &[f64]) -> f64 {
    let diff = max_abs_diff(a, b);
    let scale = max_abs(a).max(max_abs(b));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

impl PararealState for FlowState {
    type Error = StepError;

    fn parareal_update(c_new: &Self, f_old: &Self, c_old: &Self) -> Result<Self, StepError> {
        if !c_new.same_shape(f_old) || !c_new.same_shape(c_old) {
            return Err(StepError::GridMismatch(
                "parareal update on states from different grids".into(),
            ));
        }
        let combine = |a: &[f64], b: &[f64], c: &[f64]| -> Vec<f64> {
            a.iter()
                .zip(b)
                .zip(c)
                .map(|((x, y), z)| x + y - z)
                .collect()
        };
        Ok(Self {
            nx: c_new.nx,
            ny: c_new.ny,
            t: c_new.t,
            u: combine(&c_new.u, &f_old.u, &c_old.u),
            v: combine(&c_new.v, &f_old.v, &c_old.v),
            p: combine(&c_new.p, &f_old.p, &c_old.p),
        })
    }

    /// Largest per-field max-norm relative change over `u`, `v` and `p`.
    fn relative_change(&self, previous: &Self) -> f64 {
        relative(&self.u, &previous.u)
            .max(relative(&self.v, &previous.v))
            .max(relative(&self.p, &previous.p))
    }
}
