//! Drag, lift and the front/back pressure difference.
//!
//! Forces come from the momentum balance over a rectangle of cells enclosing
//! the cylinder. With `σ = -p I + ν(∇U + ∇Uᵀ)` (per unit density) and `S`
//! the rectangle boundary,
//!
//! ```text
//! F = ρ [ ∮_S (σ·n - U (U·n)) dS - ∫_V ∂U/∂t dV ]
//! ```
//!
//! The surface terms are evaluated with central differences on the rectangle
//! edges, away from the immersed boundary. The volume term uses the rate
//! `∂U/∂t` of the semi-discrete momentum equation at the given state, so the
//! force is a function of a single snapshot.

use ns2d::{momentum_rate, Component, FaceKind, FlowState, Grid};

use crate::error::BenchError;
use crate::setup::{BenchmarkSetup, U_REF};

/// Rectangle of cells `[i0, i1) × [j0, j1)`. Its edges run along the
/// `u`-face columns `i0`, `i1` and the `v`-face rows `j0`, `j1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlVolume {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl ControlVolume {
    pub fn new(grid: &Grid, i0: usize, i1: usize, j0: usize, j1: usize) -> Result<Self, BenchError> {
        if !(1 <= i0 && i0 < i1 && i1 < grid.nx && 1 <= j0 && j0 < j1 && j1 < grid.ny) {
            return Err(BenchError::ControlVolume(format!(
                "cells [{i0}, {i1}) x [{j0}, {j1}) must lie inside the interior of a {}x{} grid",
                grid.nx, grid.ny
            )));
        }
        let cv = Self { i0, i1, j0, j1 };
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                if grid.is_solid(grid.cell(i, j)) && !(i0 < i && i + 1 < i1 && j0 < j && j + 1 < j1) {
                    return Err(BenchError::ControlVolume(format!(
                        "solid cell ({i}, {j}) is not strictly inside [{i0}, {i1}) x [{j0}, {j1})"
                    )));
                }
            }
        }
        cv.surface(grid, &FlowState::zeros(grid, 0.0), 0.0)?;
        Ok(cv)
    }

    /// Square of half-width `d` around the cylinder, widened to grid lines.
    pub fn around_cylinder(setup: &BenchmarkSetup, grid: &Grid) -> Result<Self, BenchError> {
        let (cx, cy) = setup.center;
        let half = setup.d;
        let lo = |c: f64, h: f64| ((c - half) / h).floor().max(0.0) as usize;
        let hi = |c: f64, h: f64| ((c + half) / h).ceil() as usize;
        Self::new(
            grid,
            lo(cx, grid.dx),
            hi(cx, grid.dx),
            lo(cy, grid.dy),
            hi(cy, grid.dy),
        )
    }

    /// `∮ (σ·n - U (U·n)) dS` per unit density.
    fn surface(&self, grid: &Grid, s: &FlowState, nu: f64) -> Result<(f64, f64), BenchError> {
        let at = Sampler { grid, s };
        let (dx, dy) = (grid.dx, grid.dy);
        let (mut fx, mut fy) = (0.0, 0.0);
        for (ie, sign) in [(self.i1, 1.0), (self.i0, -1.0)] {
            for j in self.j0..self.j1 {
                let u = at.u(ie, j)?;
                let v = 0.25 * (at.v(ie - 1, j)? + at.v(ie, j)? + at.v(ie - 1, j + 1)? + at.v(ie, j + 1)?);
                let p = 0.5 * (at.p(ie - 1, j)? + at.p(ie, j)?);
                let ux = (at.u(ie + 1, j)? - at.u(ie - 1, j)?) / (2.0 * dx);
                let uy = (at.u(ie, j + 1)? - at.u(ie, j - 1)?) / (2.0 * dy);
                let vx = 0.5 * ((at.v(ie, j)? - at.v(ie - 1, j)?) + (at.v(ie, j + 1)? - at.v(ie - 1, j + 1)?)) / dx;
                fx += sign * dy * (-p + 2.0 * nu * ux - u * u);
                fy += sign * dy * (nu * (uy + vx) - v * u);
            }
        }
        for (jn, sign) in [(self.j1, 1.0), (self.j0, -1.0)] {
            for i in self.i0..self.i1 {
                let v = at.v(i, jn)?;
                let u = 0.25 * (at.u(i, jn - 1)? + at.u(i + 1, jn - 1)? + at.u(i, jn)? + at.u(i + 1, jn)?);
                let p = 0.5 * (at.p(i, jn - 1)? + at.p(i, jn)?);
                let vy = (at.v(i, jn + 1)? - at.v(i, jn - 1)?) / (2.0 * dy);
                let vx = (at.v(i + 1, jn)? - at.v(i - 1, jn)?) / (2.0 * dx);
                let uy = 0.5 * ((at.u(i, jn)? - at.u(i, jn - 1)?) + (at.u(i + 1, jn)? - at.u(i + 1, jn - 1)?)) / dy;
                fy += sign * dx * (-p + 2.0 * nu * vy - v * v);
                fx += sign * dx * (nu * (uy + vx) - u * v);
            }
        }
        Ok((fx, fy))
    }

    /// `∫ ∂U/∂t dV` per unit density, trapezoidal in the normal direction.
    fn volume(&self, grid: &Grid, rate: (&[f64], &[f64])) -> (f64, f64) {
        let cell = grid.dx * grid.dy;
        let fu = grid.faces(Component::U);
        let fv = grid.faces(Component::V);
        let mut ix = 0.0;
        for i in self.i0..=self.i1 {
            let w = if i == self.i0 || i == self.i1 { 0.5 } else { 1.0 };
            for j in self.j0..self.j1 {
                ix += w * rate.0[fu.index(i, j)];
            }
        }
        let mut iy = 0.0;
        for i in self.i0..self.i1 {
            for j in self.j0..=self.j1 {
                let w = if j == self.j0 || j == self.j1 { 0.5 } else { 1.0 };
                iy += w * rate.1[fv.index(i, j)];
            }
        }
        (ix * cell, iy * cell)
    }

    /// Force `(F_x, F_y)` per unit depth exerted by the fluid on whatever
    /// lies inside the rectangle.
    pub fn forces(&self, state: &FlowState, setup: &BenchmarkSetup, grid: &Grid) -> Result<(f64, f64), BenchError> {
        check_state(state, grid)?;
        let (sx, sy) = self.surface(grid, state, setup.nu)?;
        let (ru, rv) = momentum_rate(grid, state, &setup.fluid(), setup);
        let (vx, vy) = self.volume(grid, (&ru, &rv));
        Ok((setup.rho * (sx - vx), setup.rho * (sy - vy)))
    }
}

struct Sampler<'a> {
    grid: &'a Grid,
    s: &'a FlowState,
}

impl Sampler<'_> {
    fn face(&self, c: Component, i: usize, j: usize) -> Result<f64, BenchError> {
        let faces = self.grid.faces(c);
        let f = faces.index(i, j);
        if faces.kind[f] != FaceKind::Free {
            return Err(BenchError::ControlVolume(format!(
                "{c:?} face ({i}, {j}) used by the surface integral is not a fluid face"
            )));
        }
        Ok(self.s.field(c)[f])
    }

    fn u(&self, i: usize, j: usize) -> Result<f64, BenchError> {
        self.face(Component::U, i, j)
    }

    fn v(&self, i: usize, j: usize) -> Result<f64, BenchError> {
        self.face(Component::V, i, j)
    }

    fn p(&self, i: usize, j: usize) -> Result<f64, BenchError> {
        if self.grid.is_solid(self.grid.cell(i, j)) {
            return Err(BenchError::ControlVolume(format!("cell ({i}, {j}) is solid")));
        }
        Ok(self.s.p[self.grid.cell(i, j)])
    }
}

fn check_state(state: &FlowState, grid: &Grid) -> Result<(), BenchError> {
    state.check(grid).map_err(|_| BenchError::StateMismatch {
        got: (state.nx, state.ny),
        expected: (grid.nx, grid.ny),
    })
}

/// Drag and lift per unit depth, `(F_dr, F_li)`, over the default control
/// volume.
pub fn compute_forces(state: &FlowState, setup: &BenchmarkSetup, grid: &Grid) -> Result<(f64, f64), BenchError> {
    ControlVolume::around_cylinder(setup, grid)?.forces(state, setup, grid)
}

/// `C = 2F / (ρ ū_ref² d)` for drag and lift.
pub fn coefficients(f_dr: f64, f_li: f64, setup: &BenchmarkSetup) -> (f64, f64) {
    let scale = 2.0 / (setup.rho * U_REF * U_REF * setup.d);
    (scale * f_dr, scale * f_li)
}

fn has_pressure(grid: &Grid, i: usize, j: usize) -> bool {
    if grid.is_solid(grid.cell(i, j)) {
        return false;
    }
    let [e, w, n, s] = grid.cell_faces(i, j);
    let fu = grid.faces(Component::U);
    let fv = grid.faces(Component::V);
    [fu.kind[e], fu.kind[w], fv.kind[n], fv.kind[s]].contains(&FaceKind::Free)
}

/// Pressure at `(x, y)`, bilinear in the cell centres.
///
/// When a cell of the bilinear stencil is solid, the row value is instead
/// extrapolated linearly from the two nearest fluid cells of that row on the
/// side facing away from the cylinder centre.
pub fn probe_pressure(state: &FlowState, grid: &Grid, x: f64, y: f64) -> Result<f64, BenchError> {
    check_state(state, grid)?;
    let cx = grid.obstacle.map_or(0.5 * grid.lx, |c| c.center.0);
    let xi = (x / grid.dx - 0.5).clamp(0.0, (grid.nx - 1) as f64);
    let yj = (y / grid.dy - 0.5).clamp(0.0, (grid.ny - 1) as f64);
    let il = (xi.floor() as usize).min(grid.nx - 2);
    let jl = (yj.floor() as usize).min(grid.ny - 2);
    let p = |i: usize, j: usize| state.p[grid.cell(i, j)];
    let row = |j: usize| -> Result<f64, BenchError> {
        if has_pressure(grid, il, j) && has_pressure(grid, il + 1, j) {
            let s = xi - il as f64;
            return Ok((1.0 - s) * p(il, j) + s * p(il + 1, j));
        }
        let fluid = |i: isize| i >= 0 && (i as usize) < grid.nx && has_pressure(grid, i as usize, j);
        let (mut a, step) = if x < cx { (il as isize, -1) } else { (il as isize + 1, 1) };
        while (0..grid.nx as isize).contains(&a) && !fluid(a) {
            a += step;
        }
        if !fluid(a) {
            return Err(BenchError::Setup(format!("no fluid cell in row {j} to extrapolate pressure to x = {x}")));
        }
        let b = a + step;
        let pa = p(a as usize, j);
        if !fluid(b) {
            return Ok(pa);
        }
        let pb = p(b as usize, j);
        Ok(pa + (xi - a as f64) / (b - a) as f64 * (pb - pa))
    };
    let t = yj - jl as f64;
    Ok((1.0 - t) * row(jl)? + t * row(jl + 1)?)
}

/// Pressures `(p_fr, p_en)` on the upstream and downstream ends of the
/// cylinder.
pub fn pressure_probes(state: &FlowState, setup: &BenchmarkSetup, grid: &Grid) -> Result<(f64, f64), BenchError> {
    let (cx, cy) = setup.center;
    let r = 0.5 * setup.d;
    Ok((
        probe_pressure(state, grid, cx - r, cy)?,
        probe_pressure(state, grid, cx + r, cy)?,
    ))
}

/// `p_fr - p_en`.
pub fn pressure_difference(state: &FlowState, setup: &BenchmarkSetup, grid: &Grid) -> Result<f64, BenchError> {
    let (front, end) = pressure_probes(state, setup, grid)?;
    Ok(front - end)
}
