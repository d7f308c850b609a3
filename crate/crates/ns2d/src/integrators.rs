//! Time steppers for the incompressible equations.
//!
//! * [`Method::ImplicitEuler`]: backward Euler for advection, diffusion and
//!   pressure. Each Picard sweep freezes the advecting velocity at the latest
//!   iterate and solves the linear momentum and continuity equations together,
//!   so the discrete divergence vanishes to round-off after every sweep.
//!   Sweeps stop once the relative velocity change falls to the Picard
//!   tolerance.
//! * [`Method::FractionalStep`]: incremental pressure correction with
//!   Crank-Nicolson diffusion and linearly implicit Crank-Nicolson advection.
//!   The provisional velocity uses the previous pressure; a single projection
//!   then corrects velocity and pressure. Within one propagation the
//!   advecting velocity is extrapolated from the two latest levels; the first
//!   step predicts it from the momentum equation, so no history crosses
//!   propagator calls.

use timeparallel::Propagator;

use crate::coupled::CoupledLayout;
use crate::error::{SolverError, StepError};
use crate::grid::{Component, Grid};
use crate::linalg::{bicgstab, CsrMatrix, Ilu0};
use crate::operators::{
    advection_jacobian, apply_momentum_operator, assemble_momentum, divergence, gather, gradient_rows,
    momentum_rate,
};
use crate::poisson::{PoissonPreconditioner, PoissonSolver};
use crate::state::{FlowState, FluidParams, InflowProfile};

const COMPONENTS: [Component; 2] = [Component::U, Component::V];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ImplicitEuler,
    FractionalStep,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::ImplicitEuler => "IE",
            Method::FractionalStep => "FS",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Method {
    type Err = StepError;

    fn from_str(s: &str) -> Result<Self, StepError> {
        match s.trim().to_ascii_uppercase().as_str() {
            "IE" => Ok(Method::ImplicitEuler),
            "FS" => Ok(Method::FractionalStep),
            other => Err(StepError::Config(format!("unknown scheme `{other}`, expected IE or FS"))),
        }
    }
}

/// A time stepper together with the number of uniform steps per slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scheme {
    pub method: Method,
    pub steps_per_slice: usize,
}

impl Scheme {
    pub fn new(method: Method, steps_per_slice: usize) -> Self {
        Self {
            method,
            steps_per_slice,
        }
    }
}

/// Treatment of the advection nonlinearity in implicit Euler steps. Both
/// iterate to the same discrete solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linearization {
    /// Advecting velocity frozen at the previous iterate.
    Picard,
    /// Picard matrix plus the derivative with respect to the advecting
    /// velocity; converges quadratically.
    Newton,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub picard_tol: f64,
    pub picard_max_sweeps: usize,
    pub poisson_tol: f64,
    pub poisson_max_iter: usize,
    pub momentum_tol: f64,
    pub momentum_max_iter: usize,
    /// Drop the advection term (Stokes flow).
    pub stokes: bool,
    pub linearization: Linearization,
    pub preconditioner: PoissonPreconditioner,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            picard_tol: 1e-8,
            picard_max_sweeps: 50,
            poisson_tol: crate::poisson::DEFAULT_TOL,
            poisson_max_iter: crate::poisson::DEFAULT_MAX_ITER,
            momentum_tol: 1e-12,
            momentum_max_iter: 2000,
            stokes: false,
            linearization: Linearization::Newton,
            preconditioner: PoissonPreconditioner::BandedCholesky,
        }
    }
}

/// Grid plus the reusable pressure solver.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: Grid,
    pub options: SolverOptions,
    poisson: PoissonSolver,
    coupled: CoupledLayout,
}

impl Discretization {
    pub fn new(grid: Grid, options: SolverOptions) -> Result<Self, StepError> {
        let mut poisson =
            PoissonSolver::new(&grid, options.preconditioner).map_err(StepError::Pressure)?;
        poisson.max_iter = options.poisson_max_iter;
        let coupled = CoupledLayout::new(&grid, &poisson);
        Ok(Self {
            grid,
            options,
            poisson,
            coupled,
        })
    }

    pub fn poisson(&self) -> &PoissonSolver {
        &self.poisson
    }
}

fn check_step(disc: &Discretization, state: &FlowState, dt: f64) -> Result<(), StepError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(StepError::InvalidStep(dt));
    }
    state.check(&disc.grid)
}

fn solve_momentum(
    disc: &Discretization,
    matrix: &CsrMatrix,
    rhs: &[f64],
    guess: &mut [f64],
) -> Result<(), StepError> {
    let ilu = Ilu0::new(matrix).map_err(StepError::Momentum)?;
    bicgstab(
        matrix,
        rhs,
        guess,
        &ilu,
        disc.options.momentum_tol,
        disc.options.momentum_max_iter,
    )
    .map_err(StepError::Momentum)?;
    if guess.iter().any(|x| !x.is_finite()) {
        return Err(StepError::Momentum(SolverError::NonFinite("velocity")));
    }
    Ok(())
}

fn write_rows(grid: &Grid, c: Component, rows: &[f64], full: &mut [f64]) {
    for (row, &f) in grid.faces(c).free().iter().enumerate() {
        full[f] = rows[row];
    }
}

/// Max-norm change between two velocity fields over the free faces, relative
/// to the newer field (absolute when that field vanishes).
fn velocity_change(new: &FlowState, old: &FlowState) -> f64 {
    let diff = new
        .u
        .iter()
        .zip(&old.u)
        .chain(new.v.iter().zip(&old.v))
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = new.max_speed();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Projects `star` in place. Returns the pressure increment `φ` and the
/// divergence of the unprojected field.
fn project(disc: &Discretization, star: &mut FlowState, dt: f64) -> Result<(Vec<f64>, Vec<f64>), StepError> {
    let grid = &disc.grid;
    let div = divergence(grid, &star.u, &star.v);
    let rhs: Vec<f64> = div.iter().map(|d| d / dt).collect();
    let (phi, _) = disc
        .poisson
        .solve(&rhs, disc.options.poisson_tol)
        .map_err(StepError::Pressure)?;
    for c in COMPONENTS {
        let g = gradient_rows(grid, c, &phi);
        let faces = grid.faces(c);
        let field = star.field_mut(c);
        for (row, &f) in faces.free().iter().enumerate() {
            field[f] -= dt * g[row];
        }
    }
    Ok((phi, div))
}

/// Relative change below which a Picard fallback hands over to Newton.
const NEWTON_SWITCH: f64 = 1e-3;

/// One linearized sweep of the implicit Euler system around `current`.
fn implicit_euler_sweep(
    disc: &Discretization,
    old: &[Vec<f64>; 2],
    current: &FlowState,
    dt: f64,
    params: &FluidParams,
    inflow: &dyn InflowProfile,
    newton: bool,
) -> Result<FlowState, StepError> {
    let grid = &disc.grid;
    let t1 = current.t;
    let adv = (!disc.options.stokes).then_some((current.u.as_slice(), current.v.as_slice()));
    let mut systems = [0, 1].map(|k| {
        let (matrix, bc) = assemble_momentum(grid, COMPONENTS[k], adv, params.nu, 1.0 / dt, 1.0, inflow, t1);
        let rhs: Vec<f64> = old[k].iter().zip(&bc).map(|(x, b)| x / dt - b).collect();
        (matrix, rhs)
    });
    let jacobian = newton.then(|| advection_jacobian(grid, &current.u, &current.v, 1.0, inflow, t1));
    if let Some(jac) = &jacobian {
        // Newton: J U_new = J U_old - F(U_old) + ..., with the Picard part
        // already affine in the unknowns.
        let now = COMPONENTS.map(|c| gather(grid, c, current.field(c)));
        for (r, system) in systems.iter_mut().enumerate() {
            for (c, block) in jac[r].iter().enumerate() {
                let mut y = vec![0.0; block.n()];
                block.matvec(&now[c], &mut y);
                for (f, yi) in system.1.iter_mut().zip(&y) {
                    *f += yi;
                }
            }
        }
    }
    let rhs = [systems[0].1.as_slice(), systems[1].1.as_slice()];
    let ([u, v], p) = match &jacobian {
        None => disc.coupled.solve(
            grid,
            [[Some(&systems[0].0), None], [None, Some(&systems[1].0)]],
            rhs,
            &current.u,
            &current.v,
        ),
        Some(jac) => {
            let uu = systems[0].0.add(&jac[0][0]);
            let vv = systems[1].0.add(&jac[1][1]);
            disc.coupled.solve(
                grid,
                [[Some(&uu), Some(&jac[0][1])], [Some(&jac[1][0]), Some(&vv)]],
                rhs,
                &current.u,
                &current.v,
            )
        }
    }
    .map_err(StepError::Momentum)?;
    let mut next = current.clone();
    write_rows(grid, Component::U, &u, &mut next.u);
    write_rows(grid, Component::V, &v, &mut next.v);
    next.p = p;
    Ok(next)
}

/// One backward Euler step of length `dt` from `state`.
///
/// With Newton linearization, a step whose Newton iteration stalls is
/// restarted with Picard sweeps, which converge from further away, and
/// finished with Newton once the change drops below `NEWTON_SWITCH`. Both
/// iterate to the same discrete solution.
pub fn implicit_euler_step(
    disc: &Discretization,
    state: &FlowState,
    dt: f64,
    params: &FluidParams,
    inflow: &dyn InflowProfile,
) -> Result<FlowState, StepError> {
    check_step(disc, state, dt)?;
    let grid = &disc.grid;
    let t1 = state.t + dt;
    let mut start = state.clone();
    start.t = t1;
    start.apply_inflow(grid, inflow, t1);
    let old = COMPONENTS.map(|c| gather(grid, c, state.field(c)));
    let max = disc.options.picard_max_sweeps;
    let tol = disc.options.picard_tol;
    let newton = !disc.options.stokes && disc.options.linearization == Linearization::Newton;
    let sweep = |current: &FlowState, newton: bool| -> Result<(FlowState, f64), StepError> {
        let next = implicit_euler_sweep(disc, &old, current, dt, params, inflow, newton)?;
        let change = velocity_change(&next, current);
        Ok((next, change))
    };

    let mut current = start.clone();
    let mut change = f64::INFINITY;
    for _ in 0..max {
        (current, change) = sweep(&current, newton)?;
        if change <= tol {
            return Ok(current);
        }
    }
    if !newton {
        return Err(StepError::Picard { sweeps: max, change });
    }

    current = start;
    let mut sweeps = 0;
    while sweeps < max {
        (current, change) = sweep(&current, false)?;
        sweeps += 1;
        if change <= tol {
            return Ok(current);
        }
        if change <= NEWTON_SWITCH {
            break;
        }
    }
    while sweeps < max {
        (current, change) = sweep(&current, true)?;
        sweeps += 1;
        if change <= tol {
            return Ok(current);
        }
    }
    Err(StepError::Picard { sweeps: max, change })
}

/// Advecting velocity for a fractional step from `state`: extrapolated from
/// the two latest levels when `previous` is known, otherwise predicted from
/// the momentum equation over half a step.
fn midpoint_velocity(
    disc: &Discretization,
    state: &FlowState,
    previous: Option<&FlowState>,
    dt: f64,
    params: &FluidParams,
    inflow: &dyn InflowProfile,
) -> FlowState {
    let grid = &disc.grid;
    let mut mid = state.clone();
    match previous {
        Some(prev) => {
            for (m, q) in mid.u.iter_mut().zip(&prev.u).chain(mid.v.iter_mut().zip(&prev.v)) {
                *m = 1.5 * *m - 0.5 * q;
            }
        }
        None => {
            let (ru, rv) = momentum_rate(grid, state, params, inflow);
            for (m, r) in mid.u.iter_mut().zip(&ru).chain(mid.v.iter_mut().zip(&rv)) {
                *m += 0.5 * dt * r;
            }
        }
    }
    mid.t = state.t + 0.5 * dt;
    mid.apply_inflow(grid, inflow, mid.t);
    mid
}

/// One second-order pressure-correction step of length `dt` from `state`.
///
/// Diffusion is Crank-Nicolson. Advection is Crank-Nicolson with the
/// advecting velocity taken at the half step, from `previous` (the state one
/// step of `dt` earlier) by extrapolation when given and otherwise by a
/// half-step prediction. The momentum systems are linear, and the
/// skew-symmetric advection keeps them solvable for any step size.
pub fn fractional_step(
    disc: &Discretization,
    state: &FlowState,
    previous: Option<&FlowState>,
    dt: f64,
    params: &FluidParams,
    inflow: &dyn InflowProfile,
) -> Result<FlowState, StepError> {
    check_step(disc, state, dt)?;
    if let Some(prev) = previous {
        prev.check(&disc.grid)?;
    }
    let grid = &disc.grid;
    let t0 = state.t;
    let t1 = t0 + dt;
    let mut old = state.clone();
    old.apply_inflow(grid, inflow, t0);
    let mid = midpoint_velocity(disc, &old, previous, dt, params, inflow);
    let adv = (!disc.options.stokes).then_some((mid.u.as_slice(), mid.v.as_slice()));
    let mut star = old.clone();
    star.t = t1;
    star.apply_inflow(grid, inflow, t1);
    for c in COMPONENTS {
        let (matrix, bc) = assemble_momentum(grid, c, adv, params.nu, 1.0 / dt, 0.5, inflow, t1);
        let explicit = apply_momentum_operator(grid, c, adv, params.nu, old.field(c), inflow, t0);
        let prev = gather(grid, c, old.field(c));
        let gp = gradient_rows(grid, c, &old.p);
        let rhs: Vec<f64> = (0..prev.len())
            .map(|r| prev[r] / dt - 0.5 * explicit[r] - gp[r] - bc[r])
            .collect();
        let mut x = prev;
        solve_momentum(disc, &matrix, &rhs, &mut x)?;
        write_rows(grid, c, &x, star.field_mut(c));
    }
    let (phi, div) = project(disc, &mut star, dt)?;
    for (k, p) in star.p.iter_mut().enumerate() {
        *p = if grid.is_solid(k) { 0.0 } else { *p + phi[k] - 0.5 * params.nu * div[k] };
    }
    Ok(star)
}

/// One self-starting step of `method`.
pub fn step(
    disc: &Discretization,
    method: Method,
    state: &FlowState,
    dt: f64,
    params: &FluidParams,
    inflow: &dyn InflowProfile,
) -> Result<FlowState, StepError> {
    match method {
        Method::ImplicitEuler => implicit_euler_step(disc, state, dt, params, inflow),
        Method::FractionalStep => fractional_step(disc, state, None, dt, params, inflow),
    }
}

/// Advances `state` from `t0` to `t1` with `scheme.steps_per_slice` uniform
/// steps, calling `observer` after every step.
#[allow(clippy::too_many_arguments)]
pub fn propagate_observed(
    disc: &Discretization,
    scheme: Scheme,
    state: &FlowState,
    t0: f64,
    t1: f64,
    params: &FluidParams,
    inflow: &dyn InflowProfile,
    observer: &mut dyn FnMut(&FlowState),
) -> Result<FlowState, StepError> {
    let n = scheme.steps_per_slice;
    if n == 0 {
        return Err(StepError::Config("steps per slice must be positive".into()));
    }
    let dt = (t1 - t0) / n as f64;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(StepError::InvalidStep(dt));
    }
    let mut current = state.clone();
    current.t = t0;
    let mut previous: Option<FlowState> = None;
    for k in 0..n {
        let result = match scheme.method {
            Method::ImplicitEuler => implicit_euler_step(disc, &current, dt, params, inflow),
            Method::FractionalStep => {
                fractional_step(disc, &current, previous.as_ref(), dt, params, inflow)
            }
        };
        let mut next = result.map_err(|e| StepError::Propagation {
            step: k + 1,
            steps: n,
            source: Box::new(e),
        })?;
        next.t = if k + 1 == n { t1 } else { t0 + (k + 1) as f64 * dt };
        observer(&next);
        previous = Some(std::mem::replace(&mut current, next));
    }
    Ok(current)
}

pub fn propagate(
    disc: &Discretization,
    scheme: Scheme,
    state: &FlowState,
    t0: f64,
    t1: f64,
    params: &FluidParams,
    inflow: &dyn InflowProfile,
) -> Result<FlowState, StepError> {
    propagate_observed(disc, scheme, state, t0, t1, params, inflow, &mut |_| {})
}

/// Slice propagator for the parareal driver.
pub struct NsPropagator<'a> {
    pub disc: &'a Discretization,
    pub scheme: Scheme,
    pub params: FluidParams,
    pub inflow: &'a dyn InflowProfile,
}

impl Propagator<FlowState> for NsPropagator<'_> {
    type Error = StepError;

    fn propagate(&self, state: &FlowState, t0: f64, t1: f64) -> Result<FlowState, StepError> {
        propagate(self.disc, self.scheme, state, t0, t1, &self.params, self.inflow)
    }
}
