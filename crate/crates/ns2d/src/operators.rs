//! Discrete operators on the staggered grid.
//!
//! Velocity operators act on the free faces of one component and return full
//! face arrays with zeros on fixed faces. The momentum operator of a component
//! with advecting field `a` is
//!
//! ```text
//! (N(a) - ν L) x = a_x ∂x/∂x + a_y ∂x/∂y - ν (∂²x/∂x² + ∂²x/∂y²)
//! ```
//!
//! with second-order central differences. Advection uses the skew-symmetric
//! flux form `Σ_d ± a_d x_d / (2h)`, with the advecting velocity `a_d`
//! interpolated to the midpoint of each link, so the advection matrix has a
//! zero diagonal and is antisymmetric away from boundaries.

use crate::grid::{BoundaryValue, Component, Grid, Link};
use crate::linalg::{CsrBuilder, CsrMatrix};
use crate::state::{FlowState, FluidParams, InflowProfile};

/// Advecting velocity as full face arrays `(u, v)`.
pub type Advecting<'a> = Option<(&'a [f64], &'a [f64])>;

/// Stencil weights of one row: `center · x_f + Σ (advective[d] + diffusive[d]) · x_d`.
#[derive(Debug, Clone, Copy)]
struct RowWeights {
    center: f64,
    advective: [f64; 4],
    diffusive: [f64; 4],
}

/// A link's contribution `self_coef · x_f + weight · x_n + constant`.
struct LinkTerm {
    self_coef: f64,
    neighbour: Option<(usize, f64)>,
    constant: f64,
}

fn link_term(link: Link, adv_w: f64, diff_w: f64, inflow: &dyn InflowProfile, t: f64) -> LinkTerm {
    let w = adv_w + diff_w;
    match link {
        Link::Face(n) => LinkTerm {
            self_coef: 0.0,
            neighbour: Some((n, w)),
            constant: 0.0,
        },
        Link::Fixed { self_coef, value } => LinkTerm {
            self_coef: w * self_coef,
            neighbour: None,
            constant: w * boundary_value(value, inflow, t),
        },
        Link::Immersed { self_coef } => LinkTerm {
            self_coef: diff_w * self_coef,
            neighbour: None,
            constant: 0.0,
        },
    }
}

/// Advecting velocity at the midpoint of each link (east, west, north, south)
/// of a row, as weighted pairs of stored faces.
type MidpointWeights = [[(Component, usize, f64); 2]; 4];

fn midpoint_weights(grid: &Grid, c: Component, row: usize) -> MidpointWeights {
    let faces = grid.faces(c);
    let f = faces.free()[row];
    let st = faces.stencil(row);
    let t = st.transverse;
    let along = |n: Option<usize>| match n {
        Some(n) => [(c, f, 0.5), (c, n, 0.5)],
        None => [(c, f, 0.5), (c, f, 0.5)],
    };
    match c {
        Component::U => [
            along(st.along[0]),
            along(st.along[1]),
            [(Component::V, t[2], 0.5), (Component::V, t[3], 0.5)],
            [(Component::V, t[0], 0.5), (Component::V, t[1], 0.5)],
        ],
        Component::V => [
            [(Component::U, t[1], 0.5), (Component::U, t[3], 0.5)],
            [(Component::U, t[0], 0.5), (Component::U, t[2], 0.5)],
            along(st.along[0]),
            along(st.along[1]),
        ],
    }
}

fn advecting_velocities(grid: &Grid, c: Component, row: usize, adv: (&[f64], &[f64])) -> [f64; 4] {
    midpoint_weights(grid, c, row).map(|pair| {
        pair.iter()
            .map(|&(comp, face, w)| {
                let a = match comp {
                    Component::U => adv.0,
                    Component::V => adv.1,
                };
                w * a[face]
            })
            .sum()
    })
}

/// Signed `1 / (2h)` factor of each link in the skew-symmetric flux form.
fn link_factors(grid: &Grid) -> [f64; 4] {
    let (hx, hy) = (0.5 / grid.dx, 0.5 / grid.dy);
    [hx, -hx, hy, -hy]
}

fn row_weights(grid: &Grid, c: Component, row: usize, adv: Advecting, nu: f64) -> RowWeights {
    let a = adv
        .map(|a| advecting_velocities(grid, c, row, a))
        .unwrap_or([0.0; 4]);
    let (dx, dy) = (grid.dx, grid.dy);
    let (kx, ky) = (nu / (dx * dx), nu / (dy * dy));
    let lf = link_factors(grid);
    let k = [kx, kx, ky, ky];
    RowWeights {
        center: 2.0 * (kx + ky),
        advective: [0, 1, 2, 3].map(|d| lf[d] * a[d]),
        diffusive: [0, 1, 2, 3].map(|d| -k[d]),
    }
}

pub(crate) fn boundary_value(value: BoundaryValue, inflow: &dyn InflowProfile, t: f64) -> f64 {
    match value {
        BoundaryValue::Zero => 0.0,
        BoundaryValue::Inflow { y, weight } => weight * inflow.inflow_u(t, y),
    }
}

/// `(N(a) - νL) x` at every free face of `c`, with boundary data at time `t`.
/// Returns one value per free row.
pub fn apply_momentum_operator(
    grid: &Grid,
    c: Component,
    adv: Advecting,
    nu: f64,
    x: &[f64],
    inflow: &dyn InflowProfile,
    t: f64,
) -> Vec<f64> {
    let faces = grid.faces(c);
    (0..faces.n_free())
        .map(|row| {
            let f = faces.free()[row];
            let w = row_weights(grid, c, row, adv, nu);
            let mut s = w.center * x[f];
            for (d, link) in faces.stencil(row).links.iter().enumerate() {
                let term = link_term(*link, w.advective[d], w.diffusive[d], inflow, t);
                s += term.self_coef * x[f] + term.constant;
                if let Some((n, wn)) = term.neighbour {
                    s += wn * x[n];
                }
            }
            s
        })
        .collect()
}

/// Matrix `shift · I + scale · (N(a) - νL)` over the free rows of `c`, and the
/// boundary contribution `scale · b(t)` so that the operator applied to a
/// field equals `matrix · x_free + b`.
pub fn assemble_momentum(
    grid: &Grid,
    c: Component,
    adv: Advecting,
    nu: f64,
    shift: f64,
    scale: f64,
    inflow: &dyn InflowProfile,
    t: f64,
) -> (CsrMatrix, Vec<f64>) {
    let faces = grid.faces(c);
    let n = faces.n_free();
    let mut builder = CsrBuilder::with_capacity(n, 5 * n);
    let mut constant = vec![0.0; n];
    let mut entries = Vec::with_capacity(5);
    for (row, bc) in constant.iter_mut().enumerate() {
        let w = row_weights(grid, c, row, adv, nu);
        let mut diag = shift + scale * w.center;
        entries.clear();
        for (d, link) in faces.stencil(row).links.iter().enumerate() {
            let term = link_term(*link, w.advective[d], w.diffusive[d], inflow, t);
            diag += scale * term.self_coef;
            *bc += scale * term.constant;
            if let Some((nf, wn)) = term.neighbour {
                let col = faces.row_of(nf).expect("face links point at free faces");
                entries.push((col, scale * wn));
            }
        }
        entries.push((row, diag));
        builder.push_row(&mut entries);
    }
    (builder.build(), constant)
}

/// Neighbour values as seen by the advection term.
fn advected_neighbours(
    grid: &Grid,
    c: Component,
    row: usize,
    x: &[f64],
    inflow: &dyn InflowProfile,
    t: f64,
) -> [f64; 4] {
    let faces = grid.faces(c);
    let f = faces.free()[row];
    faces.stencil(row).links.map(|link| match link {
        Link::Face(n) => x[n],
        Link::Fixed { self_coef, value } => self_coef * x[f] + boundary_value(value, inflow, t),
        Link::Immersed { .. } => 0.0,
    })
}

/// Derivative of the advection term with respect to its advecting velocity,
/// at the full face arrays `(u, v)`, times `scale`. Block `[r][c]` maps free
/// rows of component `c` to free rows of component `r`. Added to the matrix
/// from [`assemble_momentum`] with the same `(u, v)` it gives the Jacobian of
/// the discrete `(U·∇)U`.
pub fn advection_jacobian(
    grid: &Grid,
    u: &[f64],
    v: &[f64],
    scale: f64,
    inflow: &dyn InflowProfile,
    t: f64,
) -> [[CsrMatrix; 2]; 2] {
    let lf = link_factors(grid);
    let build = |r: Component, c: Component| {
        let faces = grid.faces(r);
        let other = grid.faces(c);
        let x = match r {
            Component::U => u,
            Component::V => v,
        };
        let mut b = CsrBuilder::with_capacity(faces.n_free(), 8 * faces.n_free());
        let mut entries = Vec::with_capacity(8);
        for row in 0..faces.n_free() {
            let xn = advected_neighbours(grid, r, row, x, inflow, t);
            entries.clear();
            for (d, pair) in midpoint_weights(grid, r, row).iter().enumerate() {
                for &(comp, face, w) in pair {
                    if comp != c {
                        continue;
                    }
                    if let Some(col) = other.row_of(face) {
                        entries.push((col, scale * lf[d] * w * xn[d]));
                    }
                }
            }
            b.push_row(&mut entries);
        }
        b.build()
    };
    [
        [build(Component::U, Component::U), build(Component::U, Component::V)],
        [build(Component::V, Component::U), build(Component::V, Component::V)],
    ]
}

fn scatter(grid: &Grid, c: Component, rows: &[f64]) -> Vec<f64> {
    let faces = grid.faces(c);
    let mut full = vec![0.0; faces.len()];
    for (row, &f) in faces.free().iter().enumerate() {
        full[f] = rows[row];
    }
    full
}

pub(crate) fn gather(grid: &Grid, c: Component, full: &[f64]) -> Vec<f64> {
    grid.faces(c).free().iter().map(|&f| full[f]).collect()
}

/// Discrete `(U·∇)U` on the free faces of both components, as full arrays.
pub fn advect(grid: &Grid, state: &FlowState, inflow: &dyn InflowProfile) -> (Vec<f64>, Vec<f64>) {
    let adv = Some((state.u.as_slice(), state.v.as_slice()));
    let mut out = [Component::U, Component::V].map(|c| {
        let rows = apply_momentum_operator(grid, c, adv, 0.0, state.field(c), inflow, state.t);
        scatter(grid, c, &rows)
    });
    let v = std::mem::take(&mut out[1]);
    let u = std::mem::take(&mut out[0]);
    (u, v)
}

/// Discrete `ν∇²U` on the free faces of both components, as full arrays.
pub fn diffuse(
    grid: &Grid,
    state: &FlowState,
    params: &FluidParams,
    inflow: &dyn InflowProfile,
) -> (Vec<f64>, Vec<f64>) {
    let [u, v] = [Component::U, Component::V].map(|c| {
        let rows = apply_momentum_operator(grid, c, None, params.nu, state.field(c), inflow, state.t);
        let neg: Vec<f64> = rows.into_iter().map(|x| -x).collect();
        scatter(grid, c, &neg)
    });
    (u, v)
}

/// Cell-centred `∂u/∂x + ∂v/∂y`.
pub fn divergence(grid: &Grid, u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut div = vec![0.0; grid.n_cells()];
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let [e, w, n, s] = grid.cell_faces(i, j);
            div[grid.cell(i, j)] = (u[e] - u[w]) / grid.dx + (v[n] - v[s]) / grid.dy;
        }
    }
    div
}

/// Largest `|∇·U|` over fluid cells.
pub fn max_divergence(grid: &Grid, state: &FlowState) -> f64 {
    divergence(grid, &state.u, &state.v)
        .iter()
        .enumerate()
        .filter(|(c, _)| !grid.is_solid(*c))
        .fold(0.0_f64, |m, (_, d)| m.max(d.abs()))
}

/// Gradient of a cell-centred field at the free faces of `c`, one value per
/// free row. Across the outlet the field is taken as zero on the face.
pub fn gradient_rows(grid: &Grid, c: Component, phi: &[f64]) -> Vec<f64> {
    let faces = grid.faces(c);
    let h = match c {
        Component::U => grid.dx,
        Component::V => grid.dy,
    };
    (0..faces.n_free())
        .map(|row| {
            let (m, p) = faces.stencil(row).cells;
            let plus = p.map(|p| phi[p]).unwrap_or(-phi[m]);
            (plus - phi[m]) / h
        })
        .collect()
}

/// Gradient as full face arrays.
pub fn gradient(grid: &Grid, phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let [u, v] = [Component::U, Component::V].map(|c| scatter(grid, c, &gradient_rows(grid, c, phi)));
    (u, v)
}

/// `∂U/∂t` implied by the semi-discrete momentum equation,
/// `-(U·∇)U + ν∇²U - ∇p`, as full face arrays.
pub fn momentum_rate(
    grid: &Grid,
    state: &FlowState,
    params: &FluidParams,
    inflow: &dyn InflowProfile,
) -> (Vec<f64>, Vec<f64>) {
    let adv = Some((state.u.as_slice(), state.v.as_slice()));
    let [u, v] = [Component::U, Component::V].map(|c| {
        let op = apply_momentum_operator(grid, c, adv, params.nu, state.field(c), inflow, state.t);
        let g = gradient_rows(grid, c, &state.p);
        let rows: Vec<f64> = op.iter().zip(&g).map(|(a, b)| -a - b).collect();
        scatter(grid, c, &rows)
    });
    (u, v)
}
