//! Direct solver for the linearized velocity-pressure system
//!
//! ```text
//! [ A_uu A_uv G_u ] [u]   [f_u]
//! [ A_vu A_vv G_v ] [v] = [f_v]
//! [ D_u  D_v  0   ] [p]   [g  ]
//! ```
//!
//! Unknowns are ordered column by column in `x` (u faces, v faces, then
//! cells of each column) so that the matrix is banded with a half-width of
//! about three grid columns, and factored with a pivoting band LU.

use crate::error::SolverError;
use crate::grid::{Component, Grid};
use crate::linalg::{BandedLu, CsrBuilder, CsrMatrix};
use crate::poisson::PoissonSolver;

#[derive(Debug, Clone)]
pub(crate) struct CoupledLayout {
    u: Vec<usize>,
    v: Vec<usize>,
    p: Vec<Option<usize>>,
    n: usize,
    /// Continuity row replaced by `p = 0` when pressure has no boundary anchor.
    pinned: Option<usize>,
}

impl CoupledLayout {
    pub(crate) fn new(grid: &Grid, poisson: &PoissonSolver) -> Self {
        // (column, kind, j, local index)
        let mut keys: Vec<(usize, u8, usize, usize)> = Vec::new();
        for (kind, c) in [(0u8, Component::U), (1u8, Component::V)] {
            let faces = grid.faces(c);
            for (row, &f) in faces.free().iter().enumerate() {
                let (i, j) = faces.coords(f);
                keys.push((i, kind, j, row));
            }
        }
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let cell = grid.cell(i, j);
                if poisson.is_active(cell) {
                    keys.push((i, 2, j, cell));
                }
            }
        }
        keys.sort_unstable();
        let mut u = vec![0; grid.faces(Component::U).n_free()];
        let mut v = vec![0; grid.faces(Component::V).n_free()];
        let mut p = vec![None; grid.n_cells()];
        for (g, &(_, kind, _, local)) in keys.iter().enumerate() {
            match kind {
                0 => u[local] = g,
                1 => v[local] = g,
                _ => p[local] = Some(g),
            }
        }
        let pinned = if poisson.is_singular() {
            p.iter().flatten().min().copied()
        } else {
            None
        };
        Self {
            u,
            v,
            p,
            n: keys.len(),
            pinned,
        }
    }

    fn rows(&self, c: Component) -> &[usize] {
        match c {
            Component::U => &self.u,
            Component::V => &self.v,
        }
    }

    /// Solves the system with momentum blocks `blocks[r][c]` (missing blocks
    /// are zero) and right-hand sides `rhs[r]` over the free rows. `fixed_u`, `fixed_v` supply the velocity on held faces, which
    /// enters the continuity equations. Returns the free rows of both
    /// components and the full pressure array (zero on inactive cells).
    pub(crate) fn solve(
        &self,
        grid: &Grid,
        blocks: [[Option<&CsrMatrix>; 2]; 2],
        rhs_rows: [&[f64]; 2],
        fixed_u: &[f64],
        fixed_v: &[f64],
    ) -> Result<([Vec<f64>; 2], Vec<f64>), SolverError> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.n];
        let mut rhs = vec![0.0; self.n];
        for (ci, c) in [Component::U, Component::V].into_iter().enumerate() {
            let map = self.rows(c);
            let faces = grid.faces(c);
            let f = rhs_rows[ci];
            let h = match c {
                Component::U => grid.dx,
                Component::V => grid.dy,
            };
            for r in 0..faces.n_free() {
                let g = map[r];
                for (cj, block) in blocks[ci].iter().enumerate() {
                    if let Some(a) = block {
                        let cols_map = if cj == 0 { &self.u } else { &self.v };
                        let (cols, vals) = a.row(r);
                        rows[g].extend(cols.iter().zip(vals).map(|(&k, &x)| (cols_map[k], x)));
                    }
                }
                let (m, plus) = faces.stencil(r).cells;
                let pm = self.p[m].expect("free faces border active cells");
                match plus {
                    Some(q) => {
                        rows[g].push((self.p[q].expect("free faces border active cells"), 1.0 / h));
                        rows[g].push((pm, -1.0 / h));
                    }
                    None => rows[g].push((pm, -2.0 / h)),
                }
                rhs[g] = f[r];
            }
        }
        let (uf, vf) = (grid.faces(Component::U), grid.faces(Component::V));
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let Some(g) = self.p[grid.cell(i, j)] else {
                    continue;
                };
                if Some(g) == self.pinned {
                    rows[g].push((g, 1.0));
                    continue;
                }
                let [e, w, n, s] = grid.cell_faces(i, j);
                let terms = [
                    (Component::U, e, 1.0 / grid.dx),
                    (Component::U, w, -1.0 / grid.dx),
                    (Component::V, n, 1.0 / grid.dy),
                    (Component::V, s, -1.0 / grid.dy),
                ];
                for (c, face, coef) in terms {
                    let (set, fixed) = match c {
                        Component::U => (uf, fixed_u),
                        Component::V => (vf, fixed_v),
                    };
                    match set.row_of(face) {
                        Some(r) => rows[g].push((self.rows(c)[r], coef)),
                        None => rhs[g] -= coef * fixed[face],
                    }
                }
            }
        }
        let mut builder = CsrBuilder::with_capacity(self.n, 8 * self.n);
        for mut row in rows {
            builder.push_row(&mut row);
        }
        let matrix = builder.build();
        let lu = BandedLu::new(&matrix)?;
        let mut x = vec![0.0; self.n];
        lu.solve(&rhs, &mut x);
        if x.iter().any(|y| !y.is_finite()) {
            return Err(SolverError::NonFinite("coupled solve"));
        }
        let u = self.u.iter().map(|&g| x[g]).collect();
        let v = self.v.iter().map(|&g| x[g]).collect();
        let mut p: Vec<f64> = self.p.iter().map(|g| g.map(|g| x[g]).unwrap_or(0.0)).collect();
        if self.pinned.is_some() {
            let active: Vec<usize> = (0..p.len()).filter(|&k| self.p[k].is_some()).collect();
            let mean = active.iter().map(|&k| p[k]).sum::<f64>() / active.len() as f64;
            for k in active {
                p[k] -= mean;
            }
        }
        Ok(([u, v], p))
    }
}
