//! Pressure Poisson solver for `L φ = rhs` with `L = D G` on the staggered grid.
//!
//! Faces held by boundary conditions do not couple cells, which gives
//! homogeneous Neumann conditions on walls and on the obstacle. The outlet
//! pins `φ = 0` on the boundary face. Without an outlet (periodic layout) the
//! operator is singular; the right-hand side is then made mean-free and the
//! solution normalized to zero mean.

use crate::error::SolverError;
use crate::grid::{Boundaries, Component, Grid};
use crate::linalg::{norm2, pcg, BandedCholesky, CsrBuilder, CsrMatrix, Jacobi, Preconditioner, SolveStats};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Preconditioner used inside the conjugate-gradient iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonPreconditioner {
    Jacobi,
    /// Band Cholesky factor of the operator itself; CG converges in one or
    /// two iterations. Requires a non-singular operator.
    BandedCholesky,
}

#[derive(Debug, Clone)]
enum Precond {
    Jacobi(Jacobi),
    Cholesky(BandedCholesky),
}

impl Precond {
    fn get(&self) -> &dyn Preconditioner {
        match self {
            Precond::Jacobi(j) => j,
            Precond::Cholesky(c) => c,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoissonSolver {
    /// `-L`, symmetric positive (semi-)definite.
    neg_laplacian: CsrMatrix,
    precond: Precond,
    singular: bool,
    active: Vec<bool>,
    pub max_iter: usize,
}

impl PoissonSolver {
    pub fn new(grid: &Grid, kind: PoissonPreconditioner) -> Result<Self, SolverError> {
        let n = grid.n_cells();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for c in [Component::U, Component::V] {
            let faces = grid.faces(c);
            let h = match c {
                Component::U => grid.dx,
                Component::V => grid.dy,
            };
            let w = 1.0 / (h * h);
            for row in 0..faces.n_free() {
                match faces.stencil(row).cells {
                    (m, Some(p)) => {
                        rows[m].push((m, w));
                        rows[m].push((p, -w));
                        rows[p].push((p, w));
                        rows[p].push((m, -w));
                    }
                    (m, None) => rows[m].push((m, 2.0 * w)),
                }
            }
        }
        let mut active = vec![true; n];
        let mut builder = CsrBuilder::with_capacity(n, 5 * n);
        for (cell, mut row) in rows.into_iter().enumerate() {
            if row.is_empty() {
                // Solid or fully enclosed cell: decoupled identity row.
                active[cell] = false;
                row.push((cell, 1.0));
            }
            builder.push_row(&mut row);
        }
        let neg_laplacian = builder.build();
        let singular = grid.boundaries == Boundaries::Periodic;
        let precond = match (kind, singular) {
            (PoissonPreconditioner::BandedCholesky, false) => {
                Precond::Cholesky(BandedCholesky::new(&neg_laplacian)?)
            }
            _ => Precond::Jacobi(Jacobi::new(&neg_laplacian)),
        };
        Ok(Self {
            neg_laplacian,
            precond,
            singular,
            active,
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    /// Whether `cell` carries a pressure unknown (fluid cell with at least
    /// one free face).
    pub fn is_active(&self, cell: usize) -> bool {
        self.active[cell]
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// `L φ`, zero on inactive cells.
    pub fn apply_laplacian(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; phi.len()];
        self.neg_laplacian.matvec(phi, &mut out);
        for (o, a) in out.iter_mut().zip(&self.active) {
            *o = if *a { -*o } else { 0.0 };
        }
        out
    }

    /// The assembled `-L` including identity rows on inactive cells.
    pub fn matrix(&self) -> &CsrMatrix {
        &self.neg_laplacian
    }

    fn mean_over_active(&self, x: &[f64]) -> f64 {
        let (s, n) = x
            .iter()
            .zip(&self.active)
            .filter(|(_, a)| **a)
            .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
        if n == 0 {
            0.0
        } else {
            s / n as f64
        }
    }

    /// Solves `L φ = rhs` to relative residual `tol`. Inactive cells get zero.
    pub fn solve(&self, rhs: &[f64], tol: f64) -> Result<(Vec<f64>, SolveStats), SolverError> {
        let mut b: Vec<f64> = rhs
            .iter()
            .zip(&self.active)
            .map(|(r, a)| if *a { -r } else { 0.0 })
            .collect();
        if self.singular {
            let mean = self.mean_over_active(&b);
            for (x, a) in b.iter_mut().zip(&self.active) {
                if *a {
                    *x -= mean;
                }
            }
        }
        let mut phi = vec![0.0; b.len()];
        if norm2(&b) == 0.0 {
            return Ok((
                phi,
                SolveStats {
                    iterations: 0,
                    residual: 0.0,
                },
            ));
        }
        let stats = pcg(
            &self.neg_laplacian,
            &b,
            &mut phi,
            self.precond.get(),
            tol,
            self.max_iter,
        )?;
        if self.singular {
            let mean = self.mean_over_active(&phi);
            for (x, a) in phi.iter_mut().zip(&self.active) {
                if *a {
                    *x -= mean;
                }
            }
        }
        if phi.iter().any(|x| !x.is_finite()) {
            return Err(SolverError::NonFinite("pressure"));
        }
        Ok((phi, stats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Circle;

    #[test]
    fn zero_rhs_gives_zero_pressure() {
        let g = Grid::channel(12, 6, 1.0, 0.5, None).unwrap();
        let s = PoissonSolver::new(&g, PoissonPreconditioner::BandedCholesky).unwrap();
        let (phi, stats) = s.solve(&vec![0.0; g.n_cells()], 1e-10).unwrap();
        assert!(phi.iter().all(|x| *x == 0.0));
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn both_preconditioners_agree() {
        let c = Circle {
            center: (0.4, 0.25),
            radius: 0.09,
        };
        let g = Grid::channel(30, 12, 1.5, 0.5, Some(c)).unwrap();
        let rhs: Vec<f64> = (0..g.n_cells())
            .map(|k| if g.is_solid(k) { 0.0 } else { ((k * 13) % 7) as f64 - 3.0 })
            .collect();
        let a = PoissonSolver::new(&g, PoissonPreconditioner::Jacobi).unwrap();
        let b = PoissonSolver::new(&g, PoissonPreconditioner::BandedCholesky).unwrap();
        let (pa, sa) = a.solve(&rhs, 1e-12).unwrap();
        let (pb, sb) = b.solve(&rhs, 1e-12).unwrap();
        assert!(sb.iterations <= 3, "{}", sb.iterations);
        assert!(sa.iterations > sb.iterations);
        let scale = pb.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x - y).abs() <= 1e-9 * scale);
        }
        let lap = b.apply_laplacian(&pb);
        for k in 0..g.n_cells() {
            if !g.is_solid(k) {
                assert!((lap[k] - rhs[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn jacobi_iteration_limit_is_reported() {
        let g = Grid::channel(40, 10, 2.0, 0.5, None).unwrap();
        let mut s = PoissonSolver::new(&g, PoissonPreconditioner::Jacobi).unwrap();
        s.max_iter = 3;
        let rhs = vec![1.0; g.n_cells()];
        assert!(matches!(
            s.solve(&rhs, 1e-10),
            Err(SolverError::NotConverged { iterations: 3, .. })
        ));
    }
}
