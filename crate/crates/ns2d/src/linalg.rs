//! Sparse linear algebra used by the momentum and pressure solves.

use crate::error::SolverError;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Row-by-row CSR assembly. Duplicate columns within a row are summed.
#[derive(Debug, Default)]
pub struct CsrBuilder {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrBuilder {
    pub fn with_capacity(rows: usize, nnz: usize) -> Self {
        let mut row_ptr = Vec::with_capacity(rows + 1);
        row_ptr.push(0);
        Self {
            row_ptr,
            cols: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
        }
    }

    pub fn push_row(&mut self, entries: &mut [(usize, f64)]) {
        if self.row_ptr.is_empty() {
            self.row_ptr.push(0);
        }
        entries.sort_unstable_by_key(|e| e.0);
        let start = self.cols.len();
        for &(c, v) in entries.iter() {
            if self.cols.len() > start && *self.cols.last().unwrap() == c {
                *self.vals.last_mut().unwrap() += v;
            } else {
                self.cols.push(c);
                self.vals.push(v);
            }
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn build(mut self) -> CsrMatrix {
        if self.row_ptr.is_empty() {
            self.row_ptr.push(0);
        }
        CsrMatrix {
            n: self.row_ptr.len() - 1,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
        }
    }
}

impl CsrMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map(|k| v[k]).unwrap_or(0.0)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    /// Entrywise sum of two matrices with the same number of rows.
    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.n, other.n, "row counts differ");
        let mut b = CsrBuilder::with_capacity(self.n, self.vals.len() + other.vals.len());
        let mut row = Vec::new();
        for i in 0..self.n {
            row.clear();
            for m in [self, other] {
                let (c, v) = m.row(i);
                row.extend(c.iter().copied().zip(v.iter().copied()));
            }
            b.push_row(&mut row);
        }
        b.build()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).0.iter().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (j, x) in c.iter().zip(v) {
                row[*j] = *x;
            }
        }
        d
    }
}

pub trait Preconditioner {
    /// `z = M⁻¹ r`.
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Self {
        Self {
            inv_diag: a
                .diagonal()
                .into_iter()
                .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        }
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((z, r), d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *z = r * d;
        }
    }
}

/// Incomplete LU with the sparsity pattern of the matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self, SolverError> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag_pos = vec![usize::MAX; n];
        for (i, d) in diag_pos.iter_mut().enumerate() {
            for k in lu.row_ptr[i]..lu.row_ptr[i + 1] {
                if lu.cols[k] == i {
                    *d = k;
                }
            }
            if *d == usize::MAX {
                return Err(SolverError::Breakdown {
                    solver: "ilu0",
                    iteration: i,
                });
            }
        }
        let mut pos_in_row = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in start..end {
                pos_in_row[lu.cols[k]] = k;
            }
            for k in start..end {
                let col = lu.cols[k];
                if col >= i {
                    break;
                }
                let pivot = lu.vals[diag_pos[col]];
                if pivot == 0.0 {
                    return Err(SolverError::Breakdown {
                        solver: "ilu0",
                        iteration: i,
                    });
                }
                let l = lu.vals[k] / pivot;
                lu.vals[k] = l;
                for m in diag_pos[col] + 1..lu.row_ptr[col + 1] {
                    let p = pos_in_row[lu.cols[m]];
                    if p != usize::MAX {
                        lu.vals[p] -= l * lu.vals[m];
                    }
                }
            }
            for k in start..end {
                pos_in_row[lu.cols[k]] = usize::MAX;
            }
        }
        Ok(Self { lu, diag_pos })
    }
}

impl Preconditioner for Ilu0 {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut s = r[i];
            for k in lu.row_ptr[i]..self.diag_pos[i] {
                s -= lu.vals[k] * z[lu.cols[k]];
            }
            z[i] = s;
        }
        for i in (0..lu.n).rev() {
            let mut s = z[i];
            for k in self.diag_pos[i] + 1..lu.row_ptr[i + 1] {
                s -= lu.vals[k] * z[lu.cols[k]];
            }
            z[i] = s / lu.vals[self.diag_pos[i]];
        }
    }
}

/// Cholesky factor of a symmetric positive definite band matrix.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    /// Row `i` holds `L[i][i - bw ..= i]` at offsets `0 ..= bw`.
    band: Vec<f64>,
}

impl BandedCholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self, SolverError> {
        let n = a.n();
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        for i in 0..n {
            let (c, v) = a.row(i);
            for (j, x) in c.iter().zip(v) {
                if *j <= i {
                    band[i * w + (j + bw - i)] = *x;
                }
            }
        }
        for i in 0..n {
            let jlo = i.saturating_sub(bw);
            for j in jlo..=i {
                let klo = jlo.max(j.saturating_sub(bw));
                let mut s = band[i * w + (j + bw - i)];
                for k in klo..j {
                    s -= band[i * w + (k + bw - i)] * band[j * w + (k + bw - j)];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(SolverError::Breakdown {
                            solver: "banded cholesky",
                            iteration: i,
                        });
                    }
                    band[i * w + bw] = s.sqrt();
                } else {
                    band[i * w + (j + bw - i)] = s / band[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, band })
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.band[i * w + (k + bw - i)] * x[k];
            }
            x[i] = s / self.band[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.band[k * w + (i + bw - k)] * x[k];
            }
            x[i] = s / self.band[i * w + bw];
        }
    }
}

impl Preconditioner for BandedCholesky {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.solve(r, z);
    }
}

/// LU factorization with partial pivoting of a general band matrix.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    /// Row `r` holds columns `r - kl ..= r + kl + ku` (room for pivoting fill).
    band: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn new(a: &CsrMatrix) -> Result<Self, SolverError> {
        let n = a.n();
        let (mut kl, mut ku) = (0, 0);
        for i in 0..n {
            for &j in a.row(i).0 {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        let w = 2 * kl + ku + 1;
        let mut band = vec![0.0; n * w];
        for i in 0..n {
            let (c, v) = a.row(i);
            for (j, x) in c.iter().zip(v) {
                band[i * w + (j + kl - i)] = *x;
            }
        }
        let at = |r: usize, c: usize| r * w + (c + kl - r);
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut piv = k;
            let mut best = band[at(k, k)].abs();
            for r in k + 1..=last_row {
                let x = band[at(r, k)].abs();
                if x > best {
                    best = x;
                    piv = r;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(SolverError::Breakdown {
                    solver: "banded lu",
                    iteration: k,
                });
            }
            pivots[k] = piv;
            if piv != k {
                for c in k..=last_col {
                    band.swap(at(k, c), at(piv, c));
                }
            }
            let d = band[at(k, k)];
            for r in k + 1..=last_row {
                let l = band[at(r, k)] / d;
                band[at(r, k)] = l;
                if l != 0.0 {
                    for c in k + 1..=last_col {
                        band[at(r, c)] -= l * band[at(k, c)];
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            band,
            pivots,
        })
    }

    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let w = 2 * kl + ku + 1;
        let at = |r: usize, c: usize| r * w + (c + kl - r);
        x.copy_from_slice(b);
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let xk = x[k];
            for r in k + 1..=(k + kl).min(n.saturating_sub(1)) {
                x[r] -= self.band[at(r, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.band[at(k, c)] * x[c];
            }
            x[k] = s / self.band[at(k, k)];
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final `‖b - Ax‖ / ‖b‖`.
    pub residual: f64,
}

/// Preconditioned conjugate gradients for symmetric positive definite `a`.
/// `x` holds the initial guess on entry.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    m: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats, SolverError> {
    let n = a.n();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut res = norm2(&r) / bnorm;
    let mut history = vec![res];
    if res <= tol {
        return Ok(SolveStats {
            iterations: 0,
            residual: res,
        });
    }
    let mut z = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap == 0.0 || !pap.is_finite() {
            return Err(SolverError::Breakdown {
                solver: "pcg",
                iteration: it,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm2(&r) / bnorm;
        history.push(res);
        if res <= tol {
            return Ok(SolveStats {
                iterations: it,
                residual: res,
            });
        }
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolverError::NotConverged {
        solver: "pcg",
        iterations: max_iter,
        residual: res,
        history,
    })
}

/// Preconditioned BiCGSTAB for general square `a`. `x` holds the initial
/// guess on entry.
pub fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    m: &dyn Preconditioner,
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats, SolverError> {
    let n = a.n();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut res = norm2(&r) / bnorm;
    let mut history = vec![res];
    if res <= tol {
        return Ok(SolveStats {
            iterations: 0,
            residual: res,
        });
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return Err(SolverError::Breakdown {
                solver: "bicgstab",
                iteration: it,
            });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        m.apply(&p, &mut y);
        a.matvec(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            return Err(SolverError::Breakdown {
                solver: "bicgstab",
                iteration: it,
            });
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let snorm = norm2(&s) / bnorm;
        if snorm <= tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            history.push(snorm);
            return Ok(SolveStats {
                iterations: it,
                residual: snorm,
            });
        }
        m.apply(&s, &mut z);
        a.matvec(&z, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(SolverError::Breakdown {
                solver: "bicgstab",
                iteration: it,
            });
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        res = norm2(&r) / bnorm;
        history.push(res);
        if !res.is_finite() {
            return Err(SolverError::NonFinite("bicgstab residual"));
        }
        if res <= tol {
            return Ok(SolveStats {
                iterations: it,
                residual: res,
            });
        }
        if omega == 0.0 {
            return Err(SolverError::Breakdown {
                solver: "bicgstab",
                iteration: it,
            });
        }
    }
    Err(SolverError::NotConverged {
        solver: "bicgstab",
        iterations: max_iter,
        residual: res,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1D Poisson-like SPD tridiagonal matrix with an extra long-range band.
    fn spd(n: usize, band: usize) -> CsrMatrix {
        let mut b = CsrBuilder::with_capacity(n, 5 * n);
        for i in 0..n {
            let mut row = vec![(i, 4.5)];
            if i > 0 {
                row.push((i - 1, -1.0));
            }
            if i + 1 < n {
                row.push((i + 1, -1.0));
            }
            if i >= band {
                row.push((i - band, -1.0));
            }
            if i + band < n {
                row.push((i + band, -1.0));
            }
            b.push_row(&mut row);
        }
        b.build()
    }

    fn nonsymmetric(n: usize) -> CsrMatrix {
        let mut b = CsrBuilder::with_capacity(n, 3 * n);
        for i in 0..n {
            let mut row = vec![(i, 3.0)];
            if i > 0 {
                row.push((i - 1, -1.7));
            }
            if i + 1 < n {
                row.push((i + 1, 0.6));
            }
            b.push_row(&mut row);
        }
        b.build()
    }

    fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; a.n()];
        a.matvec(x, &mut ax);
        let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
        norm2(&r) / norm2(b)
    }

    #[test]
    fn builder_merges_duplicates() {
        let mut b = CsrBuilder::with_capacity(1, 3);
        b.push_row(&mut [(0, 1.0), (0, 2.0), (1, 1.0)]);
        b.push_row(&mut [(1, 5.0)]);
        let a = b.build();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.bandwidth(), 1);
    }

    #[test]
    fn banded_cholesky_solves_exactly() {
        let a = spd(40, 6);
        let chol = BandedCholesky::new(&a).unwrap();
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut x = vec![0.0; 40];
        chol.solve(&b, &mut x);
        assert!(residual(&a, &x, &b) < 1e-14);
    }

    #[test]
    fn pcg_converges_with_jacobi() {
        let a = spd(60, 7);
        let b: Vec<f64> = (0..60).map(|i| 1.0 + (i % 5) as f64).collect();
        let mut x = vec![0.0; 60];
        let stats = pcg(&a, &b, &mut x, &Jacobi::new(&a), 1e-12, 500).unwrap();
        assert!(stats.residual <= 1e-12);
        assert!(residual(&a, &x, &b) <= 1e-12);
    }

    #[test]
    fn pcg_reports_history_on_failure() {
        let a = spd(60, 7);
        let b = vec![1.0; 60];
        let mut x = vec![0.0; 60];
        match pcg(&a, &b, &mut x, &Jacobi::new(&a), 1e-14, 2) {
            Err(SolverError::NotConverged { history, .. }) => assert_eq!(history.len(), 3),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn banded_lu_needs_pivoting() {
        // Saddle-point structure with zero diagonal entries.
        let mut b = CsrBuilder::with_capacity(4, 10);
        b.push_row(&mut [(0, 2.0), (2, 1.0)]);
        b.push_row(&mut [(1, 3.0), (2, -1.0), (3, 0.5)]);
        b.push_row(&mut [(0, 1.0), (1, -1.0)]);
        b.push_row(&mut [(1, 0.5), (2, 0.75)]);
        let a = b.build();
        let lu = BandedLu::new(&a).unwrap();
        let rhs = [1.0, -2.0, 0.5, 3.0];
        let mut x = [0.0; 4];
        lu.solve(&rhs, &mut x);
        assert!(residual(&a, &x, &rhs) < 1e-14);
        let big = nonsymmetric(50);
        let lu = BandedLu::new(&big).unwrap();
        let rhs: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; 50];
        lu.solve(&rhs, &mut x);
        assert!(residual(&big, &x, &rhs) < 1e-14);
    }

    #[test]
    fn banded_lu_rejects_singular() {
        let mut b = CsrBuilder::with_capacity(2, 2);
        b.push_row(&mut [(0, 1.0), (1, 2.0)]);
        b.push_row(&mut [(0, 2.0), (1, 4.0)]);
        assert!(BandedLu::new(&b.build()).is_err());
    }

    #[test]
    fn ilu0_is_exact_on_tridiagonal() {
        // No fill-in for a tridiagonal matrix, so ILU(0) is the exact LU.
        let a = nonsymmetric(30);
        let ilu = Ilu0::new(&a).unwrap();
        let b: Vec<f64> = (0..30).map(|i| (i as f64).cos()).collect();
        let mut x = vec![0.0; 30];
        ilu.apply(&b, &mut x);
        assert!(residual(&a, &x, &b) < 1e-14);
    }

    #[test]
    fn bicgstab_solves_nonsymmetric() {
        let a = nonsymmetric(200);
        let b: Vec<f64> = (0..200).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let mut x = vec![0.0; 200];
        bicgstab(&a, &b, &mut x, &Jacobi::new(&a), 1e-12, 500).unwrap();
        assert!(residual(&a, &x, &b) <= 1e-12);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = spd(10, 3);
        let mut x = vec![1.0; 10];
        pcg(&a, &[0.0; 10], &mut x, &Jacobi::new(&a), 1e-10, 10).unwrap();
        assert!(x.iter().all(|v| *v == 0.0));
    }
}
