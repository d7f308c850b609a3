use rayon::prelude::*;

use crate::{PararealError, PararealState, Propagator, TimeDomain};

/// How the fine propagations of one iteration are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Fine propagations run concurrently on the rayon pool.
    #[default]
    Parallel,
    /// Fine propagations run one after the other, in slice order.
    Serial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PararealOptions {
    /// Maximum number of correction iterations.
    pub k_max: usize,
    /// Stop once the max-over-boundaries relative state change between two
    /// successive iterates falls below this value. Zero disables the test.
    pub tol: f64,
    /// Keep every iterate. When false only the latest one is retained.
    pub store_iterates: bool,
    pub schedule: Schedule,
}

impl Default for PararealOptions {
    fn default() -> Self {
        Self {
            k_max: 10,
            tol: 1e-12,
            store_iterates: true,
            schedule: Schedule::Parallel,
        }
    }
}

/// Record of a Parareal run.
#[derive(Debug, Clone)]
pub struct PararealRun<S> {
    pub domain: TimeDomain,
    pub options: PararealOptions,
    history: Vec<Vec<S>>,
    last_iteration: usize,
    /// `changes[k - 1]` is the relative change between iterates `k` and `k - 1`.
    pub changes: Vec<f64>,
    /// First iteration whose change fell below `options.tol`.
    pub converged_at: Option<usize>,
}

impl<S> PararealRun<S> {
    /// Index of the last computed iterate.
    pub fn last_iteration(&self) -> usize {
        self.last_iteration
    }

    /// Boundary states `u^k_j`, `j = 0..=N_pr`, if iterate `k` was retained.
    pub fn iterate(&self, k: usize) -> Option<&[S]> {
        if self.options.store_iterates {
            self.history.get(k).map(Vec::as_slice)
        } else if k == self.last_iteration {
            self.history.last().map(Vec::as_slice)
        } else {
            None
        }
    }

    pub fn final_states(&self) -> &[S] {
        self.history.last().expect("a run always holds at least one iterate")
    }

    /// Iterations that are available through [`PararealRun::iterate`].
    pub fn stored_iterations(&self) -> Vec<usize> {
        if self.options.store_iterates {
            (0..=self.last_iteration).collect()
        } else {
            vec![self.last_iteration]
        }
    }
}

fn propagate_slice<S, P>(
    prop: &P,
    stage: &'static str,
    state: &S,
    domain: &TimeDomain,
    slice: usize,
    iteration: Option<usize>,
) -> Result<S, PararealError>
where
    P: Propagator<S>,
{
    prop.propagate(state, domain.boundary(slice), domain.boundary(slice + 1))
        .map_err(|e| PararealError::Propagation {
            stage,
            slice,
            iteration,
            source: Box::new(e),
        })
}

/// Iterate zero: `u^0_0 = ic`, `u^0_{j+1} = C(u^0_j)`.
pub fn initial_coarse_sweep<S, C>(
    ic: &S,
    domain: &TimeDomain,
    coarse: &C,
) -> Result<Vec<S>, PararealError>
where
    S: PararealState,
    C: Propagator<S>,
{
    let mut states = Vec::with_capacity(domain.n_slices() + 1);
    states.push(ic.clone());
    for j in 0..domain.n_slices() {
        let next = propagate_slice(coarse, "coarse", &states[j], domain, j, Some(0))?;
        states.push(next);
    }
    Ok(states)
}

/// The fine solution at every slice boundary, from one uninterrupted serial sweep.
pub fn serial_reference<S, F>(ic: &S, domain: &TimeDomain, fine: &F) -> Result<Vec<S>, PararealError>
where
    S: Clone,
    F: Propagator<S>,
{
    let mut states = Vec::with_capacity(domain.n_slices() + 1);
    states.push(ic.clone());
    for j in 0..domain.n_slices() {
        let next = propagate_slice(fine, "fine", &states[j], domain, j, None)?;
        states.push(next);
    }
    Ok(states)
}

fn fine_sweep<S, F>(
    fine: &F,
    states: &[S],
    domain: &TimeDomain,
    first: usize,
    iteration: usize,
    schedule: Schedule,
) -> Result<Vec<S>, PararealError>
where
    S: PararealState,
    F: Propagator<S>,
{
    let n = domain.n_slices();
    let run = |j: usize| propagate_slice(fine, "fine", &states[j], domain, j, Some(iteration));
    match schedule {
        Schedule::Parallel => (first..n).into_par_iter().map(run).collect(),
        Schedule::Serial => (first..n).map(run).collect(),
    }
}

/// Runs the Parareal iteration `u^{k+1}_{j+1} = C(u^{k+1}_j) + F(u^k_j) - C(u^k_j)`.
///
/// Iteration `k + 1` uses the fine propagations of iterate `k`, which are
/// independent per slice; the coarse sweep and the update are sequential in `j`.
///
/// Boundary states `u^k_j` with `j ≤ k` no longer change: their inputs are
/// bit-identical to those of the previous iterate, and propagators are pure.
/// Those slices are copied instead of being propagated again, which leaves
/// the result unchanged and skips about half of the work.
pub fn run_parareal<S, C, F>(
    ic: &S,
    domain: &TimeDomain,
    coarse: &C,
    fine: &F,
    options: PararealOptions,
) -> Result<PararealRun<S>, PararealError>
where
    S: PararealState,
    C: Propagator<S>,
    F: Propagator<S>,
{
    if options.k_max == 0 {
        return Err(PararealError::Options("k_max must be at least 1".into()));
    }
    if !(options.tol >= 0.0) {
        return Err(PararealError::Options(format!(
            "tol must be non-negative, got {}",
            options.tol
        )));
    }

    let n = domain.n_slices();
    let mut current = initial_coarse_sweep(ic, domain, coarse)?;
    // C(u^k_j) for the current iterate k, j = 0..n.
    let mut coarse_old: Vec<S> = current[1..].to_vec();

    let mut history = vec![current.clone()];
    let mut changes = Vec::new();
    let mut converged_at = None;
    let mut last_iteration = 0;

    for k in 0..options.k_max {
        // F(u^k_j) for j >= k, stored at j - k.
        let first = k.min(n);
        let fine_old = fine_sweep(fine, &current, domain, first, k, options.schedule)?;

        let mut next = Vec::with_capacity(n + 1);
        next.push(ic.clone());
        let mut coarse_new = Vec::with_capacity(n);
        for j in 0..n {
            if j < first {
                next.push(current[j + 1].clone());
                coarse_new.push(coarse_old[j].clone());
                continue;
            }
            let c_new = if j == first {
                coarse_old[j].clone()
            } else {
                propagate_slice(coarse, "coarse", &next[j], domain, j, Some(k + 1))?
            };
            let u = S::parareal_update(&c_new, &fine_old[j - first], &coarse_old[j]).map_err(|e| {
                PararealError::Update {
                    slice: j,
                    iteration: k + 1,
                    source: Box::new(e),
                }
            })?;
            next.push(u);
            coarse_new.push(c_new);
        }

        let change = next
            .iter()
            .zip(&current)
            .map(|(a, b)| a.relative_change(b))
            .fold(0.0_f64, f64::max);
        changes.push(change);

        current = next;
        coarse_old = coarse_new;
        last_iteration = k + 1;
        if options.store_iterates {
            history.push(current.clone());
        } else {
            history.clear();
            history.push(current.clone());
        }

        if change < options.tol {
            converged_at = Some(k + 1);
            break;
        }
    }

    Ok(PararealRun {
        domain: *domain,
        options,
        history,
        last_iteration,
        changes,
        converged_at,
    })
}
