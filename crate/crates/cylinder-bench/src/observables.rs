use ns2d::{FlowState, Grid};

use crate::error::BenchError;
use crate::forces::{coefficients, compute_forces, pressure_probes};
use crate::setup::BenchmarkSetup;

/// Observables of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub t: f64,
    pub f_dr: f64,
    pub f_li: f64,
    pub c_dr: f64,
    pub c_li: f64,
    pub p_fr: f64,
    pub p_en: f64,
    pub delta_p: f64,
    pub r_d: f64,
}

pub fn observe(state: &FlowState, setup: &BenchmarkSetup, grid: &Grid) -> Result<Observables, BenchError> {
    let (f_dr, f_li) = compute_forces(state, setup, grid)?;
    let (c_dr, c_li) = coefficients(f_dr, f_li, setup);
    let (p_fr, p_en) = pressure_probes(state, setup, grid)?;
    Ok(Observables {
        t: state.t,
        f_dr,
        f_li,
        c_dr,
        c_li,
        p_fr,
        p_en,
        delta_p: p_fr - p_en,
        r_d: setup.reynolds(state.t),
    })
}

/// Quantities compared between Parareal and the serial reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Drag,
    Lift,
    Pressure,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::Drag, Quantity::Lift, Quantity::Pressure];

    pub fn label(self) -> &'static str {
        match self {
            Quantity::Drag => "dr",
            Quantity::Lift => "li",
            Quantity::Pressure => "p",
        }
    }

    /// `C_dr`, `C_li` or `Δp`.
    pub fn value(self, o: &Observables) -> f64 {
        match self {
            Quantity::Drag => o.c_dr,
            Quantity::Lift => o.c_li,
            Quantity::Pressure => o.delta_p,
        }
    }
}

/// Time series of observables. All columns share the time stamps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub c_dr: Vec<f64>,
    pub c_li: Vec<f64>,
    pub delta_p: Vec<f64>,
    pub f_dr: Vec<f64>,
    pub f_li: Vec<f64>,
    pub p_fr: Vec<f64>,
    pub p_en: Vec<f64>,
    pub r_d: Vec<f64>,
}

impl ObservableSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, o: &Observables) {
        self.times.push(o.t);
        self.c_dr.push(o.c_dr);
        self.c_li.push(o.c_li);
        self.delta_p.push(o.delta_p);
        self.f_dr.push(o.f_dr);
        self.f_li.push(o.f_li);
        self.p_fr.push(o.p_fr);
        self.p_en.push(o.p_en);
        self.r_d.push(o.r_d);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn get(&self, k: usize) -> Observables {
        Observables {
            t: self.times[k],
            f_dr: self.f_dr[k],
            f_li: self.f_li[k],
            c_dr: self.c_dr[k],
            c_li: self.c_li[k],
            p_fr: self.p_fr[k],
            p_en: self.p_en[k],
            delta_p: self.delta_p[k],
            r_d: self.r_d[k],
        }
    }

    pub fn quantity(&self, q: Quantity) -> &[f64] {
        match q {
            Quantity::Drag => &self.c_dr,
            Quantity::Lift => &self.c_li,
            Quantity::Pressure => &self.delta_p,
        }
    }
}

impl FromIterator<Observables> for ObservableSeries {
    fn from_iter<I: IntoIterator<Item = Observables>>(iter: I) -> Self {
        let mut s = Self::new();
        for o in iter {
            s.push(&o);
        }
        s
    }
}

/// `‖u‖_ti = sqrt((span/N) Σ |u(tⁿ)|²)` over values at the `N` slice ends.
pub fn time_norm(values: &[f64], span: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let sum: f64 = values.iter().map(|x| x * x).sum();
    (span / values.len() as f64 * sum).sqrt()
}

/// `‖pa - fi‖_ti / ‖fi‖_ti` over `[0, 8]`.
pub fn error_norm(parareal: &[f64], reference: &[f64]) -> Result<f64, BenchError> {
    if parareal.len() != reference.len() {
        return Err(BenchError::LengthMismatch {
            parareal: parareal.len(),
            reference: reference.len(),
        });
    }
    if reference.is_empty() {
        return Err(BenchError::Empty);
    }
    const SPAN: f64 = 8.0;
    let diff: Vec<f64> = parareal.iter().zip(reference).map(|(a, b)| a - b).collect();
    let denom = time_norm(reference, SPAN);
    if denom == 0.0 {
        return Err(BenchError::UndefinedReference);
    }
    Ok(time_norm(&diff, SPAN) / denom)
}

/// Relative defect of every Parareal iterate, per quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport {
    /// Iteration number of each entry.
    pub iterations: Vec<usize>,
    pub dr: Vec<f64>,
    pub li: Vec<f64>,
    pub p: Vec<f64>,
}

impl DefectReport {
    /// `reference` and each iterate hold the observables at the slice ends.
    pub fn from_boundaries(
        reference: &[Observables],
        iterates: &[(usize, Vec<Observables>)],
    ) -> Result<Self, BenchError> {
        let mut report = Self {
            iterations: Vec::with_capacity(iterates.len()),
            dr: Vec::new(),
            li: Vec::new(),
            p: Vec::new(),
        };
        let fine: Vec<Vec<f64>> = Quantity::ALL
            .iter()
            .map(|q| reference.iter().map(|o| q.value(o)).collect())
            .collect();
        for (k, iterate) in iterates {
            report.iterations.push(*k);
            for (q, fi) in Quantity::ALL.iter().zip(&fine) {
                let pa: Vec<f64> = iterate.iter().map(|o| q.value(o)).collect();
                let e = error_norm(&pa, fi)?;
                match q {
                    Quantity::Drag => report.dr.push(e),
                    Quantity::Lift => report.li.push(e),
                    Quantity::Pressure => report.p.push(e),
                }
            }
        }
        Ok(report)
    }

    pub fn get(&self, q: Quantity) -> &[f64] {
        match q {
            Quantity::Drag => &self.dr,
            Quantity::Lift => &self.li,
            Quantity::Pressure => &self.p,
        }
    }

    /// First iteration at which all quantities are at or below `threshold`.
    pub fn converged_at(&self, threshold: f64) -> Option<usize> {
        (0..self.iterations.len())
            .find(|&n| Quantity::ALL.iter().all(|q| self.get(*q)[n] <= threshold))
            .map(|n| self.iterations[n])
    }
}
