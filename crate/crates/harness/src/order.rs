//! Temporal self-convergence study.
//!
//! Each method is run over `[0, t_end]` with `n, 2n, 4n, 8n` steps. Without
//! an exact solution, the error at step `dt` is estimated by the difference
//! between the runs at `dt` and `dt/2`; for a method of order `p` these
//! differences shrink by `2^p` per halving. The observed order is the
//! least-squares slope of `log(difference)` against `log(dt)`.

use std::fmt::Write as _;

use ns2d::{propagate, Method, Scheme};
use thiserror::Error;

use crate::config::RunConfig;
use crate::error::HarnessError;
use crate::experiment::Context;
use crate::output::{num, ORDER_CSV};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrderError {
    #[error("need at least two refinement levels, got {0}")]
    TooFewLevels(usize),
    #[error("{dts} step sizes but {differences} differences")]
    LengthMismatch { dts: usize, differences: usize },
    #[error("degenerate refinement: step size {0} appears twice")]
    Degenerate(f64),
    #[error("step sizes and differences must be positive and finite, got dt = {dt}, difference = {difference}")]
    NonPositive { dt: f64, difference: f64 },
}

/// Least-squares slope of `ln(difference)` over `ln(dt)`.
pub fn observed_order(dts: &[f64], differences: &[f64]) -> Result<f64, OrderError> {
    if dts.len() != differences.len() {
        return Err(OrderError::LengthMismatch {
            dts: dts.len(),
            differences: differences.len(),
        });
    }
    if dts.len() < 2 {
        return Err(OrderError::TooFewLevels(dts.len()));
    }
    for (&dt, &difference) in dts.iter().zip(differences) {
        if !(dt > 0.0 && dt.is_finite() && difference > 0.0 && difference.is_finite()) {
            return Err(OrderError::NonPositive { dt, difference });
        }
    }
    for (i, a) in dts.iter().enumerate() {
        if dts[i + 1..].contains(a) {
            return Err(OrderError::Degenerate(*a));
        }
    }
    let x: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = differences.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderRow {
    pub method: Method,
    /// Step counts of the runs, coarsest first.
    pub steps: Vec<usize>,
    /// Step sizes of the compared pairs.
    pub dts: Vec<f64>,
    /// Max-norm velocity difference between the runs at `dt` and `dt/2`.
    pub differences: Vec<f64>,
    pub order: f64,
}

impl OrderRow {
    /// Ratios of successive differences; `2^p` for order `p`.
    pub fn ratios(&self) -> Vec<f64> {
        self.differences.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderTable {
    pub rows: Vec<OrderRow>,
}

impl OrderTable {
    pub fn get(&self, method: Method) -> Option<&OrderRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("method,steps,dt,difference,observed_order\n");
        for r in &self.rows {
            for (k, (dt, e)) in r.dts.iter().zip(&r.differences).enumerate() {
                let _ = writeln!(s, "{},{},{},{},{}", r.method, r.steps[k], num(*dt), num(*e), num(r.order));
            }
        }
        s
    }
}

fn max_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

fn study(ctx: &Context, method: Method, base: usize) -> Result<OrderRow, HarnessError> {
    let t_end = ctx.config.t_end;
    let steps: Vec<usize> = (0..4).map(|k| base << k).collect();
    let start = ctx.initial_state();
    let params = ctx.setup.fluid();
    let finals = steps
        .iter()
        .map(|&n| propagate(&ctx.disc, Scheme::new(method, n), &start, 0.0, t_end, &params, ctx.inflow()))
        .collect::<Result<Vec<_>, _>>()?;
    let differences: Vec<f64> = finals
        .windows(2)
        .map(|w| max_difference(&w[0].u, &w[1].u).max(max_difference(&w[0].v, &w[1].v)))
        .collect();
    let dts: Vec<f64> = steps[..3].iter().map(|&n| t_end / n as f64).collect();
    let order = observed_order(&dts, &differences)?;
    Ok(OrderRow {
        method,
        steps,
        dts,
        differences,
        order,
    })
}

/// Observed temporal order of implicit Euler and the fractional-step scheme
/// on the configured case. Writes `order.csv`.
pub fn mms_order_study(config: &RunConfig) -> Result<OrderTable, HarnessError> {
    let ctx = Context::new(config)?;
    let rows = vec![
        study(&ctx, Method::ImplicitEuler, config.mms_steps_ie)?,
        study(&ctx, Method::FractionalStep, config.mms_steps_fs)?,
    ];
    let table = OrderTable { rows };
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    let path = dir.join(ORDER_CSV);
    std::fs::write(&path, table.to_csv()).map_err(HarnessError::io(path))?;
    Ok(table)
}
