//! Serial reference runs and Parareal experiments.
//!
//! The serial reference advances the fine propagator slice by slice, exactly
//! as the Parareal fine sweeps do, so that both see the same propagator and
//! Parareal reproduces the reference after `N_pr` iterations.

use std::path::Path;

use cylinder_bench::{observe, BenchError, BenchmarkSetup, ControlVolume, DefectReport, ObservableSeries, Observables};
use ns2d::{
    propagate_observed, Discretization, FlowState, InflowProfile, NoInflow, NsPropagator, Scheme, SolverOptions,
};
use timeparallel::{run_parareal, PararealOptions, TimeDomain};

use crate::checkpoint::save_checkpoint;
use crate::config::RunConfig;
use crate::error::HarnessError;
use crate::output::{self, ObservablesCsv};

/// Setup, discretization and inflow shared by all runs of one configuration.
pub struct Context {
    pub config: RunConfig,
    pub setup: BenchmarkSetup,
    pub disc: Discretization,
    pub domain: TimeDomain,
}

impl Context {
    pub fn new(config: &RunConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let setup = BenchmarkSetup::schafer_turek(config.nu).map_err(HarnessError::Setup)?;
        let grid = setup.grid(config.nx, config.ny).map_err(HarnessError::Setup)?;
        ControlVolume::around_cylinder(&setup, &grid).map_err(HarnessError::Setup)?;
        let disc = Discretization::new(grid, SolverOptions::default())?;
        let domain = TimeDomain::new(0.0, config.t_end, config.n_slices)
            .map_err(|e| HarnessError::Setup(BenchError::Setup(e.to_string())))?;
        Ok(Self {
            config: config.clone(),
            setup,
            disc,
            domain,
        })
    }

    pub fn inflow(&self) -> &dyn InflowProfile {
        if self.config.inflow {
            &self.setup
        } else {
            &NoInflow
        }
    }

    pub fn initial_state(&self) -> FlowState {
        FlowState::zeros(&self.disc.grid, 0.0)
    }

    pub fn coarse(&self) -> NsPropagator<'_> {
        NsPropagator {
            disc: &self.disc,
            scheme: Scheme::new(self.config.scheme_coarse, self.config.coarse_steps_per_slice()),
            params: self.setup.fluid(),
            inflow: self.inflow(),
        }
    }

    pub fn fine(&self) -> NsPropagator<'_> {
        NsPropagator {
            disc: &self.disc,
            scheme: Scheme::new(self.config.scheme_fine, self.config.fine_steps_per_slice()),
            params: self.setup.fluid(),
            inflow: self.inflow(),
        }
    }

    /// Observables of a state. The Reynolds number is zero when the inlet
    /// is closed.
    pub fn observe(&self, state: &FlowState) -> Result<Observables, HarnessError> {
        let mut o = observe(state, &self.setup, &self.disc.grid)
            .map_err(|source| HarnessError::Observables { t: state.t, source })?;
        if !self.config.inflow {
            o.r_d = 0.0;
        }
        Ok(o)
    }
}

#[derive(Debug, Clone)]
pub struct SerialOutput {
    /// Observables after every fine step, starting with the initial state.
    pub series: ObservableSeries,
    /// Observables at the slice ends `t^n`, `n = 1..=N_pr`.
    pub boundaries: Vec<Observables>,
    /// States at `t^n`, `n = 0..=N_pr`.
    pub states: Vec<FlowState>,
}

fn serial_pass(ctx: &Context, mut csv: Option<&mut ObservablesCsv>) -> Result<SerialOutput, HarnessError> {
    let fine = ctx.fine();
    let mut series = ObservableSeries::new();
    let mut states = vec![ctx.initial_state()];
    let first = ctx.observe(&states[0])?;
    series.push(&first);
    if let Some(c) = csv.as_deref_mut() {
        c.push(&first)?;
    }
    let mut boundaries = Vec::with_capacity(ctx.domain.n_slices());
    for j in 0..ctx.domain.n_slices() {
        let (t0, t1) = (ctx.domain.boundary(j), ctx.domain.boundary(j + 1));
        let mut failure: Option<HarnessError> = None;
        let mut last = None;
        let result = propagate_observed(
            &ctx.disc,
            fine.scheme,
            &states[j],
            t0,
            t1,
            &fine.params,
            fine.inflow,
            &mut |s| {
                if failure.is_some() {
                    return;
                }
                let row = ctx.observe(s).and_then(|o| {
                    if let Some(c) = csv.as_deref_mut() {
                        c.push(&o)?;
                    }
                    Ok(o)
                });
                match row {
                    Ok(o) => {
                        series.push(&o);
                        last = Some(o);
                    }
                    Err(e) => failure = Some(e),
                }
            },
        );
        let outcome = match (result, failure) {
            (Err(source), _) => Err(HarnessError::Serial { slice: j, source }),
            (Ok(_), Some(e)) => Err(e),
            (Ok(state), None) => Ok(state),
        };
        match outcome {
            Ok(state) => {
                boundaries.push(match last {
                    Some(o) if o.t == state.t => o,
                    _ => ctx.observe(&state)?,
                });
                states.push(state);
            }
            Err(e) => {
                if let Some(c) = csv {
                    c.flush()?;
                }
                return Err(e);
            }
        }
    }
    if let Some(c) = csv {
        c.flush()?;
    }
    Ok(SerialOutput {
        series,
        boundaries,
        states,
    })
}

fn prepare_out_dir(config: &RunConfig) -> Result<(), HarnessError> {
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    let path = dir.join("run.cfg");
    let text = format!("# {}\n{}", config.header(), config.to_config_text());
    std::fs::write(&path, text).map_err(HarnessError::io(path))
}

fn write_checkpoints(dir: &Path, states: &[FlowState]) -> Result<(), HarnessError> {
    let dir = dir.join("checkpoints");
    std::fs::create_dir_all(&dir).map_err(HarnessError::io(&dir))?;
    for (n, s) in states.iter().enumerate() {
        save_checkpoint(s, &dir.join(format!("serial_{n:03}.chk")))?;
    }
    Ok(())
}

fn serial_with_outputs(ctx: &Context) -> Result<SerialOutput, HarnessError> {
    let dir = &ctx.config.out_dir;
    prepare_out_dir(&ctx.config)?;
    let mut csv = ObservablesCsv::create(&dir.join(output::OBSERVABLES_CSV))?;
    let serial = serial_pass(ctx, Some(&mut csv))?;
    output::write_reference_boundaries(&dir.join(output::REFERENCE_BOUNDARIES_CSV), &serial.boundaries)?;
    output::write_profile_charts(dir, &serial.series)?;
    if ctx.config.checkpoints {
        write_checkpoints(dir, &serial.states)?;
    }
    Ok(serial)
}

/// Runs the fine propagator serially over all slices and writes
/// `observables.csv`, the slice-end observables and, if enabled, checkpoints.
pub fn run_serial(config: &RunConfig) -> Result<SerialOutput, HarnessError> {
    run_serial_in(&Context::new(config)?)
}

/// [`run_serial`] on a prepared context, e.g. with non-default solver options.
pub fn run_serial_in(ctx: &Context) -> Result<SerialOutput, HarnessError> {
    serial_with_outputs(ctx)
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub serial: SerialOutput,
    /// Slice-end observables of every Parareal iterate.
    pub iterates: Vec<(usize, Vec<Observables>)>,
    pub report: DefectReport,
    /// Relative state change between successive iterates.
    pub changes: Vec<f64>,
    pub converged_at: Option<usize>,
    pub final_states: Vec<FlowState>,
}

/// Serial reference followed by Parareal; writes the defect of every
/// iterate to `convergence.csv`.
pub fn run_parareal_experiment(config: &RunConfig) -> Result<ExperimentOutput, HarnessError> {
    let ctx = Context::new(config)?;
    let serial = serial_with_outputs(&ctx)?;
    let options = PararealOptions {
        k_max: config.k_max(),
        tol: config.tol,
        store_iterates: true,
        schedule: config.schedule,
    };
    let run = run_parareal(&serial.states[0], &ctx.domain, &ctx.coarse(), &ctx.fine(), options)?;
    let mut iterates = Vec::new();
    for k in run.stored_iterations() {
        let states = run.iterate(k).expect("stored iterate");
        let obs = states[1..].iter().map(|s| ctx.observe(s)).collect::<Result<Vec<_>, _>>()?;
        iterates.push((k, obs));
    }
    let report = DefectReport::from_boundaries(&serial.boundaries, &iterates).map_err(HarnessError::Defect)?;
    let dir = &config.out_dir;
    output::write_convergence(&dir.join(output::CONVERGENCE_CSV), &report)?;
    output::write_parareal_boundaries(&dir.join(output::PARAREAL_BOUNDARIES_CSV), &iterates)?;
    output::write_convergence_chart(dir, &report)?;
    Ok(ExperimentOutput {
        serial,
        iterates,
        report,
        changes: run.changes.clone(),
        converged_at: run.converged_at,
        final_states: run.final_states().to_vec(),
    })
}
