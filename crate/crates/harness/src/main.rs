use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use harness::{load_config, mms_order_study, run_parareal_experiment, run_serial, HarnessError, Mode, RunConfig};

/// Parareal experiments on the flow-around-cylinder benchmark.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Configuration file (`key = value` lines). Defaults apply without one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the `mode` key.
    #[arg(long, value_parser = ["serial", "parareal", "mms"])]
    mode: Option<String>,
    /// Overrides the `out_dir` key.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure(cli: &Cli) -> Result<RunConfig, HarnessError> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &cli.mode {
        config.mode = m.parse::<Mode>().expect("validated by clap");
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    Ok(config)
}

fn run(config: &RunConfig) -> Result<(), HarnessError> {
    println!("# {}", config.header());
    match config.mode {
        Mode::Serial => {
            let out = run_serial(config)?;
            let last = out.series.get(out.series.len() - 1);
            println!(
                "serial run: {} samples, t = {}, c_dr = {:.6}, c_li = {:.6}, delta_p = {:.6}",
                out.series.len(),
                last.t,
                last.c_dr,
                last.c_li,
                last.delta_p
            );
        }
        Mode::Parareal => {
            let out = run_parareal_experiment(config)?;
            println!("iteration  E_dr         E_li         E_p");
            for (n, k) in out.report.iterations.iter().enumerate() {
                println!(
                    "{k:>9}  {:.5e}  {:.5e}  {:.5e}",
                    out.report.dr[n], out.report.li[n], out.report.p[n]
                );
            }
            match out.report.converged_at(1e-10) {
                Some(k) => println!("all quantities below 1e-10 after {k} iterations"),
                None => println!("not converged to 1e-10 within {} iterations", config.k_max()),
            }
        }
        Mode::Mms => {
            let table = mms_order_study(config)?;
            for r in &table.rows {
                println!("{}: observed order {:.3} (ratios {:?})", r.method, r.order, r.ratios());
            }
        }
    }
    println!("results written to {}", config.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure(&cli).and_then(|c| run(&c));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
