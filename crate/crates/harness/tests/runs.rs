use std::path::Path;

use cylinder_bench::BenchmarkSetup;
use harness::{
    load_checkpoint, parse_config, run_parareal_experiment, run_serial, run_serial_in, Context, HarnessError, RunConfig,
};
use ns2d::{Discretization, Method, SolverOptions};
use timeparallel::Schedule;

/// Short run on the reduced grid: four slices over [0, 2].
fn small(out: &Path) -> RunConfig {
    let mut c = parse_config("nx = 72\nny = 14\nt_end = 2\nn_coarse_total = 4\nn_fine_total = 8\ntol = 0\n").unwrap();
    c.out_dir = out.to_path_buf();
    c
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn outputs_are_byte_identical_across_runs_and_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    run_parareal_experiment(&small(&a)).unwrap();
    run_parareal_experiment(&small(&b)).unwrap();
    let mut serial = small(&c);
    serial.schedule = Schedule::Serial;
    run_parareal_experiment(&serial).unwrap();
    for name in ["observables.csv", "convergence.csv", "boundaries_reference.csv", "boundaries_parareal.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
        assert_eq!(read(&a, name), read(&c, name), "{name}");
    }
    assert!(read(&a, "observables.csv").starts_with("t,c_dr,c_li,delta_p,r_d\n"));
    assert!(read(&a, "convergence.csv").starts_with("quantity,iteration,error\n"));
    for svg in ["drag.svg", "lift.svg", "pressure.svg", "convergence.svg"] {
        assert!(read(&a, svg).starts_with("<svg"));
    }
}

#[test]
fn parareal_is_exact_after_as_many_iterations_as_slices() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_parareal_experiment(&small(dir.path())).unwrap();
    assert_eq!(out.report.iterations, vec![0, 1, 2, 3, 4]);
    for q in cylinder_bench::Quantity::ALL {
        assert!(out.report.get(q)[0] > 1e-8, "{q:?}: coarse start already exact?");
        assert!(out.report.get(q)[4] <= 1e-10, "{q:?}: {:?}", out.report.get(q));
    }
}

#[test]
fn identical_coarse_and_fine_converge_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(dir.path());
    c.n_coarse_total = c.n_fine_total;
    let out = run_parareal_experiment(&c).unwrap();
    for q in cylinder_bench::Quantity::ALL {
        let e = out.report.get(q);
        assert!(e[1] <= 1e-10, "{q:?}: {e:?}");
        assert!(e.windows(2).all(|w| w[1] <= w[0]), "{q:?}: {e:?}");
    }
    let csv = rows(&read(dir.path(), "convergence.csv"));
    for q in ["dr", "li", "p"] {
        let e: Vec<f64> = csv.iter().filter(|r| r[0] == q).map(|r| r[2].parse().unwrap()).collect();
        assert!(e.windows(2).all(|w| w[1] <= w[0]), "{q}: {e:?}");
    }
}

/// Relative defect recomputed from the persisted boundary observables.
fn recompute(reference: &[f64], iterate: &[f64]) -> f64 {
    let w = 8.0 / reference.len() as f64;
    let num: f64 = iterate.iter().zip(reference).map(|(a, b)| w * (a - b) * (a - b)).sum();
    let den: f64 = reference.iter().map(|b| w * b * b).sum();
    (num / den).sqrt()
}

#[test]
fn emitted_defects_match_the_boundary_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(dir.path());
    c.scheme_fine = Method::FractionalStep;
    run_parareal_experiment(&c).unwrap();
    let reference = rows(&read(dir.path(), "boundaries_reference.csv"));
    let parareal = rows(&read(dir.path(), "boundaries_parareal.csv"));
    let convergence = rows(&read(dir.path(), "convergence.csv"));
    assert_eq!(convergence.len(), 3 * 5);
    for row in &convergence {
        let col = match row[0].as_str() {
            "dr" => 3,
            "li" => 4,
            "p" => 5,
            q => panic!("unknown quantity {q}"),
        };
        let k = &row[1];
        let fi: Vec<f64> = reference.iter().map(|r| r[col - 1].parse().unwrap()).collect();
        let pa: Vec<f64> = parareal
            .iter()
            .filter(|r| &r[0] == k)
            .map(|r| r[col].parse().unwrap())
            .collect();
        assert_eq!(pa.len(), fi.len());
        let emitted: f64 = row[2].parse().unwrap();
        let expected = recompute(&fi, &pa);
        assert!(
            (emitted - expected).abs() <= 1e-14 * expected.max(f64::MIN_POSITIVE),
            "{row:?}: {expected}"
        );
    }
}

#[test]
fn closed_inlet_gives_all_zero_observables() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(dir.path());
    c.inflow = false;
    c.mode = harness::Mode::Serial;
    let out = run_serial(&c).unwrap();
    assert_eq!(out.series.len(), 9);
    for row in rows(&read(dir.path(), "observables.csv")) {
        for v in &row[1..] {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0, "{row:?}");
        }
    }
}

#[test]
fn serial_run_writes_loadable_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(dir.path());
    c.checkpoints = true;
    let out = run_serial(&c).unwrap();
    let grid = BenchmarkSetup::schafer_turek(c.nu).unwrap().grid(c.nx, c.ny).unwrap();
    for (n, s) in out.states.iter().enumerate() {
        let back = load_checkpoint(&dir.path().join(format!("checkpoints/serial_{n:03}.chk")), &grid).unwrap();
        assert_eq!(&back, s);
    }
    assert_eq!(out.boundaries.len(), 4);
    assert_eq!(out.boundaries[3].t, 2.0);
    assert_eq!(out.series.times.last(), Some(&2.0));
}

#[test]
fn solver_failure_keeps_the_rows_written_so_far() {
    let dir = tempfile::tempdir().unwrap();
    let c = small(dir.path());
    let mut ctx = Context::new(&c).unwrap();
    let options = SolverOptions {
        picard_max_sweeps: 1,
        ..SolverOptions::default()
    };
    ctx.disc = Discretization::new(ctx.disc.grid.clone(), options).unwrap();
    let err = run_serial_in(&ctx).unwrap_err();
    assert!(matches!(err, HarnessError::Serial { slice: 0, .. }), "{err}");
    assert_eq!(err.exit_code(), 3);
    let csv = read(dir.path(), "observables.csv");
    assert_eq!(csv.lines().count(), 2, "{csv}");
}
