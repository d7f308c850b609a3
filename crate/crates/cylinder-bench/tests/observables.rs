use cylinder_bench::{
    compute_forces, observe, pressure_difference, BenchError, BenchmarkSetup, ControlVolume, DefectReport,
    ObservableSeries, Quantity, DEFAULT_GRID, REDUCED_GRID,
};
use ns2d::{propagate, Component, Discretization, FaceKind, FlowState, Grid, Method, Scheme, SolverOptions};
use proptest::prelude::*;

/// Cylinder on the channel axis, so the grid is mirror symmetric about it.
fn centred() -> (BenchmarkSetup, Grid) {
    let s = BenchmarkSetup::with_geometry(0.01, 2.2, (0.2, 0.205)).unwrap();
    let g = s.grid(REDUCED_GRID.0, REDUCED_GRID.1).unwrap();
    (s, g)
}

/// Values on free faces and fluid cells, zero elsewhere.
fn fill(grid: &Grid, seed: &[f64]) -> FlowState {
    let mut s = FlowState::zeros(grid, 1.3);
    let mut k = 0;
    let mut next = || {
        k += 1;
        seed[k % seed.len()] * (1.0 + 0.37 * (k as f64).sin())
    };
    for c in [Component::U, Component::V] {
        let kinds = grid.faces(c).kind.clone();
        for (x, kind) in s.field_mut(c).iter_mut().zip(kinds) {
            if kind == FaceKind::Free {
                *x = next();
            }
        }
    }
    for cell in 0..grid.n_cells() {
        if !grid.is_solid(cell) {
            s.p[cell] = next();
        }
    }
    s
}

fn mirror(grid: &Grid, s: &FlowState) -> FlowState {
    let ny = grid.ny;
    let mut m = s.clone();
    let fu = grid.faces(Component::U);
    for i in 0..fu.nx {
        for j in 0..ny {
            m.u[fu.index(i, j)] = s.u[fu.index(i, ny - 1 - j)];
        }
    }
    let fv = grid.faces(Component::V);
    for i in 0..fv.nx {
        for j in 0..=ny {
            m.v[fv.index(i, j)] = -s.v[fv.index(i, ny - j)];
        }
    }
    for i in 0..grid.nx {
        for j in 0..ny {
            m.p[grid.cell(i, j)] = s.p[grid.cell(i, ny - 1 - j)];
        }
    }
    m
}

#[test]
fn zero_flow_has_no_forces() {
    let s = BenchmarkSetup::schafer_turek(0.001).unwrap();
    let g = s.grid(REDUCED_GRID.0, REDUCED_GRID.1).unwrap();
    let state = FlowState::zeros(&g, 0.0);
    assert_eq!(compute_forces(&state, &s, &g).unwrap(), (0.0, 0.0));
}

#[test]
fn symmetric_flow_has_no_lift() {
    let (s, g) = centred();
    let a = fill(&g, &[0.8, -0.3, 1.1, 0.05, -0.6]);
    let b = mirror(&g, &a);
    let mut sym = a.clone();
    for (x, y) in sym.u.iter_mut().zip(&b.u) {
        *x = 0.5 * (*x + y);
    }
    for (x, y) in sym.v.iter_mut().zip(&b.v) {
        *x = 0.5 * (*x + y);
    }
    for (x, y) in sym.p.iter_mut().zip(&b.p) {
        *x = 0.5 * (*x + y);
    }
    let (f_dr, f_li) = compute_forces(&sym, &s, &g).unwrap();
    assert!(f_dr.abs() > 1e-3);
    assert!(f_li.abs() <= 1e-10 * f_dr.abs().max(1.0), "{f_li}");
}

#[test]
fn control_volume_must_avoid_the_cylinder() {
    let s = BenchmarkSetup::schafer_turek(0.1).unwrap();
    let g = s.grid(REDUCED_GRID.0, REDUCED_GRID.1).unwrap();
    let cv = ControlVolume::around_cylinder(&s, &g).unwrap();
    // Cuts through the cylinder.
    assert!(matches!(
        ControlVolume::new(&g, cv.i0, (cv.i0 + cv.i1) / 2, cv.j0, cv.j1),
        Err(BenchError::ControlVolume(_))
    ));
    // Edge touching the channel wall.
    assert!(matches!(
        ControlVolume::new(&g, cv.i0, cv.i1, 0, cv.j1),
        Err(BenchError::ControlVolume(_))
    ));
    assert!(ControlVolume::new(&g, cv.i0, cv.i1 + 2, cv.j0 - 1, cv.j1).is_ok());
}

#[test]
fn pressure_difference_examples() {
    let s = BenchmarkSetup::schafer_turek(0.001).unwrap();
    let g = s.grid(DEFAULT_GRID.0, DEFAULT_GRID.1).unwrap();
    let mut state = FlowState::zeros(&g, 4.0);
    state.p.iter_mut().for_each(|p| *p = 0.37);
    assert!(pressure_difference(&state, &s, &g).unwrap().abs() < 1e-15);
    for i in 0..g.nx {
        for j in 0..g.ny {
            state.p[g.cell(i, j)] = g.cell_center(i, j).0;
        }
    }
    let dp = pressure_difference(&state, &s, &g).unwrap();
    assert!((dp + 0.1).abs() < 1e-12, "{dp}");
}

#[test]
fn force_estimate_does_not_depend_on_the_control_volume() {
    let s = BenchmarkSetup::schafer_turek(0.1).unwrap();
    let g = s.grid(REDUCED_GRID.0, REDUCED_GRID.1).unwrap();
    let disc = Discretization::new(g, SolverOptions::default()).unwrap();
    let start = FlowState::zeros(&disc.grid, 0.0);
    let state = propagate(&disc, Scheme::new(Method::ImplicitEuler, 8), &start, 0.0, 2.0, &s.fluid(), &s).unwrap();
    let g = &disc.grid;
    let small = ControlVolume::around_cylinder(&s, g).unwrap();
    let large = ControlVolume::new(g, small.i0 - 1, small.i1 + 3, small.j0 - 1, small.j1 + 1).unwrap();
    let (a, b) = (small.forces(&state, &s, g).unwrap(), large.forces(&state, &s, g).unwrap());
    assert!(a.0 > 0.0);
    assert!((a.0 - b.0).abs() < 0.01 * a.0, "{a:?} vs {b:?}");
    assert!((a.1 - b.1).abs() < 0.01 * a.0, "{a:?} vs {b:?}");
}

#[test]
fn lift_is_small_in_the_stokes_regime() {
    let s = BenchmarkSetup::schafer_turek(0.1).unwrap();
    let g = s.grid(DEFAULT_GRID.0, DEFAULT_GRID.1).unwrap();
    let disc = Discretization::new(g, SolverOptions::default()).unwrap();
    let start = FlowState::zeros(&disc.grid, 0.0);
    let state = propagate(&disc, Scheme::new(Method::ImplicitEuler, 8), &start, 0.0, 4.0, &s.fluid(), &s).unwrap();
    let o = observe(&state, &s, &disc.grid).unwrap();
    assert!(o.f_dr > 0.0);
    assert!(o.f_li.abs() < 0.05 * o.f_dr, "{o:?}");
    assert!(o.delta_p > 0.0);
    assert!((o.r_d - 1.0).abs() < 1e-12);
}

#[test]
fn series_and_defects() {
    let s = BenchmarkSetup::schafer_turek(0.1).unwrap();
    let g = s.grid(REDUCED_GRID.0, REDUCED_GRID.1).unwrap();
    let reference: Vec<_> = (1..=4)
        .map(|n| {
            let mut st = fill(&g, &[0.2 * n as f64, -0.1, 0.4]);
            st.t = 2.0 * n as f64;
            observe(&st, &s, &g).unwrap()
        })
        .collect();
    let series: ObservableSeries = reference.iter().copied().collect();
    assert_eq!(series.len(), 4);
    for k in 0..4 {
        assert_eq!(series.get(k), reference[k]);
        let t = series.times[k];
        let expected = (std::f64::consts::PI * t / 8.0).sin() * s.d / s.nu;
        assert!((series.r_d[k] - expected).abs() < 1e-12);
    }
    let mut perturbed = reference.clone();
    perturbed[1].c_li += 0.5;
    let report = DefectReport::from_boundaries(&reference, &[(0, perturbed), (1, reference.clone())]).unwrap();
    assert_eq!(report.iterations, vec![0, 1]);
    assert_eq!(report.get(Quantity::Drag), &[0.0, 0.0]);
    assert!(report.li[0] > 0.0 && report.li[1] == 0.0);
    assert_eq!(report.converged_at(1e-10), Some(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mirroring_negates_lift(seed in prop::collection::vec(-2.0..2.0_f64, 5..11)) {
        let (s, g) = centred();
        let a = fill(&g, &seed);
        let (dr, li) = compute_forces(&a, &s, &g).unwrap();
        let (mdr, mli) = compute_forces(&mirror(&g, &a), &s, &g).unwrap();
        let scale = dr.abs().max(li.abs()).max(1e-12);
        prop_assert!((dr - mdr).abs() <= 1e-10 * scale, "{} vs {}", dr, mdr);
        prop_assert!((li + mli).abs() <= 1e-10 * scale, "{} vs {}", li, mli);
    }
}
