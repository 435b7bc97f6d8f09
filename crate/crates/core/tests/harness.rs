use conserve::bench::{
    exact_bbm_soliton, exact_nls_soliton, fitted_order, locate_peak, parameter_sweep, phase_shift_error, relative_l2,
    restrict, run_case, BenchError, BenchmarkCase, CaseId, InitialData, Reference,
};
use conserve::claw::local_claw_residual_on_solution;
use conserve::grid::{FieldLevel, GridSpec};
use conserve::solver::{advance, SolverConfig};
use conserve::{Equation, SchemeSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fourth-order central difference of `f` at `x`.
fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
}

#[test]
fn bbm_soliton_peak_and_symmetry() {
    assert_eq!(exact_bbm_soliton(25.0, 0.0, 5.0, 25.0), 15.0);
    for xi in [0.3, 1.7, 4.0] {
        let t = 1.3;
        let centre = 25.0 - 5.0 * t;
        let (l, r) = (exact_bbm_soliton(centre - xi, t, 5.0, 25.0), exact_bbm_soliton(centre + xi, t, 5.0, 25.0));
        assert!((l - r).abs() <= 1e-13 * l);
    }
}

#[test]
fn bbm_soliton_solves_the_pde() {
    let (c, d) = (5.0, 25.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // Time derivatives pick up a factor c per order, hence the finer step.
    let (hx, ht) = (1e-2, 1e-3);
    for _ in 0..20 {
        let (x, t) = (rng.gen_range(10.0..40.0), rng.gen_range(0.0..5.0));
        let u = |x: f64, t: f64| exact_bbm_soliton(x, t, c, d);
        let ut = d1(|s| u(x, s), t, ht);
        let ux = d1(|y| u(y, t), x, hx);
        let uxxt = d1(|s| d2(|y| u(y, s), x, hx), t, ht);
        let r = ut - u(x, t) * ux - uxxt;
        assert!(r.abs() <= 1e-6, "residual {r:e} at ({x}, {t})");
    }
}

#[test]
fn nls_soliton_modulus_and_initial_data() {
    let (c, d) = (2.5, -5.0);
    for t in [0.0, 0.7, 2.0] {
        let (u, v) = exact_nls_soliton(d + 2.0 * c * t, t, c, d);
        assert!((u.hypot(v) - std::f64::consts::SQRT_2).abs() <= 1e-14);
    }
    for x in [-7.0, -5.0, 0.3] {
        let (u, v) = exact_nls_soliton(x, 0.0, c, d);
        let amp = std::f64::consts::SQRT_2 / (x - d).cosh();
        assert!((u - amp * (c * (x - d)).cos()).abs() <= 1e-15);
        assert!((v - amp * (c * (x - d)).sin()).abs() <= 1e-15);
    }
}

#[test]
fn nls_soliton_solves_the_pde() {
    let (c, d) = (2.5, -5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-3;
    for _ in 0..20 {
        let (x, t) = (rng.gen_range(-10.0..5.0), rng.gen_range(0.0..2.0));
        let u = |x: f64, t: f64| exact_nls_soliton(x, t, c, d).0;
        let v = |x: f64, t: f64| exact_nls_soliton(x, t, c, d).1;
        let s = u(x, t).powi(2) + v(x, t).powi(2);
        // Real and imaginary parts of iψ_t + ψ_xx + |ψ|²ψ.
        let re = -d1(|s| v(x, s), t, h) + d2(|y| u(y, t), x, h) + s * u(x, t);
        let im = d1(|s| u(x, s), t, h) + d2(|y| v(y, t), x, h) + s * v(x, t);
        assert!(re.abs().max(im.abs()) <= 1e-6, "residual ({re:e}, {im:e}) at ({x}, {t})");
    }
}

#[test]
fn standard_cases_flag_exact_solutions() {
    for id in CaseId::ALL {
        let case = BenchmarkCase::standard(id);
        assert_eq!(case.has_exact(), matches!(id, CaseId::BbmSoliton | CaseId::NlsSoliton));
        assert_eq!(case.reference_recipe().is_some(), !case.has_exact());
    }
}

#[test]
fn two_wave_initial_level_is_the_superposition() {
    let case = BenchmarkCase::standard(CaseId::BbmTwoWave);
    let grid = case.grid().unwrap();
    let level = case.initial_level(&grid);
    for i in (0..grid.m).step_by(37) {
        let x = grid.x(i);
        let want = exact_bbm_soliton(x, 0.0, 6.0, 40.0) + exact_bbm_soliton(x, 0.0, 2.0, 15.0);
        // Far tails come from the periodic image, below 1e-20.
        assert!((level.comp(0)[i] - want).abs() < 1e-15, "node {i}");
    }
}

#[test]
fn breather_initial_level() {
    let case = BenchmarkCase::standard(CaseId::NlsBreather);
    let grid = case.grid().unwrap();
    let level = case.initial_level(&grid);
    let x = grid.x(17);
    let want = (1.0 + 0.1 * (x / 2f64.sqrt()).cos()) / 2f64.sqrt();
    assert!((level.comp(0)[17] - want).abs() <= 1e-15);
    assert!(level.comp(1).iter().all(|&v| v == 0.0));
}

#[test]
fn relative_error_of_identical_levels_is_zero() {
    let case = BenchmarkCase::standard(CaseId::NlsSoliton);
    let grid = case.grid().unwrap();
    let exact = case.exact_level(&grid, 3).unwrap();
    assert_eq!(relative_l2(&exact, &exact).unwrap(), 0.0);
}

#[test]
fn restriction_picks_every_kth_node() {
    let fine = GridSpec::new(-1.0, 1.0, 40, 0.1, 1).unwrap();
    let coarse = GridSpec::new(-1.0, 1.0, 10, 0.1, 1).unwrap();
    let level = FieldLevel::sample(&fine, 1, |x| [x * x]);
    let r = restrict(&level, &fine, &coarse).unwrap();
    for i in 0..10 {
        assert!((r.comp(0)[i] - coarse.x(i).powi(2)).abs() <= 1e-15);
    }
    let misaligned = GridSpec::new(-1.0, 1.0, 15, 0.1, 1).unwrap();
    assert!(matches!(restrict(&level, &fine, &misaligned), Err(BenchError::GridMismatch(_))));
}

#[test]
fn phase_shift_of_a_translated_copy() {
    let grid = GridSpec::new(-20.0, 20.0, 400, 0.1, 1).unwrap();
    let bump = |x0: f64| -> Vec<f64> { grid.nodes().iter().map(|&x| exact_bbm_soliton(x, 0.0, 2.0, x0)).collect() };
    let numerical = bump(1.234);
    let reference = bump(1.234 + 3.0 * grid.dx);
    let s = phase_shift_error(&numerical, &grid, &reference, &grid).unwrap();
    assert!((s.interpolated - 3.0 * grid.dx).abs() <= 0.1 * grid.dx, "{s:?}");
    assert!((s.node - 3.0 * grid.dx).abs() <= 1e-12);
    let same = phase_shift_error(&reference, &grid, &reference, &grid).unwrap();
    assert_eq!((same.node, same.interpolated), (0.0, 0.0));
    assert!(matches!(locate_peak(&vec![1.0; 400], &grid), Err(BenchError::PeakNotFound)));
}

#[test]
fn fitted_order_of_exact_power_law() {
    let hs = [0.1, 0.05, 0.025];
    let es: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
    assert!((fitted_order(&hs, &es).unwrap() - 2.0).abs() <= 1e-12);
    assert_eq!(fitted_order(&hs[..1], &es[..1]), None);
}

fn short_bbm() -> BenchmarkCase {
    BenchmarkCase::standard(CaseId::BbmSoliton).with_steps(0.2, 0.1).with_final_time(0.5)
}

#[test]
fn zero_steps_leave_the_initial_data() {
    let case = short_bbm().with_final_time(0.0);
    let spec = SchemeSpec::new(Equation::Bbm, "EC6", &[]);
    let out = run_case(&case, &spec, &SolverConfig::default(), None, &[0]).unwrap();
    let grid = case.grid().unwrap();
    assert_eq!(out.snapshots[0], case.initial_level(&grid));
    assert_eq!(out.report.err, [0.0; 3]);
    assert_eq!(out.report.solution_error, Some(0.0));
    assert_eq!(out.report.newton.steps, 0);
}

#[test]
fn runs_are_deterministic() {
    let spec = SchemeSpec::new(Equation::Bbm, "MC6", &[8.0]);
    let cfg = SolverConfig::default();
    let a = run_case(&short_bbm(), &spec, &cfg, None, &[]).unwrap();
    let b = run_case(&short_bbm(), &spec, &cfg, None, &[]).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.final_level, b.final_level);
}

#[test]
fn snapshot_beyond_the_run_is_an_error() {
    let spec = SchemeSpec::new(Equation::Bbm, "EC6", &[]);
    let r = run_case(&short_bbm(), &spec, &SolverConfig::default(), None, &[99]);
    assert!(matches!(r, Err(BenchError::SnapshotOutOfRange { step: 99, steps: 5 })));
}

#[test]
fn scheme_of_the_wrong_equation_is_rejected() {
    let spec = SchemeSpec::new(Equation::Nls, "MS", &[]);
    let r = run_case(&short_bbm(), &spec, &SolverConfig::default(), None, &[]);
    assert!(matches!(r, Err(BenchError::EquationMismatch { .. })));
}

#[test]
fn sweep_of_one_point_is_that_run() {
    let case = short_bbm();
    let base = SchemeSpec::new(Equation::Bbm, "EC10", &[0.0]);
    let cfg = SolverConfig::default();
    let sweep = parameter_sweep(&case, &base, &[vec![-8.0]], &cfg, None);
    assert_eq!(sweep.points.len(), 1);
    assert_eq!(sweep.argmin(), Some(0));
    let direct = run_case(&case, &base.with_params(&[-8.0]), &cfg, None, &[]).unwrap().report;
    assert_eq!(sweep.points[0].outcome.as_ref().unwrap(), &direct);
}

#[test]
fn failed_sweep_points_are_recorded() {
    let case = short_bbm();
    let base = SchemeSpec::new(Equation::Bbm, "MC6", &[0.0]);
    // α·max(Δx, Δt)² = 100·0.04 is outside the admissible range.
    let sweep = parameter_sweep(&case, &base, &[vec![0.0], vec![100.0]], &SolverConfig::default(), None);
    assert!(sweep.points[0].outcome.is_ok());
    assert!(sweep.points[1].outcome.is_err());
    assert_eq!(sweep.argmin(), Some(0));
}

#[test]
fn reference_round_trips_through_csv() {
    let case = BenchmarkCase::custom(
        -10.0,
        10.0,
        0.4,
        0.25,
        0.1,
        InitialData::NlsModulated { amplitude: 0.7, epsilon: 0.1, wavenumber: 0.3 },
    );
    let recipe =
        conserve::bench::ReferenceRecipe { scheme: SchemeSpec::new(Equation::Nls, "EC6", &[0.0]), dx: 0.125, dt: 0.05 };
    let cfg = SolverConfig::default();
    let r = conserve::bench::generate_reference(&case, &recipe, &cfg).unwrap();
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join("round_trip_reference.csv");
    r.write_csv(&path).unwrap();
    let back = Reference::read_csv(&path).unwrap();
    assert_eq!(back, r);
    let cached = conserve::bench::load_or_generate(&path, &case, &recipe, &cfg).unwrap();
    assert_eq!(cached, r);

    // The coarse run compares against the restricted reference.
    let spec = SchemeSpec::new(Equation::Nls, "MC6", &[0.0]);
    let out = run_case(&case, &spec, &cfg, Some(&back), &[]).unwrap();
    let e = out.report.solution_error.unwrap();
    assert!(e > 0.0 && e < 1e-2, "{e}");

    let elsewhere = BenchmarkCase { a: -12.0, ..case.clone() };
    assert!(matches!(back.check_compatible(&elsewhere), Err(BenchError::GridMismatch(_))));
}

#[test]
fn malformed_reference_file_is_reported() {
    let path = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("malformed_reference.csv");
    std::fs::write(&path, "# case=bbm-soliton\nx,u\n0.0,1.0\n").unwrap();
    assert!(matches!(Reference::read_csv(&path), Err(BenchError::Format(_))));
}

#[test]
fn preserved_laws_hold_pointwise_on_a_computed_solution() {
    let case = BenchmarkCase::standard(CaseId::NlsSoliton);
    let grid = case.grid().unwrap();
    let scheme = SchemeSpec::new(Equation::Nls, "EC6", &[0.0]).build(grid.delta_max()).unwrap();
    let tight = SolverConfig::default();
    let (traj, _) = advance(&scheme, case.initial_level(&grid), &grid, &tight).unwrap();
    let loose = SolverConfig { tol: 1e-6, ..tight };
    let (loose_traj, _) = advance(&scheme, case.initial_level(&grid), &grid, &loose).unwrap();
    for law in scheme.conservation_laws() {
        let r = local_claw_residual_on_solution(&traj, &law).unwrap();
        assert!(r <= 1e-9, "{}: {r:e}", law.name());
        let r_loose = local_claw_residual_on_solution(&loose_traj, &law).unwrap();
        assert!(r_loose <= 1e-3, "{}: {r_loose:e} at tol 1e-6", law.name());
    }
}

#[test]
fn exact_waves_wrap_around_the_periodic_domain() {
    // Both waves cross the 80-wide domain exactly once by the final step.
    let bbm = BenchmarkCase::custom(-40.0, 40.0, 80.0, 0.5, 1.0, InitialData::BbmWaves { waves: vec![[1.0, 5.0]] });
    let grid = bbm.grid().unwrap();
    let (start, end) = (bbm.exact_level(&grid, 0).unwrap(), bbm.exact_level(&grid, grid.n).unwrap());
    let gap = start.components[0].iter().zip(&end.components[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-12, "BBM wave changed by {gap:e} after one period");

    let nls = BenchmarkCase::custom(-40.0, 40.0, 40.0, 0.5, 1.0, InitialData::NlsSoliton { c: 1.0, d: 0.0 });
    let grid = nls.grid().unwrap();
    let modulus = |l: &FieldLevel, i: usize| l.components[0][i].hypot(l.components[1][i]);
    let (start, end) = (nls.exact_level(&grid, 0).unwrap(), nls.exact_level(&grid, grid.n).unwrap());
    for i in 0..grid.m {
        assert!((modulus(&start, i) - modulus(&end, i)).abs() < 1e-12, "NLS modulus differs at node {i}");
    }
}
