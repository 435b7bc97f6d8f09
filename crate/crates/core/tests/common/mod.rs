//! Oracles and scheme lists shared by the integration tests.
#![allow(dead_code)]

use conserve::grid::{FieldLevel, GridSpec, StencilWindow};
use conserve::nls::NlsScheme;
use conserve::{Equation, Scheme, SchemeSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The schemes that carry conservation laws, with their parameter counts.
pub const CONSERVATIVE: [(Equation, &str, usize); 12] = [
    (Equation::Bbm, "LS", 0),
    (Equation::Bbm, "PB", 0),
    (Equation::Bbm, "EC6", 0),
    (Equation::Bbm, "MC6", 1),
    (Equation::Bbm, "EC8", 0),
    (Equation::Bbm, "MC8", 2),
    (Equation::Bbm, "EC10", 1),
    (Equation::Nls, "EC6", 3),
    (Equation::Nls, "MC6", 1),
    (Equation::Nls, "MC-AL", 0),
    (Equation::Nls, "M/EC-AL(0)", 0),
    (Equation::Nls, "M/EC-AL(1)", 0),
];

/// Parameters in `[−0.5, 0.5]` used directly as the scheme coefficients.
/// The NLS EC family takes `λ, η, ν` here, beyond the single `α` a
/// configuration file can set.
pub fn raw_scheme(eq: Equation, name: &str, params: &[f64]) -> Scheme {
    if (eq, name) == (Equation::Nls, "EC6") && params.len() == 3 {
        return NlsScheme::Ec { lambda: params[0], eta: params[1], nu: params[2] }.into();
    }
    SchemeSpec::new(eq, name, params).build(1.0).unwrap()
}

pub fn draws(arity: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..arity).map(|_| rng.gen_range(-0.5..0.5)).collect()
}

pub const SCHEMES: [(Equation, &str, &[f64]); 14] = [
    (Equation::Bbm, "EC6", &[]),
    (Equation::Bbm, "MC6", &[8.0]),
    (Equation::Bbm, "EC8", &[]),
    (Equation::Bbm, "MC8", &[-4.0, 3.3]),
    (Equation::Bbm, "EC10", &[-32.0]),
    (Equation::Bbm, "LS", &[]),
    (Equation::Bbm, "PB", &[]),
    (Equation::Nls, "EC6", &[0.132]),
    (Equation::Nls, "MC6", &[0.043]),
    (Equation::Nls, "MC-AL", &[]),
    (Equation::Nls, "M/EC-AL(0)", &[]),
    (Equation::Nls, "M/EC-AL(1)", &[]),
    (Equation::Nls, "MS", &[]),
    (Equation::Nls, "MoL-M", &[]),
];

fn residual(scheme: &Scheme, known: &[FieldLevel], x: &[f64], grid: &GridSpec) -> DVector<f64> {
    let mut trial = known.last().unwrap().clone();
    trial.time_index += 1;
    trial.set_interleaved(x);
    let mut levels: Vec<&FieldLevel> = known.iter().collect();
    levels.push(&trial);
    let w = StencilWindow::new(levels, *grid).unwrap();
    let r = scheme.residual(&w).unwrap();
    let q = scheme.q();
    DVector::from_fn(grid.m * q, |k, _| r[k % q][k / q])
}

/// Plain Newton with a dense central-difference Jacobian and a minimum-norm
/// SVD solve, so that a singular Jacobian leaves its kernel untouched.
pub fn dense_newton(scheme: &Scheme, known: &[FieldLevel], grid: &GridSpec) -> Vec<f64> {
    let mut x = known.last().unwrap().to_interleaved();
    let n = x.len();
    let mut best = (f64::INFINITY, x.clone());
    for _ in 0..40 {
        let r = residual(scheme, known, &x, grid);
        let rn = r.amax();
        if rn < best.0 {
            best = (rn, x.clone());
        }
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n {
            let h = 1e-6 * (1.0 + x[k].abs());
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[k] += h;
            xm[k] -= h;
            let col = (residual(scheme, known, &xp, grid) - residual(scheme, known, &xm, grid)) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let svd = jac.svd(true, true);
        let cutoff = 1e-7 * svd.singular_values.max();
        let dx = svd.solve(&(-r), cutoff).unwrap();
        if dx.amax() <= 1e-15 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
            break;
        }
        for k in 0..n {
            x[k] += dx[k];
        }
    }
    best.1
}

pub fn random_known(scheme: &Scheme, grid: &GridSpec, rng: &mut ChaCha8Rng) -> Vec<FieldLevel> {
    let amp = rng.gen_range(0.2..1.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let k = std::f64::consts::TAU / (grid.b - grid.a);
    (0..scheme.levels() - 1)
        .map(|j| {
            let comps = (0..scheme.q())
                .map(|c| {
                    (0..grid.m)
                        .map(|i| {
                            let x = grid.x(i);
                            amp * (k * x + phase + c as f64 + 0.1 * j as f64).sin() + 0.2 * rng.gen_range(-1.0..1.0)
                        })
                        .collect()
                })
                .collect();
            FieldLevel::new(comps, j).unwrap()
        })
        .collect()
}

/// Largest difference between the banded solver and dense Newton over
/// `trials` random steps of each scheme in [`SCHEMES`], alternating even and
/// odd node counts. Returns `(scheme label, worst difference)` per scheme.
pub fn oracle_comparison(trials: usize, seed: u64) -> Vec<(String, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = conserve::SolverConfig::default();
    SCHEMES
        .iter()
        .map(|&(eq, name, params)| {
            let mut worst = 0.0f64;
            let mut label = String::new();
            for trial in 0..trials {
                // Even node counts give EC8 and PB a singular Jacobian.
                let m = if trial % 2 == 0 { 16 } else { 15 };
                let grid = GridSpec::new(0.0, 0.1 * m as f64, m, 0.05, 1).unwrap();
                let scheme = SchemeSpec::new(eq, name, params).build(grid.delta_max()).unwrap();
                label = scheme.name();
                let known = random_known(&scheme, &grid, &mut rng);
                let refs: Vec<&FieldLevel> = known.iter().collect();
                let diff = match conserve::solver::step(&scheme, &refs, &grid, &cfg) {
                    Ok((fast, _)) => {
                        let slow = dense_newton(&scheme, &known, &grid);
                        fast.to_interleaved().iter().zip(&slow).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                    }
                    Err(_) => f64::INFINITY,
                };
                worst = if diff.is_nan() { f64::INFINITY } else { worst.max(diff) };
            }
            (label, worst)
        })
        .collect()
}
