use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::cases::{BenchmarkCase, CaseId};
use super::metrics::{phase_shift_error, relative_l2, restrict, PhaseShift};
use super::reference::Reference;
use super::BenchError;
use crate::claw::{density_levels, global_invariant, InvariantTrace, LawKind};
use crate::grid::{FieldLevel, GridSpec};
use crate::scheme::{Equation, SchemeSpec};
use crate::solver::{advance_streaming, SolverConfig, StepStats};

/// Aggregate Newton statistics of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonSummary {
    pub steps: usize,
    pub max_iterations: usize,
    pub mean_iterations: f64,
    pub max_residual: f64,
    pub jacobian_evals: usize,
    /// Steps accepted on the round-off stagnation test rather than `tol`.
    pub roundoff_limited: usize,
}

impl NewtonSummary {
    pub fn from_stats(stats: &[StepStats]) -> Self {
        let steps = stats.len();
        let total: usize = stats.iter().map(|s| s.iterations).sum();
        Self {
            steps,
            max_iterations: stats.iter().map(|s| s.iterations).max().unwrap_or(0),
            mean_iterations: if steps == 0 { 0.0 } else { total as f64 / steps as f64 },
            max_residual: stats.iter().map(|s| s.final_residual).fold(0.0, f64::max),
            jacobian_evals: stats.iter().map(|s| s.jacobian_evals).sum(),
            roundoff_limited: stats.iter().filter(|s| s.roundoff_limited).count(),
        }
    }
}

/// One row of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub case: CaseId,
    pub scheme: String,
    pub params: Vec<f64>,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    /// `Err₁, Err₂, Err₃`.
    pub err: [f64; 3],
    pub solution_error: Option<f64>,
    pub phase_shift: Option<PhaseShift>,
    pub newton: NewtonSummary,
}

/// Everything a run produces besides the report itself.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub grid: GridSpec,
    pub final_level: FieldLevel,
    pub traces: [InvariantTrace; 3],
    /// Levels at the requested step indices, in the order requested.
    pub snapshots: Vec<FieldLevel>,
}

/// Integrates `case` with `spec`, tracking the three global invariants as the
/// run streams and comparing the final level with the exact solution or the
/// supplied reference.
pub fn run_case(
    case: &BenchmarkCase,
    spec: &SchemeSpec,
    cfg: &SolverConfig,
    reference: Option<&Reference>,
    snapshot_steps: &[usize],
) -> Result<RunOutcome, BenchError> {
    if spec.equation != case.equation() {
        return Err(BenchError::EquationMismatch { case: case.id, scheme: spec.label() });
    }
    let grid = case.grid()?;
    let scheme = spec.build(grid.delta_max())?;
    let k = density_levels(&scheme);
    let mut recent: VecDeque<FieldLevel> = VecDeque::with_capacity(k + 1);
    let mut traces: [InvariantTrace; 3] = Default::default();
    let mut snapshots: Vec<Option<FieldLevel>> = vec![None; snapshot_steps.len()];
    let mut invariant_err = None;

    let initial = case.initial_level(&grid);
    let result = advance_streaming(&scheme, initial, &grid, cfg, |level| {
        for (slot, &s) in snapshots.iter_mut().zip(snapshot_steps) {
            if s == level.time_index {
                *slot = Some(level.clone());
            }
        }
        recent.push_back(level.clone());
        if recent.len() > k {
            recent.pop_front();
        }
        if recent.len() == k {
            let refs: Vec<&FieldLevel> = recent.iter().collect();
            for kind in LawKind::ALL {
                match global_invariant(&scheme, kind, &refs, &grid) {
                    Ok(v) => traces[kind.index() - 1].push(v),
                    Err(e) => invariant_err = Some(e),
                }
            }
        }
    });
    if let Some(e) = invariant_err {
        return Err(e.into());
    }
    let (final_level, stats) = result.map_err(|(step, source)| BenchError::Solve { step, source })?;

    let solution_error = match (case.exact_level(&grid, grid.n), reference) {
        (Some(exact), _) => Some(relative_l2(&final_level, &exact)?),
        (None, Some(r)) => {
            r.check_compatible(case)?;
            Some(relative_l2(&final_level, &restrict(&r.level, &r.grid, &grid)?)?)
        }
        (None, None) => None,
    };
    // The peak-position comparison only makes sense against a reference run
    // of a BBM wave train.
    let phase_shift = match (case.equation(), &solution_error, reference) {
        (Equation::Bbm, Some(_), Some(r)) if !case.has_exact() => {
            Some(phase_shift_error(final_level.comp(0), &grid, r.level.comp(0), &r.grid)?)
        }
        _ => None,
    };
    let report = RunReport {
        case: case.id,
        scheme: spec.label(),
        params: spec.params.clone(),
        dx: grid.dx,
        dt: grid.dt,
        t_final: grid.t_final(),
        err: [traces[0].err, traces[1].err, traces[2].err],
        solution_error,
        phase_shift,
        newton: NewtonSummary::from_stats(&stats),
    };
    let missing = snapshot_steps.iter().zip(&snapshots).find(|(_, s)| s.is_none());
    if let Some((&s, _)) = missing {
        return Err(BenchError::SnapshotOutOfRange { step: s, steps: grid.n });
    }
    Ok(RunOutcome { report, grid, final_level, traces, snapshots: snapshots.into_iter().flatten().collect() })
}

/// Errors at successive dyadic refinements of an exactly solvable case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub scheme: String,
    pub case: CaseId,
    /// `(Δx, Δt, solution error)` per refinement level.
    pub rows: Vec<(f64, f64, f64)>,
    pub order: Option<f64>,
}

pub fn convergence_study(
    case: &BenchmarkCase,
    spec: &SchemeSpec,
    cfg: &SolverConfig,
    levels: usize,
) -> Result<ConvergenceStudy, BenchError> {
    if !case.has_exact() {
        return Err(BenchError::NoExactSolution(case.id));
    }
    let mut rows = Vec::with_capacity(levels);
    for l in 0..levels {
        let f = 0.5f64.powi(l as i32);
        let refined = case.with_steps(case.dx * f, case.dt * f);
        let out = run_case(&refined, spec, cfg, None, &[])?;
        let e = out.report.solution_error.expect("exact case");
        rows.push((out.grid.dx, out.grid.dt, e));
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let order = super::metrics::fitted_order(&hs, &es);
    Ok(ConvergenceStudy { scheme: spec.label(), case: case.id, rows, order })
}
