use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cases::BenchmarkCase;
use super::reference::Reference;
use super::run::{run_case, RunReport};
use crate::scheme::SchemeSpec;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub params: Vec<f64>,
    /// The report, or the error message of a failed run.
    pub outcome: Result<RunReport, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
}

impl Sweep {
    /// Index of the successful point with the smallest solution error.
    pub fn argmin(&self) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .filter_map(|(k, p)| Some((k, p.outcome.as_ref().ok()?.solution_error?)))
            .filter(|(_, e)| e.is_finite())
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| k)
    }

    pub fn best(&self) -> Option<&SweepPoint> {
        self.argmin().map(|k| &self.points[k])
    }
}

/// `lo, lo + step, …` up to `hi` inclusive (with a little slack for rounding).
pub fn linspace_step(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Cartesian product of per-parameter value lists.
pub fn param_grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Runs `base` at every parameter point in parallel. Failed runs are kept
/// as failures rather than aborting the sweep.
pub fn parameter_sweep(
    case: &BenchmarkCase,
    base: &SchemeSpec,
    points: &[Vec<f64>],
    cfg: &SolverConfig,
    reference: Option<&Reference>,
) -> Sweep {
    let points = points
        .par_iter()
        .map(|params| {
            let spec = base.with_params(params);
            let outcome = run_case(case, &spec, cfg, reference, &[]).map(|o| o.report).map_err(|e| e.to_string());
            SweepPoint { params: params.clone(), outcome }
        })
        .collect();
    Sweep { points }
}
