//! Benchmark problems, error metrics, reference runs and parameter sweeps.

mod cases;
mod metrics;
mod reference;
mod run;
mod sweep;

use thiserror::Error;

pub use cases::{exact_bbm_soliton, exact_nls_soliton, BenchmarkCase, CaseId, InitialData, ReferenceRecipe};
pub use metrics::{fitted_order, locate_peak, phase_shift_error, relative_l2, restrict, Peak, PhaseShift};
pub use reference::{generate_reference, load_or_generate, Reference};
pub use run::{convergence_study, run_case, ConvergenceStudy, NewtonSummary, RunOutcome, RunReport};
pub use sweep::{linspace_step, param_grid, parameter_sweep, Sweep, SweepPoint};

use crate::grid::GridError;
use crate::scheme::SchemeError;
use crate::solver::SolveError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("no peak: the field is flat")]
    PeakNotFound,
    #[error("case {0:?} has no exact solution")]
    NoExactSolution(CaseId),
    #[error("unknown benchmark case `{0}`")]
    UnknownCase(String),
    #[error("scheme {scheme} does not solve the equation of case {case:?}")]
    EquationMismatch { case: CaseId, scheme: String },
    #[error("snapshot step {step} is beyond the {steps} steps of the run")]
    SnapshotOutOfRange { step: usize, steps: usize },
    #[error("step {step}: {source}")]
    Solve { step: usize, source: SolveError },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot format: {0}")]
    Format(String),
}
