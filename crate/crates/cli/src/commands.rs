use std::fs;
use std::path::{Path, PathBuf};

use conserve::bench::{
    convergence_study, generate_reference, load_or_generate, param_grid, parameter_sweep, run_case, BenchmarkCase,
    ConvergenceStudy, Reference, RunOutcome, Sweep,
};
use conserve::claw::{mutated_identity_residual, verify_identities, IdentityCheck, IDENTITY_TOL, VERIFY_RNG};
use conserve::{Equation, Mutation, SchemeSpec};

use crate::config::RunConfig;
use crate::output::{num, params_field, report_row, write_snapshot, write_table, REPORT_HEADER};
use crate::CliError;

fn ensure_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))
}

fn resolve(out: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out.join(p)
    }
}

/// Step indices for the requested snapshot times.
fn snapshot_steps(cfg: &RunConfig, case: &BenchmarkCase) -> Result<Vec<usize>, CliError> {
    cfg.outputs
        .snapshot_times
        .iter()
        .map(|&t| {
            let s = (t / case.dt).round();
            if !(t >= 0.0) || (s * case.dt - t).abs() > 1e-9 * t.max(1.0) {
                return Err(CliError::Config(format!("snapshot time {t} is not a multiple of Δt = {}", case.dt)));
            }
            Ok(s as usize)
        })
        .collect()
}

/// The reference the case is compared against, generated and cached when
/// a recipe is known.
fn reference_for(cfg: &RunConfig, case: &BenchmarkCase, out: &Path) -> Result<Option<Reference>, CliError> {
    if case.has_exact() {
        return Ok(None);
    }
    let recipe = cfg.recipe(case);
    let path = cfg.outputs.reference.as_ref().map(|p| resolve(out, p));
    Ok(match (path, recipe) {
        (Some(path), Some(recipe)) => Some(load_or_generate(&path, case, &recipe, &cfg.solver)?),
        (Some(path), None) => Some(Reference::read_csv(&path)?),
        (None, Some(recipe)) => {
            let path = out.join(format!("reference_{}.csv", case.id.label()));
            Some(load_or_generate(&path, case, &recipe, &cfg.solver)?)
        }
        (None, None) => None,
    })
}

fn grid_triple(case: &BenchmarkCase) -> (f64, f64, f64) {
    (case.dx, case.dt, case.t_final)
}

/// Runs the configured scheme on the configured case. Writes the report,
/// the requested snapshots and the fully resolved configuration to `out`.
pub fn cmd_run(cfg: &RunConfig, out: &Path) -> Result<RunOutcome, CliError> {
    ensure_dir(out)?;
    let case = cfg.case()?;
    let steps = snapshot_steps(cfg, &case)?;
    let reference = reference_for(cfg, &case, out)?;
    let spec = cfg.scheme_spec();
    write_resolved(cfg, out)?;
    let result = run_case(&case, &spec, &cfg.solver, reference.as_ref(), &steps);
    let report_path = out.join(&cfg.outputs.report);
    match result {
        Ok(outcome) => {
            let row = report_row(
                &spec.label(),
                &spec.params,
                Ok(&outcome.report),
                &cfg.solver,
                grid_triple(&case),
                case.id.label(),
            );
            write_table(&report_path, &REPORT_HEADER, &[row])?;
            for (level, &step) in outcome.snapshots.iter().zip(&steps) {
                write_snapshot(&out.join(format!("snapshot_{step:06}.csv")), &outcome.grid, level)?;
            }
            Ok(outcome)
        }
        Err(e) => {
            let msg = e.to_string();
            let row =
                report_row(&spec.label(), &spec.params, Err(&msg), &cfg.solver, grid_triple(&case), case.id.label());
            write_table(&report_path, &REPORT_HEADER, &[row])?;
            Err(e.into())
        }
    }
}

fn write_resolved(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let path = out.join("resolved_config.toml");
    let tmp = out.join("resolved_config.toml.partial");
    fs::write(&tmp, cfg.to_toml())
        .and_then(|_| fs::rename(&tmp, &path))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Runs every point of the configured parameter grid; writes `sweep.csv`
/// with an `argmin` column marking the smallest solution error.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<Sweep, CliError> {
    ensure_dir(out)?;
    let axes = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("the sweep command needs a [sweep] table".into()))?
        .axes
        .iter()
        .map(|a| a.values())
        .collect::<Result<Vec<_>, _>>()?;
    let arity = cfg.scheme_spec().arity()?;
    if axes.len() > arity {
        return Err(CliError::Config(format!(
            "{} takes {arity} parameter(s), the sweep has {} axes",
            cfg.scheme,
            axes.len()
        )));
    }
    let case = cfg.case()?;
    let reference = reference_for(cfg, &case, out)?;
    write_resolved(cfg, out)?;
    let sweep = parameter_sweep(&case, &cfg.scheme_spec(), &param_grid(&axes), &cfg.solver, reference.as_ref());
    let best = sweep.argmin();
    let mut header = REPORT_HEADER.to_vec();
    header.push("argmin");
    let rows: Vec<Vec<String>> = sweep
        .points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let label = cfg.scheme_spec().with_params(&p.params).label();
            let outcome = p.outcome.as_ref().map_err(String::as_str);
            let mut row = report_row(&label, &p.params, outcome, &cfg.solver, grid_triple(&case), case.id.label());
            row.push((best == Some(k)).to_string());
            row
        })
        .collect();
    write_table(&out.join("sweep.csv"), &header, &rows)?;
    Ok(sweep)
}

/// What `verify` checks. Parameters are the raw scheme coefficients
/// (`λ`, `ν`, ...), not the grid-scaled table values.
#[derive(Debug, Clone)]
pub struct VerifyRequest {
    pub equation: Equation,
    pub scheme: String,
    pub params: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Sign-flip one flux term of every law, to see the check fail.
    pub flip_flux: Option<usize>,
    pub flip_density: Option<usize>,
}

/// Characteristic-identity check over random windows; writes `verify.csv`.
/// Fails with [`CliError::VerifyFailed`] when any law exceeds the
/// tolerance.
pub fn cmd_verify(req: &VerifyRequest, out: &Path) -> Result<Vec<IdentityCheck>, CliError> {
    ensure_dir(out)?;
    let spec = SchemeSpec::new(req.equation, &req.scheme, &req.params);
    let scheme = spec.build(1.0)?;
    let mutated = req.flip_flux.is_some() || req.flip_density.is_some();
    let checks: Vec<IdentityCheck> = if mutated {
        let m = |k: Option<usize>| k.map_or(Mutation::NONE, Mutation::flip);
        scheme
            .conservation_laws()
            .iter()
            .map(|law| IdentityCheck {
                law: law.name(),
                kind: law.kind,
                trials: req.trials,
                max_residual: mutated_identity_residual(
                    law,
                    m(req.flip_flux),
                    m(req.flip_density),
                    req.trials,
                    req.seed,
                ),
            })
            .collect()
    } else {
        verify_identities(&scheme, req.trials, req.seed)
    };
    let header = [
        "scheme",
        "params",
        "law",
        "trials",
        "max_residual",
        "tolerance",
        "pass",
        "vacuous",
        "rng",
        "seed",
        "mutation",
    ];
    let mutation = match (req.flip_flux, req.flip_density) {
        (None, None) => String::new(),
        (f, d) => format!(
            "flux={};density={}",
            f.map_or("-".into(), |k| k.to_string()),
            d.map_or("-".into(), |k| k.to_string())
        ),
    };
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| {
            vec![
                spec.label(),
                params_field(&req.params),
                c.law.clone(),
                c.trials.to_string(),
                num(c.max_residual),
                num(IDENTITY_TOL),
                c.passed().to_string(),
                (c.trials == 0).to_string(),
                VERIFY_RNG.into(),
                req.seed.to_string(),
                mutation.clone(),
            ]
        })
        .collect();
    write_table(&out.join("verify.csv"), &header, &rows)?;
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(CliError::VerifyFailed { failed, laws: checks.len() });
    }
    Ok(checks)
}

/// Errors at `levels` dyadic refinements and the fitted order; writes
/// `convergence.csv`.
pub fn cmd_convergence(cfg: &RunConfig, levels: usize, out: &Path) -> Result<ConvergenceStudy, CliError> {
    ensure_dir(out)?;
    if levels == 0 {
        return Err(CliError::Config("a convergence study needs at least one level".into()));
    }
    let case = cfg.case()?;
    let study = convergence_study(&case, &cfg.scheme_spec(), &cfg.solver, levels)?;
    let header = ["scheme", "params", "level", "dx", "dt", "solution_error", "ratio", "fitted_order"];
    let rows: Vec<Vec<String>> = study
        .rows
        .iter()
        .enumerate()
        .map(|(k, &(dx, dt, e))| {
            let ratio = (k > 0).then(|| study.rows[k - 1].2 / e);
            vec![
                study.scheme.clone(),
                params_field(&cfg.params),
                k.to_string(),
                num(dx),
                num(dt),
                num(e),
                ratio.map(num).unwrap_or_default(),
                study.order.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    write_table(&out.join("convergence.csv"), &header, &rows)?;
    Ok(study)
}

/// Regenerates the reference of the configured case and stores it at the
/// configured path (default `reference_<case>.csv` in `out`).
pub fn cmd_make_reference(cfg: &RunConfig, out: &Path) -> Result<PathBuf, CliError> {
    ensure_dir(out)?;
    let case = cfg.case()?;
    let recipe = cfg.recipe(&case).ok_or_else(|| {
        CliError::Config(format!("case {} has no reference recipe; add a [reference] table", case.id.label()))
    })?;
    let path = match &cfg.outputs.reference {
        Some(p) => resolve(out, p),
        None => out.join(format!("reference_{}.csv", case.id.label())),
    };
    let r = generate_reference(&case, &recipe, &cfg.solver)?;
    r.write_csv(&path)?;
    Ok(path)
}
