//! CSV tables written atomically into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use conserve::bench::RunReport;
use conserve::grid::{FieldLevel, GridSpec};
use conserve::nls::modulus_and_phase;
use conserve::SolverConfig;

use crate::CliError;

/// Scientific notation with 17 significant digits, enough to round-trip.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn params_field(params: &[f64]) -> String {
    params.iter().map(|&p| num(p)).collect::<Vec<_>>().join(";")
}

/// Writes `rows` under `header` to `path` through a temporary file, so a
/// reader never sees a half-written table.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let tmp = PathBuf::from(format!("{}.partial", path.display()));
    {
        let mut w = csv::Writer::from_path(&tmp).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub const REPORT_HEADER: [&str; 18] = [
    "scheme",
    "params",
    "Err1",
    "Err2",
    "Err3",
    "solution_error",
    "phase_shift",
    "max_newton_iters",
    "phase_shift_interpolated",
    "case",
    "dx",
    "dt",
    "t_final",
    "tol",
    "max_iter",
    "predictor",
    "jacobian",
    "status",
];

/// One report row. The solver settings ride along so the row can be
/// reproduced on its own; a failed run keeps its numeric fields empty and
/// carries the error message in `status`.
pub fn report_row(
    scheme: &str,
    params: &[f64],
    outcome: Result<&RunReport, &str>,
    cfg: &SolverConfig,
    grid: (f64, f64, f64),
    case: &str,
) -> Vec<String> {
    let mut row = vec![scheme.to_string(), params_field(params)];
    match outcome {
        Ok(r) => {
            row.extend(r.err.iter().map(|&e| num(e)));
            row.push(opt(r.solution_error));
            row.push(opt(r.phase_shift.map(|p| p.node)));
            row.push(r.newton.max_iterations.to_string());
            row.push(opt(r.phase_shift.map(|p| p.interpolated)));
        }
        Err(_) => row.extend(std::iter::repeat(String::new()).take(7)),
    }
    row.push(case.to_string());
    row.extend([num(grid.0), num(grid.1), num(grid.2), num(cfg.tol), cfg.max_iter.to_string()]);
    row.push(kebab(&cfg.predictor));
    row.push(kebab(&cfg.jacobian));
    row.push(match outcome {
        Ok(_) => "ok".into(),
        Err(msg) => format!("failed: {msg}"),
    });
    row
}

fn kebab<T: serde::Serialize>(v: &T) -> String {
    toml::Value::try_from(v).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// `x, u` for BBM; `x, u, v, modulus, phase` for NLS.
pub fn write_snapshot(path: &Path, grid: &GridSpec, level: &FieldLevel) -> Result<(), CliError> {
    let xs = grid.nodes();
    let (header, rows): (Vec<&str>, Vec<Vec<String>>) = if level.q() == 1 {
        (vec!["x", "u"], xs.iter().zip(level.comp(0)).map(|(&x, &u)| vec![num(x), num(u)]).collect())
    } else {
        let (modulus, phase) = modulus_and_phase(level);
        let rows = (0..grid.m)
            .map(|i| vec![num(xs[i]), num(level.comp(0)[i]), num(level.comp(1)[i]), num(modulus[i]), num(phase[i])])
            .collect();
        (vec!["x", "u", "v", "modulus", "phase"], rows)
    };
    write_table(path, &header, &rows)
}
