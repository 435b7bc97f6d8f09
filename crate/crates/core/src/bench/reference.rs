use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::cases::{BenchmarkCase, CaseId, ReferenceRecipe};
use super::run::run_case;
use super::BenchError;
use crate::grid::{FieldLevel, GridSpec};
use crate::solver::SolverConfig;

const FORMAT_TAG: &str = "conserve-reference v1";

/// Final level of a fine-grid run used in place of an exact solution,
/// together with the invariant drift of that run.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub case: CaseId,
    pub scheme: String,
    pub grid: GridSpec,
    pub level: FieldLevel,
    pub err: [f64; 3],
    pub tol: f64,
}

impl Reference {
    /// The reference must cover the same domain and end at the same time.
    pub fn check_compatible(&self, case: &BenchmarkCase) -> Result<(), BenchError> {
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + y.abs());
        if self.case != case.id
            || !close(self.grid.t_final(), case.t_final)
            || !close(self.grid.a, case.a)
            || !close(self.grid.b, case.b)
        {
            return Err(BenchError::GridMismatch(format!(
                "reference for {} on [{}, {}] up to t = {} does not match {} on [{}, {}] up to t = {}",
                self.case.label(),
                self.grid.a,
                self.grid.b,
                self.grid.t_final(),
                case.id.label(),
                case.a,
                case.b,
                case.t_final
            )));
        }
        Ok(())
    }

    fn matches(&self, case: &BenchmarkCase, recipe: &ReferenceRecipe) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + y.abs());
        self.check_compatible(case).is_ok()
            && self.scheme == recipe.scheme.label()
            && close(self.grid.dx, recipe.dx)
            && close(self.grid.dt, recipe.dt)
    }

    /// CSV snapshot: `#`-prefixed `key=value` metadata, then `x,u[,v]` rows.
    pub fn write_csv(&self, path: &Path) -> Result<(), BenchError> {
        let mut meta = String::new();
        meta += &format!("# {FORMAT_TAG}\n");
        meta += &format!("# case={}\n# scheme={}\n", self.case.label(), self.scheme);
        let g = &self.grid;
        meta += &format!("# a={:e}\n# b={:e}\n# m={}\n# dt={:e}\n# n={}\n", g.a, g.b, g.m, g.dt, g.n);
        meta += &format!("# tol={:e}\n", self.tol);
        for (k, e) in self.err.iter().enumerate() {
            meta += &format!("# err{}={:e}\n", k + 1, e);
        }
        let tmp = path.with_extension("csv.partial");
        {
            let mut file = fs::File::create(&tmp)?;
            file.write_all(meta.as_bytes())?;
            let mut w = csv::Writer::from_writer(file);
            let names = ["x", "u", "v"];
            w.write_record(&names[..=self.level.q()]).map_err(csv_err)?;
            for i in 0..g.m {
                let mut row = vec![format!("{:.17e}", g.x(i))];
                row.extend(self.level.components.iter().map(|c| format!("{:.17e}", c[i])));
                w.write_record(&row).map_err(csv_err)?;
            }
            w.flush()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self, BenchError> {
        let file = fs::File::open(path)?;
        let mut meta = std::collections::HashMap::new();
        let mut lines = BufReader::new(file).lines();
        let mut header = None;
        for line in lines.by_ref() {
            let line = line?;
            match line.strip_prefix('#') {
                Some(rest) => {
                    if let Some((k, v)) = rest.trim().split_once('=') {
                        meta.insert(k.to_string(), v.to_string());
                    } else if rest.trim() != FORMAT_TAG {
                        return Err(BenchError::Format(format!("unrecognised snapshot tag `{}`", rest.trim())));
                    }
                }
                None => {
                    header = Some(line);
                    break;
                }
            }
        }
        let get = |k: &str| meta.get(k).ok_or_else(|| BenchError::Format(format!("missing `{k}` in snapshot header")));
        let num = |k: &str| -> Result<f64, BenchError> {
            get(k)?.parse().map_err(|_| BenchError::Format(format!("bad number for `{k}`")))
        };
        let case = CaseId::parse(get("case")?)?;
        let m = num("m")? as usize;
        let grid = GridSpec::new(num("a")?, num("b")?, m, num("dt")?, num("n")? as usize)?;
        let q = header.map_or(0, |h| h.split(',').count()).saturating_sub(1);
        let body: String = lines.collect::<Result<Vec<_>, _>>()?.join("\n");
        let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(body.as_bytes());
        let mut components = vec![Vec::with_capacity(m); q];
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            for c in 0..q {
                let v: f64 = rec
                    .get(c + 1)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| BenchError::Format("malformed snapshot row".into()))?;
                components[c].push(v);
            }
        }
        if q == 0 || components[0].len() != m {
            return Err(BenchError::Format(format!(
                "snapshot holds {} rows, header says {m}",
                components.first().map_or(0, Vec::len)
            )));
        }
        Ok(Self {
            case,
            scheme: get("scheme")?.clone(),
            grid,
            level: FieldLevel { components, time_index: grid.n },
            err: [num("err1")?, num("err2")?, num("err3")?],
            tol: num("tol")?,
        })
    }
}

fn csv_err(e: csv::Error) -> BenchError {
    BenchError::Format(e.to_string())
}

/// Runs the recipe's scheme on the fine grid over the case's time span.
pub fn generate_reference(
    case: &BenchmarkCase,
    recipe: &ReferenceRecipe,
    cfg: &SolverConfig,
) -> Result<Reference, BenchError> {
    let fine = case.with_steps(recipe.dx, recipe.dt);
    let out = run_case(&fine, &recipe.scheme, cfg, None, &[])?;
    Ok(Reference {
        case: case.id,
        scheme: out.report.scheme,
        grid: out.grid,
        level: out.final_level,
        err: out.report.err,
        tol: cfg.tol,
    })
}

/// Loads a cached reference from `path` if its metadata matches the recipe,
/// otherwise generates one and stores it there.
pub fn load_or_generate(
    path: &Path,
    case: &BenchmarkCase,
    recipe: &ReferenceRecipe,
    cfg: &SolverConfig,
) -> Result<Reference, BenchError> {
    if path.exists() {
        if let Ok(r) = Reference::read_csv(path) {
            if r.matches(case, recipe) {
                return Ok(r);
            }
        }
    }
    let r = generate_reference(case, recipe, cfg)?;
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    r.write_csv(path)?;
    Ok(r)
}
