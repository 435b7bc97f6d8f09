//! TOML run configuration.

use std::path::{Path, PathBuf};

use conserve::bench::{BenchmarkCase, CaseId, InitialData, ReferenceRecipe};
use conserve::{Equation, SchemeSpec, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything needed to reproduce one run, sweep, check or study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub equation: Equation,
    pub scheme: String,
    #[serde(default)]
    pub params: Vec<f64>,
    pub case: CaseConfig,
    #[serde(default, skip_serializing_if = "GridConfig::is_empty")]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    /// Fine-grid run used as the reference when the case has no exact solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<RecipeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceConfig>,
}

/// A named benchmark, or a domain with initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CaseConfig {
    Named(CaseId),
    Custom { domain: [f64; 2], initial: InitialData },
}

/// Either `m` or `dx` fixes the spatial step; anything unset falls back to
/// the named case.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
}

impl GridConfig {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File name of the report, relative to the output directory.
    #[serde(default = "default_report")]
    pub report: String,
    /// Times at which the field is dumped; each must be a whole number of steps.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Cached reference snapshot. Relative paths resolve against the output
    /// directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
}

fn default_report() -> String {
    "report.csv".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { report: default_report(), snapshot_times: Vec::new(), reference: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecipeConfig {
    pub scheme: String,
    #[serde(default)]
    pub params: Vec<f64>,
    pub dx: f64,
    pub dt: f64,
}

/// One axis per scheme parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values { values: Vec<f64> },
    Range { lo: f64, hi: f64, step: f64 },
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            Axis::Values { values } => Ok(values.clone()),
            &Axis::Range { lo, hi, step } => {
                if !(step > 0.0) || hi < lo {
                    return Err(CliError::Config(format!("sweep range {lo}..{hi} with step {step} is empty")));
                }
                Ok(conserve::bench::linspace_step(lo, hi, step))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_trials() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_levels() -> usize {
    3
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn scheme_spec(&self) -> SchemeSpec {
        SchemeSpec::new(self.equation, &self.scheme, &self.params)
    }

    /// The scheme must exist for the declared equation, take at most the
    /// given number of parameters, and match the equation of the case.
    pub fn validate(&self) -> Result<(), CliError> {
        let arity = self.scheme_spec().arity()?;
        if self.params.len() > arity {
            return Err(CliError::Config(format!(
                "{} takes {arity} parameter(s), {} given",
                self.scheme,
                self.params.len()
            )));
        }
        let case_eq = match &self.case {
            CaseConfig::Named(CaseId::Custom) => {
                return Err(CliError::Config("use `case.domain` and `case.initial` for a custom case".into()))
            }
            CaseConfig::Named(id) => BenchmarkCase::standard(*id).equation(),
            CaseConfig::Custom { initial, .. } => initial.equation(),
        };
        if case_eq != self.equation {
            return Err(CliError::Config(format!(
                "case is a {case_eq:?} problem but the configuration declares {:?}",
                self.equation
            )));
        }
        if let Some(r) = &self.reference {
            SchemeSpec::new(self.equation, &r.scheme, &r.params).arity()?;
        }
        Ok(())
    }

    /// The benchmark on the configured grid.
    pub fn case(&self) -> Result<BenchmarkCase, CliError> {
        let base = match &self.case {
            CaseConfig::Named(id) => Some(BenchmarkCase::standard(*id)),
            CaseConfig::Custom { .. } => None,
        };
        let missing = |what: &str| CliError::Config(format!("a custom case needs `grid.{what}`"));
        let (a, b, initial) = match (&self.case, &base) {
            (_, Some(c)) => (c.a, c.b, c.initial.clone()),
            (CaseConfig::Custom { domain, initial }, None) => (domain[0], domain[1], initial.clone()),
            (CaseConfig::Named(_), None) => unreachable!(),
        };
        let g = &self.grid;
        let dx = match (g.m, g.dx) {
            (Some(_), Some(_)) => return Err(CliError::Config("give either `grid.m` or `grid.dx`, not both".into())),
            (Some(m), None) => (b - a) / m as f64,
            (None, Some(dx)) => dx,
            (None, None) => base.as_ref().map(|c| c.dx).ok_or_else(|| missing("dx"))?,
        };
        let dt = g.dt.or(base.as_ref().map(|c| c.dt)).ok_or_else(|| missing("dt"))?;
        let t_final = g.t_final.or(base.as_ref().map(|c| c.t_final)).ok_or_else(|| missing("t_final"))?;
        let case = match base {
            Some(c) => BenchmarkCase { dx, dt, t_final, ..c },
            None => BenchmarkCase::custom(a, b, t_final, dx, dt, initial),
        };
        case.grid()?;
        Ok(case)
    }

    /// The configured reference recipe, else the case's standard one.
    pub fn recipe(&self, case: &BenchmarkCase) -> Option<ReferenceRecipe> {
        match &self.reference {
            Some(r) => Some(ReferenceRecipe {
                scheme: SchemeSpec::new(self.equation, &r.scheme, &r.params),
                dx: r.dx,
                dt: r.dt,
            }),
            None => case.reference_recipe(),
        }
    }
}
