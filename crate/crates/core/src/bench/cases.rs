use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::grid::{FieldLevel, GridSpec};
use crate::scheme::{Equation, SchemeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseId {
    BbmSoliton,
    BbmTwoWave,
    NlsSoliton,
    NlsBreather,
    /// User-supplied domain and initial data.
    Custom,
}

impl CaseId {
    pub const ALL: [CaseId; 4] = [Self::BbmSoliton, Self::BbmTwoWave, Self::NlsSoliton, Self::NlsBreather];

    pub fn label(self) -> &'static str {
        match self {
            Self::BbmSoliton => "bbm-soliton",
            Self::BbmTwoWave => "bbm-two-wave",
            Self::NlsSoliton => "nls-soliton",
            Self::NlsBreather => "nls-breather",
            Self::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self, BenchError> {
        Self::ALL
            .into_iter()
            .chain([Self::Custom])
            .find(|c| c.label() == s)
            .ok_or_else(|| BenchError::UnknownCase(s.to_string()))
    }

    pub fn has_exact(self) -> bool {
        matches!(self, Self::BbmSoliton | Self::NlsSoliton)
    }
}

/// Initial condition of a benchmark problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    /// Sum of BBM solitary waves `3c sech²(½(x − d))`, one `[c, d]` pair each.
    BbmWaves { waves: Vec<[f64; 2]> },
    /// NLS soliton with speed parameter `c` centred at `d`.
    NlsSoliton { c: f64, d: f64 },
    /// Real NLS data `A(1 + ε cos(kx))`.
    NlsModulated { amplitude: f64, epsilon: f64, wavenumber: f64 },
}

impl InitialData {
    pub fn equation(&self) -> Equation {
        match self {
            Self::BbmWaves { .. } => Equation::Bbm,
            Self::NlsSoliton { .. } | Self::NlsModulated { .. } => Equation::Nls,
        }
    }

    /// A single solitary wave and the NLS soliton travel unchanged in shape.
    pub fn has_exact(&self) -> bool {
        match self {
            Self::BbmWaves { waves } => waves.len() == 1,
            Self::NlsSoliton { .. } => true,
            Self::NlsModulated { .. } => false,
        }
    }

    pub fn level(&self, grid: &GridSpec, j: usize) -> FieldLevel {
        let t = grid.t(j);
        let period = grid.b - grid.a;
        // Travelling waves are evaluated at the periodic image of x nearest
        // their centre, so they wrap around the domain.
        let image = move |x: f64, centre: f64| centre + (x - centre + 0.5 * period).rem_euclid(period) - 0.5 * period;
        match self {
            Self::BbmWaves { waves } => FieldLevel::sample(grid, j, |x| {
                [waves.iter().map(|&[c, d]| bbm_soliton(image(x, d - c * t), t, c, d)).sum()]
            }),
            &Self::NlsSoliton { c, d } => {
                FieldLevel::sample(grid, j, |x| nls_soliton(image(x, d + 2.0 * c * t), t, c, d))
            }
            &Self::NlsModulated { amplitude, epsilon, wavenumber } => {
                FieldLevel::sample(grid, j, |x| [amplitude * (1.0 + epsilon * (wavenumber * x).cos()), 0.0])
            }
        }
    }
}

/// Fine-grid run that stands in for the exact solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRecipe {
    pub scheme: SchemeSpec,
    pub dx: f64,
    pub dt: f64,
}

/// A benchmark problem together with the grid it is solved on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCase {
    pub id: CaseId,
    pub a: f64,
    pub b: f64,
    pub t_final: f64,
    pub dx: f64,
    pub dt: f64,
    pub initial: InitialData,
}

impl BenchmarkCase {
    /// The problem on the grid of the standard benchmark.
    ///
    /// # Panics
    ///
    /// For [`CaseId::Custom`], which has no standard form.
    pub fn standard(id: CaseId) -> Self {
        let (a, b, t_final, dx, dt) = match id {
            CaseId::BbmSoliton => (-40.0, 40.0, 5.0, 0.05, 0.05),
            CaseId::BbmTwoWave => (-100.0, 100.0, 15.0, 0.2, 0.015),
            CaseId::NlsSoliton => (-20.0, 20.0, 2.0, 0.1, 0.02),
            CaseId::NlsBreather => (-5.0, 5.0, 60.0, 0.05, 0.2),
            CaseId::Custom => panic!("a custom case has no standard configuration"),
        };
        let initial = match id {
            CaseId::BbmSoliton => InitialData::BbmWaves { waves: vec![[BBM_C, BBM_D]] },
            CaseId::BbmTwoWave => {
                InitialData::BbmWaves { waves: vec![[TWO_WAVE[0], TWO_WAVE[2]], [TWO_WAVE[1], TWO_WAVE[3]]] }
            }
            CaseId::NlsSoliton => InitialData::NlsSoliton { c: NLS_C, d: NLS_D },
            _ => InitialData::NlsModulated {
                amplitude: std::f64::consts::FRAC_1_SQRT_2,
                epsilon: 0.1,
                wavenumber: std::f64::consts::FRAC_1_SQRT_2,
            },
        };
        Self { id, a, b, t_final, dx, dt, initial }
    }

    pub fn custom(a: f64, b: f64, t_final: f64, dx: f64, dt: f64, initial: InitialData) -> Self {
        Self { id: CaseId::Custom, a, b, t_final, dx, dt, initial }
    }

    pub fn with_steps(&self, dx: f64, dt: f64) -> Self {
        Self { dx, dt, ..self.clone() }
    }

    pub fn with_final_time(&self, t_final: f64) -> Self {
        Self { t_final, ..self.clone() }
    }

    pub fn grid(&self) -> Result<GridSpec, BenchError> {
        Ok(GridSpec::from_steps(self.a, self.b, self.dx, self.dt, self.t_final)?)
    }

    pub fn equation(&self) -> Equation {
        self.initial.equation()
    }

    pub fn has_exact(&self) -> bool {
        self.initial.has_exact()
    }

    pub fn initial_level(&self, grid: &GridSpec) -> FieldLevel {
        self.initial.level(grid, 0)
    }

    /// Exact solution at time level `j` when one is known in closed form.
    pub fn exact_level(&self, grid: &GridSpec, j: usize) -> Option<FieldLevel> {
        self.has_exact().then(|| self.initial.level(grid, j))
    }

    pub fn reference_recipe(&self) -> Option<ReferenceRecipe> {
        match self.id {
            CaseId::BbmTwoWave => {
                Some(ReferenceRecipe { scheme: SchemeSpec::new(Equation::Bbm, "EC10", &[0.0]), dx: 0.05, dt: 0.003 })
            }
            CaseId::NlsBreather => {
                Some(ReferenceRecipe { scheme: SchemeSpec::new(Equation::Nls, "EC6", &[0.0]), dx: 0.0125, dt: 0.005 })
            }
            _ => None,
        }
    }
}

const BBM_C: f64 = 5.0;
const BBM_D: f64 = 25.0;
/// `c₁, c₂, d₁, d₂` of the two-wave initial condition.
const TWO_WAVE: [f64; 4] = [6.0, 2.0, 40.0, 15.0];
const NLS_C: f64 = 2.5;
const NLS_D: f64 = -5.0;

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// Solitary wave `3c sech²(½(x + ct − d))` of `u_t − u u_x − u_xxt = 0`.
pub fn exact_bbm_soliton(x: f64, t: f64, c: f64, d: f64) -> f64 {
    bbm_soliton(x, t, c, d)
}

fn bbm_soliton(x: f64, t: f64, c: f64, d: f64) -> f64 {
    3.0 * c * sech(0.5 * (x + c * t - d)).powi(2)
}

/// Soliton `√2 sech(x − d − 2ct) exp{i c(x − d) − i(c² − 1)t}` of
/// `iψ_t + ψ_xx + |ψ|²ψ = 0`, returned as `(Re ψ, Im ψ)`.
pub fn exact_nls_soliton(x: f64, t: f64, c: f64, d: f64) -> (f64, f64) {
    let [u, v] = nls_soliton(x, t, c, d);
    (u, v)
}

fn nls_soliton(x: f64, t: f64, c: f64, d: f64) -> [f64; 2] {
    let amp = std::f64::consts::SQRT_2 * sech(x - d - 2.0 * c * t);
    let phase = c * (x - d) - (c * c - 1.0) * t;
    [amp * phase.cos(), amp * phase.sin()]
}
