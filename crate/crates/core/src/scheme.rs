//! Uniform interface over the BBM and NLS scheme families.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bbm::{BbmParams, BbmScheme, BbmSchemeId};
use crate::claw::{ConservationLawDef, LawKind};
use crate::grid::{GridError, Local, StencilWindow};
use crate::nls::{NlsParams, NlsScheme, NlsSchemeId};
use crate::stencil::Ops;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("{scheme} needs a window of {needed} levels, got {got}")]
    WindowTooShort { scheme: String, needed: usize, got: usize },
    #[error("{scheme} works on {expected} components, window has {got}")]
    BadComponentCount { scheme: String, expected: usize, got: usize },
    #[error("scaled parameter {name} = {value} is outside (−1, 1)")]
    ParameterRange { name: &'static str, value: f64 },
    #[error("law and scheme belong to different families ({law} vs {scheme})")]
    MismatchedFamily { law: String, scheme: String },
    #[error("{scheme} takes {expected} parameters, got {got}")]
    Arity { scheme: String, expected: usize, got: usize },
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    Bbm,
    Nls,
}

impl Equation {
    pub fn components(self) -> usize {
        match self {
            Equation::Bbm => 1,
            Equation::Nls => 2,
        }
    }
}

/// Selects one term of a printed flux or density whose sign is flipped.
/// Used to check that the identity suite detects transcription errors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Mutation(Option<usize>);

impl Mutation {
    pub const NONE: Mutation = Mutation(None);

    pub fn flip(term: usize) -> Self {
        Mutation(Some(term))
    }

    #[inline]
    pub fn term(self, k: usize, value: f64) -> f64 {
        if self.0 == Some(k) {
            -value
        } else {
            value
        }
    }
}

/// Offsets a scheme reads, relative to its anchor: spatial `lo..=hi`, and
/// the number of stored levels (2 for one-step schemes, 3 for PB).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Extent {
    pub lo: isize,
    pub hi: isize,
    pub levels: usize,
}

impl Extent {
    pub const fn one_step(lo: isize, hi: isize) -> Self {
        Self { lo, hi, levels: 2 }
    }

    /// Half-width of the coupling between residual nodes and unknown nodes.
    pub fn reach(&self) -> usize {
        self.lo.unsigned_abs().max(self.hi.unsigned_abs())
    }
}

/// A concrete implicit scheme with all parameters already scaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Bbm(BbmScheme),
    Nls(NlsScheme),
}

impl Scheme {
    pub fn equation(&self) -> Equation {
        match self {
            Scheme::Bbm(_) => Equation::Bbm,
            Scheme::Nls(_) => Equation::Nls,
        }
    }

    pub fn q(&self) -> usize {
        self.equation().components()
    }

    pub fn name(&self) -> String {
        match self {
            Scheme::Bbm(s) => s.name(),
            Scheme::Nls(s) => s.name(),
        }
    }

    pub fn extent(&self) -> Extent {
        match self {
            Scheme::Bbm(s) => s.extent(),
            Scheme::Nls(s) => s.extent(),
        }
    }

    pub fn levels(&self) -> usize {
        self.extent().levels
    }

    /// Residual components at one anchor. `out` has `q` entries.
    #[inline]
    pub fn residual_at(&self, o: Ops, loc: Local<'_>, out: &mut [f64]) {
        match self {
            Scheme::Bbm(s) => out[0] = s.residual(o, loc.field(0)),
            Scheme::Nls(s) => {
                let (r1, r2) = s.residual(o, loc.field(0), loc.field(1));
                out[0] = r1;
                out[1] = r2;
            }
        }
    }

    pub fn check_window(&self, w: &StencilWindow<'_>) -> Result<(), SchemeError> {
        if w.len() < self.levels() {
            return Err(SchemeError::WindowTooShort { scheme: self.name(), needed: self.levels(), got: w.len() });
        }
        if w.q() != self.q() {
            return Err(SchemeError::BadComponentCount { scheme: self.name(), expected: self.q(), got: w.q() });
        }
        Ok(())
    }

    /// Residual at every node; `result[c][i]`.
    pub fn residual(&self, w: &StencilWindow<'_>) -> Result<Vec<Vec<f64>>, SchemeError> {
        self.check_window(w)?;
        let o = Ops::new(w.grid.dx, w.grid.dt);
        let q = self.q();
        let mut out = vec![vec![0.0; w.grid.m]; q];
        let mut r = [0.0; 2];
        for i in 0..w.grid.m {
            self.residual_at(o, w.at(i), &mut r[..q]);
            for c in 0..q {
                out[c][i] = r[c];
            }
        }
        Ok(out)
    }

    /// The discrete conservation laws this scheme preserves exactly.
    pub fn conservation_laws(&self) -> Vec<ConservationLawDef> {
        let kinds: &[LawKind] = match self {
            Scheme::Bbm(s) => s.preserved(),
            Scheme::Nls(s) => s.preserved(),
        };
        kinds.iter().map(|&kind| ConservationLawDef { kind, scheme: *self }).collect()
    }

    pub fn preserves(&self, kind: LawKind) -> bool {
        self.conservation_laws().iter().any(|l| l.kind == kind)
    }
}

impl From<BbmScheme> for Scheme {
    fn from(s: BbmScheme) -> Self {
        Scheme::Bbm(s)
    }
}

impl From<NlsScheme> for Scheme {
    fn from(s: NlsScheme) -> Self {
        Scheme::Nls(s)
    }
}

/// A scheme named by its label and unscaled free parameters, as written in
/// configuration files and tables (`MC6` with `[8]` reads as MC₆(8)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub equation: Equation,
    pub scheme: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl SchemeSpec {
    pub fn new(equation: Equation, scheme: &str, params: &[f64]) -> Self {
        Self { equation, scheme: scheme.to_string(), params: params.to_vec() }
    }

    pub fn arity(&self) -> Result<usize, SchemeError> {
        Ok(match self.equation {
            Equation::Bbm => BbmSchemeId::parse(&self.scheme)?.arity(),
            Equation::Nls => NlsSchemeId::parse(&self.scheme)?.arity(),
        })
    }

    /// Missing trailing parameters default to zero.
    pub fn build(&self, delta_max: f64) -> Result<Scheme, SchemeError> {
        let arity = self.arity()?;
        if self.params.len() > arity {
            return Err(SchemeError::Arity { scheme: self.scheme.clone(), expected: arity, got: self.params.len() });
        }
        let p = |k: usize| self.params.get(k).copied().unwrap_or(0.0);
        Ok(match self.equation {
            Equation::Bbm => {
                let id = BbmSchemeId::parse(&self.scheme)?;
                Scheme::Bbm(BbmScheme::new(id, &BbmParams::new(p(0), p(1), delta_max))?)
            }
            Equation::Nls => {
                let id = NlsSchemeId::parse(&self.scheme)?;
                let params = NlsParams { alpha: p(0), eta: p(1), nu: p(2), delta_max };
                Scheme::Nls(NlsScheme::new(id, &params)?)
            }
        })
    }

    /// Table label such as `MC6(8)`, `MC8(-4,3.3)` or `LS`.
    pub fn label(&self) -> String {
        let id = match self.equation {
            Equation::Bbm => BbmSchemeId::parse(&self.scheme).map(|i| i.label()),
            Equation::Nls => NlsSchemeId::parse(&self.scheme).map(|i| i.label()),
        }
        .unwrap_or(&self.scheme);
        let arity = self.arity().unwrap_or(self.params.len());
        if arity == 0 {
            return id.to_string();
        }
        let vals: Vec<String> = (0..arity).map(|k| fmt_param(self.params.get(k).copied().unwrap_or(0.0))).collect();
        format!("{id}({})", vals.join(","))
    }

    pub fn with_params(&self, params: &[f64]) -> Self {
        Self { params: params.to_vec(), ..self.clone() }
    }
}

pub(crate) fn check_scaled(name: &'static str, value: f64) -> Result<f64, SchemeError> {
    if value.is_finite() && value.abs() < 1.0 {
        Ok(value)
    } else {
        Err(SchemeError::ParameterRange { name, value })
    }
}

/// Formats a parameter the way scheme labels print it, e.g. `MC6(8)`.
pub(crate) fn fmt_param(v: f64) -> String {
    let s = format!("{v}");
    if s.len() > 10 {
        format!("{v:.6}")
    } else {
        s
    }
}
