//! Schemes for the BBM equation `u_t − u u_x − u_xxt = 0`.
//!
//! Every scheme is written in divergence form `A = D_m F₁ + D_n G₁`, so mass
//! is conserved by construction. The energy-conserving members (EC₆, EC₈,
//! EC₁₀) also carry a discrete law for `⅓u³`; the momentum-conserving ones
//! (MC₆, MC₈) a law for `½(u² + u_x²)`.
//!
//! Formulas are anchored at node `(0, 0)` with the usual shift subscripts:
//! `u(-1, 0)` is `u_{-1,0}`.

use serde::{Deserialize, Serialize};

use crate::claw::LawKind;
use crate::scheme::{check_scaled, fmt_param, Extent, Mutation, SchemeError};
use crate::stencil::{at, theta, Lat, Ops};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BbmSchemeId {
    #[serde(rename = "EC6")]
    Ec6,
    #[serde(rename = "MC6")]
    Mc6,
    #[serde(rename = "EC8")]
    Ec8,
    #[serde(rename = "MC8")]
    Mc8,
    #[serde(rename = "EC10")]
    Ec10,
    #[serde(rename = "LS")]
    Ls,
    #[serde(rename = "PB")]
    Pb,
}

impl BbmSchemeId {
    pub const ALL: [BbmSchemeId; 7] = [Self::Ec6, Self::Mc6, Self::Ec8, Self::Mc8, Self::Ec10, Self::Ls, Self::Pb];

    pub fn label(self) -> &'static str {
        match self {
            Self::Ec6 => "EC6",
            Self::Mc6 => "MC6",
            Self::Ec8 => "EC8",
            Self::Mc8 => "MC8",
            Self::Ec10 => "EC10",
            Self::Ls => "LS",
            Self::Pb => "PB",
        }
    }

    pub fn parse(s: &str) -> Result<Self, SchemeError> {
        Self::ALL
            .into_iter()
            .find(|id| id.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| SchemeError::UnknownScheme(s.to_string()))
    }

    /// Number of free parameters the family takes.
    pub fn arity(self) -> usize {
        match self {
            Self::Mc6 | Self::Ec10 => 1,
            Self::Mc8 => 2,
            _ => 0,
        }
    }

    /// Schemes on the 6- and 10-point stencils are centred on a node; the
    /// others on a cell midpoint. This picks the `v` used by the fallback
    /// invariants.
    pub fn node_centred(self) -> bool {
        matches!(self, Self::Ec6 | Self::Mc6 | Self::Ec10)
    }
}

/// Unscaled free parameters; `λ = α·Δ_max²`, `ν = β·Δ_max²`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BbmParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta_max: f64,
}

impl BbmParams {
    pub fn new(alpha: f64, beta: f64, delta_max: f64) -> Self {
        Self { alpha, beta, delta_max }
    }

    pub fn lambda(&self) -> f64 {
        self.alpha * self.delta_max * self.delta_max
    }

    pub fn nu(&self) -> f64 {
        self.beta * self.delta_max * self.delta_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BbmScheme {
    Ec6,
    Mc6 { lambda: f64 },
    Ec8,
    Mc8 { lambda: f64, nu: f64 },
    Ec10 { lambda: f64 },
    Ls,
    Pb,
}

impl BbmScheme {
    pub fn new(id: BbmSchemeId, params: &BbmParams) -> Result<Self, SchemeError> {
        let lambda = || check_scaled("λ", params.lambda());
        Ok(match id {
            BbmSchemeId::Ec6 => Self::Ec6,
            BbmSchemeId::Mc6 => Self::Mc6 { lambda: lambda()? },
            BbmSchemeId::Ec8 => Self::Ec8,
            BbmSchemeId::Mc8 => Self::Mc8 { lambda: lambda()?, nu: check_scaled("ν", params.nu())? },
            BbmSchemeId::Ec10 => Self::Ec10 { lambda: lambda()? },
            BbmSchemeId::Ls => Self::Ls,
            BbmSchemeId::Pb => Self::Pb,
        })
    }

    pub fn id(&self) -> BbmSchemeId {
        match self {
            Self::Ec6 => BbmSchemeId::Ec6,
            Self::Mc6 { .. } => BbmSchemeId::Mc6,
            Self::Ec8 => BbmSchemeId::Ec8,
            Self::Mc8 { .. } => BbmSchemeId::Mc8,
            Self::Ec10 { .. } => BbmSchemeId::Ec10,
            Self::Ls => BbmSchemeId::Ls,
            Self::Pb => BbmSchemeId::Pb,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Mc6 { lambda } | Self::Ec10 { lambda } => {
                format!("{}[λ={}]", self.id().label(), fmt_param(*lambda))
            }
            Self::Mc8 { lambda, nu } => format!("MC8[λ={},ν={}]", fmt_param(*lambda), fmt_param(*nu)),
            _ => self.id().label().to_string(),
        }
    }

    pub fn extent(&self) -> Extent {
        match self {
            Self::Ec6 | Self::Mc6 { .. } => Extent::one_step(-1, 1),
            Self::Ec8 | Self::Mc8 { .. } | Self::Ls => Extent::one_step(-2, 1),
            Self::Ec10 { .. } => Extent::one_step(-2, 2),
            Self::Pb => Extent { lo: -2, hi: 1, levels: 3 },
        }
    }

    pub fn preserved(&self) -> &'static [LawKind] {
        match self {
            Self::Ec6 | Self::Ec8 | Self::Ec10 { .. } => &[LawKind::Mass, LawKind::Energy],
            Self::Mc6 { .. } | Self::Mc8 { .. } => &[LawKind::Mass, LawKind::Momentum],
            Self::Ls | Self::Pb => &[LawKind::Mass],
        }
    }

    /// `Ã = D_m F̃₁ + D_n G̃₁` at the anchor.
    #[inline]
    pub fn residual<U: Lat>(&self, o: Ops, u: U) -> f64 {
        let t = Mutation::NONE;
        let f1 = move |i, j| self.mass_flux(o, at(u, i, j), t);
        let g1 = move |i, j| self.mass_density(o, at(u, i, j), t);
        o.dm(f1)(0, 0) + o.dn(g1)(0, 0)
    }

    /// `G̃₁`.
    pub fn mass_density<U: Lat>(&self, o: Ops, u: U, t: Mutation) -> f64 {
        match self {
            Self::Ec6 | Self::Mc6 { .. } | Self::Ec10 { .. } => t.term(0, u(0, 0)),
            Self::Ec8 | Self::Mc8 { .. } | Self::Ls => t.term(0, o.mum(u)(-1, 0)),
            Self::Pb => t.term(0, o.mum(o.mum(o.mum(o.mun(u))))(-2, -1)),
        }
    }

    /// `F̃₁`.
    pub fn mass_flux<U: Lat>(&self, o: Ops, u: U, t: Mutation) -> f64 {
        match *self {
            Self::Ec6 => ec6_flux(o, u, t),
            Self::Mc6 { lambda } => {
                let (p, q) = (o.mun(u)(-1, 0), o.mun(u)(0, 0));
                t.term(0, -(p * p + q * q + p * q) / 6.0) + t.term(1, (lambda - 1.0) * o.dm(o.dn(u))(-1, 0))
            }
            Self::Ec8 => {
                let quad = move |i, j| {
                    let (a, b) = (o.mum(u)(i, j + 1), o.mum(u)(i, j));
                    -(a * a + b * b + a * b) / 6.0
                };
                t.term(0, o.mum(quad)(-2, 0)) + t.term(1, -o.mum(o.dm(o.dn(u)))(-2, 0))
            }
            Self::Mc8 { lambda, nu } => {
                let un = o.mun(u);
                let nl = -un(-1, 0) * (un(-2, 0) + un(-1, 0) + un(0, 0)) / 6.0;
                let disp = (2.0 * lambda - 1.0) * o.dn(o.dm(o.mum(u)))(-2, 0);
                let extra = o.dm(un)(-2, 0) * o.dm(un)(-1, 0) + o.dm2(un)(-2, 0) * (un(-2, 0) + un(0, 0));
                t.term(0, nl) + t.term(1, disp) + t.term(2, nu * extra)
            }
            Self::Ec10 { lambda } => {
                let quad = move |i, j| {
                    let (a, b) = (u(i, j), u(i, j + 1));
                    -(a * a + b * b + a * b) / 6.0
                };
                let mixed = move |i, j| -o.dm(o.dn(o.mum(u)))(i - 1, j);
                let space = move |i, j| -lambda * o.dm2(o.mun(u))(i - 1, j);
                t.term(0, o.mum(quad)(-1, 0)) + t.term(1, o.mum(mixed)(-1, 0)) + t.term(2, o.mum(space)(-1, 0))
            }
            Self::Ls => {
                let un = o.mun(u)(-1, 0);
                t.term(0, -0.5 * un * un) + t.term(1, -o.dn(o.dm(o.mum(u)))(-2, 0))
            }
            Self::Pb => {
                let avg = o.mum(o.mun(u));
                let quad = move |i, j| {
                    let a = avg(i, j);
                    -0.5 * a * a
                };
                let mixed = neg_lat(o.dn(o.dm(u)));
                t.term(0, o.mum(o.mun(quad))(-2, -1)) + t.term(1, o.mum(o.mun(mixed))(-2, -1))
            }
        }
    }

    pub fn density<U: Lat>(&self, kind: LawKind, o: Ops, u: U, t: Mutation) -> f64 {
        match (kind, *self) {
            (LawKind::Mass, _) => self.mass_density(o, u, t),
            (LawKind::Energy, Self::Ec6) => {
                let a = o.mum(u);
                let sq = move |i, j| {
                    let v = a(i, j);
                    v * v
                };
                t.term(0, u(0, 0) * o.mum(sq)(-1, 0) / 3.0)
            }
            (LawKind::Energy, Self::Ec8) => {
                let a = o.mum(u)(-1, 0);
                t.term(0, a * a * a / 3.0)
            }
            (LawKind::Energy, Self::Ec10 { lambda }) => {
                let c = u(0, 0);
                t.term(0, c * c * c / 3.0) + t.term(1, lambda * c * o.dm2(u)(-1, 0))
            }
            (LawKind::Momentum, Self::Mc6 { lambda }) => {
                let du = o.dm(u);
                let sq = move |i, j| {
                    let v = du(i, j);
                    v * v
                };
                let c = u(0, 0);
                t.term(0, 0.5 * c * c)
                    + t.term(1, 0.5 * o.mum(sq)(-1, 0))
                    + t.term(2, 0.5 * lambda * c * o.dm2(u)(-1, 0))
            }
            (LawKind::Momentum, Self::Mc8 { lambda, .. }) => {
                let a = o.mum(u)(-1, 0);
                let d = o.dm(o.mum(u));
                let sq = move |i, j| {
                    let v = d(i, j);
                    v * v
                };
                t.term(0, 0.5 * a * a)
                    + t.term(1, 0.5 * o.mum(sq)(-2, 0))
                    + t.term(2, lambda * a * o.dm2(o.mum(u))(-2, 0))
            }
            _ => f64::NAN,
        }
    }

    pub fn flux<U: Lat>(&self, kind: LawKind, o: Ops, u: U, t: Mutation) -> f64 {
        match (kind, *self) {
            (LawKind::Mass, _) => self.mass_flux(o, u, t),
            (LawKind::Energy, Self::Ec6) => {
                let f1 = ec6_flux(o, u, Mutation::NONE);
                let dn = o.dn(u);
                let last = -o.dx * o.dx * o.mum(o.mun(u))(-1, 0) * theta(o, u, u) / 3.0;
                t.term(0, -f1 * f1) + t.term(1, dn(-1, 0) * dn(0, 0)) + t.term(2, last)
            }
            (LawKind::Energy, Self::Ec8) => {
                let phi = move |i: isize, j: isize| ec6_flux(o, at(u, i + 1, j), Mutation::NONE);
                let dn = o.dn(u)(-1, 0);
                t.term(0, -phi(-2, 0) * phi(-1, 0)) + t.term(1, dn * dn)
            }
            (LawKind::Energy, Self::Ec10 { lambda }) => {
                let phi = move |i, j| ec10_phi(o, u, lambda, i, j);
                let dn = o.dn(u);
                t.term(0, -phi(0, 0) * phi(-1, 0))
                    + t.term(1, dn(0, 0) * dn(-1, 0))
                    + t.term(2, -2.0 * lambda * theta(o, u, u))
            }
            (LawKind::Momentum, Self::Mc6 { lambda }) => {
                let un = o.mun(u);
                let c = o.mum(un)(-1, 0);
                t.term(0, -un(-1, 0) * un(0, 0) * c / 3.0)
                    + t.term(1, -c * o.dm(o.dn(u))(-1, 0))
                    + t.term(2, lambda * theta(o, u, u))
            }
            (LawKind::Momentum, Self::Mc8 { lambda, nu }) => {
                let mm = o.mum(o.mun(u));
                let mmm = o.mum(o.mum(o.mun(u)))(-2, 0);
                let dmix = o.dm(o.dn(o.mum(u)))(-2, 0);
                let cross = mmm * dmix - o.dn(o.mum(o.mum(u)))(-2, 0) * o.dm(o.mum(o.mun(u)))(-2, 0);
                t.term(0, -o.mun(u)(-1, 0) * mm(-2, 0) * mm(-1, 0) / 3.0)
                    + t.term(1, -mmm * dmix)
                    + t.term(2, lambda * cross)
                    + t.term(3, 2.0 * nu * mm(-2, 0) * mm(-1, 0) * o.dm2(o.mun(u))(-2, 0))
            }
            _ => f64::NAN,
        }
    }

    /// The characteristic `Q̃` of a preserved law.
    pub fn characteristic<U: Lat>(&self, kind: LawKind, o: Ops, u: U) -> f64 {
        match (kind, *self) {
            (LawKind::Mass, _) => 1.0,
            (LawKind::Energy, Self::Ec6) => {
                let f1 = move |i, j| ec6_flux(o, at(u, i, j), Mutation::NONE);
                -2.0 * o.mum(f1)(0, 0)
            }
            (LawKind::Energy, Self::Ec8) => -2.0 * ec6_flux(o, u, Mutation::NONE),
            (LawKind::Energy, Self::Ec10 { lambda }) => -2.0 * ec10_phi(o, u, lambda, 0, 0),
            (LawKind::Momentum, Self::Mc6 { .. }) => o.mun(u)(0, 0),
            (LawKind::Momentum, Self::Mc8 { .. }) => o.mum(o.mun(u))(-1, 0),
            _ => f64::NAN,
        }
    }

    /// Number of separately signed terms in the printed `(flux, density)`.
    pub fn term_counts(&self, kind: LawKind) -> (usize, usize) {
        match (kind, self) {
            (LawKind::Mass, Self::Mc8 { .. } | Self::Ec10 { .. }) => (3, 1),
            (LawKind::Mass, _) => (2, 1),
            (LawKind::Energy, Self::Ec6) => (3, 1),
            (LawKind::Energy, Self::Ec8) => (2, 1),
            (LawKind::Energy, Self::Ec10 { .. }) => (3, 2),
            (LawKind::Momentum, Self::Mc6 { .. }) => (3, 3),
            (LawKind::Momentum, Self::Mc8 { .. }) => (4, 3),
            _ => (0, 0),
        }
    }
}

#[inline]
fn neg_lat<F: Lat>(f: F) -> impl Lat {
    move |i, j| -f(i, j)
}

/// EC₆ mass flux; also the `φ` building block of EC₈.
#[inline]
fn ec6_flux<U: Lat>(o: Ops, u: U, t: Mutation) -> f64 {
    let (a, b) = (o.mum(u)(-1, 1), o.mum(u)(-1, 0));
    t.term(0, -(a * a + b * b + a * b) / 6.0) + t.term(1, -o.dm(o.dn(u))(-1, 0))
}

/// EC₁₀'s `φ_{i,j}`.
#[inline]
fn ec10_phi<U: Lat>(o: Ops, u: U, lambda: f64, i: isize, j: isize) -> f64 {
    let (a, b) = (u(i, j), u(i, j + 1));
    -(a * a + b * b + a * b) / 6.0 - o.dm(o.dn(o.mum(u)))(i - 1, j) - lambda * o.dm2(o.mun(u))(i - 1, j)
}

/// Density of the momentum (`Err₂`) or energy (`Err₃`) invariant for
/// schemes that do not carry one, with `v = u` for node-centred schemes and
/// `v = μ_m u_{-1}` otherwise.
pub fn fallback_density<U: Lat>(kind: LawKind, node_centred: bool, o: Ops, u: U) -> f64 {
    let v = move |i, j| if node_centred { u(i, j) } else { o.mum(u)(i - 1, j) };
    match kind {
        LawKind::Mass => v(0, 0),
        LawKind::Momentum => {
            let dv = o.dm(v);
            let sq = move |i, j| {
                let d = dv(i, j);
                d * d
            };
            let c = v(0, 0);
            0.5 * (c * c + o.mum(sq)(-1, 0))
        }
        LawKind::Energy => {
            let c = v(0, 0);
            c * c * c / 3.0
        }
    }
}
