//! Schemes for the NLS equation `iψ_t + ψ_xx + |ψ|²ψ = 0` in real form.
//!
//! With `ψ = u + iv` the equation is the pair `(A[u, v], A[−v, u]) = 0`,
//! `A[a, b] = a_t + b_xx + (a² + b²) b`. Each scheme here is a discrete
//! `Ã[a, b]` evaluated the same way on both pairs.

use serde::{Deserialize, Serialize};

use crate::claw::LawKind;
use crate::grid::FieldLevel;
use crate::scheme::{check_scaled, fmt_param, Extent, Mutation, SchemeError};
use crate::stencil::{modsq, neg, square, theta, Lat, Ops};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NlsSchemeId {
    /// `EC₆(α) = Ã(αΔ_max², 0, 0)`.
    #[serde(rename = "EC6")]
    Ec6,
    /// The full three-parameter energy-conserving family.
    #[serde(rename = "EC")]
    Ec,
    #[serde(rename = "MC6")]
    Mc6,
    #[serde(rename = "MC-AL")]
    McAl,
    #[serde(rename = "M/EC-AL(0)")]
    MecAl0,
    #[serde(rename = "M/EC-AL(1)")]
    MecAl1,
    #[serde(rename = "MS")]
    Ms,
    #[serde(rename = "MoL-M")]
    MolM,
}

impl NlsSchemeId {
    pub const ALL: [NlsSchemeId; 8] =
        [Self::Ec6, Self::Ec, Self::Mc6, Self::McAl, Self::MecAl0, Self::MecAl1, Self::Ms, Self::MolM];

    pub fn label(self) -> &'static str {
        match self {
            Self::Ec6 => "EC6",
            Self::Ec => "EC",
            Self::Mc6 => "MC6",
            Self::McAl => "MC-AL",
            Self::MecAl0 => "M/EC-AL(0)",
            Self::MecAl1 => "M/EC-AL(1)",
            Self::Ms => "MS",
            Self::MolM => "MoL-M",
        }
    }

    pub fn parse(s: &str) -> Result<Self, SchemeError> {
        Self::ALL
            .into_iter()
            .find(|id| id.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| SchemeError::UnknownScheme(s.to_string()))
    }

    pub fn arity(self) -> usize {
        match self {
            Self::Ec6 | Self::Mc6 => 1,
            Self::Ec => 3,
            _ => 0,
        }
    }
}

/// Unscaled coefficients: `λ = α·Δ_max²`, `η = η̂·Δ_max²`, `ν = ν̂·Δ_max²`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NlsParams {
    pub alpha: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub nu: f64,
    pub delta_max: f64,
}

impl NlsParams {
    pub fn new(alpha: f64, delta_max: f64) -> Self {
        Self { alpha, eta: 0.0, nu: 0.0, delta_max }
    }

    fn scale(&self, v: f64) -> f64 {
        v * self.delta_max * self.delta_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NlsScheme {
    Ec {
        lambda: f64,
        eta: f64,
        nu: f64,
    },
    Mc6 {
        lambda: f64,
    },
    McAl,
    /// `s ∈ {0, 1}`.
    MecAl {
        s: u8,
    },
    Ms,
    MolM,
}

impl NlsScheme {
    pub fn new(id: NlsSchemeId, p: &NlsParams) -> Result<Self, SchemeError> {
        Ok(match id {
            NlsSchemeId::Ec6 => Self::Ec { lambda: check_scaled("λ", p.scale(p.alpha))?, eta: 0.0, nu: 0.0 },
            NlsSchemeId::Ec => Self::Ec {
                lambda: check_scaled("λ", p.scale(p.alpha))?,
                eta: check_scaled("η", p.scale(p.eta))?,
                nu: check_scaled("ν", p.scale(p.nu))?,
            },
            NlsSchemeId::Mc6 => Self::Mc6 { lambda: check_scaled("λ", p.scale(p.alpha))? },
            NlsSchemeId::McAl => Self::McAl,
            NlsSchemeId::MecAl0 => Self::MecAl { s: 0 },
            NlsSchemeId::MecAl1 => Self::MecAl { s: 1 },
            NlsSchemeId::Ms => Self::Ms,
            NlsSchemeId::MolM => Self::MolM,
        })
    }

    pub fn name(&self) -> String {
        match *self {
            Self::Ec { lambda, eta: 0.0, nu: 0.0 } => format!("EC6[λ={}]", fmt_param(lambda)),
            Self::Ec { lambda, eta, nu } => {
                format!("EC[λ={},η={},ν={}]", fmt_param(lambda), fmt_param(eta), fmt_param(nu))
            }
            Self::Mc6 { lambda } => format!("MC6[λ={}]", fmt_param(lambda)),
            Self::McAl => "MC-AL".into(),
            Self::MecAl { s } => format!("M/EC-AL({s})"),
            Self::Ms => "MS".into(),
            Self::MolM => "MoL-M".into(),
        }
    }

    pub fn extent(&self) -> Extent {
        Extent::one_step(-1, 1)
    }

    pub fn preserved(&self) -> &'static [LawKind] {
        match self {
            Self::Ec { .. } => &[LawKind::Mass, LawKind::Energy],
            Self::Mc6 { .. } | Self::McAl => &[LawKind::Mass, LawKind::Momentum],
            Self::MecAl { .. } => &[LawKind::Mass, LawKind::Momentum, LawKind::Energy],
            Self::Ms | Self::MolM => &[],
        }
    }

    /// `(Ã[u, v], Ã[−v, u])` at the anchor.
    #[inline]
    pub fn residual<U: Lat, V: Lat>(&self, o: Ops, u: U, v: V) -> (f64, f64) {
        (self.half(o, u, v), self.half(o, neg(v), u))
    }

    /// `Ã[a, b]`.
    #[inline]
    pub fn half<A: Lat, B: Lat>(&self, o: Ops, a: A, b: B) -> f64 {
        let lin = o.dn(a)(0, 0) + o.dm2(o.mun(b))(-1, 0);
        let mb = o.mun(b)(0, 0);
        match *self {
            Self::Ec { lambda, eta, nu } => {
                let s = modsq(a, b);
                let c = o.mun(s)(0, 0) + eta * o.dm2(o.mun(s))(-1, 0) + nu * o.dm(o.dn(o.mum(s)))(-1, 0);
                lin + lambda * o.dn(o.dm2(a))(-1, 0) + c * mb
            }
            Self::Mc6 { lambda } => {
                let h = 0.5 * o.dx * o.dx;
                let ma = o.mun(a)(0, 0);
                let c = ma * (ma + h * o.dm2(o.mun(a))(-1, 0)) + mb * (mb + h * o.dm2(o.mun(b))(-1, 0));
                lin + lambda * o.dn(o.dm2(a))(-1, 0) + c * mb
            }
            Self::McAl => {
                let ma = o.mun(a)(0, 0);
                let side = o.mun(b)(-1, 0) + o.mun(b)(1, 0);
                lin + 0.5 * (ma * ma + mb * mb) * side
            }
            Self::MecAl { s } => {
                let k = 2 * s as isize - 1;
                lin + 0.5 * o.mun(modsq(a, b))(0, 0) * (b(-k, 1) + b(k, 0))
            }
            Self::Ms => {
                let (ma, mbb) = (o.mum(o.mun(a)), o.mum(o.mun(b)));
                let nl = move |i, j| {
                    let (x, y) = (ma(i, j), mbb(i, j));
                    (x * x + y * y) * y
                };
                o.dn(o.mum(o.mum(a)))(-1, 0) + o.dm2(o.mun(b))(-1, 0) + o.mum(nl)(-1, 0)
            }
            Self::MolM => {
                let ma = o.mun(a)(0, 0);
                lin + (ma * ma + mb * mb) * mb
            }
        }
    }

    pub fn density<U: Lat, V: Lat>(&self, kind: LawKind, o: Ops, u: U, v: V, t: Mutation) -> f64 {
        let lambda = match *self {
            Self::Ec { lambda, .. } | Self::Mc6 { lambda } => lambda,
            _ => 0.0,
        };
        match (kind, *self) {
            (LawKind::Mass, Self::Ec { .. } | Self::Mc6 { .. }) => {
                let (u0, v0) = (u(0, 0), v(0, 0));
                t.term(0, u0 * u0 + v0 * v0) + t.term(1, lambda * (u0 * o.dm2(u)(-1, 0) + v0 * o.dm2(v)(-1, 0)))
            }
            (LawKind::Mass, Self::McAl) => t.term(0, al_pair_density(u, v)),
            (LawKind::Mass, Self::MecAl { s }) => {
                let sg = sign(s);
                let cross = o.dm(o.mum(u))(-1, 0) * o.dm2(v)(-1, 0) - o.dm(o.mum(v))(-1, 0) * o.dm2(u)(-1, 0);
                t.term(0, al_pair_density(u, v)) + t.term(1, 0.5 * sg * o.dx * o.dt * cross)
            }
            (LawKind::Energy, Self::Ec { eta, .. }) => {
                let (du, dv) = (o.dm(u), o.dm(v));
                let grad = move |i, j| {
                    let (x, y) = (du(i, j), dv(i, j));
                    x * x + y * y
                };
                let s = modsq(u, v);
                let s0 = s(0, 0);
                t.term(0, o.mum(grad)(-1, 0)) + t.term(1, -0.5 * s0 * s0) + t.term(2, -0.5 * eta * s0 * o.dm2(s)(-1, 0))
            }
            (LawKind::Momentum, Self::Mc6 { lambda }) => {
                let (cu, cv) = (o.dm(o.mum(u))(-1, 0), o.dm(o.mum(v))(-1, 0));
                t.term(0, u(0, 0) * cv)
                    + t.term(1, -v(0, 0) * cu)
                    + t.term(2, lambda * (o.dm2(u)(-1, 0) * cv - o.dm2(v)(-1, 0) * cu))
            }
            (LawKind::Momentum, Self::McAl) => {
                let (cu, cv) = (o.dm(o.mum(u))(-1, 0), o.dm(o.mum(v))(-1, 0));
                t.term(0, u(0, 0) * cv) + t.term(1, -v(0, 0) * cu)
            }
            (LawKind::Momentum, Self::MecAl { s }) => {
                let sg = sign(s);
                let (cu, cv) = (o.dm(o.mum(u))(-1, 0), o.dm(o.mum(v))(-1, 0));
                let (u0, v0) = (u(0, 0), v(0, 0));
                let ring = sq(u(-1, 0)) + sq(u(1, 0)) + sq(v(-1, 0)) + sq(v(1, 0));
                let corr = (u0 * u0 + v0 * v0) * ring
                    + 2.0 * (u(-1, 0) + u(1, 0)) * o.dm2(u)(-1, 0)
                    + 2.0 * (v(-1, 0) + v(1, 0)) * o.dm2(v)(-1, 0);
                t.term(0, u0 * cv) + t.term(1, -v0 * cu) + t.term(2, o.dt / (8.0 * o.dx) * sg * corr)
            }
            (LawKind::Energy, Self::MecAl { s }) => {
                let sg = sign(s);
                let (u0, v0) = (u(0, 0), v(0, 0));
                let ring = sq(u(-1, 0)) + sq(u(1, 0)) + sq(v(-1, 0)) + sq(v(1, 0));
                let grad = o.dm(u)(-1, 0) * o.dm(u)(0, 0) + o.dm(v)(-1, 0) * o.dm(v)(0, 0);
                let twist = v0 * o.dm(o.mum(u))(-1, 0) - u0 * o.dm(o.mum(v))(-1, 0);
                t.term(0, -0.25 * (u0 * u0 + v0 * v0) * ring)
                    + t.term(1, grad)
                    + t.term(2, 2.0 * o.dx / o.dt * sg * twist)
            }
            _ => f64::NAN,
        }
    }

    pub fn flux<U: Lat, V: Lat>(&self, kind: LawKind, o: Ops, u: U, v: V, t: Mutation) -> f64 {
        let (mu, mv) = (o.mum(o.mun(u))(-1, 0), o.mum(o.mun(v))(-1, 0));
        let (xu, xv) = (o.dm(o.mun(u))(-1, 0), o.dm(o.mun(v))(-1, 0));
        match (kind, *self) {
            (LawKind::Mass, Self::Ec { lambda, .. } | Self::Mc6 { lambda }) => {
                t.term(0, 2.0 * mu * xv)
                    + t.term(1, -2.0 * xu * mv)
                    + t.term(2, 2.0 * lambda * (theta(o, u, u) + theta(o, v, v)))
            }
            (LawKind::Mass, Self::McAl) => {
                let h2 = o.dx * o.dx;
                t.term(0, 2.0 * mu * xv)
                    + t.term(1, -2.0 * mv * xu)
                    + t.term(2, -h2 * (theta(o, u, u) + theta(o, v, v)))
            }
            (LawKind::Mass, Self::MecAl { s }) => {
                let (sg, p) = (sign(s), s as isize);
                let h2 = o.dx * o.dx;
                let (du, dv) = (o.dn(u), o.dn(v));
                t.term(0, (u(-p, 1) + u(p - 1, 0)) * xv)
                    + t.term(1, -(v(-p, 1) + v(p - 1, 0)) * xu)
                    + t.term(2, -h2 * (theta(o, u, u) + theta(o, v, v)))
                    + t.term(3, 0.5 * sg * o.dx * o.dt * (du(-1, 0) * du(0, 0) + dv(-1, 0) * dv(0, 0)))
            }
            (LawKind::Energy, Self::Ec { lambda, eta, nu }) => {
                let (tu, tv) = (o.dn(o.mum(u))(-1, 0), o.dn(o.mum(v))(-1, 0));
                let s2 = modsq(u, v);
                let w = move |i| o.mun(u)(i, 0) * o.dn(u)(i, 0) + o.mun(v)(i, 0) * o.dn(v)(i, 0);
                let twist = tv * o.dm(o.dn(u))(-1, 0) - tu * o.dm(o.dn(v))(-1, 0);
                t.term(0, -2.0 * xu * tu)
                    + t.term(1, -2.0 * xv * tv)
                    + t.term(2, eta * theta(o, s2, s2))
                    + t.term(3, -2.0 * nu * w(0) * w(-1))
                    + t.term(4, -2.0 * lambda * twist)
            }
            (LawKind::Momentum, Self::Mc6 { lambda }) => {
                let (tu, tv) = (o.dn(o.mum(u))(-1, 0), o.dn(o.mum(v))(-1, 0));
                let pair = o.mun(u)(0, 0) * o.mun(u)(-1, 0) + o.mun(v)(0, 0) * o.mun(v)(-1, 0);
                let twist = o.dm(o.dn(u))(-1, 0) * xv - o.dm(o.dn(v))(-1, 0) * xu;
                t.term(0, xu * xu)
                    + t.term(1, xv * xv)
                    + t.term(2, mv * tu)
                    + t.term(3, -mu * tv)
                    + t.term(4, 0.5 * pair * pair)
                    + t.term(5, (lambda - 0.25 * o.dx * o.dx) * twist)
            }
            (LawKind::Momentum, Self::McAl) => {
                let (tu, tv) = (o.dn(o.mum(u))(-1, 0), o.dn(o.mum(v))(-1, 0));
                let (su, sv) = (o.mun(u), o.mun(v));
                let quartic = (sq(su(-1, 0)) + sq(sv(-1, 0))) * (sq(su(0, 0)) + sq(sv(0, 0)));
                let twist = xu * o.dm(o.dn(v))(-1, 0) - xv * o.dm(o.dn(u))(-1, 0);
                t.term(0, tu * mv)
                    + t.term(1, -tv * mu)
                    + t.term(2, xu * xu)
                    + t.term(3, xv * xv)
                    + t.term(4, 0.5 * quartic)
                    + t.term(5, 0.25 * o.dx * o.dx * twist)
            }
            (LawKind::Momentum, Self::MecAl { s }) => {
                let (sg, p) = (sign(s), s as isize);
                let (tu, tv) = (o.dn(o.mum(u))(-1, 0), o.dn(o.mum(v))(-1, 0));
                let (su, sv) = (o.mun(u), o.mun(v));
                let quartic = (sq(su(-1, 0)) + sq(sv(-1, 0))) * (sq(su(0, 0)) + sq(sv(0, 0)));
                let side = 0.5 * ((v(-p, 1) + v(p - 1, 0)) * tu - (u(-p, 1) + u(p - 1, 0)) * tv);
                t.term(0, side)
                    + t.term(1, xu * xu)
                    + t.term(2, xv * xv)
                    + t.term(3, 0.5 * quartic)
                    + t.term(4, omega(o, s, u, v))
                    + t.term(5, -omega(o, s, v, u))
                    + t.term(6, lambda_s(o, s, u, u))
                    + t.term(7, lambda_s(o, s, u, v))
                    + t.term(8, lambda_s(o, s, v, u))
                    + t.term(9, lambda_s(o, s, v, v))
                    + t.term(10, -o.dt / o.dx * sg * (theta(o, u, u) + theta(o, v, v)))
            }
            (LawKind::Energy, Self::MecAl { s }) => {
                let (sg, p) = (sign(s), s as isize);
                let s2 = modsq(u, v);
                let lead = (u(-p, 1) - u(p - 1, 0)) * xu + (v(-p, 1) - v(p - 1, 0)) * xv;
                let tail = s2(p - 1, 0) * o.mun(s2)(-p, 0) + s2(-p, 1) * o.mun(s2)(p - 1, 0);
                t.term(0, -2.0 / o.dt * lead)
                    + t.term(1, -phi(o, s, u, v))
                    + t.term(2, phi(o, s, v, u))
                    + t.term(3, -o.dx / (2.0 * o.dt) * sg * tail)
            }
            _ => f64::NAN,
        }
    }

    /// `Q̃ = (Q̃ᵘ, Q̃ᵛ)` of a preserved law.
    pub fn characteristic<U: Lat, V: Lat>(&self, kind: LawKind, o: Ops, u: U, v: V) -> (f64, f64) {
        match (kind, *self) {
            (LawKind::Mass, Self::Ec { .. } | Self::Mc6 { .. }) => (2.0 * o.mun(u)(0, 0), -2.0 * o.mun(v)(0, 0)),
            (LawKind::Mass, Self::McAl) => (o.mun(u)(-1, 0) + o.mun(u)(1, 0), -(o.mun(v)(-1, 0) + o.mun(v)(1, 0))),
            (LawKind::Mass, Self::MecAl { s }) => {
                let k = 2 * s as isize - 1;
                (u(-k, 1) + u(k, 0), -(v(-k, 1) + v(k, 0)))
            }
            (LawKind::Energy, Self::Ec { .. }) => (-2.0 * o.dn(v)(0, 0), -2.0 * o.dn(u)(0, 0)),
            (LawKind::Momentum, Self::Mc6 { .. }) => {
                (2.0 * o.dm(o.mum(o.mun(v)))(-1, 0), 2.0 * o.dm(o.mum(o.mun(u)))(-1, 0))
            }
            (LawKind::Momentum, Self::McAl) => (2.0 * o.dm(o.mum(o.mun(v)))(-1, 0), 2.0 * o.dm(o.mum(o.mun(u)))(-1, 0)),
            (LawKind::Momentum, Self::MecAl { s }) => {
                let p = s as isize;
                ((v(1, 1 - p) - v(-1, p)) / o.dx, (u(1, 1 - p) - u(-1, p)) / o.dx)
            }
            (LawKind::Energy, Self::MecAl { s }) => {
                let k = 2 * s as isize - 1;
                (-2.0 / o.dt * (v(-k, 1) - v(k, 0)), -2.0 / o.dt * (u(-k, 1) - u(k, 0)))
            }
            _ => (f64::NAN, f64::NAN),
        }
    }

    /// Number of separately signed terms in the printed `(flux, density)`.
    pub fn term_counts(&self, kind: LawKind) -> (usize, usize) {
        match (kind, self) {
            (LawKind::Mass, Self::Ec { .. } | Self::Mc6 { .. }) => (3, 2),
            (LawKind::Mass, Self::McAl) => (3, 1),
            (LawKind::Mass, Self::MecAl { .. }) => (4, 2),
            (LawKind::Energy, Self::Ec { .. }) => (5, 3),
            (LawKind::Momentum, Self::Mc6 { .. }) => (6, 3),
            (LawKind::Momentum, Self::McAl) => (6, 2),
            (LawKind::Momentum, Self::MecAl { .. }) => (11, 3),
            (LawKind::Energy, Self::MecAl { .. }) => (4, 3),
            _ => (0, 0),
        }
    }
}

#[inline]
fn sq(x: f64) -> f64 {
    x * x
}

#[inline]
fn sign(s: u8) -> f64 {
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `½{u₀(u₋₁ + u₁) + v₀(v₋₁ + v₁)}`.
#[inline]
fn al_pair_density<U: Lat, V: Lat>(u: U, v: V) -> f64 {
    0.5 * (u(0, 0) * (u(-1, 0) + u(1, 0)) + v(0, 0) * (v(-1, 0) + v(1, 0)))
}

fn omega<A: Lat, B: Lat>(o: Ops, s: u8, a: A, b: B) -> f64 {
    let mixed = o.dm(o.dn(b))(-1, 0);
    0.25 * (sign(s) * o.dx * o.dt * o.dn(o.mum(a))(-1, 0) + o.dx * o.dx * o.dm(o.mun(a))(-1, 0)) * mixed
}

fn lambda_s<A: Lat, B: Lat>(o: Ops, s: u8, a: A, b: B) -> f64 {
    let (a2, b2) = (square(a), square(b));
    let cross = o.mum(o.mun(a2))(-1, 0) * o.dm(o.dn(b2))(-1, 0) - o.dn(o.mum(a2))(-1, 0) * o.dm(o.mun(b2))(-1, 0);
    let time = sq(o.mun(a)(-1, 0)) * sq(o.dn(b)(0, 0)) + o.mun(b2)(0, 0) * sq(o.dn(a)(-1, 0));
    0.125 * sign(s) * o.dx * o.dt * cross + 0.125 * o.dt * o.dt * time
}

fn phi<A: Lat, B: Lat>(o: Ops, s: u8, a: A, b: B) -> f64 {
    let p = s as isize;
    o.dx / o.dt * sign(s) * (b(p - 1, 0) * o.dn(a)(-p, 0) - a(-p, 1) * o.dn(b)(p - 1, 0))
}

/// Densities of the charge, momentum and energy invariants used for schemes
/// that carry no local law for them.
pub fn fallback_density<U: Lat, V: Lat>(kind: LawKind, o: Ops, u: U, v: V) -> f64 {
    let (u0, v0) = (u(0, 0), v(0, 0));
    match kind {
        LawKind::Mass => u0 * u0 + v0 * v0,
        LawKind::Momentum => u0 * o.dm(o.mum(v))(-1, 0) - v0 * o.dm(o.mum(u))(-1, 0),
        LawKind::Energy => {
            let (du, dv) = (o.dm(u), o.dm(v));
            let grad = move |i, j| sq(du(i, j)) + sq(dv(i, j));
            let s = u0 * u0 + v0 * v0;
            o.mum(grad)(-1, 0) - 0.5 * s * s
        }
    }
}

/// `|ψ|` and the four-quadrant phase `atan2(v, u)` per node; the phase is 0
/// where `ψ = 0`.
pub fn modulus_and_phase(level: &FieldLevel) -> (Vec<f64>, Vec<f64>) {
    let (u, v) = (level.comp(0), level.comp(1));
    u.iter()
        .zip(v)
        .map(|(&a, &b)| {
            let phase = if a == 0.0 && b == 0.0 { 0.0 } else { b.atan2(a) };
            (a.hypot(b), phase)
        })
        .unzip()
}

/// Removes `2π` jumps between neighbouring nodes.
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let jump = p - phase[i - 1];
            offset -= tau * (jump / tau).round();
        }
        out.push(p + offset);
    }
    out
}
