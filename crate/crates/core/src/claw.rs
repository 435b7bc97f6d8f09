//! Discrete conservation laws: densities, fluxes, characteristics, the
//! characteristic identity, and global invariant errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{FieldLevel, GridSpec, Local, StencilWindow, Trajectory};
use crate::scheme::{Equation, Mutation, Scheme, SchemeError};
use crate::stencil::{at, Ops};
use crate::{bbm, nls};

/// The three lowest-order laws: mass (BBM) or charge (NLS), momentum, energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    Mass,
    Momentum,
    Energy,
}

impl LawKind {
    pub const ALL: [LawKind; 3] = [LawKind::Mass, LawKind::Momentum, LawKind::Energy];

    /// The subscript of `Err_α`.
    pub fn index(self) -> usize {
        match self {
            LawKind::Mass => 1,
            LawKind::Momentum => 2,
            LawKind::Energy => 3,
        }
    }

    pub fn label(self, eq: Equation) -> &'static str {
        match (self, eq) {
            (LawKind::Mass, Equation::Bbm) => "mass",
            (LawKind::Mass, Equation::Nls) => "charge",
            (LawKind::Momentum, _) => "momentum",
            (LawKind::Energy, _) => "energy",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClawError {
    #[error("trajectory has no levels")]
    EmptyTrajectory,
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// A discrete conservation law `Ã·Q̃ = D_m F̃ + D_n G̃` carried by a scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationLawDef {
    pub kind: LawKind,
    pub scheme: Scheme,
}

impl ConservationLawDef {
    pub fn name(&self) -> String {
        format!("{} {}", self.scheme.name(), self.kind.label(self.scheme.equation()))
    }

    /// Spatial offsets `(A, B)` the density, flux and characteristic read.
    pub fn stencil_extent(&self) -> (isize, isize) {
        let e = self.scheme.extent();
        (e.lo, e.hi)
    }

    /// Number of separately signed terms in `(F̃, G̃)`.
    pub fn term_counts(&self) -> (usize, usize) {
        match self.scheme {
            Scheme::Bbm(s) => s.term_counts(self.kind),
            Scheme::Nls(s) => s.term_counts(self.kind),
        }
    }

    pub fn density_at(&self, o: Ops, loc: Local<'_>, t: Mutation) -> f64 {
        match self.scheme {
            Scheme::Bbm(s) => s.density(self.kind, o, loc.field(0), t),
            Scheme::Nls(s) => s.density(self.kind, o, loc.field(0), loc.field(1), t),
        }
    }

    pub fn flux_at(&self, o: Ops, loc: Local<'_>, t: Mutation) -> f64 {
        match self.scheme {
            Scheme::Bbm(s) => s.flux(self.kind, o, loc.field(0), t),
            Scheme::Nls(s) => s.flux(self.kind, o, loc.field(0), loc.field(1), t),
        }
    }

    /// `Q̃` at the anchor; one value per component.
    pub fn characteristic_at(&self, o: Ops, loc: Local<'_>) -> [f64; 2] {
        match self.scheme {
            Scheme::Bbm(s) => [s.characteristic(self.kind, o, loc.field(0)), 0.0],
            Scheme::Nls(s) => {
                let (a, b) = s.characteristic(self.kind, o, loc.field(0), loc.field(1));
                [a, b]
            }
        }
    }

    /// `D_m F̃ + D_n G̃` at the anchor.
    pub fn divergence_at(&self, o: Ops, loc: Local<'_>, flux: Mutation, density: Mutation) -> f64 {
        match self.scheme {
            Scheme::Bbm(s) => {
                let u = loc.field(0);
                let f = |i, j| s.flux(self.kind, o, at(u, i, j), flux);
                let g = |i, j| s.density(self.kind, o, at(u, i, j), density);
                divergence(o, f, g)
            }
            Scheme::Nls(s) => {
                let (u, v) = (loc.field(0), loc.field(1));
                let f = |i, j| s.flux(self.kind, o, at(u, i, j), at(v, i, j), flux);
                let g = |i, j| s.density(self.kind, o, at(u, i, j), at(v, i, j), density);
                divergence(o, f, g)
            }
        }
    }
}

#[inline]
fn divergence(o: Ops, f: impl Fn(isize, isize) -> f64, g: impl Fn(isize, isize) -> f64) -> f64 {
    (f(1, 0) - f(0, 0)) / o.dx + (g(0, 1) - g(0, 0)) / o.dt
}

/// Largest `|Σ_α Ã_α Q̃_α − D_m F̃ − D_n G̃|` over the window, divided by
/// `max(1, ‖data‖∞⁴)`.
pub fn characteristic_identity_residual(
    scheme: &Scheme,
    law: &ConservationLawDef,
    w: &StencilWindow<'_>,
) -> Result<f64, SchemeError> {
    identity_residual_mutated(scheme, law, w, Mutation::NONE, Mutation::NONE)
}

/// As [`characteristic_identity_residual`], with one term of the flux or
/// density sign-flipped.
pub fn identity_residual_mutated(
    scheme: &Scheme,
    law: &ConservationLawDef,
    w: &StencilWindow<'_>,
    flux: Mutation,
    density: Mutation,
) -> Result<f64, SchemeError> {
    if scheme.equation() != law.scheme.equation() {
        return Err(SchemeError::MismatchedFamily { law: law.name(), scheme: scheme.name() });
    }
    scheme.check_window(w)?;
    let o = Ops::new(w.grid.dx, w.grid.dt);
    let q = scheme.q();
    let mut r = [0.0; 2];
    let mut worst = 0.0f64;
    for i in 0..w.grid.m {
        let loc = w.at(i);
        scheme.residual_at(o, loc, &mut r[..q]);
        let qv = law.characteristic_at(o, loc);
        let lhs: f64 = (0..q).map(|c| r[c] * qv[c]).sum();
        let defect = lhs - law.divergence_at(o, loc, flux, density);
        worst = worst.max(defect.abs());
    }
    let norm = w.levels().iter().map(|l| l.max_abs()).fold(0.0, f64::max);
    Ok(worst / norm.powi(4).max(1.0))
}

/// Largest `|D_m F̃ + D_n G̃|` over one window.
pub fn local_claw_defect(law: &ConservationLawDef, w: &StencilWindow<'_>) -> Result<f64, SchemeError> {
    law.scheme.check_window(w)?;
    let o = Ops::new(w.grid.dx, w.grid.dt);
    Ok((0..w.grid.m).map(|i| law.divergence_at(o, w.at(i), Mutation::NONE, Mutation::NONE).abs()).fold(0.0, f64::max))
}

/// Largest `|D_m F̃ + D_n G̃|` over every node and step of a trajectory.
pub fn local_claw_residual_on_solution(traj: &Trajectory, law: &ConservationLawDef) -> Result<f64, SchemeError> {
    let mut worst = 0.0f64;
    for w in traj.windows(law.scheme.levels()) {
        worst = worst.max(local_claw_defect(law, &w)?);
    }
    Ok(worst)
}

/// Density used for `Err_α`: the scheme's own `G̃` when it carries that law,
/// otherwise the fallback formula for the equation.
pub fn invariant_density(scheme: &Scheme, kind: LawKind, o: Ops, loc: Local<'_>) -> f64 {
    if scheme.preserves(kind) {
        return ConservationLawDef { kind, scheme: *scheme }.density_at(o, loc, Mutation::NONE);
    }
    match scheme {
        Scheme::Bbm(s) => bbm::fallback_density(kind, s.id().node_centred(), o, loc.field(0)),
        Scheme::Nls(_) => nls::fallback_density(kind, o, loc.field(0), loc.field(1)),
    }
}

/// Number of consecutive levels the invariant density of `scheme` reads.
pub fn density_levels(scheme: &Scheme) -> usize {
    scheme.levels() - 1
}

/// `Δx Σ_i G̃(x_i)` on the last `density_levels` levels.
pub fn global_invariant(
    scheme: &Scheme,
    kind: LawKind,
    levels: &[&FieldLevel],
    grid: &GridSpec,
) -> Result<f64, SchemeError> {
    let w = StencilWindow::new(levels.to_vec(), *grid)?;
    let o = Ops::new(grid.dx, grid.dt);
    let base = w.len() - 1;
    let mut sum = 0.0;
    for i in 0..grid.m {
        sum += invariant_density(scheme, kind, o, w.at_level(i, base));
    }
    Ok(grid.dx * sum)
}

/// Values of one global invariant over time and its largest drift.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InvariantTrace {
    pub values: Vec<f64>,
    pub err: f64,
}

impl InvariantTrace {
    pub fn push(&mut self, value: f64) {
        if let Some(&first) = self.values.first() {
            let drift = (value - first).abs();
            self.err = if drift.is_nan() || self.err.is_nan() { f64::NAN } else { self.err.max(drift) };
        }
        self.values.push(value);
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut t = Self::default();
        values.into_iter().for_each(|v| t.push(v));
        t
    }
}

/// `Err_α = Δx max_j |Σ_i G̃(x_i, t_j) − Σ_i G̃(x_i, t_first)|`, where
/// `t_first` is the first level at which the density can be evaluated.
pub fn global_invariant_error(traj: &Trajectory, scheme: &Scheme, kind: LawKind) -> Result<InvariantTrace, ClawError> {
    if traj.levels.is_empty() {
        return Err(ClawError::EmptyTrajectory);
    }
    let k = density_levels(scheme);
    let refs: Vec<&FieldLevel> = traj.levels.iter().collect();
    let mut trace = InvariantTrace::default();
    for window in refs.windows(k) {
        trace.push(global_invariant(scheme, kind, window, &traj.grid)?);
    }
    Ok(trace)
}

/// Residual bound for the characteristic identity on random data.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Generator behind the random windows, recorded in reports for replay.
pub const VERIFY_RNG: &str = "ChaCha8";
const VERIFY_NODES: usize = 16;

/// Largest identity residual of one law over a batch of random windows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub law: String,
    pub kind: LawKind,
    pub trials: usize,
    pub max_residual: f64,
}

impl IdentityCheck {
    /// With no trials the check holds vacuously.
    pub fn passed(&self) -> bool {
        self.max_residual <= IDENTITY_TOL
    }
}

/// Uniform data in `[−1, 1]` on a 16-node lattice with `Δx ∈ [0.5, 1)` and
/// `Δt ∈ [0.3, 1)`, one level per level the scheme reads.
pub fn random_window_levels(scheme: &Scheme, rng: &mut impl Rng) -> (GridSpec, Vec<FieldLevel>) {
    let m = VERIFY_NODES;
    let dx = rng.gen_range(0.5..1.0);
    let dt = rng.gen_range(0.3..1.0);
    let grid = GridSpec::new(0.0, dx * m as f64, m, dt, scheme.levels()).expect("fixed geometry is valid");
    let levels = (0..scheme.levels())
        .map(|j| {
            let comps = (0..scheme.q()).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            FieldLevel::new(comps, j).expect("rectangular")
        })
        .collect();
    (grid, levels)
}

/// Checks every law `scheme` preserves on `trials` random windows drawn from
/// a generator seeded with `seed`.
pub fn verify_identities(scheme: &Scheme, trials: usize, seed: u64) -> Vec<IdentityCheck> {
    let laws = scheme.conservation_laws();
    let mut worst = vec![0.0f64; laws.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let (grid, levels) = random_window_levels(scheme, &mut rng);
        let w = StencilWindow::new(levels.iter().collect(), grid).expect("consecutive levels");
        for (k, law) in laws.iter().enumerate() {
            let r = characteristic_identity_residual(scheme, law, &w).expect("matching family and window");
            worst[k] = if r.is_nan() { f64::NAN } else { worst[k].max(r) };
        }
    }
    laws.iter()
        .zip(worst)
        .map(|(law, max_residual)| IdentityCheck { law: law.name(), kind: law.kind, trials, max_residual })
        .collect()
}

/// Largest identity residual of `law` with one flux or density term flipped.
pub fn mutated_identity_residual(
    law: &ConservationLawDef,
    flux: Mutation,
    density: Mutation,
    trials: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let (grid, levels) = random_window_levels(&law.scheme, &mut rng);
        let w = StencilWindow::new(levels.iter().collect(), grid).expect("consecutive levels");
        let r = identity_residual_mutated(&law.scheme, law, &w, flux, density).expect("own scheme");
        worst = worst.max(r);
    }
    worst
}
