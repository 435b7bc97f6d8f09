//! Newton iteration for the unknown level of an implicit scheme.
//!
//! The Jacobian of the residual with respect to the new level is banded with
//! periodic corner blocks. It is built by coloured finite differences and
//! factored as a band block bordered by a small dense Schur complement.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bbm::BbmScheme;
use crate::grid::{FieldLevel, GridSpec, StencilWindow};
use crate::scheme::{Scheme, SchemeError};
use crate::stencil::Ops;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianKind {
    #[default]
    FiniteDifference,
    /// No scheme ships an analytic Jacobian, so this currently resolves to
    /// finite differences.
    AnalyticIfAvailable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predictor {
    #[default]
    CopyPrevious,
    LinearExtrapolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Target for the residual ∞-norm.
    pub tol: f64,
    pub max_iter: usize,
    pub jacobian: JacobianKind,
    pub predictor: Predictor,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 50, jacobian: JacobianKind::FiniteDifference, predictor: Predictor::CopyPrevious }
    }
}

/// Relative size below which a Newton update is indistinguishable from the
/// rounding noise in the residual.
const STALL_ULPS: f64 = 64.0;
const NOISE_ULPS: f64 = 16.0;
/// `‖J z‖ / ‖J‖` below which `z` is treated as an exact kernel vector.
const NULL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepStats {
    pub iterations: usize,
    pub final_residual: f64,
    pub jacobian_evals: usize,
    /// True when the step was accepted because the update reached rounding
    /// level while the residual was still above `tol`.
    pub roundoff_limited: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64, best: Vec<f64>, history: Vec<f64> },
    #[error("singular Jacobian")]
    SingularJacobian,
    #[error("non-finite residual")]
    NonFinite,
    #[error("solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// A step failure inside [`advance`], with the levels accepted before it.
#[derive(Debug, Error, Clone)]
#[error("step {step}: {source}")]
pub struct AdvanceError {
    pub step: usize,
    #[source]
    pub source: SolveError,
    pub partial: Vec<FieldLevel>,
}

fn check_config(cfg: &SolverConfig) -> Result<(), SolveError> {
    if !(cfg.tol > 0.0) {
        return Err(SolveError::Config(format!("tol must be positive, got {}", cfg.tol)));
    }
    if cfg.max_iter == 0 {
        return Err(SolveError::Config("max_iter must be at least 1".into()));
    }
    Ok(())
}

fn residual_into(scheme: &Scheme, known: &[&FieldLevel], trial: &FieldLevel, grid: &GridSpec, out: &mut [f64]) {
    let mut levels: Vec<&FieldLevel> = known.to_vec();
    levels.push(trial);
    let w = StencilWindow::new(levels, *grid).expect("levels validated by caller");
    let o = Ops::new(grid.dx, grid.dt);
    let q = scheme.q();
    for i in 0..grid.m {
        scheme.residual_at(o, w.at(i), &mut out[i * q..(i + 1) * q]);
    }
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
}

/// Solves for the level after `known`, starting from `guess`.
pub fn solve_level(
    scheme: &Scheme,
    known: &[&FieldLevel],
    mut guess: FieldLevel,
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Result<(FieldLevel, StepStats), SolveError> {
    check_config(cfg)?;
    let mut probe: Vec<&FieldLevel> = known.to_vec();
    probe.push(&guess);
    scheme.check_window(&StencilWindow::new(probe, *grid).map_err(SchemeError::from)?)?;
    if scheme.levels() != known.len() + 1 {
        return Err(SchemeError::WindowTooShort {
            scheme: scheme.name(),
            needed: scheme.levels(),
            got: known.len() + 1,
        }
        .into());
    }

    let q = scheme.q();
    let n = grid.m * q;
    let mut x = guess.to_interleaved();
    let mut r = vec![0.0; n];
    let mut stats = StepStats::default();
    let mut history = Vec::new();
    let mut best = (f64::INFINITY, x.clone());

    residual_into(scheme, known, &guess, grid, &mut r);
    for iter in 0..=cfg.max_iter {
        let rn = inf_norm(&r);
        history.push(rn);
        if !rn.is_finite() {
            return Err(SolveError::NonFinite);
        }
        if rn < best.0 {
            best = (rn, x.clone());
        }
        stats.iterations = iter;
        stats.final_residual = rn;
        if rn <= cfg.tol {
            return Ok((guess, stats));
        }
        if iter == cfg.max_iter {
            break;
        }
        let jac = fd_jacobian(scheme, known, &guess, grid, &r);
        stats.jacobian_evals += 1;
        let mut delta: Vec<f64> = r.iter().map(|v| -v).collect();
        let null = alternating_null_modes(&jac, q);
        if null.is_empty() {
            jac.solve(&mut delta)?;
        } else {
            jac.solve_deflated(&mut delta, &null)?;
        }
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi += di;
        }
        guess.set_interleaved(&x);
        residual_into(scheme, known, &guess, grid, &mut r);
        let scale = inf_norm(&x).max(1.0);
        let rn_new = inf_norm(&r);
        if !rn_new.is_finite() || rn_new > rn {
            continue;
        }
        // Either the update itself is below round-off, or the residual has
        // stopped shrinking at the level where evaluating it is exact only
        // to a few ulps of its largest terms.
        let tiny_step = inf_norm(&delta) <= STALL_ULPS * f64::EPSILON * scale;
        let floor = NOISE_ULPS * f64::EPSILON * jac.row_norm() * scale;
        let stalled = rn_new > 0.5 * rn && rn_new <= floor;
        if (tiny_step || stalled) && rn_new > cfg.tol {
            stats.iterations = iter + 1;
            stats.final_residual = rn_new;
            stats.roundoff_limited = true;
            return Ok((guess, stats));
        }
    }
    Err(SolveError::NonConvergence { iterations: cfg.max_iter, residual: best.0, best: best.1, history })
}

/// One step from the known levels, with the configured predictor.
pub fn step(
    scheme: &Scheme,
    known: &[&FieldLevel],
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Result<(FieldLevel, StepStats), SolveError> {
    let last = known.last().ok_or(SolveError::Scheme(SchemeError::WindowTooShort {
        scheme: scheme.name(),
        needed: scheme.levels(),
        got: 1,
    }))?;
    let prev = if known.len() >= 2 { Some(known[known.len() - 2]) } else { None };
    solve_level(scheme, known, predict(cfg.predictor, last, prev), grid, cfg)
}

fn predict(p: Predictor, last: &FieldLevel, prev: Option<&FieldLevel>) -> FieldLevel {
    let mut g = last.clone();
    g.time_index = last.time_index + 1;
    if let (Predictor::LinearExtrapolation, Some(prev)) = (p, prev) {
        for (gc, pc) in g.components.iter_mut().zip(&prev.components) {
            for (gi, pi) in gc.iter_mut().zip(pc) {
                *gi = 2.0 * *gi - pi;
            }
        }
    }
    g
}

/// Scheme used to produce the extra starting level of a multistep scheme.
pub fn startup_scheme(scheme: &Scheme) -> Option<Scheme> {
    match scheme {
        Scheme::Bbm(BbmScheme::Pb) => Some(Scheme::Bbm(BbmScheme::Ls)),
        _ => None,
    }
}

/// Advances `initial` by `grid.n` steps, handing each level (starting with
/// the initial one) to `observe` and keeping only the levels the scheme
/// still needs. Returns the final level and per-step statistics.
pub fn advance_streaming(
    scheme: &Scheme,
    initial: FieldLevel,
    grid: &GridSpec,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&FieldLevel),
) -> Result<(FieldLevel, Vec<StepStats>), (usize, SolveError)> {
    let keep = scheme.levels() - 1;
    let mut window: Vec<FieldLevel> = Vec::with_capacity(keep + 1);
    let mut stats = Vec::with_capacity(grid.n);
    let mut prev: Option<FieldLevel> = None;
    observe(&initial);
    window.push(initial);
    for k in 0..grid.n {
        let active = match startup_scheme(scheme) {
            Some(s) if window.len() < keep => s,
            _ => *scheme,
        };
        let known_n = active.levels() - 1;
        let known: Vec<&FieldLevel> = window[window.len() - known_n..].iter().collect();
        let last = *known.last().expect("window never empty");
        let before = if known.len() >= 2 { Some(known[known.len() - 2]) } else { prev.as_ref() };
        let guess = predict(cfg.predictor, last, before);
        let (next, st) = solve_level(&active, &known, guess, grid, cfg).map_err(|e| (k + 1, e))?;
        observe(&next);
        stats.push(st);
        window.push(next);
        if window.len() > keep {
            prev = Some(window.remove(0));
        }
    }
    Ok((window.pop().expect("window never empty"), stats))
}

/// Advances and keeps every level.
pub fn advance(
    scheme: &Scheme,
    initial: FieldLevel,
    grid: &GridSpec,
    cfg: &SolverConfig,
) -> Result<(crate::grid::Trajectory, Vec<StepStats>), AdvanceError> {
    let mut levels = Vec::with_capacity(grid.n + 1);
    match advance_streaming(scheme, initial, grid, cfg, |l| levels.push(l.clone())) {
        Ok((_, stats)) => Ok((crate::grid::Trajectory::new(*grid, levels), stats)),
        Err((step, source)) => Err(AdvanceError { step, source, partial: levels }),
    }
}

/// Coloured finite-difference Jacobian of the residual with respect to the
/// new level, unknowns interleaved node-major.
fn fd_jacobian(scheme: &Scheme, known: &[&FieldLevel], base: &FieldLevel, grid: &GridSpec, r0: &[f64]) -> CyclicBand {
    let ext = scheme.extent();
    let (lo, hi) = (ext.lo, ext.hi);
    let q = scheme.q();
    let m = grid.m;
    let n = m * q;
    // Row node i reads unknown nodes i+lo..=i+hi.
    let kl = (-lo) as usize * q + q - 1;
    let ku = (hi as usize) * q + q - 1;
    let mut jac = CyclicBand::new(n, kl.min(n - 1), ku.min(n - 1));
    let colors = node_colors(m, (hi - lo + 1) as usize);
    let o = Ops::new(grid.dx, grid.dt);
    let mut trial = base.clone();
    let mut out = [0.0; 2];
    for nodes in &colors {
        for c in 0..q {
            let mut steps = Vec::with_capacity(nodes.len());
            for &k in nodes {
                let xk = base.components[c][k];
                let h = f64::EPSILON.sqrt() * (1.0 + xk.abs());
                let h = (xk + h) - xk;
                trial.components[c][k] = xk + h;
                steps.push(h);
            }
            {
                let mut levels: Vec<&FieldLevel> = known.to_vec();
                levels.push(&trial);
                let w = StencilWindow::new(levels, *grid).expect("validated");
                for (&k, &h) in nodes.iter().zip(&steps) {
                    let col = k * q + c;
                    for d in -hi..=-lo {
                        let i = (k as isize + d).rem_euclid(m as isize) as usize;
                        scheme.residual_at(o, w.at(i), &mut out[..q]);
                        for cr in 0..q {
                            let row = i * q + cr;
                            jac.set(row, col, (out[cr] - r0[row]) / h);
                        }
                    }
                }
            }
            for &k in nodes {
                trial.components[c][k] = base.components[c][k];
            }
        }
    }
    jac
}

/// Sawtooth vectors `(−1)^i` (one per component) that the Jacobian maps to
/// zero. Schemes whose every term carries a spatial average, such as the
/// box scheme, have this kernel on grids with an even number of nodes.
fn alternating_null_modes(jac: &CyclicBand, q: usize) -> Vec<Vec<f64>> {
    let n = jac.size();
    if (n / q) % 2 != 0 {
        return Vec::new();
    }
    let scale = jac.row_norm();
    (0..q)
        .map(|c| {
            (0..n)
                .map(|k| {
                    if k % q != c {
                        0.0
                    } else if (k / q) % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect::<Vec<f64>>()
        })
        .filter(|z| inf_norm(&jac.matvec(z)) <= NULL_TOL * scale)
        .collect()
}

/// Groups nodes so that the coupling ranges of nodes in one group (of width
/// `width`) never overlap, periodically.
fn node_colors(m: usize, width: usize) -> Vec<Vec<usize>> {
    if m <= 2 * width {
        return (0..m).map(|k| vec![k]).collect();
    }
    let full = (m / width) * width;
    let mut colors: Vec<Vec<usize>> = (0..width).map(|c| (c..full).step_by(width).collect()).collect();
    colors.extend((full..m).map(|k| vec![k]));
    colors
}

/// A square matrix whose nonzeros satisfy `−kl ≤ (col − row) mod n ≤ ku`
/// in the cyclic sense.
#[derive(Debug, Clone)]
pub struct CyclicBand {
    n: usize,
    kl: usize,
    ku: usize,
    /// `data[row * width + (col − row + kl)]` with the difference taken
    /// cyclically; `width = kl + ku + 1`.
    data: Vec<f64>,
}

impl CyclicBand {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn offset(&self, row: usize, col: usize) -> Option<usize> {
        let n = self.n as isize;
        let mut d = col as isize - row as isize;
        if d > self.ku as isize {
            d -= n;
        } else if d < -(self.kl as isize) {
            d += n;
        }
        if d < -(self.kl as isize) || d > self.ku as isize {
            return None;
        }
        Some(row * (self.kl + self.ku + 1) + (d + self.kl as isize) as usize)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.offset(row, col).map_or(0.0, |k| self.data[k])
    }

    /// Stores an entry; entries outside the band are dropped.
    /// Writes an entry. Zeros outside the band are accepted and dropped.
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        match self.offset(row, col) {
            Some(k) => self.data[k] = v,
            None => debug_assert!(v == 0.0, "entry ({row}, {col}) lies outside the band"),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let w = self.kl + self.ku + 1;
        let n = self.n as isize;
        (0..self.n)
            .map(|r| {
                (0..w)
                    .map(|k| {
                        let c = (r as isize + k as isize - self.kl as isize).rem_euclid(n) as usize;
                        self.data[r * w + k] * x[c]
                    })
                    .sum()
            })
            .collect()
    }

    /// Solves a singular but consistent system whose kernel is spanned by the
    /// mutually orthogonal vectors `null`, returning the solution with no
    /// component along the kernel. One redundant equation per kernel vector
    /// is replaced by a pin on an unknown where that vector is nonzero, which
    /// keeps the band intact; the pinned solution is then projected.
    pub fn solve_deflated(&self, b: &mut [f64], null: &[Vec<f64>]) -> Result<(), SolveError> {
        let mut pinned = self.clone();
        for z in null {
            let r = (0..self.n).max_by(|&i, &j| z[i].abs().total_cmp(&z[j].abs())).expect("non-empty");
            let w = self.kl + self.ku + 1;
            pinned.data[r * w..(r + 1) * w].iter_mut().for_each(|v| *v = 0.0);
            pinned.set(r, r, 1.0);
            b[r] = 0.0;
        }
        pinned.solve(b)?;
        for z in null {
            let zz: f64 = z.iter().map(|v| v * v).sum();
            let c = z.iter().zip(b.iter()).map(|(a, x)| a * x).sum::<f64>() / zz;
            b.iter_mut().zip(z).for_each(|(x, a)| *x -= c * a);
        }
        Ok(())
    }

    /// `max_row Σ_col |a|`.
    pub fn row_norm(&self) -> f64 {
        self.data.chunks(self.kl + self.ku + 1).map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            for d in -(self.kl as isize)..=self.ku as isize {
                let c = (r as isize + d).rem_euclid(n as isize) as usize;
                a[r * n + c] = self.get(r, c);
            }
        }
        a
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) -> Result<(), SolveError> {
        let k = self.kl.max(self.ku);
        if self.n <= 4 * (self.kl + self.ku + 1) || self.n <= 2 * k {
            return dense_solve(self.to_dense(), self.n, b);
        }
        match self.bordered_solve(b) {
            Ok(x) => {
                b.copy_from_slice(&x);
                Ok(())
            }
            // A singular leading block does not imply a singular matrix.
            Err(SolveError::SingularJacobian) if self.n <= 4096 => dense_solve(self.to_dense(), self.n, b),
            Err(e) => Err(e),
        }
    }

    /// Splits off the last `k = max(kl, ku)` unknowns so that the leading
    /// block has no periodic corners, then eliminates through the Schur
    /// complement of that block.
    fn bordered_solve(&self, b: &[f64]) -> Result<Vec<f64>, SolveError> {
        let n = self.n;
        let k = self.kl.max(self.ku);
        let n1 = n - k;
        let mut a11 = BandLu::new(n1, self.kl, self.ku);
        for r in 0..n1 {
            for c in r.saturating_sub(self.kl)..(r + self.ku + 1).min(n1) {
                a11.set(r, c, self.get(r, c));
            }
        }
        a11.factor()?;
        // A12 columns, solved in place into Y = A11⁻¹ A12.
        let mut y: Vec<Vec<f64>> = (0..k).map(|j| (0..n1).map(|r| self.get(r, n1 + j)).collect()).collect();
        for col in &mut y {
            a11.solve(col);
        }
        let mut z = b[..n1].to_vec();
        a11.solve(&mut z);
        // Rows of A21 are nonzero only near both ends of the leading block.
        let a21 = |i: usize, c: usize| self.get(n1 + i, c);
        let near = |i: usize| -> Vec<usize> {
            let r = (n1 + i) as isize;
            (-(self.kl as isize)..=self.ku as isize)
                .map(|d| (r + d).rem_euclid(n as isize) as usize)
                .filter(|&c| c < n1)
                .collect()
        };
        let mut s = vec![0.0; k * k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            let cols = near(i);
            for j in 0..k {
                let mut v = self.get(n1 + i, n1 + j);
                for &c in &cols {
                    v -= a21(i, c) * y[j][c];
                }
                s[i * k + j] = v;
            }
            let mut v = b[n1 + i];
            for &c in &cols {
                v -= a21(i, c) * z[c];
            }
            rhs[i] = v;
        }
        dense_solve(s, k, &mut rhs)?;
        let mut x = z;
        for (j, col) in y.iter().enumerate() {
            for (xr, yr) in x.iter_mut().zip(col) {
                *xr -= yr * rhs[j];
            }
        }
        x.extend_from_slice(&rhs);
        Ok(x)
    }
}

/// Non-cyclic band matrix with LU factorization by partial pivoting, stored
/// column-wise with room for the pivoting fill (`2kl + ku + 1` rows).
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self { n, kl, ku, ld, ab: vec![0.0; ld * n], piv: vec![0; n] }
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        c * self.ld + (self.kl + self.ku + r - c)
    }

    fn set(&mut self, r: usize, c: usize, v: f64) {
        let k = self.idx(r, c);
        self.ab[k] = v;
    }

    fn factor(&mut self) -> Result<(), SolveError> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0;
            let mut best = self.ab[self.idx(j, j)].abs();
            for t in 1..=km {
                let v = self.ab[self.idx(j + t, j)].abs();
                if v > best {
                    best = v;
                    p = t;
                }
            }
            self.piv[j] = j + p;
            if best == 0.0 || !best.is_finite() {
                return Err(SolveError::SingularJacobian);
            }
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let (a, b) = (self.idx(j, c), self.idx(j + p, c));
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(j, j)];
            for t in 1..=km {
                let k = self.idx(j + t, j);
                self.ab[k] /= pivot;
            }
            for c in j + 1..=ju {
                let top = self.ab[self.idx(j, c)];
                if top == 0.0 {
                    continue;
                }
                for t in 1..=km {
                    let l = self.ab[self.idx(j + t, j)];
                    let k = self.idx(j + t, c);
                    self.ab[k] -= l * top;
                }
            }
        }
        Ok(())
    }

    fn solve(&self, b: &mut [f64]) {
        let (n, kl) = (self.n, self.kl);
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj != 0.0 {
                for t in 1..=kl.min(n - 1 - j) {
                    b[j + t] -= self.ab[self.idx(j + t, j)] * bj;
                }
            }
        }
        let kv = self.kl + self.ku;
        for j in (0..n).rev() {
            b[j] /= self.ab[self.idx(j, j)];
            let bj = b[j];
            for i in j.saturating_sub(kv)..j {
                b[i] -= self.ab[self.idx(i, j)] * bj;
            }
        }
    }
}

/// Gaussian elimination with partial pivoting on a row-major `n × n` matrix.
fn dense_solve(mut a: Vec<f64>, n: usize, b: &mut [f64]) -> Result<(), SolveError> {
    for j in 0..n {
        let p = (j..n).max_by(|&x, &y| a[x * n + j].abs().total_cmp(&a[y * n + j].abs())).expect("non-empty");
        let pivot = a[p * n + j];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(SolveError::SingularJacobian);
        }
        if p != j {
            for c in 0..n {
                a.swap(j * n + c, p * n + c);
            }
            b.swap(j, p);
        }
        for r in j + 1..n {
            let l = a[r * n + j] / pivot;
            if l == 0.0 {
                continue;
            }
            for c in j..n {
                a[r * n + c] -= l * a[j * n + c];
            }
            b[r] -= l * b[j];
        }
    }
    for j in (0..n).rev() {
        let mut v = b[j];
        for c in j + 1..n {
            v -= a[j * n + c] * b[c];
        }
        b[j] = v / a[j * n + j];
    }
    Ok(())
}
