//! Periodic space-time lattice and solution storage.
//!
//! Node `i` of a level sits at `x_i = a + i·Δx` for `i = 0..M`; the node at
//! `x = b` is identified with `x = a` and is not stored.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Widest spatial stencil used by any scheme spans offsets `-2..=2`.
pub const MIN_NODES: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least {MIN_NODES} spatial nodes, got {0}")]
    TooFewNodes(usize),
    #[error("invalid grid geometry: {0}")]
    Geometry(String),
    #[error("field components have unequal lengths")]
    RaggedLevel,
    #[error("level has {got} nodes but the grid has {expected}")]
    NodeCount { expected: usize, got: usize },
    #[error("window needs 1 to 3 levels, got {0}")]
    WindowSize(usize),
    #[error("window levels are not consecutive in time")]
    NonConsecutive,
    #[error("window levels disagree on the number of components")]
    ComponentMismatch,
    #[error("no level after time index {0} in this window")]
    WindowExhausted(usize),
}

/// Geometry of the periodic lattice `[a, b) × [0, N·Δt]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub dx: f64,
    pub dt: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(a: f64, b: f64, m: usize, dt: f64, n: usize) -> Result<Self, GridError> {
        if m < MIN_NODES {
            return Err(GridError::TooFewNodes(m));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(GridError::Geometry(format!("need a < b, got [{a}, {b}]")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(GridError::Geometry(format!("time step must be positive, got {dt}")));
        }
        let dx = (b - a) / m as f64;
        let grid = Self { a, b, m, dx, dt, n };
        let span = dx * m as f64;
        if (span - (b - a)).abs() > 4.0 * f64::EPSILON * (b - a).abs() {
            return Err(GridError::Geometry(format!("Δx·M = {span} does not reproduce b − a = {}", b - a)));
        }
        Ok(grid)
    }

    /// Builds a grid from step sizes. `(b − a)/Δx` and `T/Δt` must be whole
    /// numbers up to rounding; `T = 0` gives a grid with no steps.
    pub fn from_steps(a: f64, b: f64, dx: f64, dt: f64, t_final: f64) -> Result<Self, GridError> {
        let m = whole((b - a) / dx, "(b − a)/Δx")?;
        let n = if t_final == 0.0 { 0 } else { whole(t_final / dt, "T/Δt")? };
        Self::new(a, b, m, dt, n)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.a + i as f64 * self.dx
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.n as f64 * self.dt
    }

    /// `max(Δx, Δt)`, the scale that turns unscaled scheme parameters into
    /// `O(Δx², Δt²)` coefficients.
    pub fn delta_max(&self) -> f64 {
        self.dx.max(self.dt)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.x(i)).collect()
    }

    pub fn with_steps(&self, n: usize) -> Self {
        Self { n, ..*self }
    }
}

fn whole(ratio: f64, what: &str) -> Result<usize, GridError> {
    let r = ratio.round();
    if !ratio.is_finite() || r < 1.0 || (ratio - r).abs() > 1e-9 * r.max(1.0) {
        return Err(GridError::Geometry(format!("{what} = {ratio} is not a positive integer")));
    }
    Ok(r as usize)
}

/// Values of every solution component at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldLevel {
    pub components: Vec<Vec<f64>>,
    pub time_index: usize,
}

impl FieldLevel {
    pub fn new(components: Vec<Vec<f64>>, time_index: usize) -> Result<Self, GridError> {
        let m = components.first().map_or(0, Vec::len);
        if components.iter().any(|c| c.len() != m) {
            return Err(GridError::RaggedLevel);
        }
        Ok(Self { components, time_index })
    }

    pub fn zeros(q: usize, m: usize, time_index: usize) -> Self {
        Self { components: vec![vec![0.0; m]; q], time_index }
    }

    /// Samples `f(x) -> [component values]` at the grid nodes.
    pub fn sample<const Q: usize>(grid: &GridSpec, time_index: usize, f: impl Fn(f64) -> [f64; Q]) -> Self {
        let mut components = vec![Vec::with_capacity(grid.m); Q];
        for i in 0..grid.m {
            let vals = f(grid.x(i));
            for (c, v) in vals.into_iter().enumerate() {
                components[c].push(v);
            }
        }
        Self { components, time_index }
    }

    pub fn q(&self) -> usize {
        self.components.len()
    }

    pub fn m(&self) -> usize {
        self.components.first().map_or(0, Vec::len)
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        &self.components[c]
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Node-major flattening `[c0(0), c1(0), c0(1), ...]`, the unknown layout
    /// used by the Newton solver.
    pub fn to_interleaved(&self) -> Vec<f64> {
        let q = self.q();
        let mut out = vec![0.0; q * self.m()];
        for (c, comp) in self.components.iter().enumerate() {
            for (i, v) in comp.iter().enumerate() {
                out[i * q + c] = *v;
            }
        }
        out
    }

    pub fn set_interleaved(&mut self, x: &[f64]) {
        let q = self.q();
        for (c, comp) in self.components.iter_mut().enumerate() {
            for (i, v) in comp.iter_mut().enumerate() {
                *v = x[i * q + c];
            }
        }
    }
}

/// One to three consecutive levels: the domain of every residual,
/// density and conservation-law evaluator.
#[derive(Debug, Clone)]
pub struct StencilWindow<'a> {
    levels: Vec<&'a FieldLevel>,
    pub grid: GridSpec,
}

impl<'a> StencilWindow<'a> {
    pub fn new(levels: Vec<&'a FieldLevel>, grid: GridSpec) -> Result<Self, GridError> {
        if !(1..=3).contains(&levels.len()) {
            return Err(GridError::WindowSize(levels.len()));
        }
        let q = levels[0].q();
        for pair in levels.windows(2) {
            if pair[1].time_index != pair[0].time_index + 1 {
                return Err(GridError::NonConsecutive);
            }
        }
        for l in &levels {
            if l.q() != q {
                return Err(GridError::ComponentMismatch);
            }
            if l.m() != grid.m {
                return Err(GridError::NodeCount { expected: grid.m, got: l.m() });
            }
        }
        Ok(Self { levels, grid })
    }

    pub fn levels(&self) -> &[&'a FieldLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn q(&self) -> usize {
        self.levels[0].q()
    }

    /// Accessor anchored at node `anchor`, with time offset 0 at the
    /// second-to-last level (the last level is the one a scheme solves for),
    /// or at the only level of a one-level window.
    pub fn at(&self, anchor: usize) -> Local<'_> {
        Local {
            levels: &self.levels,
            base: self.levels.len().saturating_sub(2),
            anchor: anchor as isize,
            m: self.grid.m as isize,
        }
    }

    /// Accessor with time offset 0 at window level `base`.
    pub fn at_level(&self, anchor: usize, base: usize) -> Local<'_> {
        Local { levels: &self.levels, base, anchor: anchor as isize, m: self.grid.m as isize }
    }
}

/// Read access to a window relative to an anchor node, with periodic wrap in
/// space. Offsets follow the `u_{i,j}` shift notation.
#[derive(Clone, Copy)]
pub struct Local<'a> {
    levels: &'a [&'a FieldLevel],
    base: usize,
    anchor: isize,
    m: isize,
}

impl<'a> Local<'a> {
    #[inline]
    pub fn get(&self, c: usize, di: isize, dj: isize) -> f64 {
        let level = self.levels[(self.base as isize + dj) as usize];
        let mut i = self.anchor + di;
        if i < 0 || i >= self.m {
            i = i.rem_euclid(self.m);
        }
        level.components[c][i as usize]
    }

    /// Component `c` as a lattice function of relative offsets.
    #[inline]
    pub fn field(self, c: usize) -> impl crate::stencil::Lat + 'a {
        move |i, j| self.get(c, i, j)
    }
}

/// A sequence of consecutive levels starting at time index 0.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: GridSpec,
    pub levels: Vec<FieldLevel>,
}

impl Trajectory {
    pub fn new(grid: GridSpec, levels: Vec<FieldLevel>) -> Self {
        Self { grid, levels }
    }

    pub fn last(&self) -> Option<&FieldLevel> {
        self.levels.last()
    }

    pub fn windows(&self, size: usize) -> impl Iterator<Item = StencilWindow<'_>> {
        let grid = self.grid;
        self.levels.windows(size).map(move |w| StencilWindow { levels: w.iter().collect(), grid })
    }
}
