//! Shift, forward difference and forward average operators.
//!
//! Lattice functions are closures `Fn(i, j) -> f64` of relative offsets, so
//! operators compose lazily: `o.dm(o.dn(u))(-1, 0)` is `D_m D_n u_{-1,0}`.
//! Each composite is evaluated in a fixed order, so results are
//! bit-reproducible for fixed inputs.

use crate::grid::{GridError, StencilWindow};

/// A lattice function of relative offsets `(i, j)`.
pub trait Lat: Fn(isize, isize) -> f64 + Copy {}
impl<T: Fn(isize, isize) -> f64 + Copy> Lat for T {}

/// Evaluates a formula written relative to the anchor at another anchor:
/// `at(u, k, l)(i, j) = u(i + k, j + l)`.
#[inline]
pub fn at<U: Lat>(u: U, k: isize, l: isize) -> impl Lat {
    move |i, j| u(i + k, j + l)
}

/// Step sizes used by the difference operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ops {
    pub dx: f64,
    pub dt: f64,
}

impl Ops {
    pub fn new(dx: f64, dt: f64) -> Self {
        Self { dx, dt }
    }

    /// `S_m^k`.
    #[inline]
    pub fn sm<F: Lat>(&self, f: F, k: isize) -> impl Lat {
        move |i, j| f(i + k, j)
    }

    /// `S_n^k`.
    #[inline]
    pub fn sn<F: Lat>(&self, f: F, k: isize) -> impl Lat {
        move |i, j| f(i, j + k)
    }

    /// `D_m = (S_m − I)/Δx`.
    #[inline]
    pub fn dm<F: Lat>(&self, f: F) -> impl Lat {
        let h = self.dx;
        move |i, j| (f(i + 1, j) - f(i, j)) / h
    }

    /// `D_n = (S_n − I)/Δt`.
    #[inline]
    pub fn dn<F: Lat>(&self, f: F) -> impl Lat {
        let h = self.dt;
        move |i, j| (f(i, j + 1) - f(i, j)) / h
    }

    /// `μ_m = (S_m + I)/2`.
    #[inline]
    pub fn mum<F: Lat>(&self, f: F) -> impl Lat {
        move |i, j| 0.5 * (f(i + 1, j) + f(i, j))
    }

    /// `μ_n = (S_n + I)/2`.
    #[inline]
    pub fn mun<F: Lat>(&self, f: F) -> impl Lat {
        move |i, j| 0.5 * (f(i, j + 1) + f(i, j))
    }

    /// `D_m²`.
    #[inline]
    pub fn dm2<F: Lat>(&self, f: F) -> impl Lat {
        let h = self.dx;
        move |i, j| (f(i + 2, j) - 2.0 * f(i + 1, j) + f(i, j)) / (h * h)
    }
}

/// Pointwise products and sums of lattice functions.
#[inline]
pub fn prod<F, G>(f: F, g: G) -> impl Lat
where
    F: Lat,
    G: Lat,
{
    move |i, j| f(i, j) * g(i, j)
}

#[inline]
pub fn square<F: Lat>(f: F) -> impl Lat {
    move |i, j| {
        let v = f(i, j);
        v * v
    }
}

/// `a² + b²` as a lattice function.
#[inline]
pub fn modsq<A, B>(a: A, b: B) -> impl Lat
where
    A: Lat,
    B: Lat,
{
    move |i, j| {
        let (x, y) = (a(i, j), b(i, j));
        x * x + y * y
    }
}

#[inline]
pub fn neg<F: Lat>(f: F) -> impl Lat {
    move |i, j| -f(i, j)
}

/// `Θ[a, b] = ½{(μ_mμ_n a_{-1,0}) D_mD_n b_{-1,0} − (D_mμ_n a_{-1,0}) D_nμ_m b_{-1,0}}`,
/// the compact cross term shared by several fluxes.
#[inline]
pub fn theta<A: Lat, B: Lat>(o: Ops, a: A, b: B) -> f64 {
    0.5 * (o.mum(o.mun(a))(-1, 0) * o.dm(o.dn(b))(-1, 0) - o.dm(o.mun(a))(-1, 0) * o.dn(o.mum(b))(-1, 0))
}

/// `S_m^k` on one stored level: `out[i] = f[(i + k) mod M]`.
pub fn shift_space(f: &[f64], k: isize) -> Vec<f64> {
    let m = f.len() as isize;
    (0..m).map(|i| f[(i + k).rem_euclid(m) as usize]).collect()
}

/// `D_m` on one stored level.
pub fn diff_space(f: &[f64], dx: f64) -> Vec<f64> {
    let m = f.len();
    (0..m).map(|i| (f[(i + 1) % m] - f[i]) / dx).collect()
}

/// `μ_m` on one stored level.
pub fn avg_space(f: &[f64]) -> Vec<f64> {
    let m = f.len();
    (0..m).map(|i| 0.5 * (f[(i + 1) % m] + f[i])).collect()
}

fn next_level(w: &StencilWindow<'_>, level: usize) -> Result<(), GridError> {
    let levels = w.levels();
    if level + 1 >= levels.len() {
        let time_index = levels.get(level).map_or(level, |l| l.time_index);
        return Err(GridError::WindowExhausted(time_index));
    }
    Ok(())
}

/// `D_n` of component `c` at window level `level`.
pub fn diff_time(w: &StencilWindow<'_>, c: usize, level: usize) -> Result<Vec<f64>, GridError> {
    next_level(w, level)?;
    let (now, next) = (w.levels()[level].comp(c), w.levels()[level + 1].comp(c));
    let dt = w.grid.dt;
    Ok(now.iter().zip(next).map(|(a, b)| (b - a) / dt).collect())
}

/// `μ_n` of component `c` at window level `level`.
pub fn avg_time(w: &StencilWindow<'_>, c: usize, level: usize) -> Result<Vec<f64>, GridError> {
    next_level(w, level)?;
    let (now, next) = (w.levels()[level].comp(c), w.levels()[level + 1].comp(c));
    Ok(now.iter().zip(next).map(|(a, b)| 0.5 * (b + a)).collect())
}
