use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::grid::{FieldLevel, GridSpec};

/// Relative discrete ℓ₂ error over all components,
/// `√(Σ_c ‖w_c − e_c‖² / Σ_c ‖e_c‖²)`. Norms are plain sums; the Δx
/// weight cancels in the ratio.
pub fn relative_l2(numerical: &FieldLevel, exact: &FieldLevel) -> Result<f64, BenchError> {
    if numerical.q() != exact.q() || numerical.m() != exact.m() {
        return Err(BenchError::GridMismatch(format!(
            "level shapes differ: {}×{} vs {}×{}",
            numerical.q(),
            numerical.m(),
            exact.q(),
            exact.m()
        )));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (w, e) in numerical.components.iter().zip(&exact.components) {
        for (a, b) in w.iter().zip(e) {
            num += (a - b) * (a - b);
            den += b * b;
        }
    }
    Ok((num / den).sqrt())
}

/// Samples a fine level at the nodes of a coarser grid. The coarse nodes
/// must coincide with fine nodes.
pub fn restrict(fine: &FieldLevel, fine_grid: &GridSpec, coarse: &GridSpec) -> Result<FieldLevel, BenchError> {
    let same_ends = (fine_grid.a - coarse.a).abs() <= 1e-12 * (1.0 + coarse.a.abs())
        && (fine_grid.b - coarse.b).abs() <= 1e-12 * (1.0 + coarse.b.abs());
    if !same_ends || fine_grid.m % coarse.m != 0 || fine.m() != fine_grid.m {
        return Err(BenchError::GridMismatch(format!(
            "{} nodes on [{}, {}] are not a subset of {} nodes on [{}, {}]",
            coarse.m, coarse.a, coarse.b, fine_grid.m, fine_grid.a, fine_grid.b
        )));
    }
    let ratio = fine_grid.m / coarse.m;
    let components = fine.components.iter().map(|c| c.iter().step_by(ratio).copied().collect()).collect();
    Ok(FieldLevel { components, time_index: fine.time_index })
}

/// Location of the global maximum of one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Node carrying the largest value.
    pub node_x: f64,
    /// Vertex of the parabola through that node and its two neighbours.
    pub interpolated_x: f64,
    pub value: f64,
}

pub fn locate_peak(values: &[f64], grid: &GridSpec) -> Result<Peak, BenchError> {
    let m = values.len();
    if m < 3 {
        return Err(BenchError::PeakNotFound);
    }
    let (k, &top) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).ok_or(BenchError::PeakNotFound)?;
    let bottom = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(top - bottom > 1e-12 * top.abs().max(1.0)) {
        return Err(BenchError::PeakNotFound);
    }
    let (l, r) = (values[(k + m - 1) % m], values[(k + 1) % m]);
    let curv = l - 2.0 * top + r;
    let offset = if curv < 0.0 { 0.5 * (l - r) / curv } else { 0.0 };
    let node_x = grid.x(k);
    Ok(Peak { node_x, interpolated_x: node_x + offset * grid.dx, value: top })
}

/// Signed peak displacement `x_max − x̃_max` between a reference and a
/// numerical solution, both at node resolution and interpolated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseShift {
    pub node: f64,
    pub interpolated: f64,
}

pub fn phase_shift_error(
    numerical: &[f64],
    grid: &GridSpec,
    reference: &[f64],
    reference_grid: &GridSpec,
) -> Result<PhaseShift, BenchError> {
    let p = locate_peak(numerical, grid)?;
    let r = locate_peak(reference, reference_grid)?;
    Ok(PhaseShift { node: r.node_x - p.node_x, interpolated: r.interpolated_x - p.interpolated_x })
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_order(steps: &[f64], errors: &[f64]) -> Option<f64> {
    if steps.len() < 2 || steps.len() != errors.len() {
        return None;
    }
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    slope.is_finite().then_some(slope)
}
