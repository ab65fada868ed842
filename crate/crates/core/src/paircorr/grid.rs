//! Empirical and theoretical curves on a common ξ grid.

use super::empirical::{angle_values, empirical_g2, AngleSet};
use super::theory::TheorySeries;
use crate::ballenum::{stabilizer_order, BallSpec};
use crate::error::{Error, Result};
use crate::modgroup::BasePoint;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct GridMeta {
    pub omega: String,
    pub q: f64,
    pub mode: crate::ballenum::BallMode,
    pub bin_width: f64,
    pub t_cut: Option<String>,
    pub elliptic: u32,
    /// Normalization count: distinct points in the selected ball.
    pub b_norm: f64,
    pub samples: usize,
    pub ball_count: u64,
    pub stabilizers: u64,
}

/// Row j describes the bin (ξ_j − δ, ξ_j] (the first bin is closed at 0).
#[derive(Clone, Debug, Serialize)]
pub struct CorrelationGrid {
    /// Upper bin edges.
    pub xi_values: Vec<f64>,
    /// R₂ at the upper edges.
    pub r2_empirical: Vec<f64>,
    /// Histogram density per bin.
    pub g2_empirical: Vec<f64>,
    /// g₂^el at the upper edges (empty without a theory series).
    pub g2_theory: Vec<f64>,
    pub tail_bound: Vec<f64>,
    pub meta: GridMeta,
}

/// Accepts e = 1 (raw counting) or the stabilizer order of ω.
pub fn check_elliptic(omega: &BasePoint, e: u32) -> Result<()> {
    let order = stabilizer_order(omega);
    if e == 1 || e == order {
        Ok(())
    } else {
        Err(Error::EllipticMismatch { given: e, expected: order })
    }
}

/// Theory columns on the grid `(j+1)·δ`, rescaled by `e`.
pub fn theory_columns(series: &TheorySeries, xs: &[f64], e: u32) -> (Vec<f64>, Vec<f64>) {
    use rayon::prelude::*;
    let vals: Vec<_> = xs.par_iter().map(|&x| series.g2_elliptic(x, e)).collect();
    (
        vals.iter().map(|v| v.value).collect(),
        vals.iter().map(|v| v.tail_bound).collect(),
    )
}

/// The ξ grid used by every curve: δ, 2δ, …, up to `xi_max`.
pub fn xi_grid(delta: f64, xi_max: f64) -> Vec<f64> {
    let nb = (xi_max / delta - 1e-9).ceil().max(0.0) as usize;
    (1..=nb).map(|j| j as f64 * delta).collect()
}

/// Builds the grid from an existing angle set.
pub fn grid_from_angles(
    spec: &BallSpec,
    set: &AngleSet,
    series: Option<&TheorySeries>,
    delta: f64,
    xi_max: f64,
) -> Result<CorrelationGrid> {
    if !(delta > 0.0) || !(xi_max > 0.0) {
        return Err(Error::InvalidArgument("bin width and xi_max must be positive".into()));
    }
    let e = set.dedup;
    let b_norm = set.point_count();
    let h = empirical_g2(&set.angles, b_norm, delta, xi_max);
    let r2 = h.cumulative.iter().map(|&c| c as f64 / b_norm).collect();
    let (g2_theory, tail_bound) = match series {
        Some(s) => theory_columns(s, &h.edges, e),
        None => (Vec::new(), Vec::new()),
    };
    Ok(CorrelationGrid {
        xi_values: h.edges,
        r2_empirical: r2,
        g2_empirical: h.density,
        g2_theory,
        tail_bound,
        meta: GridMeta {
            omega: spec.omega.to_string(),
            q: spec.q,
            mode: spec.mode,
            bin_width: delta,
            t_cut: series.map(|s| s.t_cut.to_string()),
            elliptic: e,
            b_norm,
            samples: set.angles.len(),
            ball_count: set.ball_count,
            stabilizers: set.stabilizers,
        },
    })
}

/// Enumerates the ball and builds the grid with elliptic factor `e`.
pub fn correlation_grid(
    spec: &BallSpec,
    series: Option<&TheorySeries>,
    e: u32,
    delta: f64,
    xi_max: f64,
) -> Result<CorrelationGrid> {
    check_elliptic(&spec.omega, e)?;
    let set = angle_values(spec, e > 1)?;
    grid_from_angles(spec, &set, series, delta, xi_max)
}

/// Re-runs the grid with elliptic factor `e`; `e = 1` returns the input unchanged.
pub fn elliptic_rescale(
    grid: &CorrelationGrid,
    e: u32,
    spec: &BallSpec,
    series: Option<&TheorySeries>,
) -> Result<CorrelationGrid> {
    check_elliptic(&spec.omega, e)?;
    if e == grid.meta.elliptic {
        return Ok(grid.clone());
    }
    correlation_grid(spec, series, e, grid.meta.bin_width, xi_max_of(grid))
}

fn xi_max_of(g: &CorrelationGrid) -> f64 {
    g.xi_values.last().copied().unwrap_or(g.meta.bin_width)
}
