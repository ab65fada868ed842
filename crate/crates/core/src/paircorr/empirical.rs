//! Angle lists and ordered pair counting on the circle ℝ/ℤ.

use crate::ballenum::{is_coset_min, stabilizer, visit_ball, BallSpec};
use crate::error::Result;
use crate::modgroup::AngleSample;
use rayon::prelude::*;
use serde::Serialize;

/// Non-stabilizer samples of a ball, sorted by (theta_norm, element).
pub fn angle_list(spec: &BallSpec) -> Result<(Vec<AngleSample>, u64)> {
    let w = &spec.omega;
    let raw = visit_ball(spec, |h| {
        Some(match h.angle(w) {
            Some((theta, theta_norm)) => Ok(AngleSample {
                element: h.element,
                theta,
                theta_norm,
                t_norm: h.t_f64(w),
            }),
            None => Err(()),
        })
    })?;
    let stab = raw.iter().filter(|r| r.is_err()).count() as u64;
    let mut v: Vec<AngleSample> = raw.into_iter().filter_map(|r| r.ok()).collect();
    v.par_sort_unstable_by(|a, b| {
        a.theta_norm
            .total_cmp(&b.theta_norm)
            .then_with(|| a.element.cmp(&b.element))
    });
    Ok((v, stab))
}

/// Compact sorted list of normalized angles.
#[derive(Clone, Debug, Serialize)]
pub struct AngleSet {
    /// Sorted values of frac(θ/2π).
    #[serde(skip)]
    pub angles: Vec<f64>,
    /// Elements of the ball selected by the mode (before any deduplication).
    pub ball_count: u64,
    /// Stabilizer elements among them.
    pub stabilizers: u64,
    /// 1, or the stabilizer order when one representative per orbit point is kept.
    pub dedup: u32,
}

impl AngleSet {
    /// Number of distinct points the angles stand for, including stabilizer
    /// points: `ball_count / dedup`.
    pub fn point_count(&self) -> f64 {
        self.ball_count as f64 / self.dedup as f64
    }
}

/// Sorted angles of the ball. With `dedup`, keeps one element per coset
/// γ·Stab(ω), so every orbit point γω ≠ ω contributes once.
pub fn angle_values(spec: &BallSpec, dedup: bool) -> Result<AngleSet> {
    let w = &spec.omega;
    let stab = stabilizer(w);
    let e = if dedup { stab.len() as u32 } else { 1 };
    let raw = visit_ball(spec, |h| match h.angle(w) {
        None => Some(None),
        Some((_, tn)) => {
            if e > 1 && !is_coset_min(&h.element, &stab) {
                Some(Some(f64::NAN))
            } else {
                Some(Some(tn))
            }
        }
    })?;
    let ball_count = raw.len() as u64;
    let stabilizers = raw.iter().filter(|r| r.is_none()).count() as u64;
    let mut angles: Vec<f64> = raw.into_iter().flatten().filter(|x| !x.is_nan()).collect();
    angles.par_sort_unstable_by(f64::total_cmp);
    Ok(AngleSet { angles, ball_count, stabilizers, dedup: e })
}

/// Circular difference frac(b − a) for a, b ∈ [0, 1), as used by every counter here.
#[inline]
pub fn circ_diff(a: f64, b: f64) -> f64 {
    let d = b - a;
    if d < 0.0 {
        d + 1.0
    } else {
        d
    }
}

/// Number of ordered pairs (i, j), i ≠ j, with frac(s_j − s_i) ∈ [0, w].
/// `s` must be sorted ascending. O(N) two-pointer sweep.
pub fn count_pairs(s: &[f64], w: f64) -> u64 {
    let n = s.len();
    if n < 2 {
        return 0;
    }
    if w >= 1.0 {
        return (n * (n - 1)) as u64;
    }
    let mut total: u64 = 0;
    // hi: first index with s[j] − s[i] > w (non-wrapped window end).
    // lo: first index with s[j] ≥ s[i].
    // wr: first index with s[j] − s[i] + 1 > w (wrapped window end).
    let (mut hi, mut lo, mut wr) = (0usize, 0usize, 0usize);
    for i in 0..n {
        let si = s[i];
        while lo < n && s[lo] < si {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < n && s[hi] - si <= w {
            hi += 1;
        }
        while wr < lo && (s[wr] - si) + 1.0 <= w {
            wr += 1;
        }
        if wr > lo {
            wr = lo;
        }
        total += (hi - lo) as u64 + wr as u64;
    }
    total - n as u64
}

/// O(N²) reference counter using the same float expressions as [`count_pairs`].
pub fn count_pairs_brute(s: &[f64], w: f64) -> u64 {
    let mut c = 0;
    for (i, &a) in s.iter().enumerate() {
        for (j, &b) in s.iter().enumerate() {
            if i != j && circ_diff(a, b) <= w {
                c += 1;
            }
        }
    }
    c
}

/// R₂(ξ) = #pairs with window ξ/b_norm, divided by b_norm, for each ξ.
pub fn empirical_r2(sorted: &[f64], b_norm: f64, xi_grid: &[f64]) -> Vec<f64> {
    xi_grid
        .par_iter()
        .map(|&xi| count_pairs(sorted, xi / b_norm) as f64 / b_norm)
        .collect()
}

/// Histogram of pair differences in units of 1/b_norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairHistogram {
    pub delta: f64,
    /// Upper bin edges (j + 1)δ.
    pub edges: Vec<f64>,
    /// Pairs with window up to each upper edge.
    pub cumulative: Vec<u64>,
    /// Pairs per bin; bin 0 is [0, δ], bin j > 0 is (jδ, (j+1)δ].
    pub counts: Vec<u64>,
    /// counts/(b_norm·δ).
    pub density: Vec<f64>,
}

pub fn empirical_g2(sorted: &[f64], b_norm: f64, delta: f64, xi_max: f64) -> PairHistogram {
    let nb = (xi_max / delta - 1e-9).ceil().max(0.0) as usize;
    let edges: Vec<f64> = (1..=nb).map(|j| j as f64 * delta).collect();
    let cumulative: Vec<u64> = edges
        .par_iter()
        .map(|&x| count_pairs(sorted, x / b_norm))
        .collect();
    let mut counts = Vec::with_capacity(nb);
    let mut prev = 0;
    for &c in &cumulative {
        counts.push(c - prev);
        prev = c;
    }
    let density = counts.iter().map(|&c| c as f64 / (b_norm * delta)).collect();
    PairHistogram { delta, edges, cumulative, counts, density }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_count() {
        let s = [0.1, 0.3];
        assert_eq!(empirical_r2(&s, 2.0, &[0.5]), vec![0.5]);
        assert_eq!(count_pairs(&s, 0.85), 2);
    }

    #[test]
    fn full_window() {
        let s = [0.0, 0.2, 0.5, 0.9];
        assert_eq!(count_pairs(&s, 1.0), 12);
        assert_eq!(empirical_r2(&s, 3.0, &[5.0]), vec![4.0]);
    }

    #[test]
    fn ties_and_zero_window() {
        let s = [0.25, 0.25, 0.25, 0.5];
        assert_eq!(count_pairs(&s, 0.0), 6);
        assert_eq!(count_pairs_brute(&s, 0.0), 6);
        assert_eq!(count_pairs(&s, 0.75), count_pairs_brute(&s, 0.75));
    }

    #[test]
    fn empty_histogram() {
        let h = empirical_g2(&[], 1.0, 0.05, 4.0);
        assert_eq!(h.counts.len(), 80);
        assert!(h.density.iter().all(|&x| x == 0.0));
    }
}
