//! Exact enumeration of normalized PSL₂(ℤ) elements with T ≤ Q².
//!
//! Elements are produced stratified by the bottom-left entry c. For c ≥ 1 the
//! bottom row (c, d) runs over coprime pairs with Y ≤ Q²/v², then a runs over
//! the residue class d⁻¹ mod c inside the window allowed by T ≤ Q², and
//! b = (ad − 1)/c. Each candidate is confirmed by an exact integer test.

use crate::error::{Error, Result};
use crate::modgroup::{
    angle_parts_big, angle_parts_i128, normalize_angle, scaled_coords_big, scaled_coords_i128,
    scaled_delta, theta_from_parts, BasePoint, BigScaledCoords, GroupElement, ScaledCoords,
};
use crate::rational::{int_to_f64, to_f64};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Add;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallMode {
    Full,
    HalfInner,
    HalfOuter,
}

impl std::str::FromStr for BallMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(BallMode::Full),
            "half_inner" | "inner" => Ok(BallMode::HalfInner),
            "half_outer" | "outer" => Ok(BallMode::HalfOuter),
            _ => Err(Error::InvalidArgument(format!("unknown ball mode `{s}`"))),
        }
    }
}

/// Ball ‖γ‖ ≤ Q around ω, i.e. T ≤ Q² with Q² exact.
#[derive(Clone, Debug)]
pub struct BallSpec {
    pub omega: BasePoint,
    pub q: f64,
    pub qsq: BigRational,
    pub mode: BallMode,
    /// Refuse to enumerate when the projected element count exceeds this.
    pub max_elements: Option<u64>,
}

impl BallSpec {
    pub fn with_qsq(omega: BasePoint, qsq: BigRational, mode: BallMode) -> Result<Self> {
        if !qsq.is_positive() {
            return Err(Error::InvalidArgument("Q^2 must be positive".into()));
        }
        Ok(BallSpec { q: to_f64(&qsq).sqrt(), omega, qsq, mode, max_elements: None })
    }

    pub fn with_q(omega: BasePoint, q: BigRational, mode: BallMode) -> Result<Self> {
        if !q.is_positive() {
            return Err(Error::InvalidArgument("Q must be positive".into()));
        }
        Self::with_qsq(omega, &q * &q, mode)
    }

    pub fn budget(mut self, max_elements: u64) -> Self {
        self.max_elements = Some(max_elements);
        self
    }

    /// Expected size of the full ball, 6Q²/Δ, padded.
    pub fn projected_count(&self) -> u64 {
        let qsq = to_f64(&self.qsq);
        (1.15 * 6.0 * qsq / self.omega.delta_f + 16.0) as u64
    }
}

/// Position of γω relative to the circle |z| = k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Inner,
    Outer,
    Boundary,
}

#[derive(Clone, Debug)]
enum HitCoords {
    Small(ScaledCoords),
    Big(Box<BigScaledCoords>),
}

/// One enumerated element with its scaled coordinates.
#[derive(Clone, Debug)]
pub struct BallHit {
    pub element: GroupElement,
    pub side: Side,
    pub stabilizer: bool,
    coords: HitCoords,
}

impl BallHit {
    /// T as a reduced fraction (numerator, denominator).
    pub fn t_fraction(&self, w: &BasePoint) -> (BigInt, BigInt) {
        let d2t = match &self.coords {
            HitCoords::Small(s) => BigInt::from(s.d2t),
            HitCoords::Big(b) => b.d2t.clone(),
        };
        let dd = &w.scale.d * &w.scale.d;
        let g = d2t.gcd(&dd);
        (d2t / &g, dd / g)
    }

    pub fn t(&self, w: &BasePoint) -> BigRational {
        let (n, d) = self.t_fraction(w);
        BigRational::new(n, d)
    }

    /// `D²·T`.
    pub fn scaled_t(&self) -> BigInt {
        match &self.coords {
            HitCoords::Small(s) => BigInt::from(s.d2t),
            HitCoords::Big(b) => b.d2t.clone(),
        }
    }

    /// `(D·X, D·Y, D·Z)`; equal triples mean equal orbit points.
    pub fn scaled_xyz(&self) -> (BigInt, BigInt, BigInt) {
        match &self.coords {
            HitCoords::Small(s) => (s.dx.into(), s.dy.into(), s.dz.into()),
            HitCoords::Big(b) => (b.dx.clone(), b.dy.clone(), b.dz.clone()),
        }
    }

    /// θ and frac(θ/2π). `None` for stabilizer elements.
    pub fn angle(&self, w: &BasePoint) -> Option<(f64, f64)> {
        if self.stabilizer {
            return None;
        }
        let (p, q) = match &self.coords {
            HitCoords::Small(s) => match w.scale.small.and_then(|sm| angle_parts_i128(sm, s)) {
                Some((p, q)) => (p as f64, q as f64),
                None => {
                    let (p, q) = angle_parts_big(&w.scale, &BigScaledCoords::from(*s));
                    (int_to_f64(&p), int_to_f64(&q))
                }
            },
            HitCoords::Big(b) => {
                let (p, q) = angle_parts_big(&w.scale, b);
                (int_to_f64(&p), int_to_f64(&q))
            }
        };
        let th = theta_from_parts(w.v, p, q);
        Some((th, normalize_angle(th)))
    }

    /// T in floating point.
    pub fn t_f64(&self, w: &BasePoint) -> f64 {
        match (&self.coords, w.scale.small) {
            (HitCoords::Small(s), Some((d, _, _))) => s.d2t as f64 / (d * d) as f64,
            _ => to_f64(&self.t(w)),
        }
    }
}

/// Cardinalities of the ball and its half-ball partition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallStats {
    pub b_total: u64,
    pub b_inner: u64,
    pub b_outer: u64,
    pub b_boundary: u64,
    pub b_stabilizer: u64,
}

impl Add for BallStats {
    type Output = BallStats;
    fn add(self, o: BallStats) -> BallStats {
        BallStats {
            b_total: self.b_total + o.b_total,
            b_inner: self.b_inner + o.b_inner,
            b_outer: self.b_outer + o.b_outer,
            b_boundary: self.b_boundary + o.b_boundary,
            b_stabilizer: self.b_stabilizer + o.b_stabilizer,
        }
    }
}

impl BallStats {
    /// Number of elements selected by `mode`.
    pub fn for_mode(&self, mode: BallMode) -> u64 {
        match mode {
            BallMode::Full => self.b_total,
            BallMode::HalfInner => self.b_inner,
            BallMode::HalfOuter => self.b_outer,
        }
    }
}

/// Exact membership machinery shared by all strata.
struct Tester<'a> {
    w: &'a BasePoint,
    /// `(D, U, K, qd, qn·D², D²Δ)` when every quantity fits in i128.
    small: Option<(i128, i128, i128, i128, i128, i128)>,
    qn: BigInt,
    qd: BigInt,
    dsq_delta: BigInt,
}

impl<'a> Tester<'a> {
    fn new(spec: &'a BallSpec) -> Self {
        let w = &spec.omega;
        let qn = spec.qsq.numer().clone();
        let qd = spec.qsq.denom().clone();
        let dsq_delta = scaled_delta(&w.scale);
        let small = w.scale.small.and_then(|(d, u, k)| {
            let qd_s = qd.to_i128()?;
            let rhs = qn.to_i128()?.checked_mul(d.checked_mul(d)?)?;
            let dl = dsq_delta.to_i128()?;
            if qd_s > (1i128 << 60) {
                return None;
            }
            Some((d, u, k, qd_s, rhs, dl))
        });
        Tester { w, small, qn, qd, dsq_delta }
    }

    #[inline]
    fn test(&self, a: i128, b: i128, c: i128, d: i128) -> Option<BallHit> {
        if let Some((dd, uu, kk, qd, rhs, dl)) = self.small {
            if let Some(s) = scaled_coords_i128((dd, uu, kk), a, b, c, d) {
                if let Some(lhs) = s.d2t.checked_mul(qd) {
                    if lhs > rhs {
                        return None;
                    }
                    let (l, r) = (dd.checked_mul(s.dx), kk.checked_mul(s.dy));
                    if let (Some(l), Some(r)) = (l, r) {
                        let side = match l.cmp(&r) {
                            std::cmp::Ordering::Less => Side::Inner,
                            std::cmp::Ordering::Greater => Side::Outer,
                            std::cmp::Ordering::Equal => Side::Boundary,
                        };
                        return Some(BallHit {
                            element: elem(a, b, c, d),
                            side,
                            stabilizer: s.d2t == dl,
                            coords: HitCoords::Small(s),
                        });
                    }
                }
            }
        }
        self.test_big(a, b, c, d)
    }

    fn test_big(&self, a: i128, b: i128, c: i128, d: i128) -> Option<BallHit> {
        let sc = &self.w.scale;
        let s = scaled_coords_big(sc, a, b, c, d);
        if &s.d2t * &self.qd > &self.qn * &sc.d * &sc.d {
            return None;
        }
        let side = match (&sc.d * &s.dx).cmp(&(&sc.kk * &s.dy)) {
            std::cmp::Ordering::Less => Side::Inner,
            std::cmp::Ordering::Greater => Side::Outer,
            std::cmp::Ordering::Equal => Side::Boundary,
        };
        Some(BallHit {
            element: elem(a, b, c, d),
            side,
            stabilizer: s.d2t == self.dsq_delta,
            coords: HitCoords::Big(Box::new(s)),
        })
    }
}

#[inline]
fn elem(a: i128, b: i128, c: i128, d: i128) -> GroupElement {
    crate::modgroup::normalize(a, b, c, d).expect("enumerated element has determinant 1")
}

fn mod_inverse(d: i128, c: i128) -> i128 {
    let e = num_integer::Integer::extended_gcd(&d.rem_euclid(c), &c);
    e.x.rem_euclid(c)
}

/// Calls `f` on every element of the ball with bottom-left entry `c`, in (d, a) order.
fn scan_c(spec: &BallSpec, t: &Tester, c: i128, f: &mut dyn FnMut(BallHit)) {
    let w = &spec.omega;
    let qsq = to_f64(&spec.qsq);
    let (u, vsq, ksq) = (w.u_f, w.v * w.v, w.ksq_f);
    if c == 0 {
        let r = (qsq - w.delta_f).max(0.0).sqrt().floor() as i128 + 1;
        for b in -r..=r {
            if let Some(h) = t.test(1, b, 0, 1) {
                f(h);
            }
        }
        return;
    }
    let cf = c as f64;
    let s = (qsq / vsq - cf * cf * vsq).max(0.0).sqrt();
    let d_lo = (-cf * u - s).floor() as i128 - 1;
    let d_hi = (-cf * u + s).ceil() as i128 + 1;
    for d in d_lo..=d_hi {
        if d.gcd(&c) != 1 {
            continue;
        }
        let df = d as f64;
        let y = cf * cf * ksq + df * df + 2.0 * cf * df * u;
        let rr = ((qsq - vsq / y - y * vsq) / y).max(0.0);
        let center = cf * (u + (cf * u + df) / (cf * y));
        let half = cf * rr.sqrt();
        let a_lo = (center - half).floor() as i128 - 1;
        let a_hi = (center + half).ceil() as i128 + 1;
        let inv = if c == 1 { 0 } else { mod_inverse(d, c) };
        let mut a = a_lo + (inv - a_lo).rem_euclid(c);
        while a <= a_hi {
            let b = (a * d - 1) / c;
            if let Some(h) = t.test(a, b, c, d) {
                f(h);
            }
            a += c;
        }
    }
}

fn keep(mode: BallMode, h: &BallHit) -> bool {
    match mode {
        BallMode::Full => true,
        BallMode::HalfInner => h.side == Side::Inner,
        BallMode::HalfOuter => h.side == Side::Outer,
    }
}

fn check_budget(spec: &BallSpec) -> Result<()> {
    if let Some(budget) = spec.max_elements {
        let projected = spec.projected_count();
        if projected > budget {
            return Err(Error::Capacity { projected, budget });
        }
    }
    Ok(())
}

fn c_max(spec: &BallSpec) -> i128 {
    spec.omega.c_bound(to_f64(&spec.qsq)).floor() as i128 + 1
}

/// Maps every element selected by `spec.mode` through `f` and returns the
/// kept results in (c, d, a) order. Deterministic for any thread count.
pub fn visit_ball<R, F>(spec: &BallSpec, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&BallHit) -> Option<R> + Sync,
{
    check_budget(spec)?;
    let t = Tester::new(spec);
    let chunks: Vec<Vec<R>> = (0..c_max(spec) as usize + 1)
        .into_par_iter()
        .with_max_len(4)
        .map(|c| {
            let c = c as i128;
            let mut out = Vec::new();
            scan_c(spec, &t, c, &mut |h| {
                if keep(spec.mode, &h) {
                    if let Some(r) = f(&h) {
                        out.push(r);
                    }
                }
            });
            out
        })
        .collect();
    let n = chunks.iter().map(Vec::len).sum();
    let mut all = Vec::with_capacity(n);
    for ch in chunks {
        all.extend(ch);
    }
    Ok(all)
}

/// All elements selected by `spec.mode`, sorted by (c, d, a).
pub fn enumerate_ball(spec: &BallSpec) -> Result<Vec<GroupElement>> {
    visit_ball(spec, |h| Some(h.element))
}

/// Counts of the full ball split by side, plus stabilizer elements.
pub fn count_ball(spec: &BallSpec) -> Result<BallStats> {
    let t = Tester::new(spec);
    Ok((0..c_max(spec) as usize + 1)
        .into_par_iter()
        .with_max_len(4)
        .map(|c| {
            let c = c as i128;
            let mut st = BallStats::default();
            scan_c(spec, &t, c, &mut |h| {
                st.b_total += 1;
                match h.side {
                    Side::Inner => st.b_inner += 1,
                    Side::Outer => st.b_outer += 1,
                    Side::Boundary => st.b_boundary += 1,
                }
                if h.stabilizer {
                    st.b_stabilizer += 1;
                }
            });
            st
        })
        .reduce(BallStats::default, |a, b| a + b))
}

/// The stabilizer of ω in PSL₂(ℤ), sorted.
pub fn stabilizer(w: &BasePoint) -> Vec<GroupElement> {
    let spec = BallSpec::with_qsq(w.clone(), w.delta.clone(), BallMode::Full)
        .expect("Delta is positive");
    enumerate_ball(&spec).expect("no budget set")
}

/// Order of the stabilizer of ω (2 at i, 3 at ρ, otherwise 1).
pub fn stabilizer_order(w: &BasePoint) -> u32 {
    stabilizer(w).len() as u32
}

/// True when `g` is the smallest element of its coset g·Stab(ω) in (c, d, a, b) order.
pub fn is_coset_min(g: &GroupElement, stab: &[GroupElement]) -> bool {
    stab.iter()
        .all(|s| s == &GroupElement::IDENTITY || g.mul(s).map(|h| *g <= h).unwrap_or(true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn tiny_ball_at_i() {
        let spec = BallSpec::with_qsq(BasePoint::i(), rat(2, 1), BallMode::Full).unwrap();
        let v = enumerate_ball(&spec).unwrap();
        let want: Vec<_> = [(1, 0, 0, 1), (0, -1, 1, 0)]
            .iter()
            .map(|&(a, b, c, d)| crate::modgroup::normalize(a, b, c, d).unwrap())
            .collect();
        assert_eq!(v, want);
        let st = count_ball(&spec).unwrap();
        assert_eq!((st.b_total, st.b_stabilizer), (2, 2));
    }

    #[test]
    fn stabilizer_orders() {
        assert_eq!(stabilizer_order(&BasePoint::i()), 2);
        assert_eq!(stabilizer_order(&BasePoint::rho()), 3);
        assert_eq!(stabilizer_order(&BasePoint::parse("u=1/3,ksq=3/2").unwrap()), 1);
    }

    #[test]
    fn budget_rejects() {
        let spec = BallSpec::with_qsq(BasePoint::i(), rat(1_000_000, 1), BallMode::Full)
            .unwrap()
            .budget(1000);
        assert!(matches!(enumerate_ball(&spec), Err(Error::Capacity { .. })));
    }

    #[test]
    fn t_fraction_reduced() {
        let w = BasePoint::parse("u=1/3,ksq=3/2").unwrap();
        let spec = BallSpec::with_qsq(w.clone(), rat(20, 1), BallMode::Full).unwrap();
        let hits = visit_ball(&spec, |h| Some(h.clone())).unwrap();
        for h in hits {
            let c = crate::modgroup::coords(&w, &h.element);
            assert_eq!(h.t(&w), c.t);
        }
    }
}
