//! Primitive closed geodesics on the modular surface through the image of ρ:
//! discriminants Δ = B₀² + C₀² − B₀C₀, Pell data, the parametrization φ and
//! the lattice points γρ on the segment (ρ → gρ).

use crate::error::{Error, Result};
use crate::ballenum::{visit_ball, BallMode, BallSpec};
use crate::modgroup::{displacement, normalize, BasePoint, GroupElement, OrbitCoords};
use crate::rational::to_f64;
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeSet;

/// Minimal positive solution of T² − 4k²Δ = 4.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PellSolution {
    #[serde(serialize_with = "ser_big")]
    pub t_big: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub k_small: BigInt,
}

fn ser_big<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// Arithmetic data attached to one Δ ∈ D_ρ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscriminantRecord {
    pub delta: u64,
    pub pairs: Vec<(u64, u64)>,
    pub pell_min: PellSolution,
    /// Minimal (t, u) with t² − 4u²Δ = 9 and 3 ∤ u.
    pub nine_solution: Option<(u64, u64)>,
    /// (ε₁, ε₂): ε₁ = k mod 2, ε₂ = 0 iff a norm-9 solution exists.
    pub class_label: (u8, u8),
    /// Size of each fiber of φ over conjugacy classes.
    pub fibers: u32,
}

impl DiscriminantRecord {
    pub fn class_count(&self) -> usize {
        self.pairs.len() / self.fibers as usize
    }
}

/// A primitive hyperbolic representative whose axis passes through ρ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicRep {
    pub matrix: GroupElement,
    pub delta: u64,
    pub source_pair: (u64, u64),
}

/// ρ lies on the axis of g iff D − A = 2(B − C).
pub fn is_axis_through_rho(g: &GroupElement) -> Result<bool> {
    if g.trace().abs() <= 2 {
        return Err(Error::NotHyperbolic);
    }
    let [a, b, c, d] = g.entries();
    Ok(d - a == 2 * (b - c))
}

fn is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

/// Continued fraction expansion of √n: (a₀, period). `None` for perfect squares.
fn sqrt_cf(n: u64) -> Option<(u64, Vec<u64>)> {
    let a0 = n.sqrt();
    if a0 * a0 == n {
        return None;
    }
    let (mut m, mut d, mut a) = (0u64, 1u64, a0);
    let mut period = Vec::new();
    loop {
        m = d * a - m;
        d = (n - m * m) / d;
        a = (a0 + m) / d;
        period.push(a);
        if a == 2 * a0 {
            break;
        }
    }
    Some((a0, period))
}

/// Convergents p/q of √n over `periods` full periods.
fn convergents(n: u64, periods: usize) -> Option<Vec<(BigInt, BigInt)>> {
    let (a0, per) = sqrt_cf(n)?;
    let mut out = Vec::new();
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::from(a0), BigInt::one());
    out.push((p1.clone(), q1.clone()));
    for _ in 0..periods {
        for &a in &per {
            let a = BigInt::from(a);
            let p2 = &a * &p1 + &p0;
            let q2 = &a * &q1 + &q0;
            p0 = std::mem::replace(&mut p1, p2);
            q0 = std::mem::replace(&mut q1, q2);
            out.push((p1.clone(), q1.clone()));
        }
    }
    Some(out)
}

/// Fundamental solution (x, y) of x² − Δy² = 1 via the continued fraction of √Δ.
fn fundamental_unit(delta: u64) -> Result<(BigInt, BigInt)> {
    let conv = convergents(delta, 2).ok_or(Error::SquareDiscriminant(delta))?;
    let d = BigInt::from(delta);
    for (p, q) in conv {
        if &p * &p - &d * &q * &q == BigInt::one() {
            return Ok((p, q));
        }
    }
    unreachable!("the unit appears within two periods")
}

/// Minimal positive (T, k) with T² − 4k²Δ = 4.
pub fn pell_min(delta: u64) -> Result<PellSolution> {
    let (x, y) = fundamental_unit(delta)?;
    Ok(PellSolution { t_big: x * 2, k_small: y })
}

/// Same as [`pell_min`] by direct search over k ≤ `limit`.
pub fn pell_min_search(delta: u64, limit: u64) -> Result<PellSolution> {
    if is_square(&BigInt::from(delta)) {
        return Err(Error::SquareDiscriminant(delta));
    }
    let d = BigInt::from(delta);
    for k in 1..=limit {
        let k = BigInt::from(k);
        let t2 = BigInt::from(4) * &k * &k * &d + 4;
        if is_square(&t2) {
            return Ok(PellSolution { t_big: t2.sqrt(), k_small: k });
        }
    }
    Err(Error::SearchLimit(limit))
}

/// The unit x + y√Δ with y even generating the solutions of t² − 4u²Δ = 9
/// from one another: ε itself if k is even, else ε².
fn even_unit(delta: u64) -> Result<(BigInt, BigInt)> {
    let (x, y) = fundamental_unit(delta)?;
    if y.is_even() {
        Ok((x, y))
    } else {
        let d = BigInt::from(delta);
        Ok((&x * &x + &d * &y * &y, BigInt::from(2) * &x * &y))
    }
}

/// Minimal positive (t, u) with t² − 4u²Δ = 9 and gcd(3, u) = 1, if any.
pub fn nine_solution(delta: u64) -> Result<Option<(u64, u64)>> {
    if delta % 3 == 0 {
        if sqrt_cf(delta).is_none() {
            return Err(Error::SquareDiscriminant(delta));
        }
        return Ok(None);
    }
    let (x, y) = even_unit(delta)?;
    let d4 = BigInt::from(4 * delta);
    let nine = BigInt::from(9);
    // Fundamental solutions satisfy 0 < u ≤ (y/2)·3/√(2(x + 1)).
    let bound = to_f64(&BigRational::from_integer(y.clone())) * 1.5
        / (2.0 * (to_f64(&BigRational::from_integer(x.clone())) + 1.0)).sqrt();
    if bound < 2e6 {
        for u in 1..=(bound.floor() as u64 + 1) {
            if u % 3 == 0 {
                continue;
            }
            let ub = BigInt::from(u);
            let t2 = &d4 * &ub * &ub + &nine;
            if is_square(&t2) {
                return Ok(Some((t2.sqrt().to_u64().ok_or_else(ovf)?, u)));
            }
        }
        return Ok(None);
    }
    // 9 < √(4Δ) here, so every primitive solution is a convergent of √(4Δ).
    for (p, q) in convergents(4 * delta, 2).expect("4Δ is not a square") {
        if &p * &p - &d4 * &q * &q == nine && !(&q % 3u32).is_zero() {
            let t = p.to_u64().ok_or_else(ovf)?;
            let u = q.to_u64().ok_or_else(ovf)?;
            return Ok(Some((t, u)));
        }
    }
    Ok(None)
}

fn ovf() -> Error {
    Error::Overflow("value exceeds u64".into())
}

/// All coprime (B₀, C₀) > 0 with B₀² + C₀² − B₀C₀ = Δ; empty for square Δ.
pub fn discriminant_pairs(delta: u64) -> Vec<(u64, u64)> {
    let r = delta.sqrt();
    if r * r == delta || delta == 0 {
        return Vec::new();
    }
    let bmax = ((4 * delta) as f64 / 3.0).sqrt() as u64 + 1;
    let mut out = Vec::new();
    for b in 1..=bmax {
        for c in 1..=bmax {
            if b * b + c * c - b * c == delta && b.gcd(&c) == 1 {
                out.push((b, c));
            }
        }
    }
    out
}

/// Number of distinct primes p ≡ 1 (mod 3) dividing n.
pub fn nu(mut n: u64) -> u32 {
    let mut count = 0;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            if p % 3 == 1 {
                count += 1;
            }
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 && n % 3 == 1 {
        count += 1;
    }
    count
}

pub fn in_d_rho(delta: u64) -> bool {
    !discriminant_pairs(delta).is_empty()
}

/// Full arithmetic record of Δ.
pub fn classify(delta: u64) -> Result<DiscriminantRecord> {
    let pairs = discriminant_pairs(delta);
    if pairs.is_empty() {
        return Err(Error::NotInDrho(delta));
    }
    let pell = pell_min(delta)?;
    let nine = nine_solution(delta)?;
    let e1 = if pell.k_small.is_odd() { 1 } else { 0 };
    let e2 = if nine.is_some() { 0 } else { 1 };
    let fibers = match (e1, e2) {
        (1, 1) => 1,
        (0, 0) => 4,
        _ => 2,
    };
    Ok(DiscriminantRecord {
        delta,
        pairs,
        pell_min: pell,
        nine_solution: nine,
        class_label: (e1, e2),
        fibers,
    })
}

fn check_pair(delta: u64, b0: u64, c0: u64) -> Result<()> {
    if b0 == 0 || c0 == 0 || b0.gcd(&c0) != 1 || b0 * b0 + c0 * c0 - b0 * c0 != delta {
        return Err(Error::InvalidArgument(format!(
            "({b0}, {c0}) is not in the pair set of {delta}"
        )));
    }
    if discriminant_pairs(delta).is_empty() {
        return Err(Error::NotInDrho(delta));
    }
    Ok(())
}

/// φ(B₀, C₀) = (T/2 − k(B₀−C₀), kB₀; kC₀, T/2 + k(B₀−C₀)).
pub fn phi_param(delta: u64, b0: u64, c0: u64) -> Result<GeodesicRep> {
    check_pair(delta, b0, c0)?;
    let p = pell_min(delta)?;
    let half = &p.t_big / 2;
    let k = &p.k_small;
    let diff = BigInt::from(b0) - BigInt::from(c0);
    let ents = [
        &half - k * &diff,
        k * BigInt::from(b0),
        k * BigInt::from(c0),
        &half + k * &diff,
    ];
    let mut e = [0i128; 4];
    for (dst, src) in e.iter_mut().zip(&ents) {
        *dst = src
            .to_i128()
            .ok_or_else(|| Error::Overflow(format!("phi({b0},{c0}) for Delta={delta}")))?;
    }
    let matrix = normalize(e[0], e[1], e[2], e[3])?;
    let (_, cosh_d) = displacement(&BasePoint::rho(), &matrix);
    let tb = BigRational::from_integer(p.t_big.clone());
    debug_assert_eq!(cosh_d, &tb * &tb / BigInt::from(2) - BigRational::one());
    Ok(GeodesicRep { matrix, delta, source_pair: (b0, c0) })
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn rho_coords(x: BigRational, y: BigRational, z: BigRational) -> OrbitCoords {
    // At ρ: T = X + Y − Z and Δ = 3/2.
    let t = &x + &y - &z;
    let delta = BigRational::new(3.into(), 2.into());
    let tf = to_f64(&t);
    let df = 1.5;
    let tm = to_f64(&(&t - &delta));
    OrbitCoords { eps_t: df / (tf + (tm * (tf + df)).sqrt()), x, y, z, t }
}

/// Coordinates of the midpoint of (ρ → gρ): X = A + B/2, Y = D + C/2, Z = A/2 + B.
pub fn midpoint_coords(g: &GeodesicRep) -> Result<OrbitCoords> {
    let [a, b, c, d] = g.matrix.entries().map(|e| BigRational::from_integer(e.into()));
    if [&a, &b, &c, &d].iter().any(|e| !e.is_positive()) {
        return Err(Error::InvalidArgument("entries must be positive".into()));
    }
    let z = &a * half() + &b;
    if z != &d * half() + &c {
        return Err(Error::InvalidArgument("axis does not pass through rho".into()));
    }
    let x = &a + &b * half();
    let y = &d + &c * half();
    let out = rho_coords(x, y, z);
    debug_assert_eq!(&out.x * &out.y - &out.z * &out.z, BigRational::new(3.into(), 4.into()));
    Ok(out)
}

/// (X, Y, Z) from a norm-9 solution (t, u) and the pair (B₀, C₀), when integral.
fn coords_from_tu(t: &BigInt, u: &BigInt, b0: u64, c0: u64) -> Option<OrbitCoords> {
    let (b0, c0) = (BigInt::from(b0), BigInt::from(c0));
    let two_z = t + BigInt::from(2) * u * (&b0 + &c0);
    if !(&two_z % BigInt::from(3)).is_zero() {
        return None;
    }
    let x = t + u * (BigInt::from(2) * &c0 - &b0);
    let y = t + u * (BigInt::from(2) * &b0 - &c0);
    let three = BigInt::from(3);
    Some(rho_coords(
        BigRational::new(x, three.clone()),
        BigRational::new(y, three.clone()),
        BigRational::new(two_z, three * 2),
    ))
}

/// Lattice points γρ strictly inside (ρ → gρ) for g = φ(B₀, C₀), as
/// coordinates, sorted by distance from ρ.
pub fn segment_lattice_points(delta: u64, b0: u64, c0: u64) -> Result<Vec<OrbitCoords>> {
    check_pair(delta, b0, c0)?;
    let p = pell_min(delta)?;
    let mut pts = Vec::new();
    // The midpoint, present iff k is even.
    if p.k_small.is_even() {
        let t1 = BigInt::from(3) * (&p.t_big / 2);
        let u1 = BigInt::from(3) * (&p.k_small / 2);
        pts.push(coords_from_tu(&t1, &u1, b0, c0).expect("midpoint is integral"));
    }
    // Off-centre points: orbits of ±α₀ under the even unit.
    if let Some((t0, u0)) = nine_solution(delta)? {
        let (ex, ey) = even_unit(delta)?;
        let d = BigInt::from(delta);
        // Points inside the segment have t/3 < cosh d(ρ, gρ) = T²/2 − 1.
        let t_max = BigInt::from(3) * (&p.t_big * &p.t_big / 2 - 1);
        let mut seen = BTreeSet::new();
        for sign in [1i64, -1] {
            for dir in [1i64, -1] {
                let mut t = BigInt::from(t0);
                let mut u = BigInt::from(u0) * sign;
                // Walk until t leaves the window; t grows monotonically after at most one step.
                for _ in 0..64 {
                    if t.is_positive() && u.is_positive() && t < t_max && seen.insert((t.clone(), u.clone())) {
                        if let Some(c) = coords_from_tu(&t, &u, b0, c0) {
                            pts.push(c);
                        }
                    }
                    let y = &ey * dir;
                    let nt = &t * &ex + &u * &y * &d * 2;
                    let nu = &t * &y / 2 + &u * &ex;
                    t = nt;
                    u = nu;
                    if t.abs() > &t_max * 4 + 100 {
                        break;
                    }
                }
            }
        }
    }
    pts.sort_by(|a, b| a.t.cmp(&b.t));
    Ok(pts)
}

/// Every γ with γρ at the given point (one per element of the stabilizer coset).
pub fn elements_at(point: &OrbitCoords) -> Result<Vec<GroupElement>> {
    let spec = BallSpec::with_qsq(BasePoint::rho(), point.t.clone(), BallMode::Full)?;
    // D = 2 at ρ.
    let two = BigRational::from_integer(2.into());
    let want = [&point.x * &two, &point.y * &two, &point.z * &two];
    if want.iter().any(|w| !w.is_integer()) {
        return Ok(Vec::new());
    }
    let want = want.map(|w| w.to_integer());
    visit_ball(&spec, |h| {
        let (x, y, z) = h.scaled_xyz();
        (x == want[0] && y == want[1] && z == want[2]).then_some(h.element)
    })
}

/// Canonical key of the proper equivalence class of the primitive form
/// (C₀, 2(B₀ − C₀), −B₀) attached to φ(B₀, C₀): the smallest reduced form in its cycle.
pub fn form_class_key(b0: u64, c0: u64) -> (i128, i128, i128) {
    let (a, b, c) = (c0 as i128, 2 * (b0 as i128 - c0 as i128), -(b0 as i128));
    reduced_cycle_min(a, b, c)
}

fn isqrt_f(d: i128) -> f64 {
    (d as f64).sqrt()
}

fn is_reduced(a: i128, b: i128, d: i128) -> bool {
    let s = isqrt_f(d);
    let bf = b as f64;
    b > 0 && bf < s && (s - bf) < 2.0 * (a.abs() as f64) && 2.0 * (a.abs() as f64) < s + bf
}

/// One step ρ(a, b, c) = (c, r, (r² − D)/4c) of indefinite form reduction.
fn rho_step(_a: i128, b: i128, c: i128, d: i128) -> (i128, i128, i128) {
    let s = isqrt_f(d);
    let two_c = 2 * c.abs();
    // r ≡ −b (mod 2|c|), in (√D − 2|c|, √D) when |c| < √D, else in (−|c|, |c|].
    let mut r = (-b).rem_euclid(two_c);
    if (c.abs() as f64) < s {
        let lo = s - two_c as f64;
        while (r as f64) <= lo {
            r += two_c;
        }
        while (r as f64) >= s {
            r -= two_c;
        }
        while (r as f64) <= lo {
            r += two_c;
        }
    } else {
        if r > c.abs() {
            r -= two_c;
        }
    }
    (c, r, (r * r - d) / (4 * c))
}

fn reduced_cycle_min(a: i128, b: i128, c: i128) -> (i128, i128, i128) {
    let d = b * b - 4 * a * c;
    let (mut a, mut b, mut c) = (a, b, c);
    let mut guard = 0;
    while !is_reduced(a, b, d) {
        (a, b, c) = rho_step(a, b, c, d);
        guard += 1;
        assert!(guard < 10_000, "reduction did not terminate");
    }
    let start = (a, b, c);
    let mut best = start;
    loop {
        (a, b, c) = rho_step(a, b, c, d);
        if (a, b, c) < best {
            best = (a, b, c);
        }
        if (a, b, c) == start {
            break;
        }
    }
    best
}

/// Number of distinct conjugacy classes among φ(D_Δ), by reduced form cycles.
pub fn class_count_by_forms(delta: u64) -> usize {
    discriminant_pairs(delta)
        .iter()
        .map(|&(b, c)| form_class_key(b, c))
        .collect::<BTreeSet<_>>()
        .len()
}
