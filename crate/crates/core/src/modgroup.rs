//! Base points, normalized PSL₂(ℤ) elements and the exact orbit coordinates
//! (X, Y, Z, T) attached to a pair (ω, γ).

use crate::error::{Error, Result};
use crate::rational::{int_to_f64, parse_rational, rat, to_f64};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;

/// Integer data of a base point after clearing denominators:
/// `u = uu/d` and `ksq = kk/d` with `d = lcm(den u, den ksq)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scale {
    pub d: BigInt,
    pub uu: BigInt,
    pub kk: BigInt,
    /// `(d, uu, kk)` when all three fit comfortably in `i64`.
    pub small: Option<(i128, i128, i128)>,
}

/// The observer ω = u + iv, given by exact rationals u and k² = |ω|².
#[derive(Clone, Debug, PartialEq)]
pub struct BasePoint {
    pub u: BigRational,
    pub ksq: BigRational,
    pub vsq: BigRational,
    /// Δ = 2v².
    pub delta: BigRational,
    pub v: f64,
    pub k: f64,
    pub beta: f64,
    pub u_f: f64,
    pub ksq_f: f64,
    pub delta_f: f64,
    pub scale: Scale,
}

impl BasePoint {
    pub fn new(u: BigRational, ksq: BigRational) -> Result<Self> {
        if !ksq.is_positive() {
            return Err(Error::InvalidBasePoint("ksq must be positive".into()));
        }
        let vsq = &ksq - &u * &u;
        if !vsq.is_positive() {
            return Err(Error::InvalidBasePoint(
                "ksq - u^2 must be positive".into(),
            ));
        }
        let delta = &vsq * BigRational::from_integer(BigInt::from(2));
        let d = u.denom().lcm(ksq.denom());
        let uu = u.numer() * (&d / u.denom());
        let kk = ksq.numer() * (&d / ksq.denom());
        let lim = BigInt::from(1i64 << 40);
        let small = if d < lim && uu.abs() < lim && kk < lim {
            Some((
                d.to_i128().unwrap(),
                uu.to_i128().unwrap(),
                kk.to_i128().unwrap(),
            ))
        } else {
            None
        };
        let v = to_f64(&vsq).sqrt();
        let u_f = to_f64(&u);
        let ksq_f = to_f64(&ksq);
        Ok(BasePoint {
            v,
            k: ksq_f.sqrt(),
            beta: v.atan2(u_f),
            u_f,
            ksq_f,
            delta_f: to_f64(&delta),
            scale: Scale { d, uu, kk, small },
            u,
            ksq,
            vsq,
            delta,
        })
    }

    /// ω = i.
    pub fn i() -> Self {
        Self::new(rat(0, 1), rat(1, 1)).unwrap()
    }

    /// ω = ρ = e^{iπ/3}.
    pub fn rho() -> Self {
        Self::new(rat(1, 2), rat(1, 1)).unwrap()
    }

    /// Parses `i`, `rho`, or `u=p/q,ksq=p/q`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "i" => return Ok(Self::i()),
            "rho" => return Ok(Self::rho()),
            _ => {}
        }
        let mut u = None;
        let mut ksq = None;
        for part in t.split(',') {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidBasePoint(s.to_string()))?;
            match key.trim() {
                "u" => u = Some(parse_rational(val)?),
                "ksq" => ksq = Some(parse_rational(val)?),
                _ => return Err(Error::InvalidBasePoint(s.to_string())),
            }
        }
        match (u, ksq) {
            (Some(u), Some(ksq)) => Self::new(u, ksq),
            _ => Err(Error::InvalidBasePoint(s.to_string())),
        }
    }

    /// ω/k², the base point paired with ω under γ ↦ ηγη.
    pub fn inverted(&self) -> Self {
        Self::new(&self.u / &self.ksq, self.ksq.recip()).unwrap()
    }

    /// Upper bound for |c| over the ball T ≤ Q²: c ≤ Q/v².
    pub fn c_bound(&self, qsq: f64) -> f64 {
        qsq.sqrt() / (self.v * self.v)
    }
}

impl fmt::Display for BasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u={},ksq={}", self.u, self.ksq)
    }
}

/// A normalized PSL₂(ℤ) representative: c > 0, or c = 0 and a = d = 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    a: i128,
    b: i128,
    c: i128,
    d: i128,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { a: 1, b: 0, c: 0, d: 1 };

    pub fn a(&self) -> i128 {
        self.a
    }
    pub fn b(&self) -> i128 {
        self.b
    }
    pub fn c(&self) -> i128 {
        self.c
    }
    pub fn d(&self) -> i128 {
        self.d
    }
    pub fn entries(&self) -> [i128; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Product `self * other`, normalized.
    pub fn mul(&self, o: &GroupElement) -> Result<GroupElement> {
        let ov = || Error::Overflow("matrix product".into());
        let e = |x: i128, y: i128, z: i128, w: i128| -> Result<i128> {
            x.checked_mul(y)
                .and_then(|p| z.checked_mul(w).and_then(|q| p.checked_add(q)))
                .ok_or_else(ov)
        };
        normalize(
            e(self.a, o.a, self.b, o.c)?,
            e(self.a, o.b, self.b, o.d)?,
            e(self.c, o.a, self.d, o.c)?,
            e(self.c, o.b, self.d, o.d)?,
        )
    }

    pub fn inverse(&self) -> GroupElement {
        normalize(self.d, -self.b, -self.c, self.a).expect("inverse of a valid element")
    }

    /// ηγη with η = (0,1;1,0), i.e. (d, c, b, a).
    pub fn eta_conjugate(&self) -> GroupElement {
        normalize(self.d, self.c, self.b, self.a).expect("eta conjugate of a valid element")
    }

    pub fn trace(&self) -> i128 {
        self.a + self.d
    }

    /// γω in floating point.
    pub fn act(&self, w: &BasePoint) -> (f64, f64) {
        let (a, b, c, d) = (self.a as f64, self.b as f64, self.c as f64, self.d as f64);
        let (x, y) = (w.u_f, w.v);
        let (nr, ni) = (a * x + b, a * y);
        let (dr, di) = (c * x + d, c * y);
        let den = dr * dr + di * di;
        ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
    }

    fn key(&self) -> (i128, i128, i128, i128) {
        (self.c, self.d, self.a, self.b)
    }
}

impl Ord for GroupElement {
    /// Lexicographic in (c, d, a, b).
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.a, self.b, self.c, self.d)
    }
}

/// Canonical representative of ±(a, b, c, d). Rejects determinant ≠ 1.
pub fn normalize(a: i128, b: i128, c: i128, d: i128) -> Result<GroupElement> {
    let det = match a
        .checked_mul(d)
        .and_then(|p| b.checked_mul(c).and_then(|q| p.checked_sub(q)))
    {
        Some(x) => BigInt::from(x),
        None => BigInt::from(a) * BigInt::from(d) - BigInt::from(b) * BigInt::from(c),
    };
    if !det.is_one() {
        return Err(Error::InvalidElement(format!(
            "({a},{b},{c},{d}) has determinant {det}"
        )));
    }
    let flip = c < 0 || (c == 0 && a < 0);
    if flip {
        let neg = |x: i128| {
            x.checked_neg()
                .ok_or_else(|| Error::Overflow("negating i128::MIN".into()))
        };
        Ok(GroupElement { a: neg(a)?, b: neg(b)?, c: neg(c)?, d: neg(d)? })
    } else {
        Ok(GroupElement { a, b, c, d })
    }
}

/// Exact coordinates (X, Y, Z, T) of (ω, γ).
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitCoords {
    pub x: BigRational,
    pub y: BigRational,
    pub z: BigRational,
    pub t: BigRational,
    /// ε_T = (T − √(T² − Δ²))/Δ.
    pub eps_t: f64,
}

/// Coordinates scaled to integers: `dx = D·X`, `dy = D·Y`, `dz = D·Z`, `d2t = D²·T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScaledCoords {
    pub dx: i128,
    pub dy: i128,
    pub dz: i128,
    pub d2t: i128,
}

/// Same as [`ScaledCoords`] in arbitrary precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigScaledCoords {
    pub dx: BigInt,
    pub dy: BigInt,
    pub dz: BigInt,
    pub d2t: BigInt,
}

/// Checked i128 evaluation of the scaled coordinates. `None` on overflow.
#[inline]
pub fn scaled_coords_i128(
    (dd, uu, kk): (i128, i128, i128),
    a: i128,
    b: i128,
    c: i128,
    d: i128,
) -> Option<ScaledCoords> {
    let q = |p: i128, r: i128, s: i128| -> Option<i128> {
        // kk*p + dd*r + uu*s
        kk.checked_mul(p)?
            .checked_add(dd.checked_mul(r)?)?
            .checked_add(uu.checked_mul(s)?)
    };
    let dx = q(a.checked_mul(a)?, b.checked_mul(b)?, 2i128.checked_mul(a.checked_mul(b)?)?)?;
    let dy = q(c.checked_mul(c)?, d.checked_mul(d)?, 2i128.checked_mul(c.checked_mul(d)?)?)?;
    let dz = q(
        a.checked_mul(c)?,
        b.checked_mul(d)?,
        a.checked_mul(d)?.checked_add(b.checked_mul(c)?)?,
    )?;
    let d2t = dd
        .checked_mul(dx)?
        .checked_add(kk.checked_mul(dy)?)?
        .checked_sub(2i128.checked_mul(uu.checked_mul(dz)?)?)?;
    Some(ScaledCoords { dx, dy, dz, d2t })
}

pub fn scaled_coords_big(s: &Scale, a: i128, b: i128, c: i128, d: i128) -> BigScaledCoords {
    let (a, b, c, d) = (BigInt::from(a), BigInt::from(b), BigInt::from(c), BigInt::from(d));
    let two = BigInt::from(2);
    let dx = &s.kk * &a * &a + &s.d * &b * &b + &two * &s.uu * &a * &b;
    let dy = &s.kk * &c * &c + &s.d * &d * &d + &two * &s.uu * &c * &d;
    let dz = &s.kk * &a * &c + &s.d * &b * &d + &s.uu * (&a * &d + &b * &c);
    let d2t = &s.d * &dx + &s.kk * &dy - &two * &s.uu * &dz;
    BigScaledCoords { dx, dy, dz, d2t }
}

impl From<ScaledCoords> for BigScaledCoords {
    fn from(s: ScaledCoords) -> Self {
        BigScaledCoords {
            dx: s.dx.into(),
            dy: s.dy.into(),
            dz: s.dz.into(),
            d2t: s.d2t.into(),
        }
    }
}

fn scaled_for(w: &BasePoint, g: &GroupElement) -> BigScaledCoords {
    if let Some(sm) = w.scale.small {
        if let Some(s) = scaled_coords_i128(sm, g.a, g.b, g.c, g.d) {
            return s.into();
        }
    }
    scaled_coords_big(&w.scale, g.a, g.b, g.c, g.d)
}

/// ε_T = Δ/(T + √(T² − Δ²)), evaluated from the exact difference T − Δ.
fn eps_from(t: &BigRational, delta: &BigRational) -> f64 {
    let tf = to_f64(t);
    let df = to_f64(delta);
    let tm = to_f64(&(t - delta));
    df / (tf + (tm * (tf + df)).sqrt())
}

/// Exact (X, Y, Z, T).
pub fn coords(w: &BasePoint, g: &GroupElement) -> OrbitCoords {
    let s = scaled_for(w, g);
    let d = BigRational::from_integer(w.scale.d.clone());
    let x = BigRational::from_integer(s.dx) / &d;
    let y = BigRational::from_integer(s.dy) / &d;
    let z = BigRational::from_integer(s.dz) / &d;
    let t = BigRational::from_integer(s.d2t) / (&d * &d);
    let eps_t = eps_from(&t, &w.delta);
    OrbitCoords { x, y, z, t, eps_t }
}

/// ℓ = d(ω, γω) together with the exact value cosh ℓ = T/Δ.
pub fn displacement(w: &BasePoint, g: &GroupElement) -> (f64, BigRational) {
    let c = coords(w, g);
    let ch = &c.t / &w.delta;
    (acosh_from_excess(to_f64(&(&ch - BigRational::one()))), ch)
}

/// arccosh(1 + m) without cancellation for small m ≥ 0.
pub fn acosh_from_excess(m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    (m + (m * (m + 2.0)).sqrt()).ln_1p()
}

/// A normalized angle sample for pair counting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleSample {
    pub element: GroupElement,
    /// θ ∈ (−π, π].
    pub theta: f64,
    /// frac(θ/2π) ∈ [0, 1).
    pub theta_norm: f64,
    /// T as a float.
    pub t_norm: f64,
}

/// frac(θ/2π) mapped into [0, 1).
#[inline]
pub fn normalize_angle(theta: f64) -> f64 {
    let mut x = theta / TAU;
    if x < 0.0 {
        x += 1.0;
    }
    if x >= 1.0 {
        x = 0.0;
    }
    x
}

/// θ from the integer numerators `p = D³(Z − uY)` and `q = D³(ΔY − T)`.
#[inline]
pub fn theta_from_parts(v: f64, p: f64, q: f64) -> f64 {
    (2.0 * v * p).atan2(q)
}

/// Integer numerators (p, q) of the angle, i128 fast path.
#[inline]
pub fn angle_parts_i128((dd, uu, kk): (i128, i128, i128), s: &ScaledCoords) -> Option<(i128, i128)> {
    let p = dd.checked_mul(dd.checked_mul(s.dz)?.checked_sub(uu.checked_mul(s.dy)?)?)?;
    let dsq = 2i128.checked_mul(kk.checked_mul(dd)?.checked_sub(uu.checked_mul(uu)?)?)?;
    let q = dsq.checked_mul(s.dy)?.checked_sub(dd.checked_mul(s.d2t)?)?;
    Some((p, q))
}

pub fn angle_parts_big(sc: &Scale, s: &BigScaledCoords) -> (BigInt, BigInt) {
    let p = &sc.d * (&sc.d * &s.dz - &sc.uu * &s.dy);
    let dsq = BigInt::from(2) * (&sc.kk * &sc.d - &sc.uu * &sc.uu);
    let q = dsq * &s.dy - &sc.d * &s.d2t;
    (p, q)
}

/// `D²·Δ`, the scaled value of T at a stabilizer.
pub fn scaled_delta(sc: &Scale) -> BigInt {
    BigInt::from(2) * (&sc.kk * &sc.d - &sc.uu * &sc.uu)
}

/// The angle θ_γ at ω.
pub fn angle(w: &BasePoint, g: &GroupElement) -> Result<AngleSample> {
    let s = scaled_for(w, g);
    if s.d2t == scaled_delta(&w.scale) {
        return Err(Error::Stabilizer);
    }
    let (p, q) = angle_parts_big(&w.scale, &s);
    let theta = theta_from_parts(w.v, int_to_f64(&p), int_to_f64(&q));
    let dd = BigInt::from(w.scale.d.clone());
    Ok(AngleSample {
        element: *g,
        theta,
        theta_norm: normalize_angle(theta),
        t_norm: to_f64(&BigRational::new(s.d2t, &dd * &dd)),
    })
}

/// Φ(γ) = Z/Y = Re(γω).
pub fn phi(w: &BasePoint, g: &GroupElement) -> BigRational {
    let c = coords(w, g);
    c.z / c.y
}

/// Ψ(γ) = (Z − uε_T)/(Y − ε_T), the x-intercept of the geodesic through ω and γω.
pub fn psi(w: &BasePoint, g: &GroupElement) -> Result<f64> {
    let c = coords(w, g);
    if c.t == w.delta {
        return Err(Error::Stabilizer);
    }
    let y = to_f64(&c.y);
    let zu = to_f64(&(&c.z - &w.u * &c.y));
    let e = c.eps_t;
    // Ψ − Φ = ε(Z − uY)/(Y(Y − ε)), kept separate to avoid cancellation.
    Ok(to_f64(&(&c.z / &c.y)) + e * zu / (y * (y - e)))
}

/// Ψ(γ) − Φ(γ) without cancellation.
pub fn psi_minus_phi(w: &BasePoint, g: &GroupElement) -> Result<f64> {
    let c = coords(w, g);
    if c.t == w.delta {
        return Err(Error::Stabilizer);
    }
    let y = to_f64(&c.y);
    let zu = to_f64(&(&c.z - &w.u * &c.y));
    Ok(c.eps_t * zu / (y * (y - c.eps_t)))
}

/// Ξ_M(c, d) = Φ(γ) − Φ(γM) for any γ with bottom row (c, d).
pub fn xi(w: &BasePoint, m: &GroupElement, c: &BigInt, d: &BigInt) -> Result<BigRational> {
    let mc = coords(w, m);
    let c_r = BigRational::from_integer(c.clone());
    let d_r = BigRational::from_integer(d.clone());
    let two = BigRational::from_integer(BigInt::from(2));
    let cd = &c_r * &d_r;
    let cc = &c_r * &c_r;
    let dsq = &d_r * &d_r;
    let num = &cd * (&w.ksq * &mc.y - &mc.x)
        + &cc * (&w.ksq * &mc.z - &w.u * &mc.x)
        + &dsq * (&w.u * &mc.y - &mc.z);
    let den1 = &cc * &w.ksq + &dsq + &two * &cd * &w.u;
    let den2 = &cc * &mc.x + &dsq * &mc.y + &two * &cd * &mc.z;
    if den1.is_zero() || den2.is_zero() {
        return Err(Error::ZeroDenominator(c.to_string(), d.to_string()));
    }
    Ok(num / (den1 * den2))
}
