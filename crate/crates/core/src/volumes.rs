//! The bodies S_{M,ξ}: membership, Monte Carlo volume, the closed-form area
//! B_M(ξ, t) and the derivative identity tying it to f_ξ.

use crate::error::{Error, Result};
use crate::modgroup::{acosh_from_excess, angle, coords, BasePoint, GroupElement};
use crate::quad::{adaptive, adaptive_panels, KahanSum};
use crate::rational::to_f64;
use num_rational::BigRational;
use num_traits::One;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Body S_{M,ξ} at ω.
#[derive(Clone, Debug)]
pub struct RegionSpec {
    pub omega: BasePoint,
    pub m: GroupElement,
    pub xi: f64,
    pub x_m: BigRational,
    pub y_m: BigRational,
    pub z_m: BigRational,
    /// ℓ(M) = d(ω, Mω).
    pub ell: f64,
    /// coth ℓ.
    pub u_m: f64,
    /// tanh(ℓ/2).
    pub c_m: f64,
    pub theta_m: f64,
    sinh_ell: f64,
    /// U_M − 1, kept separately for accuracy near u = π.
    u_m_minus_1: f64,
    xf: (f64, f64, f64),
}

impl RegionSpec {
    /// M must have nonnegative entries and differ from I.
    pub fn new(omega: &BasePoint, m: GroupElement, xi: f64) -> Result<Self> {
        if m.entries().iter().any(|&e| e < 0) || m == GroupElement::IDENTITY {
            return Err(Error::InvalidArgument(format!(
                "{m} must have nonnegative entries and differ from I"
            )));
        }
        Self::general(omega, m, xi)
    }

    /// Any M that moves ω.
    pub fn general(omega: &BasePoint, m: GroupElement, xi: f64) -> Result<Self> {
        if !(xi > 0.0) {
            return Err(Error::InvalidArgument("xi must be positive".into()));
        }
        let c = coords(omega, &m);
        let theta_m = angle(omega, &m)?.theta;
        let excess = to_f64(&(&c.t / &omega.delta - BigRational::one()));
        let ell = acosh_from_excess(excess);
        let sinh_ell = (excess * (excess + 2.0)).sqrt();
        let ch = 1.0 + excess;
        let u_m = ch / sinh_ell;
        let c_m = (excess / (excess + 2.0)).sqrt();
        let u_m_minus_1 = (-ell).exp() / sinh_ell;
        let xf = (to_f64(&c.x), to_f64(&c.y), to_f64(&c.z));
        Ok(RegionSpec {
            omega: omega.clone(),
            m,
            xi,
            x_m: c.x,
            y_m: c.y,
            z_m: c.z,
            ell,
            u_m,
            c_m,
            theta_m,
            sinh_ell,
            u_m_minus_1,
            xf,
        })
    }

    pub fn with_xi(&self, xi: f64) -> Self {
        let mut s = self.clone();
        s.xi = xi;
        s
    }

    /// Sides of the sampling box: x ∈ [0, bx], y ∈ [−by, by], z ∈ [−k, k].
    pub fn box_dims(&self) -> (f64, f64, f64) {
        let w = &self.omega;
        let ku = w.k - w.u_f.abs();
        (1.0 / (w.v * (w.k * ku).sqrt()), w.k.sqrt() / (w.v * ku.sqrt()), w.k)
    }

    pub fn box_volume(&self) -> f64 {
        let (bx, by, bz) = self.box_dims();
        bx * 2.0 * by * 2.0 * bz
    }

    /// Ξ_M(x, y) for real (x, y).
    pub fn xi_real(&self, x: f64, y: f64) -> f64 {
        let w = &self.omega;
        let (xm, ym, zm) = self.xf;
        let (u, ksq) = (w.u_f, w.ksq_f);
        let num = x * y * (ksq * ym - xm) + x * x * (ksq * zm - u * xm) + y * y * (u * ym - zm);
        let d1 = x * x * ksq + y * y + 2.0 * x * y * u;
        let d2 = x * x * xm + y * y * ym + 2.0 * x * y * zm;
        num / (d1 * d2)
    }
}

/// Membership of (x, y, z) in S_{M,ξ}, box included.
pub fn region_contains(spec: &RegionSpec, x: f64, y: f64, z: f64) -> bool {
    let (bx, by, bz) = spec.box_dims();
    if !(0.0..=bx).contains(&x) || y.abs() > by || z.abs() > bz {
        return false;
    }
    if x == 0.0 && y == 0.0 {
        return false;
    }
    let w = &spec.omega;
    let (xm, ym, zm) = spec.xf;
    let cap = 1.0 / (w.ksq_f + z * z - 2.0 * w.u_f * z);
    let q1 = x * x * w.ksq_f + y * y + 2.0 * x * y * w.u_f;
    let q2 = x * x * xm + y * y * ym + 2.0 * x * y * zm;
    q1.max(q2) <= cap && spec.xi_real(x, y).abs() <= spec.xi
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    MonteCarlo,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: VolumeMethod,
    pub samples_or_nodes: u64,
    pub seed: Option<u64>,
}

const MC_CHUNK: u64 = 1 << 16;

#[inline]
fn unit(r: &mut ChaCha8Rng) -> f64 {
    (r.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Hit-or-miss estimate over the box. Sample i always uses the same stream
/// position, so the result does not depend on the thread count.
pub fn vol_mc(spec: &RegionSpec, n_samples: u64, seed: u64) -> Result<VolumeEstimate> {
    if n_samples < 1000 {
        return Err(Error::InvalidArgument("at least 1000 samples required".into()));
    }
    let (bx, by, bz) = spec.box_dims();
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks as usize)
        .into_par_iter()
        .map(|k| {
            let start = k as u64 * MC_CHUNK;
            let end = (start + MC_CHUNK).min(n_samples);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // 3 draws of 64 bits = 6 words of 32 bits per sample.
            rng.set_word_pos(start as u128 * 6);
            let mut h = 0u64;
            for _ in start..end {
                let x = unit(&mut rng) * bx;
                let y = (2.0 * unit(&mut rng) - 1.0) * by;
                let z = (2.0 * unit(&mut rng) - 1.0) * bz;
                if region_contains(spec, x, y, z) {
                    h += 1;
                }
            }
            h
        })
        .sum();
    let p = hits as f64 / n_samples as f64;
    let vb = spec.box_volume();
    Ok(VolumeEstimate {
        value: vb * p,
        std_error: vb * (p * (1.0 - p) / n_samples as f64).sqrt(),
        method: VolumeMethod::MonteCarlo,
        samples_or_nodes: n_samples,
        seed: Some(seed),
    })
}

/// Kinks of the θ-integrand of B_M(ξ, t) on [0, π], sorted, endpoints included.
fn kinks(spec: &RegionSpec, xi_local: f64, a_fac: f64) -> Vec<f64> {
    let v = spec.omega.v;
    let mut phis = vec![0.0, PI, (-spec.c_m).acos()];
    let k1 = xi_local * a_fac / (v * spec.sinh_ell);
    if k1 <= 1.0 {
        let s = k1.asin();
        phis.extend([s, PI - s]);
    }
    let kap = xi_local * a_fac / v;
    let arg = kap * spec.u_m / (1.0 + kap * kap).sqrt();
    if arg <= 1.0 {
        let al = kap.atan();
        let s = arg.asin();
        phis.extend([al + s, PI + al - s]);
    }
    let mut th: Vec<f64> = Vec::with_capacity(2 * phis.len() + 2);
    for p in phis {
        for sgn in [1.0, -1.0] {
            th.push((0.5 * (spec.theta_m - sgn * p)).rem_euclid(PI));
        }
    }
    th.push(0.0);
    th.push(PI);
    th.sort_by(f64::total_cmp);
    th.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    th
}

/// B_M(ξ, t): area of the (r, θ) region, by quadrature on kink-free panels.
pub fn area_bm(spec: &RegionSpec, xi_local: f64, t: f64) -> f64 {
    area_bm_tol(spec, xi_local, t, 1e-10).0
}

fn area_bm_tol(spec: &RegionSpec, xi_local: f64, t: f64, tol: f64) -> (f64, f64) {
    let v = spec.omega.v;
    let a_fac = t.cos().powi(2) / (v * v);
    let inv_sh = 1.0 / spec.sinh_ell;
    let (u_m, th_m) = (spec.u_m, spec.theta_m);
    let f = |th: f64| {
        let ph = th_m - 2.0 * th;
        let den = u_m + ph.cos();
        let top = a_fac * inv_sh.min(den) - (v / xi_local) * ph.sin().abs();
        if top > 0.0 {
            top / den
        } else {
            0.0
        }
    };
    let pts = kinks(spec, xi_local, a_fac);
    let (val, err) = adaptive_panels(f, &pts, tol * 2.0 * v);
    (val / (2.0 * v), err / (2.0 * v))
}

/// Vol(S_{M,ξ}) = v ∫_{β/2−π/2}^{β/2} B_M(ξ, t) dt/cos²t.
pub fn vol_closed(spec: &RegionSpec) -> VolumeEstimate {
    let w = &spec.omega;
    let (lo, hi) = (0.5 * w.beta - 0.5 * PI, 0.5 * w.beta);
    let xi = spec.xi;
    // Kinks in t come from ξcos²t crossing the f_ξ branch points (scaled).
    let mut pts = vec![lo, hi];
    let (b1, b2) = crate::paircorr::breakpoints(spec.ell);
    for b in [b1, b2] {
        // B_M(ξ, t) = B_M(ξcos²t, 0)cos²t; the switch happens at 2ξcos²t/v = b.
        let c2 = b * w.v / (2.0 * xi);
        if c2 < 1.0 {
            let t0 = c2.sqrt().acos();
            for t in [t0, -t0] {
                if t > lo && t < hi {
                    pts.push(t);
                }
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    let mut nodes = 0u64;
    let mut acc = KahanSum::default();
    for p in pts.windows(2) {
        let (val, _) = adaptive(
            |t| {
                nodes += 1;
                area_bm_tol(spec, xi, t, 1e-11).0 / t.cos().powi(2)
            },
            p[0],
            p[1],
            1e-10,
            1e-12,
        );
        acc.add(val);
    }
    VolumeEstimate {
        value: w.v * acc.value(),
        std_error: 0.0,
        method: VolumeMethod::ClosedForm,
        samples_or_nodes: nodes,
        seed: None,
    }
}

/// The profile B_M(ξ) = B_M(vξ/2, 0)·πv/2.
pub fn bm_profile(spec: &RegionSpec, xi: f64) -> f64 {
    let v = spec.omega.v;
    area_bm_tol(spec, 0.5 * v * xi, 0.0, 1e-13).0 * PI * v / 2.0
}

/// Which of the three interval regimes ξ falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JCase {
    /// ξ ≤ 2 sinh(ℓ/2).
    Small,
    /// 2 sinh(ℓ/2) < ξ < sinh ℓ.
    Middle,
    /// ξ ≥ sinh ℓ.
    Large,
}

pub fn j_case(spec: &RegionSpec) -> JCase {
    let (b1, b2) = crate::paircorr::breakpoints(spec.ell);
    if spec.xi >= b2 {
        JCase::Large
    } else if spec.xi <= b1 {
        JCase::Small
    } else {
        JCase::Middle
    }
}

/// ∫_J sin u/(U_M + cos u) du over the interval set J_{ξ,M}.
pub fn j_integral(spec: &RegionSpec) -> f64 {
    let xi = spec.xi;
    let sh = spec.sinh_ell;
    let ch = spec.u_m * sh;
    let um1 = spec.u_m_minus_1;
    let case = j_case(spec);
    if case == JCase::Large {
        return 2.0 * spec.ell;
    }
    let r = ((sh - xi) * (sh + xi)).sqrt();
    // [0, arcsin(ξ/sinh ℓ)]: ln((U+1)/(U + r/sinh ℓ)).
    let first = (xi * xi / ((sh + r) * (ch + r))).ln_1p();
    // Boundary points π − δ of J² with tan(δ/2) = τ; U + cos(π − δ) = (U − 1) + 2τ²/(1+τ²).
    let p_of = |tau: f64| um1 + 2.0 * tau * tau / (1.0 + tau * tau);
    let tau1 = xi / ((sh + r) * sh * (spec.u_m + 1.0));
    // [π − δ₁, π]: ln(P(π − δ₁)/(U − 1)).
    let last = (2.0 * tau1 * tau1 / ((1.0 + tau1 * tau1) * um1)).ln_1p();
    match case {
        JCase::Small => first + last,
        _ => {
            let tau2 = (sh + r) / (sh * xi * (spec.u_m + 1.0));
            // [π − arcsin(ξ/sinh ℓ), π − δ₂].
            let p_a = um1 + xi * xi / (sh * (sh + r));
            let mid = (p_a / p_of(tau2)).ln();
            first + mid + last
        }
    }
}

/// B′_M(Δξ) = (π/(2Δ²ξ²)) ∫_J sin u/(U_M + cos u) du.
pub fn dbm_dxi(spec: &RegionSpec) -> f64 {
    let d = spec.omega.delta_f;
    PI / (2.0 * d * d * spec.xi * spec.xi) * j_integral(spec)
}
