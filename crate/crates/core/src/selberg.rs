//! The point-pair kernel k_X(u) = f_X(d) and its Selberg/Harish-Chandra
//! transform h(t) = 2π ∫ f_X(r) sinh r e^{−rs} F(s, 1/2; 1; 1 − e^{−2r}) dr,
//! s = 1/2 + it.

use crate::error::{Error, Result};
use crate::modgroup::acosh_from_excess;
use crate::paircorr::f_xi;
use crate::quad::adaptive_complex;
use crate::special::{gamma, hyp2f1_half_at, hyp2f1_series, rgamma};
use num_complex::Complex64;
use std::f64::consts::PI;

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub x_param: f64,
    /// sinh r1 = X
    pub r1: f64,
    /// 2 sinh(r2/2) = X
    pub r2: f64,
}

impl KernelSpec {
    pub fn new(x: f64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidArgument(format!("X must be positive, got {x}")));
        }
        Ok(KernelSpec { x_param: x, r1: x.asinh(), r2: 2.0 * (0.5 * x).asinh() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformValue {
    pub t: C,
    pub h: C,
    pub est_abs_error: f64,
}

/// Side from which the derivative is taken at the two kinks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub fn f_kernel(spec: &KernelSpec, r: f64) -> f64 {
    f_xi(spec.x_param, r)
}

/// f′_X(r). At r1 and r2 the one-sided value from `side` is returned;
/// the right derivative at r1 is −∞.
pub fn f_kernel_prime(spec: &KernelSpec, r: f64, side: Side) -> f64 {
    let x = spec.x_param;
    let left_of = |p: f64| r < p || (r == p && side == Side::Left);
    if left_of(spec.r1) {
        return 1.0;
    }
    let sh = r.sinh();
    let root = ((sh - x) * (sh + x)).max(0.0).sqrt();
    if left_of(spec.r2) {
        1.0 - 2.0 * sh / root
    } else {
        // 1 − sh/√(sh² − X²) without cancellation.
        -x * x / (root * (root + sh))
    }
}

/// k_X(u) = f_X(arccosh(1 + 2u)).
pub fn kernel_k(spec: &KernelSpec, u: f64) -> f64 {
    f_kernel(spec, acosh_from_excess(2.0 * u))
}

/// |t| above which h is assembled from h₁(t) + h₁(−t).
const SPLIT_T: f64 = 5.0;
/// Length of the integration range beyond r2.
const TAIL_SPAN: f64 = 40.0;

fn direct_integrand(spec: &KernelSpec, s: C, r: f64) -> C {
    if r <= 0.0 {
        return C::new(0.0, 0.0);
    }
    let x = (-2.0 * r).exp();
    let z = -(-2.0 * r).exp_m1();
    let (f, _) = hyp2f1_half_at(s, z, x);
    f * (-r * s).exp() * (f_kernel(spec, r) * r.sinh())
}

/// Γ(1/2 − s)/(Γ(1/2)Γ(1 − s)).
fn h1_prefactor(s: C) -> C {
    gamma(0.5 - s) * rgamma(1.0 - s) / PI.sqrt()
}

fn h1_integrand(spec: &KernelSpec, s: C, r: f64) -> C {
    let x = (-2.0 * r).exp();
    let f = hyp2f1_series(s, C::new(0.5, 0.0), s + 0.5, x);
    f * (-r * s).exp() * (f_kernel(spec, r) * r.sinh())
}

fn integrate_panels<G: Fn(f64) -> C>(spec: &KernelSpec, g: G, pts: &[f64], rel: f64) -> (C, f64) {
    let abs_tol = 1e-15 * spec.x_param * spec.x_param;
    let mut total = C::new(0.0, 0.0);
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (v, e) = if a == spec.r1 && b <= spec.r2 {
            // f has a square-root singularity to the right of r1.
            let wmax = (b - a).sqrt();
            adaptive_complex(|w| g(a + w * w) * (2.0 * w), 0.0, wmax, abs_tol, rel)
        } else {
            adaptive_complex(&g, a, b, abs_tol, rel)
        };
        total += v;
        err += e;
    }
    (total, err)
}

fn breakpoints(spec: &KernelSpec, lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    pts.extend(extra.iter().copied().filter(|&p| p > lo && p < hi));
    for p in [spec.r1, spec.r2] {
        if p > lo && p < hi {
            pts.push(p);
        }
    }
    let mut k = spec.r2.max(lo) + 1.0;
    while k < hi {
        pts.push(k);
        k += 1.0;
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    pts
}

/// h(t) for |Im t| ≤ 1/2.
pub fn h_transform(spec: &KernelSpec, t: C) -> Result<TransformValue> {
    if t.im.abs() > 0.5 + 1e-12 || !t.re.is_finite() {
        return Err(Error::OutsideStrip);
    }
    let s = C::new(0.5, 0.0) + C::new(0.0, 1.0) * t;
    let r_max = spec.r2 + TAIL_SPAN;
    let rel = 1e-12;
    let (val, err) = if t.norm() <= SPLIT_T {
        let pts = breakpoints(spec, 0.0, r_max, &[]);
        integrate_panels(spec, |r| direct_integrand(spec, s, r), &pts, rel)
    } else {
        // Near r = 0 the connection formula is unusable, elsewhere the Gauss
        // series for F(s, 1/2; 1; ·) loses precision at large |t|.
        let r_s = (0.5 * std::f64::consts::LN_2).min(1.0 / t.norm());
        let near = breakpoints(spec, 0.0, r_s, &[]);
        let (v0, e0) = integrate_panels(spec, |r| direct_integrand(spec, s, r), &near, rel);
        let far = breakpoints(spec, r_s, r_max, &[]);
        let s2 = 1.0 - s;
        let (v1, e1) = integrate_panels(spec, |r| h1_integrand(spec, s, r), &far, rel);
        let (v2, e2) = integrate_panels(spec, |r| h1_integrand(spec, s2, r), &far, rel);
        let (p1, p2) = (h1_prefactor(s), h1_prefactor(s2));
        (v0 + p1 * v1 + p2 * v2, e0 + p1.norm() * e1 + p2.norm() * e2)
    };
    // Past r_max the integrand decays at least like e^{−κr}, κ = 1 + min(σ, 1 − σ).
    let sigma = s.re;
    let kappa = 1.0 + sigma.min(1.0 - sigma);
    let tail = direct_integrand(spec, s, r_max).norm() * (1.0 + r_max) / kappa;
    Ok(TransformValue {
        t,
        h: val * (2.0 * PI),
        est_abs_error: 2.0 * PI * (err + tail) + 1e-14 * (2.0 * PI * val.norm()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_breakpoints() {
        let k = KernelSpec::new(2.0).unwrap();
        assert!((k.r1.sinh() - 2.0).abs() < 1e-14);
        assert!((2.0 * (0.5 * k.r2).sinh() - 2.0).abs() < 1e-14);
        assert!(k.r1 < k.r2);
        assert_eq!(f_kernel_prime(&k, 0.5 * k.r1, Side::Right), 1.0);
        assert_eq!(f_kernel_prime(&k, k.r1, Side::Left), 1.0);
        assert!(f_kernel_prime(&k, 0.5 * (k.r1 + k.r2), Side::Left) < 0.0);
    }

    #[test]
    fn kernel_at_special_points() {
        let k = KernelSpec::new(2.0).unwrap();
        assert_eq!(kernel_k(&k, 0.0), 0.0);
        let u1 = 0.5 * (k.r1.cosh() - 1.0);
        assert!((kernel_k(&k, u1) - k.r1).abs() < 1e-12);
    }

    #[test]
    fn strip_enforced() {
        let k = KernelSpec::new(1.0).unwrap();
        assert_eq!(h_transform(&k, C::new(0.0, 0.6)), Err(Error::OutsideStrip));
    }

    #[test]
    fn value_at_s_zero() {
        let k = KernelSpec::new(2.0).unwrap();
        let v = h_transform(&k, C::new(0.0, 0.5)).unwrap();
        let want = PI * 4.0;
        assert!((v.h.re - want).abs() < 1e-9 * want, "{:?}", v);
    }
}
