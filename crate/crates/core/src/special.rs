//! Complex Γ and the Gauss function F(s, 1/2; 1; z) on [0, 1).

use num_complex::Complex64;
use std::f64::consts::PI;

type C = Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(z) (principal branch up to multiples of 2πi), Lanczos with reflection.
pub fn ln_gamma(z: C) -> C {
    if z.re < 0.5 {
        // Γ(z)Γ(1 − z) = π / sin(πz)
        return C::new(PI.ln(), 0.0) - (z * PI).sin().ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut x = C::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    C::new(0.5 * (2.0 * PI).ln(), 0.0) + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: C) -> C {
    if z.re < 0.5 {
        return PI / ((z * PI).sin() * gamma(1.0 - z));
    }
    ln_gamma(z).exp()
}

/// 1/Γ(z), zero at the poles.
pub fn rgamma(z: C) -> C {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return C::new(0.0, 0.0);
    }
    1.0 / gamma(z)
}

/// Which evaluation path produced a value of [`hyp2f1_half`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HypMethod {
    Series,
    Connection,
    /// s = 1/2 exactly: logarithmic limit of the connection formula.
    LogLimit,
    /// s near 1/2: Taylor continuation of the differential equation from z = 1/2.
    Continuation,
}

/// Gauss series Σ (a)ₙ(b)ₙ/(n!(c)ₙ) zⁿ.
pub fn hyp2f1_series(a: C, b: C, c: C, z: f64) -> C {
    let mut term = C::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..200_000 {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() && n > 2 {
            break;
        }
        if term.norm() == 0.0 {
            break;
        }
    }
    sum
}

/// Distance from 1/2 under which the connection formula is replaced.
const NEAR_HALF: f64 = 0.05;

/// F(s, 1/2; 1; z) for z ∈ [0, 1).
pub fn hyp2f1_half(s: C, z: f64) -> C {
    hyp2f1_half_at(s, z, 1.0 - z).0
}

/// F(s, 1/2; 1; 1 − x) given x = 1 − z directly, so values near z = 1 keep
/// full relative precision. Also reports the path taken.
pub fn hyp2f1_half_at(s: C, z: f64, x: f64) -> (C, HypMethod) {
    let half = C::new(0.5, 0.0);
    let one = C::new(1.0, 0.0);
    if z <= 0.5 {
        return (hyp2f1_series(s, half, one, z), HypMethod::Series);
    }
    let e = s - 0.5;
    if e.re == 0.0 && e.im == 0.0 {
        return (log_limit(x), HypMethod::LogLimit);
    }
    if e.norm() < NEAR_HALF {
        return (continuation(s, x), HypMethod::Continuation);
    }
    (connection(s, x), HypMethod::Connection)
}

fn connection(s: C, x: f64) -> C {
    let half = C::new(0.5, 0.0);
    let sqrt_pi = PI.sqrt();
    let a = gamma(half - s) * rgamma(1.0 - s) / sqrt_pi;
    let b = gamma(s - 0.5) * rgamma(s) / sqrt_pi;
    let f1 = hyp2f1_series(s, half, s + 0.5, x);
    let f2 = hyp2f1_series(1.0 - s, half, 1.5 - s, x);
    a * f1 + b * C::new(x, 0.0).powc(half - s) * f2
}

/// F(1/2, 1/2; 1; 1 − x) = (1/π) Σ ((1/2)ₙ/n!)² [2ψ(n+1) − 2ψ(n+1/2) − ln x] xⁿ.
fn log_limit(x: f64) -> C {
    let euler = 0.577_215_664_901_532_9;
    let mut psi1 = -euler;
    let mut psih = -euler - 2.0 * std::f64::consts::LN_2;
    let mut coef = 1.0;
    let mut xn = 1.0;
    let lx = x.ln();
    let mut sum = 0.0;
    for n in 0..10_000 {
        let nf = n as f64;
        let term = coef * coef * (2.0 * psi1 - 2.0 * psih - lx) * xn;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && n > 2 {
            break;
        }
        psi1 += 1.0 / (nf + 1.0);
        psih += 1.0 / (nf + 0.5);
        coef *= (nf + 0.5) / (nf + 1.0);
        xn *= x;
    }
    C::new(sum / PI, 0.0)
}

/// w(x) = F(a, b; c; 1 − x) solves x(1−x)w'' + [c' − (a+b+1)x]w' − ab·w = 0
/// with c' = a + b + 1 − c. Start at x = 1/2 from the Gauss series and march
/// toward 0 by Taylor re-expansion, halving the distance each step.
fn continuation(s: C, x_target: f64) -> C {
    let half = C::new(0.5, 0.0);
    let one = C::new(1.0, 0.0);
    let (a, b) = (s, half);
    let cp = a + b + 1.0 - 1.0;
    let ab = a * b;
    let apb1 = a + b + 1.0;
    let mut x0 = 0.5;
    let mut w = hyp2f1_series(a, b, one, 0.5);
    // dw/dx = −dF/dz = −ab·F(a+1, b+1; 2; z)
    let mut dw = -ab * hyp2f1_series(a + 1.0, b + 1.0, C::new(2.0, 0.0), 0.5);
    while x0 > x_target {
        let x1 = (0.5 * x0).max(x_target);
        let h = x1 - x0;
        let p0 = x0 * (1.0 - x0);
        let p1 = 1.0 - 2.0 * x0;
        let q0 = cp - apb1 * x0;
        // Scaled Taylor terms dₙ = cₙhⁿ.
        let (mut dn, mut dn1) = (w, dw * h);
        let (mut val, mut der) = (dn + dn1, dn1);
        for n in 0..400 {
            let nf = n as f64;
            let dn2 = -((q0 + p1 * nf) * (nf + 1.0) * dn1 * h + (-(nf * (nf - 1.0)) - apb1 * nf - ab) * dn * h * h)
                / (p0 * (nf + 2.0) * (nf + 1.0));
            val += dn2;
            der += dn2 * (nf + 2.0);
            dn = dn1;
            dn1 = dn2;
            if dn2.norm() * (nf + 2.0) < 1e-18 * val.norm().min(der.norm()) && n > 4 {
                break;
            }
        }
        let der = der / h;
        w = val;
        dw = der;
        x0 = x1;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma(C::new(5.0, 0.0)).re - 24.0).abs() < 1e-12);
        assert!((gamma(C::new(0.5, 0.0)).re - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(C::new(-0.5, 0.0)).re + 2.0 * PI.sqrt()).abs() < 1e-13);
        // |Γ(it)|² = π / (t sinh πt)
        let t = 1.7;
        let g = gamma(C::new(0.0, t));
        assert!((g.norm_sqr() - PI / (t * (PI * t).sinh())).abs() < 1e-14);
        // Γ(z + 1) = zΓ(z) off the axis
        let z = C::new(0.3, 4.0);
        assert!((gamma(z + 1.0) - z * gamma(z)).norm() < 1e-13 * gamma(z + 1.0).norm());
    }

    #[test]
    fn trivial_parameters() {
        for z in [0.0, 0.3, 0.7, 0.999] {
            assert!((hyp2f1_half(C::new(0.0, 0.0), z) - 1.0).norm() < 1e-13);
            // F(1, 1/2; 1; z) = (1 − z)^{−1/2}
            let want = (1.0 - z).powf(-0.5);
            assert!((hyp2f1_half(C::new(1.0, 0.0), z).re - want).abs() < 1e-11 * want);
        }
    }

    #[test]
    fn log_limit_matches_elliptic_k() {
        // F(1/2, 1/2; 1; m) = 2K(m)/π; K via arithmetic-geometric mean.
        for m in [0.6f64, 0.9, 0.99999] {
            let (mut a, mut b) = (1.0f64, (1.0 - m).sqrt());
            for _ in 0..40 {
                (a, b) = (0.5 * (a + b), (a * b).sqrt());
            }
            let k = PI / (2.0 * a);
            let got = hyp2f1_half(C::new(0.5, 0.0), m).re;
            assert!((got - 2.0 * k / PI).abs() < 1e-12 * got, "m={m}");
        }
    }

    #[test]
    fn paths_agree_on_overlap() {
        for s in [C::new(0.5, 0.3), C::new(0.5, 3.0), C::new(0.2, 0.0), C::new(0.5, 0.01), C::new(0.9, 1.0)] {
            let ser = hyp2f1_series(s, C::new(0.5, 0.0), C::new(1.0, 0.0), 0.5);
            let con = connection(s, 0.5);
            let cont = continuation(s, 0.5 - 1e-300);
            assert!((ser - cont).norm() < 1e-12 * ser.norm());
            if (s - 0.5).norm() >= NEAR_HALF {
                assert!((ser - con).norm() < 1e-10 * ser.norm(), "s={s}");
            }
            for x in [0.3, 1e-3, 1e-9] {
                if (s - 0.5).norm() >= NEAR_HALF {
                    let (c1, c2) = (connection(s, x), continuation(s, x));
                    assert!((c1 - c2).norm() < 1e-10 * c1.norm(), "s={s} x={x} {c1} {c2}");
                }
            }
        }
        let s = C::new(0.5, 0.0);
        for x in [0.3, 1e-4, 1e-12] {
            let (a, b) = (log_limit(x), continuation(s, x));
            assert!((a - b).norm() < 1e-11 * a.norm(), "x={x}");
        }
    }
}
