//! The conjectured density g₂ as a series over the lattice, grouped by T.

use super::fxi::f_xi_from_excess;
use crate::ballenum::{visit_ball, BallMode, BallSpec};
use crate::error::{Error, Result};
use crate::modgroup::{acosh_from_excess, BasePoint};
use crate::quad::KahanSum;
use crate::rational::to_f64;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;
use std::f64::consts::PI;

/// Covolume of PSL₂(ℤ).
pub const V_GAMMA: f64 = PI / 3.0;

/// All M with the same T, grouped.
#[derive(Clone, Debug, PartialEq)]
pub struct TheorySeriesTerm {
    /// cosh ℓ(M) = T/Δ.
    pub cosh_ell: BigRational,
    pub multiplicity: u64,
    /// f_ξ(ℓ) for the ξ the term list was produced for.
    pub f_value: f64,
}

#[derive(Clone, Copy, Debug)]
struct Shell {
    /// cosh ℓ − 1.
    excess: f64,
    mult: u64,
}

/// The lattice data needed for g₂, truncated at T ≤ t_cut.
#[derive(Clone, Debug)]
pub struct TheorySeries {
    pub omega: BasePoint,
    pub t_cut: BigRational,
    /// ℓ at the cut, ℓ_cut = arccosh(t_cut/Δ).
    pub ell_cut: f64,
    /// Number of lattice elements summed over (stabilizers included).
    pub element_count: u64,
    cosh: Vec<BigRational>,
    shells: Vec<Shell>,
}

/// A truncated series value with its tail estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoryValue {
    pub value: f64,
    /// Heuristic bound on the omitted tail (shell counts modelled as 3e^ℓ dℓ).
    pub tail_bound: f64,
    /// Set when the cut does not reach the regime where the bound applies.
    pub warning: bool,
}

impl TheorySeries {
    pub fn build(omega: &BasePoint, t_cut: BigRational) -> Result<Self> {
        if t_cut <= omega.delta {
            return Err(Error::InvalidArgument("t_cut must exceed Delta".into()));
        }
        let spec = BallSpec::with_qsq(omega.clone(), t_cut.clone(), BallMode::Full)?;
        let mut ts: Vec<BigInt> = visit_ball(&spec, |h| Some(h.scaled_t()))?;
        ts.sort_unstable();
        let dd = &omega.scale.d * &omega.scale.d;
        let mut cosh = Vec::new();
        let mut shells = Vec::new();
        let mut i = 0;
        while i < ts.len() {
            let mut j = i;
            while j < ts.len() && ts[j] == ts[i] {
                j += 1;
            }
            let ch = BigRational::new(ts[i].clone(), dd.clone()) / &omega.delta;
            let excess = to_f64(&(&ch - BigRational::from_integer(1.into())));
            shells.push(Shell { excess, mult: (j - i) as u64 });
            cosh.push(ch);
            i = j;
        }
        let m_cut = to_f64(&(&t_cut / &omega.delta)) - 1.0;
        Ok(TheorySeries {
            omega: omega.clone(),
            ell_cut: acosh_from_excess(m_cut),
            element_count: ts.len() as u64,
            t_cut,
            cosh,
            shells,
        })
    }

    pub fn shell_count(&self) -> usize {
        self.shells.len()
    }

    /// Σ_M f_ξ(ℓ(M)) over the truncated lattice, in increasing T.
    pub fn f_sum(&self, xi: f64) -> f64 {
        let mut acc = KahanSum::default();
        for s in &self.shells {
            if s.excess > 0.0 {
                acc.add(s.mult as f64 * f_xi_from_excess(xi, s.excess));
            }
        }
        acc.value()
    }

    /// Grouped terms for one ξ.
    pub fn terms(&self, xi: f64) -> Vec<TheorySeriesTerm> {
        self.shells
            .iter()
            .zip(&self.cosh)
            .map(|(s, c)| TheorySeriesTerm {
                cosh_ell: c.clone(),
                multiplicity: s.mult,
                f_value: f_xi_from_excess(xi, s.excess),
            })
            .collect()
    }

    /// g₂(x) = (V/(πξ²)) Σ f_ξ(ℓ(M)) with ξ = V·x.
    pub fn g2(&self, x: f64) -> TheoryValue {
        let xi = V_GAMMA * x;
        let pref = V_GAMMA / (PI * xi * xi);
        let l = self.ell_cut;
        let warning = xi > 2.0 * (0.5 * l).sinh();
        let tail_bound = if warning {
            f64::INFINITY
        } else {
            // ∫_L^∞ 3e^ℓ · ξ²/(sinh ℓ cosh ℓ) dℓ, times V/(πξ²) = 1/3.
            let q = (-4.0 * l).exp();
            let mut t = 0.0;
            let mut p = (-l).exp();
            for k in 0..200 {
                let term = 4.0 * p / (4 * k + 1) as f64;
                t += term;
                if term < 1e-18 * t {
                    break;
                }
                p *= q;
            }
            t
        };
        TheoryValue { value: pref * self.f_sum(xi), tail_bound, warning }
    }

    /// g₂^el(x) = g₂(e·x).
    pub fn g2_elliptic(&self, x: f64, e: u32) -> TheoryValue {
        self.g2(e as f64 * x)
    }

    /// Average of g₂(e·x) over [lo, hi].
    pub fn g2_bin_average(&self, lo: f64, hi: f64, e: u32) -> f64 {
        let mut acc = KahanSum::default();
        let (x, w) = gl8();
        let (h, m) = (0.5 * (hi - lo), 0.5 * (hi + lo));
        for (xi, wi) in x.iter().zip(w) {
            acc.add(wi * self.g2_elliptic(m + h * xi, e).value);
        }
        0.5 * acc.value()
    }

    /// g₂(0) = (V/π) Σ_{ℓ>0} 1/(e^{2ℓ} − 1).
    pub fn g2_zero(&self) -> TheoryValue {
        let mut acc = KahanSum::default();
        for s in &self.shells {
            if s.excess > 0.0 {
                let ell = acosh_from_excess(s.excess);
                acc.add(s.mult as f64 / (2.0 * ell).exp_m1());
            }
        }
        TheoryValue {
            value: V_GAMMA / PI * acc.value(),
            tail_bound: (-self.ell_cut).exp().atanh(),
            warning: false,
        }
    }
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static R: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    R.get_or_init(|| crate::quad::gauss_legendre(8))
}

/// One-shot g₂(x) at ω with truncation T ≤ t_cut.
pub fn theoretical_g2(omega: &BasePoint, x: f64, t_cut: BigRational) -> Result<TheoryValue> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument("x must be positive".into()));
    }
    Ok(TheorySeries::build(omega, t_cut)?.g2(x))
}

/// One-shot g₂(0) at ω with truncation T ≤ t_cut.
pub fn g2_zero(omega: &BasePoint, t_cut: BigRational) -> Result<TheoryValue> {
    if !t_cut.is_positive() {
        return Err(Error::InvalidArgument("t_cut must be positive".into()));
    }
    Ok(TheorySeries::build(omega, t_cut)?.g2_zero())
}
