use hypangle_core::modgroup::{normalize, BasePoint, GroupElement};
use hypangle_core::paircorr::{breakpoints, f_xi};
use hypangle_core::volumes::*;
use std::f64::consts::PI;

fn g(m: (i128, i128, i128, i128)) -> GroupElement {
    normalize(m.0, m.1, m.2, m.3).unwrap()
}

/// Ten nonnegative matrices per base point, ℓ(M) spread over roughly [0.5, 5].
fn cases() -> Vec<(BasePoint, GroupElement)> {
    let at_i = [(1, 1, 0, 1), (2, 1, 1, 1), (1, 2, 1, 3), (5, 2, 2, 1), (1, 3, 0, 1)];
    let at_rho = [(1, 1, 0, 1), (2, 1, 1, 1), (1, 2, 1, 3), (3, 1, 2, 1), (4, 3, 5, 4)];
    let mut v: Vec<_> = at_i.iter().map(|&m| (BasePoint::i(), g(m))).collect();
    v.extend(at_rho.iter().map(|&m| (BasePoint::rho(), g(m))));
    v
}

/// ξ values covering the three regimes, away from the breakpoints.
fn xi_values(ell: f64) -> Vec<f64> {
    let (b1, b2) = breakpoints(ell);
    let mid = |f: f64| b1 + f * (b2 - b1);
    vec![0.05 * b1, 0.2 * b1, 0.5 * b1, 0.8 * b1, mid(0.25), mid(0.5), mid(0.75), 1.3 * b2, 2.0 * b2, 5.0 * b2]
}

#[test]
fn ell_range_of_cases() {
    for (w, m) in cases() {
        let s = RegionSpec::new(&w, m, 1.0).unwrap();
        assert!((0.5..=5.5).contains(&s.ell), "{m} at {w}: {}", s.ell);
        assert!(s.u_m > 1.0 && s.c_m > 0.0 && s.c_m < 1.0);
        assert!((s.u_m - s.c_m - 1.0 / s.ell.sinh()).abs() < 1e-12);
    }
}

#[test]
fn derivative_identity_all_cases() {
    let mut seen = [false; 3];
    for (w, m) in cases() {
        let base = RegionSpec::new(&w, m, 1.0).unwrap();
        let d = w.delta_f;
        for xi in xi_values(base.ell) {
            let s = base.with_xi(xi);
            seen[match j_case(&s) {
                JCase::Small => 0,
                JCase::Middle => 1,
                JCase::Large => 2,
            }] = true;
            let pref = PI / (d * d * xi * xi);
            let got = dbm_dxi(&s);
            let want = pref * f_xi(xi, s.ell);
            assert!((got - want).abs() <= 1e-12 * pref, "{m} at {w} xi {xi}: {got} vs {want}");
            assert!((got - want).abs() <= 1e-10 * want, "{m} at {w} xi {xi}: {got} vs {want}");
        }
    }
    assert_eq!(seen, [true; 3]);
}

#[test]
fn derivative_matches_profile_difference() {
    for (w, m) in cases() {
        let base = RegionSpec::new(&w, m, 1.0).unwrap();
        let d = w.delta_f;
        for xi in xi_values(base.ell) {
            let s = base.with_xi(xi);
            let x = d * xi;
            let h = 1e-3 * x;
            let fd = (bm_profile(&s, x + h) - bm_profile(&s, x - h)) / (2.0 * h);
            let want = dbm_dxi(&s);
            assert!((fd - want).abs() <= 1e-4 * want.abs(), "{m} at {w} xi {xi}: {fd} vs {want}");
        }
    }
}

#[test]
fn monte_carlo_agrees_with_closed_form() {
    for (k, (w, m)) in cases().into_iter().enumerate() {
        let s = RegionSpec::new(&w, m, 0.3 + 0.4 * k as f64).unwrap();
        let closed = vol_closed(&s);
        let mc = vol_mc(&s, 1_000_000, 1000 + k as u64).unwrap();
        let sigma = mc.std_error.hypot(1e-8);
        assert!((mc.value - closed.value).abs() <= 3.0 * sigma, "{m} at {w}: mc {} ± {} closed {}", mc.value, mc.std_error, closed.value);
    }
}

#[test]
fn monte_carlo_is_reproducible_across_threads() {
    let s = RegionSpec::new(&BasePoint::rho(), g((2, 1, 1, 1)), 1.0).unwrap();
    let run = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| vol_mc(&s, 300_000, 5).unwrap())
    };
    assert_eq!(run(1), run(8));
    assert!(vol_mc(&s, 999, 5).is_err());
}

#[test]
fn volume_symmetric_under_right_s_at_i() {
    let w = BasePoint::i();
    let s_el = g((0, -1, 1, 0));
    for m in [(1, 1, 0, 1), (2, 1, 1, 1), (1, 2, 1, 3), (5, 2, 2, 1)] {
        let m = g(m);
        for xi in [0.4, 1.5, 6.0] {
            let a = vol_closed(&RegionSpec::new(&w, m, xi).unwrap()).value;
            let b = vol_closed(&RegionSpec::general(&w, m.mul(&s_el).unwrap(), xi).unwrap()).value;
            assert!((a - b).abs() < 1e-8, "{m} xi {xi}: {a} {b}");
        }
    }
}

#[test]
fn volume_symmetric_under_rotation_at_rho() {
    let w = BasePoint::rho();
    let r = g((1, -1, 1, 0));
    let pow = |k: usize| (0..k).fold(GroupElement::IDENTITY, |acc, _| acc.mul(&r).unwrap());
    for m in [(1, 1, 0, 1), (2, 1, 1, 1), (3, 1, 2, 1)] {
        let m = g(m);
        for xi in [0.5, 2.0] {
            let a = vol_closed(&RegionSpec::new(&w, m, xi).unwrap()).value;
            for (p, q) in [(1, 2), (2, 1), (0, 1), (1, 0), (2, 2)] {
                let mm = pow(p).mul(&m).unwrap().mul(&pow(q)).unwrap();
                let b = vol_closed(&RegionSpec::general(&w, mm, xi).unwrap()).value;
                assert!((a - b).abs() < 1e-8, "{m} w^{p} M w^{q} xi {xi}: {a} {b}");
            }
        }
    }
}

#[test]
fn area_scaling_in_t() {
    let s = RegionSpec::new(&BasePoint::i(), g((2, 1, 1, 1)), 1.0).unwrap();
    for xi in [0.2, 0.9, 3.0] {
        for t in [-1.2, -0.5, 0.3] {
            let c2 = f64::cos(t).powi(2);
            let lhs = area_bm(&s, xi / c2, t);
            let rhs = area_bm(&s, xi, 0.0) * c2;
            assert!((lhs - rhs).abs() < 1e-9, "xi {xi} t {t}: {lhs} {rhs}");
        }
    }
}

#[test]
fn volume_grows_with_xi_and_is_continuous() {
    let base = RegionSpec::new(&BasePoint::rho(), g((2, 1, 1, 1)), 1.0).unwrap();
    let (b1, b2) = breakpoints(base.ell);
    let mut xs: Vec<f64> = (1..40).map(|k| 0.1 * k as f64).collect();
    for b in [b1, b2] {
        xs.extend([b * (1.0 - 1e-9), b, b * (1.0 + 1e-9)]);
    }
    xs.sort_by(f64::total_cmp);
    let vols: Vec<f64> = xs.iter().map(|&x| vol_closed(&base.with_xi(x)).value).collect();
    for (p, x) in vols.windows(2).zip(xs.windows(2)) {
        assert!(p[1] >= p[0] - 1e-9, "xi {:?}: {:?}", x, p);
        if x[1] - x[0] < 1e-6 {
            assert!((p[1] - p[0]).abs() < 1e-8, "jump at {:?}", x);
        }
    }
}

#[test]
fn rejects_invalid_matrices() {
    let w = BasePoint::i();
    assert!(RegionSpec::new(&w, g((1, -1, 1, 0)), 1.0).is_err());
    assert!(RegionSpec::new(&w, g((1, 1, 0, 1)), 0.0).is_err());
}
