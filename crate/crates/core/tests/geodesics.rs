use hypangle_core::ballenum::{enumerate_ball, BallMode, BallSpec};
use hypangle_core::geodesics::*;
use hypangle_core::modgroup::{normalize, BasePoint, GroupElement};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use std::collections::BTreeSet;

fn g(a: i128, b: i128, c: i128, d: i128) -> GroupElement {
    normalize(a, b, c, d).unwrap()
}

fn pairs(v: &[(u64, u64)]) -> BTreeSet<(u64, u64)> {
    v.iter().copied().collect()
}

#[test]
fn axis_test_examples() {
    assert!(is_axis_through_rho(&g(1, 2, 1, 3)).unwrap());
    assert!(!is_axis_through_rho(&g(2, 1, 1, 1)).unwrap());
}

#[test]
fn pell_minima() {
    for (delta, t, k) in [(3u64, 4u64, 1u64), (7, 16, 3), (13, 1298, 180), (21, 110, 12)] {
        let p = pell_min(delta).unwrap();
        assert_eq!((p.t_big, p.k_small), (BigInt::from(t), BigInt::from(k)), "delta {delta}");
    }
}

#[test]
fn pell_search_agrees_with_continued_fractions() {
    for delta in 2..200u64 {
        if !in_d_rho(delta) {
            continue;
        }
        let cf = pell_min(delta).unwrap();
        if cf.k_small > BigInt::from(1_000_000u64) {
            continue;
        }
        assert_eq!(pell_min_search(delta, 10_000_000).unwrap(), cf, "delta {delta}");
        let d = BigInt::from(delta);
        assert_eq!(&cf.t_big * &cf.t_big - BigInt::from(4) * &cf.k_small * &cf.k_small * d, BigInt::from(4));
    }
}

#[test]
fn nine_solutions() {
    assert_eq!(nine_solution(7).unwrap(), Some((11, 2)));
    assert_eq!(nine_solution(13).unwrap(), Some((29, 4)));
    assert_eq!(nine_solution(3).unwrap(), None);
    assert_eq!(nine_solution(21).unwrap(), None);
}

/// Existence of a norm-9 solution with 3 ∤ u, by scanning u over two
/// periods of the even Pell unit. `None` when the scan is too long.
fn nine_brute(delta: u64) -> Option<Option<u64>> {
    let p = pell_min(delta).unwrap();
    let k = p.k_small.to_u64()?;
    let y_even = if k % 2 == 0 { k } else { k.checked_mul(p.t_big.to_u64()?)? };
    let limit = y_even.checked_mul(3)?;
    if limit > 20_000_000 {
        return None;
    }
    Some((1..=limit).filter(|u| u % 3 != 0).find(|&u| {
        let t2 = 4 * (u as u128) * (u as u128) * delta as u128 + 9;
        let r = (t2 as f64).sqrt() as u128;
        (r.saturating_sub(2)..=r + 2).any(|s| s * s == t2)
    }))
}

#[test]
fn nine_solution_matches_wide_scan() {
    let mut checked = 0;
    for delta in 2..200u64 {
        if !in_d_rho(delta) {
            continue;
        }
        let Some(slow) = nine_brute(delta) else { continue };
        let fast = nine_solution(delta).unwrap().map(|(_, u)| u);
        assert_eq!(fast, slow, "delta {delta}");
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} discriminants scanned");
}

#[test]
fn pair_sets() {
    assert_eq!(pairs(&discriminant_pairs(3)), pairs(&[(2, 1), (1, 2)]));
    assert_eq!(pairs(&discriminant_pairs(7)), pairs(&[(3, 1), (3, 2), (1, 3), (2, 3)]));
    assert_eq!(pairs(&discriminant_pairs(13)), pairs(&[(4, 1), (4, 3), (1, 4), (3, 4)]));
    assert_eq!(pairs(&discriminant_pairs(21)), pairs(&[(5, 1), (5, 4), (1, 5), (4, 5)]));
    assert!(discriminant_pairs(4).is_empty());
    assert!(discriminant_pairs(5).is_empty());
}

#[test]
fn class_labels() {
    let want = [(3u64, (1u8, 1u8), 1u32), (7, (1, 0), 2), (13, (0, 0), 4), (21, (0, 1), 2)];
    for (delta, label, fibers) in want {
        let r = classify(delta).unwrap();
        assert_eq!((r.class_label, r.fibers), (label, fibers), "delta {delta}");
    }
    assert!(classify(5).is_err());
}

#[test]
fn phi_matrices() {
    assert_eq!(phi_param(3, 2, 1).unwrap().matrix, g(1, 2, 1, 3));
    assert_eq!(phi_param(3, 1, 2).unwrap().matrix, g(3, 1, 2, 1));
    assert_eq!(phi_param(13, 4, 1).unwrap().matrix, g(109, 720, 180, 1189));
    assert_eq!(phi_param(7, 3, 1).unwrap().matrix, g(2, 9, 3, 14));
    assert!(phi_param(7, 1, 1).is_err());
}

#[test]
fn phi_invariants_and_cardinality() {
    let rho = BasePoint::rho();
    for delta in 2..=500u64 {
        let ps = discriminant_pairs(delta);
        if ps.is_empty() {
            continue;
        }
        assert_eq!(ps.len(), 1 << (1 + nu(delta)), "delta {delta}");
        let pell = pell_min(delta).unwrap();
        if pell.t_big > BigInt::from(1u64 << 60) {
            continue;
        }
        for (b, c) in ps {
            let rep = phi_param(delta, b, c).unwrap();
            let m = rep.matrix;
            assert!(m.entries().iter().all(|&e| e > 0));
            assert!(is_axis_through_rho(&m).unwrap());
            assert_eq!(BigInt::from(m.trace()), pell.t_big);
            let (_, ch) = hypangle_core::modgroup::displacement(&rho, &m);
            let t = BigRational::from_integer(pell.t_big.clone());
            assert_eq!(ch, &t * &t / BigInt::from(2) - BigRational::one());
        }
    }
}

#[test]
fn midpoint_of_thirteen() {
    let rep = phi_param(13, 4, 1).unwrap();
    let m = midpoint_coords(&rep).unwrap();
    let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    assert_eq!((m.x.clone(), m.y.clone(), m.z.clone()), (r(469, 1), r(1279, 1), r(1549, 2)));
    assert_eq!(&m.x * &m.y - &m.z * &m.z, r(3, 4));
    // T = X + Y − Z, cosh = 2T/3 = t′ = T/2 of the Pell data.
    assert_eq!(&m.t * r(2, 3), r(649, 1));
}

#[test]
fn segment_counts() {
    let want = [(3u64, 2u64, 1u64, 0usize), (7, 3, 1, 1), (13, 4, 1, 3), (21, 5, 1, 1)];
    for (delta, b, c, n) in want {
        assert_eq!(segment_lattice_points(delta, b, c).unwrap().len(), n, "delta {delta}");
    }
}

#[test]
fn segment_counts_follow_class() {
    for delta in 2..=200u64 {
        let Ok(rec) = classify(delta) else { continue };
        if rec.pell_min.t_big > BigInt::from(1u64 << 40) {
            continue;
        }
        let want = rec.fibers as usize - 1;
        for &(b, c) in &rec.pairs {
            let pts = segment_lattice_points(delta, b, c).unwrap();
            assert_eq!(pts.len(), want, "delta {delta} pair ({b},{c})");
            let three_halves = BigRational::new(3.into(), 2.into());
            for p in &pts {
                assert_eq!(&p.x * &p.y - &p.z * &p.z, BigRational::new(3.into(), 4.into()));
                let cosh = &p.t / &three_halves;
                let midpoint = rec.class_label.0 == 0 && cosh == BigRational::from_integer(rec.pell_min.t_big.clone() / 2);
                // Off-centre points have t/3 ∉ ℤ; the midpoint has integral cosh distance.
                assert_eq!(cosh.is_integer(), midpoint, "delta {delta}");
            }
        }
    }
}

/// Positive-entry γ at `p` with γ⁻¹g also positive.
fn decompose(gm: &GroupElement, p: &hypangle_core::modgroup::OrbitCoords) -> Vec<(GroupElement, GroupElement)> {
    elements_at(p)
        .unwrap()
        .into_iter()
        .filter_map(|gamma| {
            let rest = gamma.inverse().mul(gm).ok()?;
            let pos = |x: &GroupElement| x.entries().iter().all(|&e| e > 0);
            (pos(&gamma) && pos(&rest)).then_some((gamma, rest))
        })
        .collect()
}

#[test]
fn decomposition_seven() {
    let rep = phi_param(7, 3, 1).unwrap();
    let pts = segment_lattice_points(7, 3, 1).unwrap();
    let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    assert_eq!((pts[0].x.clone(), pts[0].y.clone(), pts[0].z.clone()), (r(3, 1), r(7, 1), r(9, 2)));
    let d = decompose(&rep.matrix, &pts[0]);
    assert_eq!(d, vec![(g(1, 1, 1, 2), g(1, 4, 1, 5))]);
    assert_eq!(g(1, 1, 1, 2).mul(&g(1, 4, 1, 5)).unwrap(), rep.matrix);
}

#[test]
fn decomposition_thirteen() {
    let rep = phi_param(13, 4, 1).unwrap();
    let pts = segment_lattice_points(13, 4, 1).unwrap();
    let gammas: BTreeSet<_> = pts
        .iter()
        .flat_map(|p| decompose(&rep.matrix, p))
        .map(|(a, _)| a)
        .collect();
    let want: BTreeSet<_> = [g(20, 3, 33, 5), g(2, 1, 3, 2), g(43, 66, 71, 109)].into_iter().collect();
    assert_eq!(gammas, want);
    assert_eq!(g(2, 1, 3, 2).inverse().mul(&rep.matrix).unwrap(), g(38, 251, 33, 218));
    assert_eq!(g(43, 66, 71, 109).inverse().mul(&rep.matrix).unwrap(), g(1, 6, 1, 7));
}

#[test]
fn decomposition_twenty_one() {
    let rep = phi_param(21, 5, 1).unwrap();
    let pts = segment_lattice_points(21, 5, 1).unwrap();
    let d = decompose(&rep.matrix, &pts[0]);
    assert!(!d.is_empty());
    for (a, b) in d {
        assert_eq!(a.mul(&b).unwrap(), rep.matrix);
    }
}

/// Conjugacy by search: some γ in a ball at i with γh = gγ.
fn conjugate_by_search(gm: &GroupElement, h: &GroupElement, qsq: i64) -> bool {
    let spec = BallSpec::with_qsq(BasePoint::i(), BigRational::from_integer(qsq.into()), BallMode::Full).unwrap();
    enumerate_ball(&spec)
        .unwrap()
        .iter()
        .any(|c| c.mul(h).ok() == gm.mul(c).ok())
}

#[test]
fn class_counts_by_search() {
    for delta in 2..=50u64 {
        let Ok(rec) = classify(delta) else { continue };
        let reps: Vec<_> = rec.pairs.iter().map(|&(b, c)| phi_param(delta, b, c).unwrap().matrix).collect();
        let trace = reps[0].trace() as i64;
        if trace > 2000 {
            continue;
        }
        // Conjugators between reduced representatives of one class are bounded by the trace.
        let qsq = (trace * trace).max(64);
        let mut classes: Vec<GroupElement> = Vec::new();
        for r in &reps {
            if !classes.iter().any(|c| conjugate_by_search(c, r, qsq)) {
                classes.push(*r);
            }
        }
        assert_eq!(classes.len(), rec.class_count(), "delta {delta}");
    }
}

#[test]
fn class_counts_by_reduced_forms() {
    for delta in 2..=200u64 {
        let Ok(rec) = classify(delta) else { continue };
        assert_eq!(rec.pairs.len() % rec.fibers as usize, 0);
        assert_eq!(class_count_by_forms(delta), rec.class_count(), "delta {delta}");
    }
}
