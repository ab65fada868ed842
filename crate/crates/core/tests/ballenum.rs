use hypangle_core::ballenum::*;
use hypangle_core::modgroup::{coords, normalize, BasePoint, GroupElement};
use hypangle_core::paircorr::angle_values;
use hypangle_core::rational::{rat, to_f64};
use num_rational::BigRational;
use std::collections::BTreeSet;
use std::time::Instant;

fn points() -> Vec<BasePoint> {
    vec![BasePoint::i(), BasePoint::rho(), BasePoint::parse("u=1/3,ksq=3/2").unwrap()]
}

/// Every normalized element with T ≤ qsq_max, found by pairing rows (a, b) and
/// (c, d) inside the box where X, k²Y ≤ T/(1 − |u|/k), then testing ad − bc = 1.
fn brute_force(w: &BasePoint, qsq_max: f64) -> Vec<(GroupElement, BigRational)> {
    let r = qsq_max / (1.0 - w.u_f.abs() / w.k) * (1.0 + 1e-9);
    let reach = |bound: f64| {
        let rt = bound.sqrt();
        ((rt / w.v).ceil() as i128 + 1, (rt * (1.0 + w.k / w.v)).ceil() as i128 + 1)
    };
    let rows = |bound: f64, scale: f64| {
        let (m0, m1) = reach(bound);
        let mut v = Vec::new();
        for p in -m0..=m0 {
            for q in -m1..=m1 {
                let (pf, qf) = (p as f64, q as f64);
                if scale * (w.ksq_f * pf * pf + qf * qf + 2.0 * w.u_f * pf * qf) <= r {
                    v.push((p, q));
                }
            }
        }
        v
    };
    let top = rows(r, 1.0);
    let bottom = rows(r / w.ksq_f, w.ksq_f);
    let mut found = BTreeSet::new();
    for &(a, b) in &top {
        for &(c, d) in &bottom {
            if a * d - b * c == 1 {
                found.insert(normalize(a, b, c, d).unwrap());
            }
        }
    }
    found
        .into_iter()
        .filter_map(|g| {
            let t = coords(w, &g).t;
            (to_f64(&t) <= qsq_max + 1e-9).then_some((g, t))
        })
        .collect()
}

#[test]
fn matches_brute_force_for_all_small_radii() {
    let start = Instant::now();
    for w in points() {
        let all = brute_force(&w, 200.0);
        let mut radii: Vec<BigRational> = (1..=200).map(|n| rat(n, 1)).collect();
        radii.extend([rat(7, 2), rat(50, 3), rat(199, 7), rat(3, 2), rat(2, 1)]);
        // Every distinct T value up to 200 is also a threshold, so ties are exercised.
        radii.extend(all.iter().map(|(_, t)| t.clone()));
        radii.sort();
        radii.dedup();
        for qsq in radii {
            let spec = BallSpec::with_qsq(w.clone(), qsq.clone(), BallMode::Full).unwrap();
            let got = enumerate_ball(&spec).unwrap();
            let mut want: Vec<GroupElement> = all.iter().filter(|(_, t)| *t <= qsq).map(|(g, _)| *g).collect();
            want.sort();
            assert_eq!(got, want, "omega {w} Q^2 {qsq}");
        }
    }
    assert!(start.elapsed().as_secs_f64() < 30.0, "{:?}", start.elapsed());
}

#[test]
fn output_sorted_without_duplicates() {
    for w in points() {
        let spec = BallSpec::with_qsq(w.clone(), rat(5000, 1), BallMode::Full).unwrap();
        let v = enumerate_ball(&spec).unwrap();
        // (c, d, a) order; the c = 0 elements (1, b, 0, 1) are further ordered by b.
        assert!(v.windows(2).all(|p| p[0] < p[1]));
    }
}

#[test]
fn halves_partition_the_ball() {
    for w in points() {
        let qsq = rat(3000, 1);
        let full: BTreeSet<_> = enumerate_ball(&BallSpec::with_qsq(w.clone(), qsq.clone(), BallMode::Full).unwrap())
            .unwrap()
            .into_iter()
            .collect();
        let inner: BTreeSet<_> = enumerate_ball(&BallSpec::with_qsq(w.clone(), qsq.clone(), BallMode::HalfInner).unwrap())
            .unwrap()
            .into_iter()
            .collect();
        let outer: BTreeSet<_> = enumerate_ball(&BallSpec::with_qsq(w.clone(), qsq.clone(), BallMode::HalfOuter).unwrap())
            .unwrap()
            .into_iter()
            .collect();
        assert!(inner.is_disjoint(&outer));
        let stats = count_ball(&BallSpec::with_qsq(w.clone(), qsq, BallMode::Full).unwrap()).unwrap();
        assert_eq!(stats.b_total as usize, full.len());
        assert_eq!(stats.b_inner as usize, inner.len());
        assert_eq!(stats.b_outer as usize, outer.len());
        assert_eq!(stats.b_inner + stats.b_outer + stats.b_boundary, stats.b_total);
        assert!(inner.is_subset(&full) && outer.is_subset(&full));
        let rest: Vec<_> = full.difference(&inner).filter(|g| !outer.contains(g)).collect();
        assert_eq!(rest.len() as u64, stats.b_boundary);
        // The boundary bucket is X = k²Y exactly.
        for g in rest {
            let c = coords(&w, g);
            assert_eq!(c.x, &w.ksq * &c.y, "omega {w} gamma {g}");
        }
    }
}

#[test]
fn nested_balls() {
    for w in points() {
        let mut prev: BTreeSet<GroupElement> = BTreeSet::new();
        for qsq in [3, 10, 40, 41, 160, 640] {
            let cur: BTreeSet<_> = enumerate_ball(&BallSpec::with_qsq(w.clone(), rat(qsq, 1), BallMode::Full).unwrap())
                .unwrap()
                .into_iter()
                .collect();
            assert!(prev.is_subset(&cur), "omega {w} Q^2 {qsq}");
            prev = cur;
        }
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let w = BasePoint::parse("u=1/3,ksq=3/2").unwrap();
    let spec = BallSpec::with_qsq(w, rat(20_000, 1), BallMode::HalfInner).unwrap();
    let run = |n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| (enumerate_ball(&spec).unwrap(), count_ball(&spec).unwrap()))
    };
    assert_eq!(run(1), run(8));
}

#[test]
fn counting_asymptotics_at_i() {
    let spec = BallSpec::with_q(BasePoint::i(), rat(300, 1), BallMode::Full).unwrap();
    let st = count_ball(&spec).unwrap();
    let ratio = st.b_total as f64 / 90_000.0;
    assert!((2.7..=3.3).contains(&ratio), "{ratio}");
    let half = st.b_inner as f64 / st.b_total as f64;
    assert!((half - 0.5).abs() < 0.02, "{half}");
}

#[test]
fn stabilizer_multiplicities() {
    // At i each orbit point is hit by exactly two elements.
    let spec = BallSpec::with_q(BasePoint::i(), rat(50, 1), BallMode::Full).unwrap();
    let raw = angle_values(&spec, false).unwrap();
    let dedup = angle_values(&spec, true).unwrap();
    assert_eq!(raw.angles.len(), 2 * dedup.angles.len());
    assert_eq!(raw.stabilizers, 2);
    let mut pairs = raw.angles.chunks(2);
    assert!(pairs.all(|p| p[0] == p[1]));

    let spec = BallSpec::with_q(BasePoint::rho(), rat(50, 1), BallMode::Full).unwrap();
    let raw = angle_values(&spec, false).unwrap();
    assert_eq!(raw.stabilizers, 3);
    assert_eq!(raw.angles.len() % 3, 0);
    let dedup = angle_values(&spec, true).unwrap();
    assert_eq!(3 * dedup.angles.len(), raw.angles.len());
    assert!(stabilizer(&BasePoint::rho()).iter().all(|g| g.trace().abs() < 2 || *g == GroupElement::IDENTITY));
}

#[test]
fn stabilizer_count_matches_orbit_structure() {
    // Elements with the same orbit point come in groups of the stabilizer order.
    for w in points() {
        let e = stabilizer_order(&w) as usize;
        let spec = BallSpec::with_qsq(w.clone(), rat(500, 1), BallMode::Full).unwrap();
        let hits = visit_ball(&spec, |h| Some(h.scaled_xyz())).unwrap();
        let mut counts = std::collections::BTreeMap::new();
        for k in hits {
            *counts.entry(k).or_insert(0usize) += 1;
        }
        assert!(counts.values().all(|&c| c == e), "omega {w}");
    }
}
