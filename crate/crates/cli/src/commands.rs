//! One function per subcommand, each returning an [`Artifact`].

use crate::config::{BallConfig, Emit, GridConfig, Params, RunConfig, VolumeMethodArg};
use crate::output::{fmt12, round12, Artifact, Body, Table};
use anyhow::Result;
use hypangle_core::ballenum::{count_ball, visit_ball, BallSpec};
use hypangle_core::geodesics::{classify, DiscriminantRecord};
use hypangle_core::modgroup::{normalize, BasePoint};
use hypangle_core::paircorr::{correlation_grid, theory_columns, xi_grid, CorrelationGrid, TheorySeries};
use hypangle_core::rational::parse_rational;
use hypangle_core::selberg::{h_transform, KernelSpec};
use hypangle_core::volumes::{dbm_dxi, j_case, vol_closed, vol_mc, RegionSpec, VolumeEstimate};
use hypangle_core::Error;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::PI;

pub fn run(cfg: &RunConfig) -> Result<Artifact> {
    let omega = BasePoint::parse(&cfg.omega)?;
    match &cfg.params {
        Params::Enumerate { ball, emit } => enumerate(&omega, ball, *emit),
        Params::Paircorr { ball, grid } => paircorr(&omega, ball, grid),
        Params::Density { t_cut, grid } => density(&omega, t_cut, grid),
        Params::Compare { ball, t_cut, grid } => compare(&omega, ball, t_cut, grid),
        Params::Volumes { m, xi, method, samples, emit } => volumes(&omega, *m, *xi, *method, *samples, cfg.seed, *emit),
        Params::Geodesics { delta, delta_max } => geodesics(*delta, *delta_max),
        Params::Selberg { x, t_start, t_stop, t_step } => selberg(*x, *t_start, *t_stop, *t_step),
    }
}

fn ball_spec(omega: &BasePoint, b: &BallConfig) -> Result<BallSpec> {
    Ok(BallSpec::with_q(omega.clone(), parse_rational(&b.q)?, b.mode)?.budget(b.max_elements))
}

fn enumerate(omega: &BasePoint, b: &BallConfig, emit: Emit) -> Result<Artifact> {
    let spec = ball_spec(omega, b)?;
    let stats = count_ball(&spec)?;
    let facts = json!({ "stats": stats, "selected": stats.for_mode(b.mode) });
    if emit == Emit::Count {
        return Ok(Artifact { body: Body::Json(facts.clone()), facts });
    }
    let rows = visit_ball(&spec, |h| {
        let (n, d) = h.t_fraction(omega);
        let e = h.element;
        Some(vec![e.a().to_string(), e.b().to_string(), e.c().to_string(), e.d().to_string(), n.to_string(), d.to_string()])
    })?;
    let mut t = Table::new(&["a", "b", "c", "d", "T_num", "T_den"]);
    t.rows = rows;
    Ok(Artifact { body: Body::Csv(t), facts })
}

fn grid_facts(g: &CorrelationGrid) -> Value {
    let finite_tail = g.tail_bound.iter().copied().filter(|x| x.is_finite()).fold(0.0, f64::max);
    let unbounded = g.tail_bound.iter().filter(|x| !x.is_finite()).count();
    json!({ "grid": g.meta, "max_tail_bound": round12(finite_tail), "rows_without_tail_bound": unbounded })
}

fn paircorr(omega: &BasePoint, b: &BallConfig, gc: &GridConfig) -> Result<Artifact> {
    let spec = ball_spec(omega, b)?;
    let g = correlation_grid(&spec, None, gc.elliptic, gc.bin_width, gc.xi_max)?;
    let mut t = Table::new(&["xi", "r2_emp", "g2_emp"]);
    for j in 0..g.xi_values.len() {
        t.push(vec![fmt12(g.xi_values[j]), fmt12(g.r2_empirical[j]), fmt12(g.g2_empirical[j])]);
    }
    Ok(Artifact { body: Body::Csv(t), facts: json!({ "grid": g.meta }) })
}

fn series_facts(s: &TheorySeries) -> Value {
    let z = s.g2_zero();
    json!({
        "t_cut": s.t_cut.to_string(),
        "ell_cut": round12(s.ell_cut),
        "elements": s.element_count,
        "shells": s.shell_count(),
        "g2_zero": round12(z.value),
        "g2_zero_tail_bound": round12(z.tail_bound),
    })
}

fn density(omega: &BasePoint, t_cut: &str, gc: &GridConfig) -> Result<Artifact> {
    let series = TheorySeries::build(omega, parse_rational(t_cut)?)?;
    let xs = xi_grid(gc.bin_width, gc.xi_max);
    let (g2, tail) = theory_columns(&series, &xs, gc.elliptic);
    let mut t = Table::new(&["xi", "g2_theory", "tail_bound"]);
    for j in 0..xs.len() {
        t.push(vec![fmt12(xs[j]), fmt12(g2[j]), fmt12(tail[j])]);
    }
    let unbounded = tail.iter().filter(|x| !x.is_finite()).count();
    Ok(Artifact {
        body: Body::Csv(t),
        facts: json!({ "series": series_facts(&series), "elliptic": gc.elliptic, "rows_without_tail_bound": unbounded }),
    })
}

fn compare(omega: &BasePoint, b: &BallConfig, t_cut: &str, gc: &GridConfig) -> Result<Artifact> {
    let spec = ball_spec(omega, b)?;
    let series = TheorySeries::build(omega, parse_rational(t_cut)?)?;
    let g = correlation_grid(&spec, Some(&series), gc.elliptic, gc.bin_width, gc.xi_max)?;
    let mut t = Table::new(&["xi", "r2_emp", "g2_emp", "g2_theory", "tail_bound"]);
    for j in 0..g.xi_values.len() {
        t.push(vec![
            fmt12(g.xi_values[j]),
            fmt12(g.r2_empirical[j]),
            fmt12(g.g2_empirical[j]),
            fmt12(g.g2_theory[j]),
            fmt12(g.tail_bound[j]),
        ]);
    }
    let mut facts = grid_facts(&g);
    facts["series"] = series_facts(&series);
    Ok(Artifact { body: Body::Csv(t), facts })
}

fn estimate_json(e: &VolumeEstimate) -> Value {
    json!({
        "method": e.method,
        "value": round12(e.value),
        "std_error": round12(e.std_error),
        "samples_or_nodes": e.samples_or_nodes,
        "seed": e.seed,
    })
}

fn volumes(
    omega: &BasePoint,
    m: [i128; 4],
    xi: f64,
    method: VolumeMethodArg,
    samples: u64,
    seed: u64,
    emit: Emit,
) -> Result<Artifact> {
    let mat = normalize(m[0], m[1], m[2], m[3])?;
    let spec = RegionSpec::new(omega, mat, xi)?;
    let closed = (method != VolumeMethodArg::Mc).then(|| vol_closed(&spec));
    let mc = match method {
        VolumeMethodArg::Closed => None,
        _ => Some(vol_mc(&spec, samples, seed)?),
    };
    let d = omega.delta_f;
    let pref = PI / (d * d * xi * xi);
    let residual = (dbm_dxi(&spec) - pref * hypangle_core::paircorr::f_xi(xi, spec.ell)) / pref;
    let primary = closed.or(mc).expect("at least one method");
    let mut facts = json!({
        "matrix": mat.to_string(),
        "ell": round12(spec.ell),
        "j_case": j_case(&spec),
        "f_identity_residual": round12(residual),
    });
    if let (Some(c), Some(m)) = (closed, mc) {
        facts["z_score"] = round12((m.value - c.value) / m.std_error.max(f64::MIN_POSITIVE));
    }
    let body = match emit {
        Emit::Csv => {
            let mut t = Table::new(&["method", "value", "std_error", "samples_or_nodes", "f_identity_residual"]);
            for e in [closed, mc].into_iter().flatten() {
                let name = serde_json::to_value(e.method)?.as_str().unwrap_or_default().to_string();
                t.push(vec![name, fmt12(e.value), fmt12(e.std_error), e.samples_or_nodes.to_string(), fmt12(residual)]);
            }
            Body::Csv(t)
        }
        _ => {
            let mut v = json!({
                "value": round12(primary.value),
                "std_error": round12(primary.std_error),
                "method": primary.method,
                "f_identity_residual": round12(residual),
                "ell": round12(spec.ell),
                "j_case": j_case(&spec),
            });
            if let Some(c) = closed {
                v["closed"] = estimate_json(&c);
            }
            if let Some(m) = mc {
                v["mc"] = estimate_json(&m);
            }
            if let Some(z) = facts.get("z_score") {
                v["z_score"] = z.clone();
            }
            Body::Json(v)
        }
    };
    Ok(Artifact { body, facts })
}

fn geodesic_row(r: &DiscriminantRecord) -> Vec<String> {
    let pairs: Vec<String> = r.pairs.iter().map(|(b, c)| format!("({b},{c})")).collect();
    vec![
        r.delta.to_string(),
        pairs.join(" "),
        r.pell_min.t_big.to_string(),
        r.pell_min.k_small.to_string(),
        r.nine_solution.map_or_else(|| "-".to_string(), |(t, u)| format!("({t},{u})")),
        format!("({},{})", r.class_label.0, r.class_label.1),
        r.fibers.to_string(),
        r.class_count().to_string(),
    ]
}

fn geodesics(delta: Option<u64>, delta_max: Option<u64>) -> Result<Artifact> {
    let records: Vec<DiscriminantRecord> = match (delta, delta_max) {
        (Some(d), _) => vec![classify(d)?],
        (None, Some(n)) => {
            let v: Vec<_> = (2..=n).into_par_iter().map(classify).collect();
            let mut out = Vec::new();
            for r in v {
                match r {
                    Ok(rec) => out.push(rec),
                    Err(Error::NotInDrho(_)) | Err(Error::SquareDiscriminant(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            out
        }
        (None, None) => unreachable!("validated in config"),
    };
    let mut t = Table::new(&["delta", "pairs", "T", "k", "t_u", "class", "fibers", "classes"]);
    for r in &records {
        t.push(geodesic_row(r));
    }
    Ok(Artifact { body: Body::Csv(t), facts: json!({ "discriminants": records.len() }) })
}

fn selberg(x: f64, start: f64, stop: f64, step: f64) -> Result<Artifact> {
    let spec = KernelSpec::new(x)?;
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    let ts: Vec<f64> = (0..=n).map(|k| start + k as f64 * step).collect();
    let vals: Vec<_> = ts
        .par_iter()
        .map(|&t| h_transform(&spec, Complex64::new(t, 0.0)))
        .collect::<hypangle_core::Result<_>>()?;
    let mut t = Table::new(&["t", "re_h", "im_h", "err"]);
    let mut max_err: f64 = 0.0;
    for v in &vals {
        max_err = max_err.max(v.est_abs_error);
        t.push(vec![fmt12(v.t.re), fmt12(v.h.re), fmt12(v.h.im), fmt12(v.est_abs_error)]);
    }
    Ok(Artifact {
        body: Body::Csv(t),
        facts: json!({ "r1": round12(spec.r1), "r2": round12(spec.r2), "points": vals.len(), "max_est_abs_error": round12(max_err) }),
    })
}
