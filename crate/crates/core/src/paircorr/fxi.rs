//! The kernel f_ξ(ℓ) of the conjectured pair correlation density.

/// f_ξ(ℓ) for ξ > 0 and ℓ ≥ 0.
pub fn f_xi(xi: f64, ell: f64) -> f64 {
    if ell <= 0.0 {
        return 0.0;
    }
    let sh = (0.5 * ell).sinh();
    f_core(xi, 2.0 * sh * sh, ell)
}

/// f_ξ(ℓ) from m = cosh ℓ − 1, which callers usually know exactly.
pub fn f_xi_from_excess(xi: f64, m: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    f_core(xi, m, crate::modgroup::acosh_from_excess(m))
}

fn f_core(xi: f64, m: f64, ell: f64) -> f64 {
    let c = 1.0 + m;
    let s = (m * (m + 2.0)).sqrt();
    if xi >= s {
        return ell;
    }
    let r = ((s - xi) * (s + xi)).sqrt();
    if xi * xi <= 2.0 * m {
        // ln((c + s)/(c + r)) written without cancellation.
        (xi * xi / ((s + r) * (c + r))).ln_1p()
    } else {
        let v = ell + (xi * xi).ln_1p() - 2.0 * (c + r).ln();
        v.clamp(0.0, ell)
    }
}

/// The three branch formulas evaluated as written, regardless of which one
/// applies. Entries are NaN where a square root has a negative argument.
pub fn f_branches(xi: f64, ell: f64) -> [f64; 3] {
    let (c, s) = (ell.cosh(), ell.sinh());
    let d = s * s - xi * xi;
    let r = if d < 0.0 && d > -1e-12 * s * s { 0.0 } else { d.sqrt() };
    [
        ((c + s) / (c + r)).ln(),
        ((c + s) * (1.0 + xi * xi) / ((c + r) * (c + r))).ln(),
        (c + s).ln(),
    ]
}

/// The two branch points ξ = 2 sinh(ℓ/2) and ξ = sinh ℓ.
pub fn breakpoints(ell: f64) -> (f64, f64) {
    (2.0 * (0.5 * ell).sinh(), ell.sinh())
}
