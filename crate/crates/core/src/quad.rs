//! One-dimensional quadrature and compensated summation.

use num_complex::Complex64;
use std::sync::OnceLock;

/// Neumaier compensated sum accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            if n == 1 {
                dp = 1.0;
            }
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    (x, w)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(20))
}

/// Fixed-order Gauss–Legendre on [a, b].
pub fn gl_fixed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
    let (h, m) = (0.5 * (b - a), 0.5 * (b + a));
    let mut s = 0.0;
    for (x, w) in nodes.0.iter().zip(&nodes.1) {
        s += w * f(m + h * x);
    }
    s * h
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 7/15 panel: (value, error estimate).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Panel budget of the adaptive integrators.
const MAX_PANELS: usize = 4000;

/// Global adaptive bisection: repeatedly splits the panel with the largest
/// error estimate until the total meets max(abs_tol, rel_tol·|I|) or the
/// panel budget runs out.
fn global_adaptive<V, P>(mut panel: P, a: f64, b: f64, abs_tol: f64, rel_tol: f64, norm: fn(V) -> f64) -> (V, f64)
where
    V: Copy + Default + std::ops::Add<Output = V> + std::ops::Neg<Output = V>,
    P: FnMut(f64, f64) -> (V, f64),
{
    use std::cmp::Ordering;
    use std::collections::BinaryHeap;
    struct Item<V> {
        e: f64,
        a: f64,
        b: f64,
        v: V,
    }
    impl<V> PartialEq for Item<V> {
        fn eq(&self, o: &Self) -> bool {
            self.cmp(o) == Ordering::Equal
        }
    }
    impl<V> Eq for Item<V> {}
    impl<V> PartialOrd for Item<V> {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    impl<V> Ord for Item<V> {
        fn cmp(&self, o: &Self) -> Ordering {
            self.e.total_cmp(&o.e).then(o.a.total_cmp(&self.a))
        }
    }
    if a == b {
        return (V::default(), 0.0);
    }
    let (v, e) = panel(a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Item { e, a, b, v });
    let (mut total, mut err) = (v, e);
    while heap.len() < MAX_PANELS {
        if err <= abs_tol.max(rel_tol * norm(total)) {
            break;
        }
        let it = heap.pop().expect("non-empty");
        let m = 0.5 * (it.a + it.b);
        if !(m > it.a && m < it.b) {
            heap.push(it);
            break;
        }
        let (v1, e1) = panel(it.a, m);
        let (v2, e2) = panel(m, it.b);
        heap.push(Item { e: e1, a: it.a, b: m, v: v1 });
        heap.push(Item { e: e2, a: m, b: it.b, v: v2 });
        total = total + v1 + v2 + -it.v;
        err += e1 + e2 - it.e;
    }
    // Final sum in position order.
    let mut items: Vec<_> = heap.iter().map(|i| (i.a, i.v, i.e)).collect();
    items.sort_by(|x, y| x.0.total_cmp(&y.0));
    total = V::default();
    err = 0.0;
    for (_, v, e) in items {
        total = total + v;
        err += e;
    }
    (total, err)
}

/// Adaptive Gauss–Kronrod. Returns (value, error estimate).
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> (f64, f64) {
    global_adaptive(|x, y| gk15(&mut f, x, y), a, b, abs_tol, rel_tol, f64::abs)
}

/// Adaptive integration over consecutive panels given by sorted breakpoints.
pub fn adaptive_panels<F: FnMut(f64) -> f64>(mut f: F, pts: &[f64], abs_tol: f64) -> (f64, f64) {
    let n = pts.len().saturating_sub(1).max(1) as f64;
    let mut v = KahanSum::default();
    let mut err = 0.0;
    for w in pts.windows(2) {
        if w[1] > w[0] {
            let (a, e) = adaptive(&mut f, w[0], w[1], abs_tol / n, 0.0);
            v.add(a);
            err += e;
        }
    }
    (v.value(), err)
}

/// Complex-valued adaptive Gauss–Kronrod. Returns (value, error estimate).
pub fn adaptive_complex<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> (Complex64, f64) {
    let panel = |a: f64, b: f64| {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut rk = fc * WGK[7];
        let mut rg = fc * WG[3];
        for j in 0..7 {
            let dx = h * XGK[j];
            let s = f(c - dx) + f(c + dx);
            rk += s * WGK[j];
            if j % 2 == 1 {
                rg += s * WG[j / 2];
            }
        }
        (rk * h, ((rk - rg) * h).norm())
    };
    global_adaptive(panel, a, b, abs_tol, rel_tol, Complex64::norm)
}

/// 20-point Gauss–Legendre on [a, b].
pub fn gl20_on<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    gl_fixed(f, a, b, gl20())
}
