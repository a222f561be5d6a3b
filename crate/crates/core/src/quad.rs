//! Gauss–Legendre quadrature and a substitution rule for integrands with
//! inverse-square-root or square-root behaviour at interval endpoints.

use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

fn node_cache() -> &'static Mutex<HashMap<usize, Vec<(f64, f64)>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<(f64, f64)>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence and memoized per order.
pub fn gl_nodes(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    if let Some(hit) = node_cache().lock().unwrap().get(&n) {
        return hit.clone();
    }
    let mut out = Vec::with_capacity(n);
    let nf = n as f64;
    for k in 0..n {
        // Tricomi initial guess for the k-th root of P_n.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            // Evaluate P_n and P_n' by upward recurrence.
            let (mut p0, mut p1) = (1.0f64, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for j in 2..=n {
            let jf = j as f64;
            let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
            p0 = p1;
            p1 = p2;
        }
        let dp = nf * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    node_cache().lock().unwrap().insert(n, out.clone());
    out
}

/// Fixed-order Gauss–Legendre on [lo, hi].
pub fn integrate_gl(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, order: usize) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    gl_nodes(order)
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Integrate f over [lo, hi] where f may blow up like 1/sqrt(distance) or
/// vanish like sqrt(distance) at either endpoint. Substituting
/// `x = mid + half * sin(w)` maps to a smooth integrand on
/// [-pi/2, pi/2]; orders double until two refinements agree.
pub fn integrate_sqrt_endpoints(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let g = |w: f64| {
        let x = mid + half * w.sin();
        // cos(w) kills the endpoint singularity produced by the map.
        f(x.clamp(lo, hi)) * half * w.cos()
    };
    let hp = std::f64::consts::FRAC_PI_2;
    let mut prev = integrate_gl(&g, -hp, hp, 16);
    for order in [32usize, 64, 128, 256] {
        let cur = integrate_gl(&g, -hp, hp, order);
        if (cur - prev).abs() <= tol * (1.0 + cur.abs()) {
            return cur;
        }
        prev = cur;
    }
    prev
}
