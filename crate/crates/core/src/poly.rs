//! Dense polynomial evaluation and simultaneous root finding.
//!
//! Coefficients are stored low-to-high. Roots are found with the
//! Aberth–Ehrlich iteration on the monic rescaling, followed by one Newton
//! polish per root; degree <= 2 uses closed forms.

use num::complex::Complex64;

/// Evaluate by Horner's rule.
pub fn eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

pub fn eval_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Derivative coefficients.
pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

/// `sum_i |c_i| |z|^i`, the natural scale for backward-error tests of a
/// computed root `z`.
pub fn residual_scale(coeffs: &[f64], z_abs: f64) -> f64 {
    let mut scale: f64 = 0.0;
    let mut pw = 1.0;
    for &c in coeffs {
        scale += c.abs() * pw;
        pw *= z_abs;
    }
    scale.max(f64::MIN_POSITIVE)
}

/// Drop trailing coefficients that are negligible relative to the largest
/// one (exact cancellation of leading terms shows up as ~1e-17 junk).
pub fn trim_leading(coeffs: &[f64], rel_tol: f64) -> Vec<f64> {
    let max = coeffs.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
    let mut out: Vec<f64> = coeffs.to_vec();
    while out.len() > 1 {
        let last = *out.last().unwrap();
        if last.abs() > rel_tol * max {
            break;
        }
        out.pop();
    }
    out
}

/// All complex roots of the (trimmed) polynomial. Panics on constant input.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    assert!(deg >= 1, "constant polynomial has no roots");
    match deg {
        1 => vec![Complex64::new(-coeffs[0] / coeffs[1], 0.0)],
        2 => quadratic(coeffs[0], coeffs[1], coeffs[2]),
        _ => aberth(coeffs),
    }
}

/// Numerically careful quadratic formula (complex output).
fn quadratic(c0: f64, c1: f64, c2: f64) -> Vec<Complex64> {
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // q = -(b + sign(b) sqrt(disc))/2 avoids cancellation.
        let q = if c1 >= 0.0 { -(c1 + sq) / 2.0 } else { -(c1 - sq) / 2.0 };
        let r1 = q / c2;
        let r2 = if q != 0.0 { c0 / q } else { -c1 / c2 - r1 };
        vec![Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)]
    } else {
        let re = -c1 / (2.0 * c2);
        let im = (-disc).sqrt() / (2.0 * c2);
        vec![Complex64::new(re, -im.abs()), Complex64::new(re, im.abs())]
    }
}

fn aberth(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let monic: Vec<f64> = coeffs.iter().map(|&c| c / lead).collect();
    let dmonic = derivative(&monic);

    // Cauchy-style inclusion radius and staggered circle start.
    let radius = 1.0
        + monic[..deg]
            .iter()
            .fold(0.0f64, |m, &c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k as f64) / (deg as f64) + 0.4;
            Complex64::from_polar(radius, th)
        })
        .collect();

    for _ in 0..200 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let p = eval(&monic, z[i]);
            let dp = eval(&dmonic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = p / dp;
            let mut rep = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    rep += 1.0 / (z[i] - z[j]);
                }
            }
            let denom = 1.0 - newton * rep;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            z[i] -= step;
            moved = moved.max(step.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-13 {
            break;
        }
    }

    // One Newton polish each against the original coefficients.
    let dorig = derivative(coeffs);
    for zi in z.iter_mut() {
        let dp = eval(&dorig, *zi);
        if dp.norm() > 1e-300 {
            *zi -= eval(coeffs, *zi) / dp;
        }
    }
    z
}
