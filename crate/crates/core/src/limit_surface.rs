//! The limiting height function, the limiting surface and its discontinuity
//! envelope, the exact continuity criterion, the frozen-boundary curve, and
//! closed forms for rectangles and L-shapes.

use crate::critical::{self, CriticalError};
use crate::diagram::{DiagramError, InterlacingDiagram, NormalizedShape};
use crate::quad;
use num::rational::Ratio;
use num::{BigInt, BigRational, Signed, Zero};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("height query outside [eta a_0, eta a_m] x [0,1]: x={x}, t={t}")]
    OutOfRange { x: f64, t: f64 },
    #[error("surface target {target:.6e} outside [0, {max:.6e}]: point not under the profile")]
    TargetOutOfRange { target: f64, max: f64 },
    #[error("L-shape parameters outside the admissible region: {0}")]
    BadLShape(String),
    #[error("curve formula domain violation: {0}")]
    CurveDomain(String),
    #[error(transparent)]
    Critical(#[from] CriticalError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

#[derive(Debug, Clone, Copy)]
pub struct HeightQuery {
    pub x: f64,
    pub t: f64,
    pub tol: f64,
}

impl HeightQuery {
    pub fn new(x: f64, t: f64) -> Self {
        HeightQuery { x, t, tol: 1e-8 }
    }
}

/// All liquid t-intervals on one vertical line, with their integrated local
/// density. Caches everything needed to evaluate t -> H(x,t) repeatedly.
#[derive(Debug, Clone)]
pub struct HeightProfile {
    x: f64,
    tol: f64,
    /// Disjoint open liquid intervals, sorted.
    intervals: Vec<(f64, f64)>,
    /// Integral of alpha/pi over each interval.
    weights: Vec<f64>,
    shape: NormalizedShape,
}

fn is_liquid(shape: &NormalizedShape, x: f64, t: f64) -> bool {
    critical::alpha_at(shape, x, t).is_some()
}

/// Refine a liquid/frozen crossing bracketed by [lo, hi].
fn refine_crossing(shape: &NormalizedShape, x: f64, mut lo: f64, mut hi: f64, lo_liquid: bool) -> f64 {
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if is_liquid(shape, x, mid) == lo_liquid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Detect the liquid runs on {x} x [0,1] by a scan plus bisection refinement.
fn liquid_intervals(shape: &NormalizedShape, x: f64) -> Result<Vec<(f64, f64)>, SurfaceError> {
    let (slo, shi) = shape.support();
    if x <= slo || x >= shi {
        return Ok(Vec::new());
    }
    // The window [t_-, t_+] brackets every liquid time; on degenerate columns
    // (x at a scaled minimum) it is unavailable and the scan covers [0,1].
    let (wlo, whi, n) = if critical::degenerate_index(shape, x).is_some() {
        (0.0, 1.0, 481usize)
    } else {
        let tm = critical::t_minus(shape, x)?;
        let tp = critical::t_plus(shape, x)?;
        if tp <= tm + 1e-12 {
            return Ok(Vec::new());
        }
        (tm, tp, 240usize)
    };
    let probes: Vec<(f64, bool)> = (0..n)
        .map(|j| {
            let t = wlo + (whi - wlo) * (j as f64 + 0.5) / n as f64;
            (t, is_liquid(shape, x, t))
        })
        .collect();
    let mut intervals = Vec::new();
    let mut start: Option<f64> = None;
    for j in 0..n {
        let (t, liq) = probes[j];
        if liq && start.is_none() {
            let a = if j == 0 {
                // The run reaches the window edge: t_- itself, or a crossing
                // hidden between the edge and the first probe.
                if wlo == 0.0 { refine_crossing(shape, x, t, wlo, true) } else { wlo }
            } else {
                refine_crossing(shape, x, probes[j - 1].0, t, false)
            };
            start = Some(a);
        }
        if !liq {
            if let Some(a) = start.take() {
                let b = refine_crossing(shape, x, probes[j - 1].0, t, true);
                intervals.push((a, b));
            }
        }
    }
    if let Some(a) = start {
        let b = if whi == 1.0 {
            refine_crossing(shape, x, probes[n - 1].0, whi, true)
        } else {
            whi
        };
        intervals.push((a, b));
    }
    Ok(intervals)
}

fn alpha_or_zero(shape: &NormalizedShape, x: f64, s: f64) -> f64 {
    critical::alpha_at(shape, x, s).unwrap_or(0.0)
}

impl HeightProfile {
    pub fn new(shape: &NormalizedShape, x: f64, tol: f64) -> Result<Self, SurfaceError> {
        let intervals = liquid_intervals(shape, x)?;
        let weights = intervals
            .iter()
            .map(|&(a, b)| {
                quad::integrate_sqrt_endpoints(&|s| alpha_or_zero(shape, x, s) / PI, a, b, tol)
            })
            .collect();
        Ok(HeightProfile { x, tol, intervals, weights, shape: shape.clone() })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn liquid_intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// H(x, t): cumulative local density up to time t.
    pub fn height(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &(a, b)) in self.intervals.iter().enumerate() {
            if t >= b {
                acc += self.weights[k];
            } else if t > a {
                acc += quad::integrate_sqrt_endpoints(
                    &|s| alpha_or_zero(&self.shape, self.x, s) / PI,
                    a,
                    t,
                    self.tol,
                );
                break;
            } else {
                break;
            }
        }
        acc
    }

    /// H(x, 1), the boundary value of the height at the final time.
    pub fn full_height(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// The limiting height function H(x,t) = (1/pi) * integral of alpha(x,s) over
/// the liquid times s <= t.
pub fn height_infinity(shape: &NormalizedShape, q: HeightQuery) -> Result<f64, SurfaceError> {
    let (lo, hi) = shape.support();
    let slack = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
    if !(lo - slack..=hi + slack).contains(&q.x) || !(0.0..=1.0).contains(&q.t) {
        return Err(SurfaceError::OutOfRange { x: q.x, t: q.t });
    }
    Ok(HeightProfile::new(shape, q.x, q.tol)?.height(q.t))
}

#[derive(Debug, Clone, Copy)]
pub struct SurfaceValue {
    pub t_minus_val: f64,
    pub t_plus_val: f64,
    pub continuous_at_point: bool,
}

const SURFACE_CONTINUITY_TOL: f64 = 1e-6;

/// Invert the height function at (x, y): the lower and upper envelope times
/// whose height matches (y - |x|)/2. They differ exactly across a plateau.
pub fn surface_t(
    shape: &NormalizedShape,
    x: f64,
    y: f64,
    tol: f64,
) -> Result<SurfaceValue, SurfaceError> {
    let profile = HeightProfile::new(shape, x, tol)?;
    surface_t_with_profile(&profile, y, tol)
}

/// Same inversion against a prebuilt profile (grid sweeps reuse one per x).
pub fn surface_t_with_profile(
    profile: &HeightProfile,
    y: f64,
    tol: f64,
) -> Result<SurfaceValue, SurfaceError> {
    let target = (y - profile.x().abs()) / 2.0;
    let max = profile.full_height();
    let guard = tol.max(1e-9);
    if target < -guard || target > max + guard.max(1e-6) {
        return Err(SurfaceError::TargetOutOfRange { target, max });
    }
    let target = target.clamp(0.0, max);
    // Lower envelope: first time the height reaches the target.
    let t_minus_val = if target <= guard {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if profile.height(mid) >= target - guard {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    // Upper envelope: last time the height is still at the target.
    let t_plus_val = if max - target <= guard {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if profile.height(mid) <= target + guard {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let t_plus_val = t_plus_val.max(t_minus_val);
    Ok(SurfaceValue {
        t_minus_val,
        t_plus_val,
        continuous_at_point: t_plus_val - t_minus_val <= SURFACE_CONTINUITY_TOL,
    })
}

/// Plateau spans of t -> H(x,t) strictly between the first and last liquid
/// time: scan increments on a fixed t-grid and flag runs of at least three
/// consecutive increments below the quadrature tolerance.
pub fn interior_plateaus(profile: &HeightProfile) -> Vec<(f64, f64)> {
    let intervals = profile.liquid_intervals();
    if intervals.len() < 2 {
        // With zero or one liquid run the height has no interior flat.
        return Vec::new();
    }
    let (start, end) = (intervals[0].0, intervals[intervals.len() - 1].1);
    let step = 1e-3;
    let n = ((end - start) / step).ceil() as usize;
    let tol = 1e-7;
    let shape = &profile.shape;
    let x = profile.x;
    let increment = |t0: f64, t1: f64| -> f64 {
        let mut acc = 0.0;
        for &(a, b) in intervals {
            let lo = t0.max(a);
            let hi = t1.min(b);
            if hi > lo {
                acc += quad::integrate_gl(&|s| alpha_or_zero(shape, x, s) / PI, lo, hi, 6);
            }
        }
        acc
    };
    let mut spans: Vec<(f64, f64)> = Vec::new();
    let mut run_start: Option<f64> = None;
    let mut run_len = 0usize;
    for k in 0..n {
        let t0 = start + step * k as f64;
        let t1 = (t0 + step).min(end);
        if increment(t0, t1) < tol {
            if run_start.is_none() {
                run_start = Some(t0);
            }
            run_len += 1;
        } else {
            if let Some(s) = run_start.take() {
                if run_len >= 3 {
                    spans.push((s, t0));
                }
            }
            run_len = 0;
        }
    }
    if let Some(s) = run_start {
        if run_len >= 3 {
            spans.push((s, end));
        }
    }
    // Keep only spans strictly inside the liquid range.
    spans
        .into_iter()
        .filter(|&(a, b)| a > start + 2.0 * step && b < end - 2.0 * step)
        .collect()
}

/// One equation of the exact continuity criterion, at interior minimum i0.
#[derive(Debug, Clone)]
pub struct CriterionEquation {
    pub i0: usize,
    pub lhs: BigRational,
    pub rhs: BigRational,
}

impl CriterionEquation {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn residual(&self) -> BigRational {
        &self.lhs - &self.rhs
    }
}

#[derive(Debug, Clone)]
pub struct ContinuityReport {
    pub holds: bool,
    pub equations: Vec<CriterionEquation>,
}

/// Exact rational test of the harmonic-sum identities
/// `sum_{i != i0} 1/(a_{i0}-a_i) = sum_i 1/(a_{i0}-b_i)` for every interior
/// minimum; the limiting surface is continuous exactly when all hold.
pub fn continuity_criterion(d: &InterlacingDiagram) -> ContinuityReport {
    let big = |v: i64| BigRational::from_integer(BigInt::from(v));
    let inv = |num: i64| {
        assert!(num != 0);
        BigRational::from_integer(BigInt::from(1)) / big(num)
    };
    let m = d.m();
    let mut equations = Vec::new();
    for i0 in 1..m {
        let ai0 = d.a()[i0];
        let mut lhs = BigRational::zero();
        for (i, &ai) in d.a().iter().enumerate() {
            if i != i0 {
                lhs += inv(ai0 - ai);
            }
        }
        let mut rhs = BigRational::zero();
        for &bi in d.b() {
            rhs += inv(ai0 - bi);
        }
        equations.push(CriterionEquation { i0, lhs, rhs });
    }
    ContinuityReport { holds: equations.iter().all(|e| e.holds()), equations }
}

/// Closed-form height for the 1 x r rectangle in normalized coordinates
/// (support [-1/sqrt(r), sqrt(r)]), with the convention sqrt(x) = 0 for
/// non-positive radicand.
pub fn rect_height(r: Ratio<i64>, x: f64, t: f64) -> Result<f64, SurfaceError> {
    if r <= Ratio::zero() || !(0.0..=1.0).contains(&t) {
        return Err(SurfaceError::OutOfRange { x, t });
    }
    let rf = *r.numer() as f64 / *r.denom() as f64;
    let sq = rf.sqrt();
    // radicand(s) = s(4r - (1+r)^2 s) + 2(r-1) sqrt(r) s x - r x^2, a
    // downward parabola in s; the integrand is supported between its roots.
    let a2 = -(1.0 + rf) * (1.0 + rf);
    let a1 = 4.0 * rf + 2.0 * (rf - 1.0) * sq * x;
    let a0 = -rf * x * x;
    let disc = a1 * a1 - 4.0 * a2 * a0;
    if disc <= 0.0 {
        return Ok(0.0);
    }
    let s_minus = (-a1 + disc.sqrt()) / (2.0 * a2);
    let s_plus = (-a1 - disc.sqrt()) / (2.0 * a2);
    let lo = s_minus.max(0.0);
    let hi = s_plus.min(t);
    if hi <= lo {
        return Ok(0.0);
    }
    let f = |s: f64| {
        let rad = (a2 * s + a1) * s + a0;
        if rad <= 0.0 {
            0.0
        } else {
            rad.sqrt() / (2.0 * sq * (1.0 - s) * s) / PI
        }
    };
    Ok(quad::integrate_sqrt_endpoints(&f, lo, hi, 1e-10))
}

#[derive(Debug, Clone, Copy)]
pub struct BoundarySample {
    pub s: f64,
    pub x: f64,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct FrozenBoundary {
    pub samples: Vec<BoundarySample>,
    /// Parameter values where the tangent turns vertical (dx/ds sign flip).
    pub cusps: Vec<f64>,
    /// Grid points discarded: outside the strip, or too close to a pole.
    pub dropped: usize,
    /// Pole locations of the parametrization (all scaled coordinates).
    pub poles: Vec<f64>,
}

fn sigma(shape: &NormalizedShape, s: f64) -> f64 {
    let a: f64 = shape.sa().iter().map(|&v| 1.0 / (s - v)).sum();
    let b: f64 = shape.sb().iter().map(|&v| 1.0 / (s - v)).sum();
    a - b
}

fn sigma_dot(shape: &NormalizedShape, s: f64) -> f64 {
    let a: f64 = shape.sa().iter().map(|&v| 1.0 / ((s - v) * (s - v))).sum();
    let b: f64 = shape.sb().iter().map(|&v| 1.0 / ((s - v) * (s - v))).sum();
    b - a
}

fn g_ratio(shape: &NormalizedShape, s: f64) -> f64 {
    let num: f64 = shape.sb().iter().map(|&v| s - v).product();
    let den: f64 = shape.sa().iter().map(|&v| s - v).product();
    num / den
}

/// The parametrized boundary point (x(s), t(s)) of the liquid region, or
/// None when the maps are singular at s.
pub fn boundary_point(shape: &NormalizedShape, s: f64) -> Option<(f64, f64)> {
    let sg = sigma(shape, s);
    if !sg.is_finite() || sg.abs() < 1e-300 {
        return None;
    }
    let x = s - 1.0 / sg;
    let t = 1.0 - g_ratio(shape, s) / sg;
    if x.is_finite() && t.is_finite() {
        Some((x, t))
    } else {
        None
    }
}

/// d x(s) / d s, used for cusp detection.
fn x_dot(shape: &NormalizedShape, s: f64) -> f64 {
    let sg = sigma(shape, s);
    1.0 + sigma_dot(shape, s) / (sg * sg)
}

const POLE_GUARD: f64 = 1e-9;

/// Trace the frozen boundary over the given parameter grid, keeping points
/// inside the strip [eta a_0, eta a_m] x [0,1] and flagging vertical-tangent
/// parameters between retained neighbors.
pub fn frozen_boundary(shape: &NormalizedShape, s_grid: &[f64]) -> FrozenBoundary {
    let mut poles: Vec<f64> = shape.sa().iter().chain(shape.sb().iter()).copied().collect();
    poles.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (xlo, xhi) = shape.support();
    let mut samples = Vec::new();
    let mut dropped = 0usize;
    for &s in s_grid {
        if poles.iter().any(|&p| (s - p).abs() < POLE_GUARD) {
            dropped += 1;
            continue;
        }
        match boundary_point(shape, s) {
            Some((x, t))
                if (0.0..=1.0).contains(&t) && (xlo..=xhi).contains(&x) =>
            {
                samples.push(BoundarySample { s, x, t });
            }
            _ => dropped += 1,
        }
    }
    // Cusps: refine a sign change of dx/ds between consecutive retained
    // samples that do not straddle a pole.
    let mut cusps = Vec::new();
    for w in samples.windows(2) {
        let (s0, s1) = (w[0].s, w[1].s);
        if poles.iter().any(|&p| s0 < p && p < s1) {
            continue;
        }
        let (d0, d1) = (x_dot(shape, s0), x_dot(shape, s1));
        if d0 == 0.0 || d0.signum() == d1.signum() {
            continue;
        }
        let (mut lo, mut hi) = (s0, s1);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if x_dot(shape, mid).signum() == d0.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        cusps.push(0.5 * (lo + hi));
    }
    FrozenBoundary { samples, cusps, dropped, poles }
}

/// A default parameter grid: uniform fill between consecutive poles plus two
/// tangent-mapped rays outside, which approach the (0,0) limit point.
pub fn default_s_grid(shape: &NormalizedShape, per_interval: usize) -> Vec<f64> {
    let mut poles: Vec<f64> = shape.sa().iter().chain(shape.sb().iter()).copied().collect();
    poles.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let span = poles[poles.len() - 1] - poles[0];
    let mut grid = Vec::new();
    for w in poles.windows(2) {
        for j in 1..=per_interval {
            grid.push(w[0] + (w[1] - w[0]) * j as f64 / (per_interval + 1) as f64);
        }
    }
    // Outer rays via a tangent map reaching far beyond the support.
    for j in 1..=per_interval {
        let u = (j as f64 / (per_interval + 1) as f64) * std::f64::consts::FRAC_PI_2;
        grid.push(poles[poles.len() - 1] + 0.25 * span * u.tan() + 1e-6);
        grid.push(poles[0] - 0.25 * span * u.tan() - 1e-6);
    }
    grid.sort_by(|p, q| p.partial_cmp(q).unwrap());
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LShapeParams {
    pub p: Ratio<i64>,
    pub q: Ratio<i64>,
    pub r: Ratio<i64>,
}

impl LShapeParams {
    pub fn new(p: Ratio<i64>, q: Ratio<i64>, r: Ratio<i64>) -> Result<Self, SurfaceError> {
        let params = LShapeParams { p, q, r };
        params.validate()?;
        Ok(params)
    }

    /// Membership in the admissible parameter region:
    /// r > 0, p in (-1, r), |p| < q <= min(p+2, 2r-p).
    fn validate(&self) -> Result<(), SurfaceError> {
        let LShapeParams { p, q, r } = *self;
        let one = Ratio::from_integer(1);
        let two = Ratio::from_integer(2);
        if r <= Ratio::zero() {
            return Err(SurfaceError::BadLShape(format!("r={r} must be positive")));
        }
        if p <= -one || p >= r {
            return Err(SurfaceError::BadLShape(format!("p={p} must lie in (-1, r)")));
        }
        if q <= p.abs() {
            return Err(SurfaceError::BadLShape(format!("q={q} must exceed |p|")));
        }
        if q > p + two || q > two * r - p {
            return Err(SurfaceError::BadLShape(format!(
                "q={q} must be at most min(p+2, 2r-p)"
            )));
        }
        Ok(())
    }
}

/// Interlacing coordinates of the L-shape with parameters (p,q,r):
/// a = (-1, p, r), b = ((p+q-2)/2, (p-q+2r)/2), cleared to integers. On the
/// region boundary (q = p+2 or q = 2r-p) a maximum collides with the middle
/// minimum and the pair cancels, leaving a rectangle. Returns the diagram
/// and the clearing multiplier.
pub fn lshape_from_pqr(params: LShapeParams) -> Result<(InterlacingDiagram, i64), SurfaceError> {
    params.validate()?;
    let LShapeParams { p, q, r } = params;
    let one = Ratio::from_integer(1);
    let two = Ratio::from_integer(2);
    let b1 = (p + q - two) / two;
    let b2 = (p - q + two * r) / two;
    let (a, b): (Vec<Ratio<i64>>, Vec<Ratio<i64>>) = if b1 == p && b2 == p {
        (vec![-one, r], vec![p])
    } else if b1 == p {
        (vec![-one, r], vec![b2])
    } else if b2 == p {
        (vec![-one, r], vec![b1])
    } else {
        (vec![-one, p, r], vec![b1, b2])
    };
    Ok(InterlacingDiagram::from_rational_coords(&a, &b)?)
}

/// The continuity threshold curve q = 2 - sqrt(2 - p^2) in the (p,q) plane.
pub fn phase_curve_q(p: f64) -> Result<f64, SurfaceError> {
    let rad = 2.0 - p * p;
    if rad < 0.0 {
        return Err(SurfaceError::CurveDomain(format!("2 - p^2 < 0 at p={p}")));
    }
    Ok(2.0 - rad.sqrt())
}

/// The companion curves
/// `1 + r +- sqrt((1+p-r)(1+2p-r)(pr+(1+r)^2-p-2p^2)) / (1+2p-r)`.
pub fn phase_curve_qpm(r: f64, p: f64, sign: i8) -> Result<f64, SurfaceError> {
    let denom = 1.0 + 2.0 * p - r;
    if denom == 0.0 {
        return Err(SurfaceError::CurveDomain(format!(
            "denominator 1+2p-r vanishes at (r={r}, p={p})"
        )));
    }
    let rad = (1.0 + p - r) * denom * (p * r + (1.0 + r) * (1.0 + r) - p - 2.0 * p * p);
    if rad < 0.0 {
        return Err(SurfaceError::CurveDomain(format!(
            "negative radicand at (r={r}, p={p})"
        )));
    }
    Ok(1.0 + r + sign.signum() as f64 * rad.sqrt() / denom)
}

/// Exact rational points on the continuity threshold curve:
/// p = (s(2r+s) - r^2)/(s^2+r^2), q = 1 + 2s(s-r)/(s^2+r^2).
pub fn q_curve_rational_point(r: Ratio<i64>, s: Ratio<i64>) -> (Ratio<i64>, Ratio<i64>) {
    let two = Ratio::from_integer(2);
    let denom = s * s + r * r;
    let p = (s * (two * r + s) - r * r) / denom;
    let q = Ratio::from_integer(1) + two * s * (s - r) / denom;
    (p, q)
}
