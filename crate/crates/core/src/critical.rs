//! The critical equation at a point (x, t) and its phase classification.
//!
//! For a normalized shape with scaled minima `eta*a_i` and maxima `eta*b_i`,
//! the critical polynomial is
//!
//! ```text
//! P_{x,t}(U) = U * prod_i (x - eta b_i + U) - (1 - t) * prod_i (x - eta a_i + U)
//! ```
//!
//! of degree m+1 with leading coefficient t. A point is *liquid* when P has
//! exactly one conjugate pair of non-real roots; the upper root U_c carries
//! the local geometry through `alpha = Im U_c / (1-t)` and
//! `beta = Re U_c / |U_c|`. All other points are *frozen*. The number of real
//! roots in each gap between consecutive scaled coordinates is pinned down by
//! an interval-localization lemma, which also yields monotone predicates in t
//! whose flip points `t_-(x) <= t_+(x)` bracket the liquid time-slice.

use crate::diagram::NormalizedShape;
use crate::poly;
use num::complex::Complex64;
use thiserror::Error;

/// A root counts as real when |Im| <= REAL_IM_TOL * (1 + |root|).
pub const REAL_IM_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CriticalError {
    #[error("point (x={x}, t={t}) is outside [eta a_0, eta a_m] x [0,1]")]
    OutOfRange { x: f64, t: f64 },
    #[error("x={x} coincides with the scaled minimum of index {index}; use the degenerate path")]
    DegenerateX { x: f64, index: usize },
    #[error("root refinement did not reach tolerance at (x={x}, t={t}): residual {residual:.3e}")]
    NonConvergence { x: f64, t: f64, residual: f64 },
    #[error("root localization clash in [{lo}, {hi}]: expected {expected}, found {found}")]
    LemmaViolation { lo: f64, hi: f64, expected: &'static str, found: usize },
    #[error("stencil point (x={x}, t={t}) is frozen; cannot form the transport residual")]
    FrozenStencil { x: f64, t: f64 },
}

#[derive(Debug, Clone)]
pub struct CriticalPoly {
    /// Coefficients low-to-high, with exactly-cancelled leading terms removed.
    pub coeffs: Vec<f64>,
    pub x: f64,
    pub t: f64,
    pub m: usize,
}

impl CriticalPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, u: Complex64) -> Complex64 {
        poly::eval(&self.coeffs, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrozenRegime {
    /// Below the liquid window: two extra real roots outside the support gap.
    SmallT,
    /// Above the liquid window: two extra real roots inside the gap of x.
    LargeT,
    /// Frozen strip between two liquid windows on the same vertical line.
    IntermediateT,
    /// x sits exactly on a scaled minimum (or the classification was forced
    /// there by the degenerate-column path).
    DegenerateEdge,
}

#[derive(Debug, Clone)]
pub enum Phase {
    Liquid { u_c: Complex64, alpha: f64, beta: f64 },
    Frozen { regime: FrozenRegime },
}

#[derive(Debug, Clone)]
pub struct PhaseClassification {
    pub roots: Vec<Complex64>,
    pub phase: Phase,
}

impl PhaseClassification {
    pub fn is_liquid(&self) -> bool {
        matches!(self.phase, Phase::Liquid { .. })
    }

    pub fn upper_root(&self) -> Option<Complex64> {
        match self.phase {
            Phase::Liquid { u_c, .. } => Some(u_c),
            Phase::Frozen { .. } => None,
        }
    }
}

fn check_range(shape: &NormalizedShape, x: f64, t: f64) -> Result<(), CriticalError> {
    let (lo, hi) = shape.support();
    let slack = 1e-12 * (1.0 + hi.abs().max(lo.abs()));
    if !(lo - slack..=hi + slack).contains(&x) || !(0.0..=1.0).contains(&t) {
        return Err(CriticalError::OutOfRange { x, t });
    }
    Ok(())
}

/// Index i such that x equals the scaled minimum eta*a_i, if any.
pub fn degenerate_index(shape: &NormalizedShape, x: f64) -> Option<usize> {
    shape
        .sa()
        .iter()
        .position(|&s| (s - x).abs() <= 1e-12 * (1.0 + x.abs()))
}

/// Index i0 in 1..=m with x strictly inside (eta a_{i0-1}, eta a_{i0}).
pub fn gap_index(shape: &NormalizedShape, x: f64) -> Result<usize, CriticalError> {
    if let Some(index) = degenerate_index(shape, x) {
        return Err(CriticalError::DegenerateX { x, index });
    }
    let sa = shape.sa();
    for i in 1..sa.len() {
        if sa[i - 1] < x && x < sa[i] {
            return Ok(i);
        }
    }
    Err(CriticalError::OutOfRange { x, t: f64::NAN })
}

/// Multiply the monic factors (U + c) for c in shifts.
fn monic_product(shifts: &[f64]) -> Vec<f64> {
    let mut coeffs = vec![1.0];
    for &c in shifts {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (k, &v) in coeffs.iter().enumerate() {
            next[k] += v * c;
            next[k + 1] += v;
        }
        coeffs = next;
    }
    coeffs
}

pub fn build_critical_poly(
    shape: &NormalizedShape,
    x: f64,
    t: f64,
) -> Result<CriticalPoly, CriticalError> {
    check_range(shape, x, t)?;
    let m = shape.m();
    let shifts_b: Vec<f64> = shape.sb().iter().map(|&s| x - s).collect();
    let shifts_a: Vec<f64> = shape.sa().iter().map(|&s| x - s).collect();
    let pb = monic_product(&shifts_b); // deg m
    let pa = monic_product(&shifts_a); // deg m+1
    let mut coeffs = vec![0.0; m + 2];
    for (k, &v) in pb.iter().enumerate() {
        coeffs[k + 1] += v; // times U
    }
    for (k, &v) in pa.iter().enumerate() {
        coeffs[k] -= (1.0 - t) * v;
    }
    // t = 0 cancels the two monic tops exactly; x = 0 can cancel the next
    // coefficient too. Keep genuinely small leading coefficients (small t).
    let coeffs = poly::trim_leading(&coeffs, 1e-14);
    Ok(CriticalPoly { coeffs, x, t, m })
}

/// Find and residual-check all roots of the critical polynomial.
fn solve_roots(cp: &CriticalPoly) -> Result<Vec<Complex64>, CriticalError> {
    if cp.coeffs.len() == 1 {
        // Full degeneracy (x = 0, t = 0): the equation has no solutions.
        return Ok(Vec::new());
    }
    let roots = poly::roots(&cp.coeffs);
    let maxc = cp.coeffs.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
    for &r in &roots {
        let scale = maxc + poly::residual_scale(&cp.coeffs, r.norm());
        let res = cp.eval(r).norm();
        if res > 1e-7 * scale {
            return Err(CriticalError::NonConvergence { x: cp.x, t: cp.t, residual: res });
        }
    }
    Ok(roots)
}

fn is_real(r: Complex64) -> bool {
    r.im.abs() <= REAL_IM_TOL * (1.0 + r.norm())
}

fn classify_from_roots(
    shape: &NormalizedShape,
    x: f64,
    t: f64,
    roots: Vec<Complex64>,
) -> PhaseClassification {
    let non_real: Vec<Complex64> = roots.iter().copied().filter(|&r| !is_real(r)).collect();
    let liquid = match non_real.len() {
        0 => false,
        2 => true,
        // Threshold flapping near a multiple root: let the discriminant of
        // the computed roots decide.
        _ => disc_sign_of_roots(&roots) < 0,
    };
    if liquid {
        let u_c = roots
            .iter()
            .copied()
            .filter(|r| r.im > 0.0)
            .max_by(|p, q| p.im.partial_cmp(&q.im).unwrap())
            .unwrap_or(Complex64::new(0.0, 0.0));
        let alpha = u_c.im / (1.0 - t);
        let beta = u_c.re / u_c.norm();
        return PhaseClassification { roots, phase: Phase::Liquid { u_c, alpha, beta } };
    }
    let regime = frozen_regime(shape, x, &roots);
    PhaseClassification { roots, phase: Phase::Frozen { regime } }
}

fn frozen_regime(shape: &NormalizedShape, x: f64, roots: &[Complex64]) -> FrozenRegime {
    let i0 = match gap_index(shape, x) {
        Ok(i) => i,
        Err(_) => return FrozenRegime::DegenerateEdge,
    };
    let (lo, hi) = shape.support();
    let reals: Vec<f64> = roots.iter().filter(|r| is_real(**r)).map(|r| r.re).collect();
    let outside = reals.iter().filter(|&&r| r <= lo - x || r >= hi - x).count();
    if outside >= 2 {
        return FrozenRegime::SmallT;
    }
    let (glo, ghi) = (shape.sa()[i0 - 1] - x, shape.sa()[i0] - x);
    let inside = reals.iter().filter(|&&r| glo < r && r < ghi).count();
    if inside >= 2 {
        return FrozenRegime::LargeT;
    }
    FrozenRegime::IntermediateT
}

fn disc_sign_of_roots(roots: &[Complex64]) -> i8 {
    let max_norm = roots.iter().fold(0.0f64, |m, r| m.max(r.norm()));
    let mut prod = Complex64::new(1.0, 0.0);
    let mut min_sep = f64::INFINITY;
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let d = roots[i] - roots[j];
            min_sep = min_sep.min(d.norm());
            prod *= d * d;
        }
    }
    if min_sep < 1e-7 * (1.0 + max_norm) {
        return 0;
    }
    if prod.re > 0.0 {
        1
    } else {
        -1
    }
}

pub fn solve_critical(
    shape: &NormalizedShape,
    x: f64,
    t: f64,
) -> Result<PhaseClassification, CriticalError> {
    check_range(shape, x, t)?;
    if let Some(i) = degenerate_index(shape, x) {
        return classify_degenerate(shape, i, t);
    }
    if t >= 1.0 {
        // Explicit factorization U * prod(x - eta b_i + U).
        let mut roots = vec![Complex64::new(0.0, 0.0)];
        roots.extend(shape.sb().iter().map(|&s| Complex64::new(s - x, 0.0)));
        let regime = frozen_regime(shape, x, &roots);
        return Ok(PhaseClassification { roots, phase: Phase::Frozen { regime } });
    }
    let cp = build_critical_poly(shape, x, t)?;
    let roots = solve_roots(&cp)?;
    if t <= 0.0 {
        // Degree m, all real; below every liquid window.
        return Ok(PhaseClassification { roots, phase: Phase::Frozen { regime: FrozenRegime::SmallT } });
    }
    Ok(classify_from_roots(shape, x, t, roots))
}

/// Classification on the vertical line x = eta a_i, where the factor U
/// cancels and the equation drops to degree m. The outermost lines i = 0 and
/// i = m are frozen for every t.
pub fn classify_degenerate(
    shape: &NormalizedShape,
    i: usize,
    t: f64,
) -> Result<PhaseClassification, CriticalError> {
    let m = shape.m();
    assert!(i <= m, "minimum index out of range");
    if !(0.0..=1.0).contains(&t) {
        return Err(CriticalError::OutOfRange { x: shape.sa()[i], t });
    }
    let x = shape.sa()[i];
    let shifts_b: Vec<f64> = shape.sb().iter().map(|&s| x - s).collect();
    let shifts_a: Vec<f64> = shape
        .sa()
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &s)| x - s)
        .collect();
    let pb = monic_product(&shifts_b);
    let pa = monic_product(&shifts_a);
    let mut coeffs: Vec<f64> = pb
        .iter()
        .zip(pa.iter())
        .map(|(&vb, &va)| vb - (1.0 - t) * va)
        .collect();
    coeffs = poly::trim_leading(&coeffs, 1e-14);
    let cp = CriticalPoly { coeffs, x, t, m };
    let mut roots = solve_roots(&cp)?;
    roots.push(Complex64::new(0.0, 0.0)); // the cancelled factor
    if i == 0 || i == m || t <= 0.0 || t >= 1.0 {
        return Ok(PhaseClassification {
            roots,
            phase: Phase::Frozen { regime: FrozenRegime::DegenerateEdge },
        });
    }
    let non_real = roots.iter().filter(|&&r| !is_real(r)).count();
    if non_real == 2 {
        let u_c = roots
            .iter()
            .copied()
            .filter(|r| r.im > 0.0)
            .max_by(|p, q| p.im.partial_cmp(&q.im).unwrap())
            .unwrap();
        let alpha = u_c.im / (1.0 - t);
        let beta = u_c.re / u_c.norm();
        return Ok(PhaseClassification { roots, phase: Phase::Liquid { u_c, alpha, beta } });
    }
    Ok(PhaseClassification { roots, phase: Phase::Frozen { regime: FrozenRegime::DegenerateEdge } })
}

/// One interval of the root-localization lemma, with the observed count.
#[derive(Debug, Clone, Copy)]
pub struct RootWindow {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
    /// When true the lemma forbids roots here; otherwise it demands >= 1.
    pub must_be_empty: bool,
    pub count: usize,
}

/// Count the computed real roots in every interval named by the localization
/// lemma and cross-check the lemma's assertions. A clash means the root
/// finder failed, and is reported as an error rather than patched over.
pub fn localize_real_roots(
    shape: &NormalizedShape,
    x: f64,
    t: f64,
) -> Result<Vec<RootWindow>, CriticalError> {
    check_range(shape, x, t)?;
    let i0 = gap_index(shape, x)?;
    let cls = solve_critical(shape, x, t)?;
    let reals: Vec<f64> = cls.roots.iter().filter(|r| is_real(**r)).map(|r| r.re).collect();
    let sa = shape.sa();
    let sb = shape.sb();
    let m = shape.m();
    let mut out = Vec::new();
    let grace = 1e-9;
    let mut push = |lo: f64, hi: f64, lo_closed: bool, hi_closed: bool, must_be_empty: bool| {
        // Shrink forbidden windows and pad demanded ones so that roots that
        // sit numerically on a boundary never produce a spurious clash.
        let (clo, chi) = if must_be_empty { (lo + grace, hi - grace) } else { (lo - grace, hi + grace) };
        let count = reals.iter().filter(|&&r| clo <= r && r <= chi).count();
        out.push(RootWindow { lo, hi, lo_closed, hi_closed, must_be_empty, count });
    };
    for i in 1..=m {
        // Storage is 0-based: b_i = sb[i-1], a_i = sa[i].
        let (bi, ai_prev, ai) = (sb[i - 1] - x, sa[i - 1] - x, sa[i] - x);
        if i < i0 {
            push(ai_prev, bi, true, false, true);
            push(bi, ai, true, false, false);
        } else if i > i0 {
            push(ai_prev, bi, false, true, false);
            push(bi, ai, true, false, true);
        }
    }
    for w in &out {
        if w.must_be_empty && w.count > 0 {
            return Err(CriticalError::LemmaViolation {
                lo: w.lo,
                hi: w.hi,
                expected: "no real root",
                found: w.count,
            });
        }
        if !w.must_be_empty && w.count == 0 {
            return Err(CriticalError::LemmaViolation {
                lo: w.lo,
                hi: w.hi,
                expected: "at least one real root",
                found: 0,
            });
        }
    }
    Ok(out)
}

/// Two real roots outside the open interval (eta a_0 - x, eta a_m - x):
/// holds exactly for t <= t_-(x).
fn small_t_predicate(shape: &NormalizedShape, x: f64, t: f64) -> Result<bool, CriticalError> {
    let cp = build_critical_poly(shape, x, t)?;
    let roots = solve_roots(&cp)?;
    let (lo, hi) = shape.support();
    let n = roots
        .iter()
        .filter(|r| is_real(**r) && (r.re <= lo - x || r.re >= hi - x))
        .count();
    Ok(n >= 2)
}

/// Two real roots inside the gap (eta a_{i0-1} - x, eta a_{i0} - x):
/// holds exactly for t >= t_+(x).
fn large_t_predicate(
    shape: &NormalizedShape,
    x: f64,
    i0: usize,
    t: f64,
) -> Result<bool, CriticalError> {
    let cp = build_critical_poly(shape, x, t)?;
    let roots = solve_roots(&cp)?;
    let (glo, ghi) = (shape.sa()[i0 - 1] - x, shape.sa()[i0] - x);
    let n = roots
        .iter()
        .filter(|r| is_real(**r) && glo < r.re && r.re < ghi)
        .count();
    Ok(n >= 2)
}

const BISECT_ITERS: usize = 60;

/// Lower end of the liquid time window on the vertical line at x.
pub fn t_minus(shape: &NormalizedShape, x: f64) -> Result<f64, CriticalError> {
    gap_index(shape, x)?;
    // Invariant: predicate true at lo (t=0 by convention), false at hi (t=1:
    // the roots 0 and eta b_i - x all lie within the support gap).
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if small_t_predicate(shape, x, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Upper end of the liquid time window on the vertical line at x.
pub fn t_plus(shape: &NormalizedShape, x: f64) -> Result<f64, CriticalError> {
    let i0 = gap_index(shape, x)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        if large_t_predicate(shape, x, i0, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sign of the discriminant computed from the solved roots; 0 when two roots
/// nearly collide (the boundary case). Liquid points have sign -1.
pub fn discriminant_sign(shape: &NormalizedShape, x: f64, t: f64) -> Result<i8, CriticalError> {
    if t <= 0.0 {
        return Err(CriticalError::OutOfRange { x, t });
    }
    let cls = solve_critical(shape, x, t)?;
    Ok(disc_sign_of_roots(&cls.roots))
}

/// Convenience: Some(alpha) on liquid points, None on frozen ones.
pub fn alpha_at(shape: &NormalizedShape, x: f64, t: f64) -> Option<f64> {
    match solve_critical(shape, x, t) {
        Ok(PhaseClassification { phase: Phase::Liquid { alpha, .. }, .. }) => Some(alpha),
        _ => None,
    }
}

fn upper_root_or_err(shape: &NormalizedShape, x: f64, t: f64) -> Result<Complex64, CriticalError> {
    solve_critical(shape, x, t)?
        .upper_root()
        .ok_or(CriticalError::FrozenStencil { x, t })
}

/// Central-difference residual of the complex transport identity
/// `(U_c)_t + U_c ((U_c)_x + 1)/(1-t) = 0`; O(h^2) inside the liquid region.
pub fn burgers_residual(
    shape: &NormalizedShape,
    x: f64,
    t: f64,
    h: f64,
) -> Result<Complex64, CriticalError> {
    let u = upper_root_or_err(shape, x, t)?;
    let u_xp = upper_root_or_err(shape, x + h, t)?;
    let u_xm = upper_root_or_err(shape, x - h, t)?;
    let u_tp = upper_root_or_err(shape, x, t + h)?;
    let u_tm = upper_root_or_err(shape, x, t - h)?;
    let du_dx = (u_xp - u_xm) / (2.0 * h);
    let du_dt = (u_tp - u_tm) / (2.0 * h);
    Ok(du_dt + u * (du_dx + 1.0) / (1.0 - t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram;

    fn single_box() -> NormalizedShape {
        diagram::square().normalize()
    }

    /// Shape with merged coordinate sequence (-2, -1, 0, 2, 3), size 4.
    fn staircase31() -> NormalizedShape {
        diagram::InterlacingDiagram::new(vec![-2, 0, 3], vec![-1, 2])
            .unwrap()
            .normalize()
    }

    #[test]
    fn build_single_box() {
        let s = single_box();
        let cp = build_critical_poly(&s, 0.0, 0.5).unwrap();
        assert_eq!(cp.coeffs, vec![0.5, 0.0, 0.5]);
        // t=1 factorization: U*(x + U) at x=0.3.
        let cp = build_critical_poly(&s, 0.3, 1.0).unwrap();
        assert_eq!(cp.coeffs.len(), 3);
        assert!((cp.coeffs[1] - 0.3).abs() < 1e-15 && (cp.coeffs[2] - 1.0).abs() < 1e-15);
        assert_eq!(cp.coeffs[0], 0.0);
        // t=0 degree drop.
        let cp = build_critical_poly(&s, 0.3, 0.0).unwrap();
        assert_eq!(cp.degree(), 1);
        assert!(build_critical_poly(&s, 2.0, 0.5).is_err());
        assert!(build_critical_poly(&s, 0.0, -0.1).is_err());
    }

    #[test]
    fn single_box_liquid_point() {
        let s = single_box();
        let cls = solve_critical(&s, 0.0, 0.5).unwrap();
        match cls.phase {
            Phase::Liquid { u_c, alpha, beta } => {
                assert!((u_c - Complex64::new(0.0, 1.0)).norm() < 1e-12);
                assert!((alpha - 2.0).abs() < 1e-12);
                assert!(beta.abs() < 1e-12);
            }
            _ => panic!("expected liquid"),
        }
    }

    #[test]
    fn single_box_alpha_closed_form() {
        let s = single_box();
        for t in [0.1, 0.3, 0.5, 0.77] {
            let alpha = alpha_at(&s, 0.0, t).expect("liquid at x=0");
            assert!((alpha - 1.0 / (t * (1.0 - t)).sqrt()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn single_box_phase_diagram_matches_closed_form() {
        let s = single_box();
        for ix in 0..41 {
            let x = -0.98 + 1.96 * ix as f64 / 40.0;
            for it in 0..41 {
                let t = 0.012 + 0.976 * it as f64 / 40.0;
                let margin = x * x - 4.0 * t * (1.0 - t);
                if margin.abs() < 1e-6 {
                    continue;
                }
                let got = solve_critical(&s, x, t).unwrap().is_liquid();
                assert_eq!(got, margin < 0.0, "x={x} t={t}");
            }
        }
    }

    #[test]
    fn frozen_endpoints_in_time() {
        let s = diagram::heart().normalize();
        let x = 0.123;
        let c0 = solve_critical(&s, x, 0.0).unwrap();
        assert!(matches!(c0.phase, Phase::Frozen { regime: FrozenRegime::SmallT }));
        assert_eq!(c0.roots.len(), s.m()); // degree drop at t=0
        let c1 = solve_critical(&s, x, 1.0).unwrap();
        assert!(matches!(c1.phase, Phase::Frozen { regime: FrozenRegime::LargeT }));
        let mut expected: Vec<f64> = s.sb().iter().map(|&b| b - x).collect();
        expected.push(0.0);
        for e in expected {
            assert!(c1.roots.iter().any(|r| (r - Complex64::new(e, 0.0)).norm() < 1e-12));
        }
    }

    #[test]
    fn degenerate_columns() {
        let s = single_box();
        // x = eta a_1 = 1: degree-1 reduced equation, frozen.
        let cls = solve_critical(&s, 1.0, 0.5).unwrap();
        assert!(matches!(cls.phase, Phase::Frozen { regime: FrozenRegime::DegenerateEdge }));
        assert_eq!(cls.roots.len(), 2); // reduced root plus the cancelled 0

        let h = diagram::heart().normalize();
        for i in [0, h.m()] {
            for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let cls = classify_degenerate(&h, i, t).unwrap();
                assert!(!cls.is_liquid(), "outermost column i={i} t={t}");
            }
        }
        // Interior degenerate column of the heart is liquid for mid t.
        let cls = classify_degenerate(&h, 1, 0.5).unwrap();
        assert!(cls.is_liquid());
    }

    #[test]
    fn localization_windows() {
        // x0 = -0.9 in the first gap of the (3,1) staircase: the lemma
        // demands a root in (eta a_1 - x0, eta b_2 - x0] = (0.9, 1.9].
        let s = staircase31();
        assert!((s.eta() - 0.5).abs() < 1e-15);
        let x0 = -0.9;
        for t in [0.3, 0.6, 0.9] {
            let windows = localize_real_roots(&s, x0, t).unwrap();
            let w = windows
                .iter()
                .find(|w| !w.must_be_empty && (w.lo - 0.9).abs() < 1e-12)
                .expect("demanded window (0.9, 1.9]");
            assert!((w.hi - 1.9).abs() < 1e-12);
            assert!(w.count >= 1, "t={t}");
        }
        // Two extra roots drift outward for small t and into the gap of x0
        // for large t.
        let roots_small = solve_critical(&s, x0, 0.3).unwrap().roots;
        let n_out = roots_small
            .iter()
            .filter(|r| is_real(**r) && r.re < -0.1)
            .count();
        assert_eq!(n_out, 2);
        let roots_large = solve_critical(&s, x0, 0.9).unwrap().roots;
        let n_in = roots_large
            .iter()
            .filter(|r| is_real(**r) && r.re > 0.0 && r.re < 0.4)
            .count();
        assert_eq!(n_in, 2);
        // And t=0.6 is liquid there.
        assert!(solve_critical(&s, x0, 0.6).unwrap().is_liquid());
    }

    #[test]
    fn t_window_single_box() {
        let s = single_box();
        let x: f64 = 0.5;
        let want = (1.0 - (1.0 - x * x).sqrt()) / 2.0;
        let got = t_minus(&s, x).unwrap();
        assert!((got - want).abs() < 1e-8, "got {got}, want {want}");
        let got = t_plus(&s, x).unwrap();
        assert!((got - (1.0 - want)).abs() < 1e-8);
        assert!(t_minus(&s, 1e-9).unwrap() < 1e-6);
    }

    #[test]
    fn t_window_endpoints() {
        let h = diagram::heart().normalize();
        assert!(t_minus(&h, 1e-12).unwrap() < 1e-9);
        // x at a scaled maximum inside its gap: the upper window end is 1.
        for &b in h.sb() {
            assert!(t_plus(&h, b).unwrap() > 1.0 - 1e-9, "b={b}");
        }
    }

    #[test]
    fn liquid_window_bracketing() {
        let h = diagram::heart().normalize();
        for &x in &[-0.8, -0.3, 0.2, 0.7] {
            let tm = t_minus(&h, x).unwrap();
            let tp = t_plus(&h, x).unwrap();
            assert!(tm < tp, "x={x}");
            for it in 1..60 {
                let t = it as f64 / 60.0;
                if solve_critical(&h, x, t).unwrap().is_liquid() {
                    assert!(t > tm - 1e-6 && t < tp + 1e-6, "x={x} t={t} not in ({tm},{tp})");
                }
            }
        }
    }

    #[test]
    fn two_or_zero_non_real_roots_on_grids() {
        for base in [diagram::heart(), diagram::pipe()] {
            let s = base.normalize();
            let (lo, hi) = s.support();
            for ix in 0..60 {
                // Offset keeps x away from the scaled minima.
                let x = lo + (hi - lo) * (ix as f64 + 0.503) / 60.0;
                if degenerate_index(&s, x).is_some() {
                    continue;
                }
                for it in 0..40 {
                    let t = (it as f64 + 0.5) / 40.0;
                    let cls = solve_critical(&s, x, t).unwrap();
                    let n = cls.roots.iter().filter(|r| !is_real(**r)).count();
                    assert!(n == 0 || n == 2, "x={x} t={t} gave {n} non-real roots");
                    if n == 2 {
                        let pair: Vec<_> =
                            cls.roots.iter().filter(|r| !is_real(**r)).collect();
                        assert!((pair[0] - pair[1].conj()).norm() < 1e-6 * (1.0 + pair[0].norm()));
                    }
                }
            }
        }
    }

    #[test]
    fn residuals_on_grid() {
        let s = diagram::heart().normalize();
        let (lo, hi) = s.support();
        for ix in 0..25 {
            let x = lo + (hi - lo) * (ix as f64 + 0.517) / 25.0;
            for it in 0..25 {
                let t = (it as f64 + 0.5) / 25.0;
                let cp = build_critical_poly(&s, x, t).unwrap();
                let maxc = cp.coeffs.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
                for r in poly::roots(&cp.coeffs) {
                    let scale = maxc + poly::residual_scale(&cp.coeffs, r.norm());
                    assert!(cp.eval(r).norm() <= 1e-10 * scale, "x={x} t={t} r={r}");
                }
            }
        }
    }

    #[test]
    fn discriminant_cross_validation() {
        let s = diagram::heart().normalize();
        assert_eq!(discriminant_sign(&single_box(), 0.0, 0.5).unwrap(), -1);
        assert!(discriminant_sign(&single_box(), 0.3, 1.0).unwrap() >= 0);
        let (lo, hi) = s.support();
        for ix in 0..30 {
            let x = lo + (hi - lo) * (ix as f64 + 0.497) / 30.0;
            if degenerate_index(&s, x).is_some() {
                continue;
            }
            for it in 0..30 {
                let t = (it as f64 + 0.5) / 30.0;
                let sign = discriminant_sign(&s, x, t).unwrap();
                if sign == 0 {
                    continue;
                }
                let liquid = solve_critical(&s, x, t).unwrap().is_liquid();
                assert_eq!(liquid, sign < 0, "x={x} t={t}");
            }
        }
    }

    #[test]
    fn alpha_decays_toward_boundary() {
        let h = diagram::heart().normalize();
        // x = 0 is excluded: the boundary degenerates to the corner (0,0)
        // where alpha blows up instead of vanishing.
        for &x in &[-0.5, 0.4, 0.7] {
            // Scan the vertical line and find the liquid run with the largest
            // alpha; approach both ends of that run from its peak.
            let samples: Vec<(f64, Option<f64>)> = (1..400)
                .map(|k| {
                    let t = k as f64 / 400.0;
                    (t, alpha_at(&h, x, t))
                })
                .collect();
            let (peak_idx, peak_alpha) = samples
                .iter()
                .enumerate()
                .filter_map(|(i, (_, a))| a.map(|a| (i, a)))
                .max_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
                .expect("some liquid point on the line");
            let mut lo = peak_idx;
            while lo > 0 && samples[lo - 1].1.is_some() {
                lo -= 1;
            }
            let mut hi = peak_idx;
            while hi + 1 < samples.len() && samples[hi + 1].1.is_some() {
                hi += 1;
            }
            assert!(samples[lo].1.unwrap() < peak_alpha, "x={x}: no decay toward lower end");
            assert!(samples[hi].1.unwrap() < peak_alpha, "x={x}: no decay toward upper end");
        }
    }

    #[test]
    fn burgers_residual_is_second_order() {
        let s = single_box();
        let r = burgers_residual(&s, 0.0, 0.5, 1e-3).unwrap();
        assert!(r.norm() < 1e-4, "residual {r}");
        // Richardson order check at a generic liquid point.
        let (x, t) = (0.2, 0.45);
        assert!(solve_critical(&s, x, t).unwrap().is_liquid());
        let r1 = burgers_residual(&s, x, t, 2e-3).unwrap().norm();
        let r2 = burgers_residual(&s, x, t, 1e-3).unwrap().norm();
        let ratio = r1 / r2;
        assert!(ratio > 4.0 / 1.5 && ratio < 4.0 * 1.5, "ratio {ratio}");
        // Frozen stencil points are an error, not a silent answer.
        // (0.78, 0.2) is liquid but x+h crosses the boundary 2 sqrt(t(1-t)).
        assert!(solve_critical(&s, 0.78, 0.2).unwrap().is_liquid());
        assert!(matches!(
            burgers_residual(&s, 0.78, 0.2, 0.05),
            Err(CriticalError::FrozenStencil { .. })
        ));
    }

    #[test]
    fn heart_liquid_point_alpha_beta_ranges() {
        let h = diagram::heart().normalize();
        let cls = solve_critical(&h, 0.1, 0.5).unwrap();
        match cls.phase {
            Phase::Liquid { alpha, beta, u_c } => {
                assert!(alpha > 0.0);
                assert!((-1.0..1.0).contains(&beta));
                assert!(u_c.im > 0.0);
            }
            _ => panic!("expected liquid at the heart center"),
        }
    }
}
