//! Partitions, interlacing coordinates, profiles, and the normalized domain.
//!
//! A Young diagram is represented either by its non-increasing row lengths or
//! by its interlacing coordinates `a_0 < b_1 < a_1 < ... < b_m < a_m`: the
//! integer locations of the local minima (`a_i`) and maxima (`b_i`) of the
//! boundary profile drawn in the Russian convention. The two encodings are in
//! bijection; the interlacing form is canonical here because every analytic
//! formula downstream is stated in terms of the `a_i` and `b_i`.

use num::rational::Ratio;
use num::Zero;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error("partition rows must be positive and non-increasing (row {index} = {value})")]
    BadRows { index: usize, value: u64 },
    #[error("partition must have at least one row")]
    EmptyPartition,
    #[error("need exactly m+1 minima and m maxima with m >= 1 (got {na} and {nb})")]
    BadLengths { na: usize, nb: usize },
    #[error("coordinates are not strictly interlacing at position {position} of a_0<b_1<a_1<...")]
    NotInterlacing { position: usize },
    #[error("sum of minima ({sum_a}) does not equal sum of maxima ({sum_b})")]
    SumMismatch { sum_a: i64, sum_b: i64 },
    #[error("coordinate overflow while clearing denominators")]
    Overflow,
    #[error("shape JSON is not valid: {0}")]
    BadJson(String),
}

/// A partition: non-increasing positive row lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    rows: Vec<u64>,
}

impl Partition {
    pub fn new(rows: Vec<u64>) -> Result<Self, DiagramError> {
        if rows.is_empty() {
            return Err(DiagramError::EmptyPartition);
        }
        for i in 0..rows.len() {
            let bad = rows[i] == 0 || (i + 1 < rows.len() && rows[i] < rows[i + 1]);
            if bad {
                return Err(DiagramError::BadRows { index: i, value: rows[i] });
            }
        }
        Ok(Partition { rows })
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Number of rows, usually written `l(lambda)`.
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn size(&self) -> u64 {
        self.rows.iter().sum()
    }

    /// Column lengths (the conjugate partition).
    pub fn conjugate(&self) -> Vec<u64> {
        let cols = self.rows[0] as usize;
        let mut out = vec![0u64; cols];
        for &r in &self.rows {
            for c in out.iter_mut().take(r as usize) {
                *c += 1;
            }
        }
        out
    }
}

/// Interlacing coordinates `a_0 < b_1 < a_1 < ... < b_m < a_m` with
/// `sum(a) = sum(b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterlacingDiagram {
    a: Vec<i64>,
    b: Vec<i64>,
}

impl InterlacingDiagram {
    pub fn new(a: Vec<i64>, b: Vec<i64>) -> Result<Self, DiagramError> {
        if b.is_empty() || a.len() != b.len() + 1 {
            return Err(DiagramError::BadLengths { na: a.len(), nb: b.len() });
        }
        // Merge into a_0, b_1, a_1, ... and check strict increase.
        let mut prev = a[0];
        for i in 0..b.len() {
            if b[i] <= prev {
                return Err(DiagramError::NotInterlacing { position: 2 * i + 1 });
            }
            prev = b[i];
            if a[i + 1] <= prev {
                return Err(DiagramError::NotInterlacing { position: 2 * i + 2 });
            }
            prev = a[i + 1];
        }
        let sum_a: i64 = a.iter().sum();
        let sum_b: i64 = b.iter().sum();
        if sum_a != sum_b {
            return Err(DiagramError::SumMismatch { sum_a, sum_b });
        }
        Ok(InterlacingDiagram { a, b })
    }

    /// Scan addable/removable corner contents of a partition.
    pub fn from_partition(p: &Partition) -> Self {
        let rows = p.rows();
        let ell = rows.len() as i64;
        // Distinct row lengths (top to bottom) with cumulative multiplicities.
        let mut b = Vec::new(); // removable corner contents
        let mut a = vec![rows[0] as i64]; // addable above row 1
        let mut seen = 0i64;
        let mut i = 0usize;
        while i < rows.len() {
            let v = rows[i];
            let mut j = i;
            while j < rows.len() && rows[j] == v {
                j += 1;
            }
            seen += (j - i) as i64;
            b.push(v as i64 - seen); // removable at the bottom of this block
            if j < rows.len() {
                a.push(rows[j] as i64 - seen); // addable between blocks
            }
            i = j;
        }
        a.push(-ell);
        a.sort_unstable();
        b.sort_unstable();
        InterlacingDiagram::new(a, b).expect("corner scan yields valid interlacing coordinates")
    }

    /// Inverse corner scan. Total because the constructor already enforces
    /// the interlacing and sum invariants, which characterize partitions.
    pub fn to_partition(&self) -> Partition {
        let m = self.m();
        let a_desc: Vec<i64> = self.a.iter().rev().copied().collect();
        let b_desc: Vec<i64> = self.b.iter().rev().copied().collect();
        let mut rows = Vec::new();
        let mut v = a_desc[0]; // lambda_1
        let mut cum = 0i64;
        for j in 0..m {
            let new_cum = v - b_desc[j];
            assert!(new_cum > cum && v >= 1, "invalid interlacing state");
            for _ in cum..new_cum {
                rows.push(v as u64);
            }
            cum = new_cum;
            if j + 1 < m {
                v = a_desc[j + 1] + cum;
            }
        }
        assert_eq!(cum, -self.a[0], "row count must match -a_0");
        Partition::new(rows).expect("reconstructed rows form a partition")
    }

    /// Clear denominators of rational coordinates by their LCM; returns the
    /// diagram together with the multiplier that was applied.
    pub fn from_rational_coords(
        a: &[Ratio<i64>],
        b: &[Ratio<i64>],
    ) -> Result<(Self, i64), DiagramError> {
        let mut lcm = 1i64;
        for r in a.iter().chain(b.iter()) {
            lcm = num::integer::lcm(lcm, *r.denom());
        }
        let scale = |r: &Ratio<i64>| -> Result<i64, DiagramError> {
            let s = r * Ratio::from_integer(lcm);
            if !s.is_integer() {
                return Err(DiagramError::Overflow);
            }
            Ok(s.to_integer())
        };
        let ai: Vec<i64> = a.iter().map(&scale).collect::<Result<_, _>>()?;
        let bi: Vec<i64> = b.iter().map(&scale).collect::<Result<_, _>>()?;
        Ok((InterlacingDiagram::new(ai, bi)?, lcm))
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &[i64] {
        &self.a
    }

    pub fn b(&self) -> &[i64] {
        &self.b
    }

    /// `|lambda| = (sum a_i^2 - sum b_i^2)/2`, avoiding materialization.
    pub fn size(&self) -> u64 {
        let sq = |v: &[i64]| v.iter().map(|&x| (x as i128) * (x as i128)).sum::<i128>();
        let s = (sq(&self.a) - sq(&self.b)) / 2;
        s as u64
    }

    pub fn dilate(&self, n: u64) -> InterlacingDiagram {
        let n = n as i64;
        InterlacingDiagram {
            a: self.a.iter().map(|&x| x * n).collect(),
            b: self.b.iter().map(|&x| x * n).collect(),
        }
    }

    /// Profile `omega_lambda(x)` in unnormalized (integer) coordinates:
    /// 1-Lipschitz, equals `|x|` outside `[a_0, a_m]`, slope +1 after each
    /// minimum and -1 after each maximum.
    pub fn profile(&self, x: f64) -> f64 {
        let m = self.m();
        if x <= self.a[0] as f64 || x >= self.a[m] as f64 {
            return x.abs();
        }
        let mut y = -(self.a[0] as f64);
        let mut prev = self.a[0] as f64;
        for i in 0..m {
            let top = self.b[i] as f64;
            if x <= top {
                return y + (x - prev);
            }
            y += top - prev;
            prev = top;
            let bottom = self.a[i + 1] as f64;
            if x <= bottom {
                return y - (x - prev);
            }
            y -= bottom - prev;
            prev = bottom;
        }
        x.abs()
    }

    pub fn normalize(&self) -> NormalizedShape {
        NormalizedShape::new(self.clone())
    }
}

/// A base diagram scaled by `eta = 1/sqrt(size)` so that the profile encloses
/// area 2 above `|x|`.
#[derive(Debug, Clone)]
pub struct NormalizedShape {
    base: InterlacingDiagram,
    eta: f64,
    sa: Vec<f64>,
    sb: Vec<f64>,
}

impl NormalizedShape {
    pub fn new(base: InterlacingDiagram) -> Self {
        let eta = 1.0 / (base.size() as f64).sqrt();
        let sa = base.a().iter().map(|&v| v as f64 * eta).collect();
        let sb = base.b().iter().map(|&v| v as f64 * eta).collect();
        NormalizedShape { base, eta, sa, sb }
    }

    pub fn base(&self) -> &InterlacingDiagram {
        &self.base
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn m(&self) -> usize {
        self.base.m()
    }

    /// Scaled minima `eta * a_i`.
    pub fn sa(&self) -> &[f64] {
        &self.sa
    }

    /// Scaled maxima `eta * b_i`.
    pub fn sb(&self) -> &[f64] {
        &self.sb
    }

    /// The support interval `[eta a_0, eta a_m]`.
    pub fn support(&self) -> (f64, f64) {
        (self.sa[0], self.sa[self.base.m()])
    }

    pub fn profile_omega(&self, x: f64) -> f64 {
        self.eta * self.base.profile(x / self.eta)
    }

    /// Strict membership in the domain `|x| < y < omega(x)`.
    pub fn in_domain(&self, x: f64, y: f64) -> bool {
        x.abs() < y && y < self.profile_omega(x)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ShapeSpec {
    Rows { rows: Vec<u64> },
    Coords { a: Vec<i64>, b: Vec<i64> },
}

/// Load a shape from JSON, either `{"rows":[...]}` or `{"a":[...],"b":[...]}`.
pub fn shape_from_json(text: &str) -> Result<InterlacingDiagram, DiagramError> {
    let spec: ShapeSpec =
        serde_json::from_str(text).map_err(|e| DiagramError::BadJson(e.to_string()))?;
    match spec {
        ShapeSpec::Rows { rows } => Ok(InterlacingDiagram::from_partition(&Partition::new(rows)?)),
        ShapeSpec::Coords { a, b } => InterlacingDiagram::new(a, b),
    }
}

/// Heart-shaped example: a partition of 13.
pub fn heart() -> InterlacingDiagram {
    InterlacingDiagram::new(vec![-5, -1, 5], vec![-4, 3]).unwrap()
}

/// Pipe-shaped example: a partition of 9900 with a narrow neck.
pub fn pipe() -> InterlacingDiagram {
    InterlacingDiagram::new(vec![-200, -90, 103], vec![-197, 10]).unwrap()
}

/// The single box.
pub fn square() -> InterlacingDiagram {
    InterlacingDiagram::new(vec![-1, 1], vec![0]).unwrap()
}

/// A 1 x r rectangle in normalized coordinates (a_0 = -1, a_1 = r); rational
/// r is cleared to integers. Returns the diagram and the clearing multiplier.
pub fn rectangle(r: Ratio<i64>) -> Result<(InterlacingDiagram, i64), DiagramError> {
    if r <= Ratio::zero() {
        return Err(DiagramError::BadJson("rectangle aspect must be positive".into()));
    }
    let one = Ratio::from_integer(1);
    InterlacingDiagram::from_rational_coords(&[-one, r], &[r - one])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    /// Independent corner scan straight from the definition: a cell can be
    /// added at (i, lambda_i + 1) when the previous row is longer, removed at
    /// (i, lambda_i) when the next row is shorter.
    fn corners_brute(rows: &[u64]) -> (Vec<i64>, Vec<i64>) {
        let ell = rows.len();
        let mut addable = Vec::new();
        let mut removable = Vec::new();
        for i in 0..ell {
            let len = rows[i] as i64;
            let row = i as i64 + 1;
            if i == 0 || rows[i - 1] > rows[i] {
                addable.push(len + 1 - row);
            }
            if i + 1 == ell || rows[i + 1] < rows[i] {
                removable.push(len - row);
            }
        }
        addable.push(-(ell as i64));
        addable.sort_unstable();
        removable.sort_unstable();
        (addable, removable)
    }

    #[test]
    fn corner_scan_examples() {
        let single = Partition::new(vec![1]).unwrap();
        let d = InterlacingDiagram::from_partition(&single);
        assert_eq!(d.a(), &[-1, 1]);
        assert_eq!(d.b(), &[0]);

        let p21 = Partition::new(vec![2, 1]).unwrap();
        let d = InterlacingDiagram::from_partition(&p21);
        assert_eq!(d.a(), &[-2, 0, 2]);
        assert_eq!(d.b(), &[-1, 1]);

        // Staircase-ish shape with three corner levels; expectation computed
        // with the brute-force corner enumeration.
        let p = Partition::new(vec![6, 6, 6, 4, 4, 4, 3, 3]).unwrap();
        let (ea, eb) = corners_brute(p.rows());
        assert_eq!(ea, vec![-8, -3, 1, 6]);
        assert_eq!(eb, vec![-5, -2, 3]);
        let d = InterlacingDiagram::from_partition(&p);
        assert_eq!(d.a(), ea.as_slice());
        assert_eq!(d.b(), eb.as_slice());
        assert_eq!(d.a().iter().sum::<i64>(), d.b().iter().sum::<i64>());
    }

    #[test]
    fn partition_recovery() {
        let heart = heart();
        let p = heart.to_partition();
        assert_eq!(p.size(), 13);
        assert_eq!(p.rows(), &[5, 5, 1, 1, 1]);

        let single = InterlacingDiagram::new(vec![-1, 1], vec![0]).unwrap();
        assert_eq!(single.to_partition().rows(), &[1]);

        let d = InterlacingDiagram::new(vec![-2, 0, 2], vec![-1, 1]).unwrap();
        assert_eq!(d.to_partition().rows(), &[2, 1]);

        let pipe = pipe();
        let p = pipe.to_partition();
        assert_eq!(p.size(), 9900);
        assert_eq!(p.row_count(), 200);
        assert_eq!(p.rows()[0], 103);
        assert_eq!(p.rows()[92], 103);
        assert_eq!(p.rows()[93], 3);
    }

    #[test]
    fn size_closed_form() {
        assert_eq!(heart().size(), 13);
        assert_eq!(pipe().size(), 9900);
        assert_eq!(square().size(), 1);
    }

    #[test]
    fn dilation() {
        assert_eq!(heart().dilate(1), heart());
        let d = square().dilate(3);
        assert_eq!(d.a(), &[-3, 3]);
        assert_eq!(d.b(), &[0]);
        assert_eq!(d.size(), 9);
        assert_eq!(heart().dilate(100).size(), 130_000);
        assert_eq!(heart().dilate(4).size(), 16 * 13);
    }

    fn random_partition(rng: &mut impl Rng, max_rows: usize, max_len: u64) -> Partition {
        let ell = rng.gen_range(1..=max_rows);
        let mut rows: Vec<u64> = (0..ell).map(|_| rng.gen_range(1..=max_len)).collect();
        rows.sort_unstable_by(|x, y| y.cmp(x));
        Partition::new(rows).unwrap()
    }

    #[test]
    fn round_trip_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let p = random_partition(&mut rng, 14, 15);
            if p.size() > 200 {
                continue;
            }
            let d = InterlacingDiagram::from_partition(&p);
            let (ea, eb) = corners_brute(p.rows());
            assert_eq!(d.a(), ea.as_slice());
            assert_eq!(d.b(), eb.as_slice());
            assert_eq!(d.to_partition(), p);
            assert_eq!(d.size(), p.size());
        }
    }

    #[test]
    fn profile_values() {
        let box1 = square().normalize();
        assert_eq!(box1.profile_omega(0.0), 2.0);
        assert!((box1.profile_omega(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(heart().profile(0.0), 4.0);
        let h = heart().normalize();
        let (lo, _) = h.support();
        assert!((h.profile_omega(lo) - lo.abs()).abs() < 1e-15);
    }

    #[test]
    fn profile_area_is_two() {
        // omega - |x| is piecewise linear with integer breakpoints, so the
        // unit-spaced trapezoid rule is exact.
        for d in [heart(), pipe(), square(), InterlacingDiagram::from_partition(&Partition::new(vec![6, 6, 6, 4, 4, 4, 3, 3]).unwrap())] {
            let s = d.normalize();
            let (a0, am) = (d.a()[0], d.a()[d.m()]);
            let mut area = 0.0;
            let mut prev = 0.0;
            for k in a0..=am {
                let v = d.profile(k as f64) - (k as f64).abs();
                if k > a0 {
                    area += 0.5 * (v + prev);
                }
                prev = v;
            }
            assert!((area - 2.0 * d.size() as f64).abs() < 1e-9);
            assert!((area * s.eta() * s.eta() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn in_domain_examples() {
        let box1 = square().normalize();
        assert!(box1.in_domain(0.0, 1.0));
        assert!(!box1.in_domain(0.0, 2.0));
        let h = heart().normalize();
        let (lo, _) = h.support();
        assert!(!h.in_domain(lo, 1.0));
    }

    #[test]
    fn json_loader() {
        let d = shape_from_json(r#"{"rows":[2,1]}"#).unwrap();
        assert_eq!(d.a(), &[-2, 0, 2]);
        let d = shape_from_json(r#"{"a":[-5,-1,5],"b":[-4,3]}"#).unwrap();
        assert_eq!(d.size(), 13);
        assert!(matches!(
            shape_from_json(r#"{"a":[-5,-1,5],"b":[-4,4]}"#),
            Err(DiagramError::SumMismatch { .. })
        ));
        assert!(matches!(
            shape_from_json(r#"{"rows":[1,2]}"#),
            Err(DiagramError::BadRows { .. })
        ));
        assert!(matches!(shape_from_json("nonsense"), Err(DiagramError::BadJson(_))));
    }

    #[test]
    fn rational_clearing() {
        let r = Ratio::new(3, 2);
        let (d, mult) = rectangle(r).unwrap();
        assert_eq!(mult, 2);
        assert_eq!(d.a(), &[-2, 3]);
        assert_eq!(d.b(), &[1]);
        assert_eq!(d.size(), 6);
        assert_eq!(d.to_partition().rows(), &[3, 3]);
    }

    proptest! {
        #[test]
        fn interlacing_rejects_violations(seed in 0u64..500) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = random_partition(&mut rng, 10, 12);
            let d = InterlacingDiagram::from_partition(&p);
            let mut a = d.a().to_vec();
            let mut b = d.b().to_vec();
            // Random single-coordinate perturbation; re-validate.
            let which = rng.gen_range(0..a.len() + b.len());
            let bump = *[-3i64, -1, 1, 3].iter().nth(rng.gen_range(0..4)).unwrap();
            if which < a.len() { a[which] += bump; } else { b[which - a.len()] += bump; }
            let res = InterlacingDiagram::new(a.clone(), b.clone());
            // Either rejected, or the perturbation happened to produce another
            // valid diagram -- in which case the sums must still agree.
            if let Ok(ok) = res {
                prop_assert_eq!(ok.a().iter().sum::<i64>(), ok.b().iter().sum::<i64>());
            }
        }
    }
}
