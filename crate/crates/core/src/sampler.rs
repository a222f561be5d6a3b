//! Exact uniform sampling of standard and Poissonized Young tableaux, bead
//! configurations, and empirical height functions for Monte Carlo checks.

use crate::diagram::{InterlacingDiagram, NormalizedShape, Partition};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("tableau entries are not strictly increasing at row {i}, column {j}")]
    NotMonotone { i: usize, j: usize },
    #[error("tableau entries are not a bijection onto 1..=n")]
    NotBijection,
    #[error("interlacing violation between threads {thread} and {neighbor}: {count} beads in a gap")]
    InterlacingViolation { thread: i64, neighbor: i64, count: usize },
    #[error("window [{lo}, {hi}] leaves the configuration's thread range")]
    WindowOutsideStrip { lo: i64, hi: i64 },
    #[error("x={x} is outside the normalized support")]
    XOutsideSupport { x: f64 },
}

/// One independent generator per Monte Carlo replicate: same seed, distinct
/// stream. Identical (seed, stream) pairs reproduce the same sample exactly.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardTableau {
    shape: Partition,
    entries: Vec<Vec<u32>>,
}

impl StandardTableau {
    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn entry(&self, i: usize, j: usize) -> u32 {
        self.entries[i][j]
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        let n: u64 = self.shape.size();
        let mut seen = vec![false; n as usize + 1];
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v == 0 || v as u64 > n || seen[v as usize] {
                    return Err(SampleError::NotBijection);
                }
                seen[v as usize] = true;
                if j + 1 < row.len() && row[j + 1] <= v {
                    return Err(SampleError::NotMonotone { i, j });
                }
                if i + 1 < self.entries.len() && self.entries[i + 1].len() > j && self.entries[i + 1][j] <= v {
                    return Err(SampleError::NotMonotone { i, j });
                }
            }
        }
        Ok(())
    }
}

/// Exact uniform standard Young tableau via the hook-walk construction:
/// repeatedly pick a uniform cell of the remaining diagram, walk to a corner
/// by uniform jumps within the hook, place the largest unused entry there,
/// and shrink the diagram.
pub fn hook_walk_sample(p: &Partition, rng: &mut impl Rng) -> StandardTableau {
    let mut rows: Vec<u64> = p.rows().to_vec();
    let mut cols: Vec<u64> = p.conjugate();
    let n = p.size();
    let mut entries: Vec<Vec<u32>> = p.rows().iter().map(|&r| vec![0u32; r as usize]).collect();
    let mut remaining = n;
    for k in (1..=n).rev() {
        // Uniform cell of the current diagram.
        let mut u = rng.gen_range(0..remaining);
        let mut i = 0usize;
        while u >= rows[i] {
            u -= rows[i];
            i += 1;
        }
        let mut j = u as usize;
        // Hook walk to a corner.
        loop {
            let arm = rows[i] as usize - 1 - j;
            let leg = cols[j] as usize - 1 - i;
            if arm + leg == 0 {
                break;
            }
            let step = rng.gen_range(0..arm + leg);
            if step < arm {
                j += 1 + step;
            } else {
                i += 1 + (step - arm);
            }
        }
        entries[i][j] = k as u32;
        rows[i] -= 1;
        cols[j] -= 1;
        remaining -= 1;
    }
    StandardTableau { shape: p.clone(), entries }
}

#[derive(Debug, Clone)]
pub struct PoissonizedTableau {
    shape: Partition,
    values: Vec<Vec<f64>>,
}

impl PoissonizedTableau {
    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Direct construction from explicit values (row/column monotonicity
    /// checked).
    pub fn from_values(shape: Partition, values: Vec<Vec<f64>>) -> Result<Self, SampleError> {
        let t = PoissonizedTableau { shape, values };
        for (i, row) in t.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let right = row.get(j + 1);
                let below = t.values.get(i + 1).and_then(|r| r.get(j));
                if right.is_some_and(|&w| w <= v) || below.is_some_and(|&w| w <= v) {
                    return Err(SampleError::NotMonotone { i, j });
                }
            }
        }
        Ok(t)
    }
}

/// Replace entry k by the k-th order statistic of n iid uniforms on [0,1].
/// A uniform linear extension plus sorted uniforms is exactly a uniform
/// point of the order polytope of the shape.
pub fn poissonize(t: &StandardTableau, rng: &mut impl Rng) -> PoissonizedTableau {
    let n = t.shape.size() as usize;
    let mut order: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    order.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let values = t
        .entries
        .iter()
        .map(|row| row.iter().map(|&v| order[v as usize - 1]).collect())
        .collect();
    PoissonizedTableau { shape: t.shape.clone(), values }
}

/// Beads grouped by thread (cell content j - i), each thread sorted by
/// height (the tableau value).
#[derive(Debug, Clone, PartialEq)]
pub struct BeadConfiguration {
    min_thread: i64,
    threads: Vec<Vec<f64>>,
}

impl BeadConfiguration {
    pub fn new(min_thread: i64, threads: Vec<Vec<f64>>) -> Self {
        BeadConfiguration { min_thread, threads }
    }

    /// Inclusive thread index range (empty configurations return (0, -1)).
    pub fn thread_range(&self) -> (i64, i64) {
        (self.min_thread, self.min_thread + self.threads.len() as i64 - 1)
    }

    pub fn heights(&self, thread: i64) -> &[f64] {
        let idx = thread - self.min_thread;
        if idx < 0 || idx as usize >= self.threads.len() {
            return &[];
        }
        &self.threads[idx as usize]
    }

    pub fn total_beads(&self) -> usize {
        self.threads.iter().map(|t| t.len()).sum()
    }

    /// Number of beads on the thread with height at most t.
    pub fn count_up_to(&self, thread: i64, t: f64) -> usize {
        self.heights(thread).partition_point(|&h| h <= t)
    }

    /// Between consecutive beads of a thread, each neighboring thread within
    /// range must hold exactly one bead.
    pub fn validate_interlacing(&self) -> Result<(), SampleError> {
        let (lo, hi) = self.thread_range();
        for x in lo..=hi {
            let hs = self.heights(x);
            for w in hs.windows(2) {
                for y in [x - 1, x + 1] {
                    if y < lo || y > hi {
                        continue;
                    }
                    let count = self
                        .heights(y)
                        .iter()
                        .filter(|&&h| w[0] < h && h < w[1])
                        .count();
                    if count != 1 {
                        return Err(SampleError::InterlacingViolation {
                            thread: x,
                            neighbor: y,
                            count,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// One bead per cell, at (content, value).
pub fn beads_from_tableau(t: &PoissonizedTableau) -> Result<BeadConfiguration, SampleError> {
    let ell = t.shape.row_count() as i64;
    let width = t.shape.rows()[0] as i64;
    let min_thread = 1 - ell;
    let n_threads = (width - 1 - min_thread + 1) as usize;
    let mut threads = vec![Vec::new(); n_threads];
    for (i, row) in t.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let content = j as i64 - i as i64;
            threads[(content - min_thread) as usize].push(v);
        }
    }
    for th in &mut threads {
        th.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    let beads = BeadConfiguration { min_thread, threads };
    beads.validate_interlacing()?;
    Ok(beads)
}

/// H(x, t): number of beads on thread x at height <= t.
pub fn empirical_height(b: &BeadConfiguration, x: i64, t: f64) -> usize {
    b.count_up_to(x, t)
}

/// Per-thread sorted heights with the counting query; thin façade over a
/// validated bead configuration.
#[derive(Debug, Clone)]
pub struct HeightGrid {
    beads: BeadConfiguration,
}

impl HeightGrid {
    pub fn from_beads(beads: BeadConfiguration) -> Self {
        HeightGrid { beads }
    }

    pub fn count(&self, thread: i64, t: f64) -> usize {
        self.beads.count_up_to(thread, t)
    }

    pub fn beads(&self) -> &BeadConfiguration {
        &self.beads
    }
}

/// Evaluate (x, t) -> H(floor(x sqrt(N)), t) / sqrt(N) over a grid, for a
/// sample of the shape dilated by n (N = n^2 |shape0|). Grid is indexed
/// [x][t].
pub fn rescaled_height_profile(
    shape0: &InterlacingDiagram,
    n: u64,
    beads: &BeadConfiguration,
    x_grid: &[f64],
    t_grid: &[f64],
) -> Result<Vec<Vec<f64>>, SampleError> {
    let normalized = NormalizedShape::new(shape0.clone());
    let (lo, hi) = normalized.support();
    let sqrt_n_cells = (shape0.size() as f64).sqrt() * n as f64;
    let mut out = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        if x < lo - 1e-12 || x > hi + 1e-12 {
            return Err(SampleError::XOutsideSupport { x });
        }
        let thread = (x * sqrt_n_cells).floor() as i64;
        let row = t_grid
            .iter()
            .map(|&t| empirical_height(beads, thread, t) as f64 / sqrt_n_cells)
            .collect();
        out.push(row);
    }
    Ok(out)
}

/// Local window around (x0 sqrt(N), t0): threads recentred to 0 and heights
/// rescaled by sqrt(N), keeping |local t| <= half_height.
pub fn window_extract(
    b: &BeadConfiguration,
    x0_threads: i64,
    t0: f64,
    n_cells: u64,
    half_width: i64,
    half_height: f64,
) -> Result<BeadConfiguration, SampleError> {
    let (lo, hi) = b.thread_range();
    if x0_threads - half_width < lo || x0_threads + half_width > hi {
        return Err(SampleError::WindowOutsideStrip {
            lo: x0_threads - half_width,
            hi: x0_threads + half_width,
        });
    }
    let sqrt_n = (n_cells as f64).sqrt();
    let mut threads = Vec::with_capacity(2 * half_width as usize + 1);
    for dx in -half_width..=half_width {
        let local: Vec<f64> = b
            .heights(x0_threads + dx)
            .iter()
            .map(|&h| (h - t0) * sqrt_n)
            .filter(|&u| u.abs() <= half_height)
            .collect();
        threads.push(local);
    }
    Ok(BeadConfiguration { min_thread: -half_width, threads })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram;

    fn partition(rows: &[u64]) -> Partition {
        Partition::new(rows.to_vec()).unwrap()
    }

    #[test]
    fn single_row_is_deterministic() {
        let p = partition(&[4]);
        let mut rng = replicate_rng(1, 0);
        let t = hook_walk_sample(&p, &mut rng);
        assert_eq!(t.entries, vec![vec![1, 2, 3, 4]]);
        t.validate().unwrap();
    }

    #[test]
    fn two_tableaux_shapes_are_uniform() {
        // (2,1) and (2,2) each have exactly two standard tableaux; the
        // sampled split must stay within 3 sigma of one half.
        for (rows, reps) in [(vec![2u64, 1], 100_000u32), (vec![2, 2], 100_000)] {
            let p = partition(&rows);
            let mut rng = replicate_rng(42, 0);
            let mut first_kind = 0u32;
            for _ in 0..reps {
                let t = hook_walk_sample(&p, &mut rng);
                if t.entry(0, 1) == 2 {
                    first_kind += 1;
                }
            }
            let mean = reps as f64 / 2.0;
            let sigma = (reps as f64 * 0.25).sqrt();
            assert!(
                (first_kind as f64 - mean).abs() < 3.0 * sigma,
                "rows {rows:?}: {first_kind}/{reps}"
            );
        }
    }

    #[test]
    fn poissonize_preserves_order_and_shape() {
        let p = partition(&[3, 2, 2, 1]);
        let mut rng = replicate_rng(7, 0);
        for _ in 0..200 {
            let t = hook_walk_sample(&p, &mut rng);
            t.validate().unwrap();
            let pt = poissonize(&t, &mut rng);
            for i in 0..4 {
                for j in 0..p.rows()[i] as usize {
                    for i2 in 0..4 {
                        for j2 in 0..p.rows()[i2] as usize {
                            let ord_t = t.entry(i, j) < t.entry(i2, j2);
                            let ord_p = pt.value(i, j) < pt.value(i2, j2);
                            if (i, j) != (i2, j2) {
                                assert_eq!(ord_t, ord_p);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn minimum_value_is_beta_distributed() {
        // The smallest entry is the first of n order statistics, i.e.
        // Beta(1, n) with CDF 1 - (1-x)^n. Kolmogorov-Smirnov at alpha=0.001.
        let p = partition(&[3, 2]);
        let n = 5.0;
        let m = 4000usize;
        let mut rng = replicate_rng(11, 0);
        let mut mins: Vec<f64> = (0..m)
            .map(|_| {
                let t = hook_walk_sample(&p, &mut rng);
                let pt = poissonize(&t, &mut rng);
                pt.value(0, 0)
            })
            .collect();
        mins.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        for (k, &v) in mins.iter().enumerate() {
            let cdf = 1.0 - (1.0 - v).powf(n);
            d = d.max((cdf - k as f64 / m as f64).abs());
            d = d.max((cdf - (k + 1) as f64 / m as f64).abs());
        }
        assert!(d * (m as f64).sqrt() < 1.95, "KS statistic {d}");
    }

    #[test]
    fn single_cell_value_is_uniform() {
        let p = partition(&[1]);
        let m = 4000usize;
        let mut rng = replicate_rng(3, 0);
        let mut vals: Vec<f64> = (0..m)
            .map(|_| poissonize(&hook_walk_sample(&p, &mut rng), &mut rng).value(0, 0))
            .collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        for (k, &v) in vals.iter().enumerate() {
            d = d.max((v - k as f64 / m as f64).abs());
            d = d.max((v - (k + 1) as f64 / m as f64).abs());
        }
        assert!(d * (m as f64).sqrt() < 1.95, "KS statistic {d}");
    }

    #[test]
    fn bead_extraction_hand_example() {
        // Shape (5,3,1,1) with explicit values; thread occupancy and two
        // height counts are deterministic.
        let shape = partition(&[5, 3, 1, 1]);
        let values = vec![
            vec![0.05, 0.2, 0.35, 0.6, 0.8],
            vec![0.15, 0.3, 0.5],
            vec![0.45],
            vec![0.75],
        ];
        let pt = PoissonizedTableau::from_values(shape, values).unwrap();
        let beads = beads_from_tableau(&pt).unwrap();
        assert_eq!(beads.thread_range(), (-3, 4));
        let occupancy: Vec<usize> = (-3..=4).map(|x| beads.heights(x).len()).collect();
        assert_eq!(occupancy, vec![1, 1, 1, 2, 2, 1, 1, 1]);
        assert_eq!(empirical_height(&beads, 0, 0.6), 2);
        assert_eq!(empirical_height(&beads, 1, 0.6), 2);
        assert_eq!(empirical_height(&beads, -1, 0.6), 1);
        assert_eq!(empirical_height(&beads, 4, 0.6), 0);
        assert_eq!(empirical_height(&beads, 0, 0.0), 0);
        // t = 1 recovers the per-thread cell count.
        let d = diagram::InterlacingDiagram::from_partition(pt.shape());
        for x in -3..=4i64 {
            let want = (d.profile(x as f64) - (x as f64).abs()) / 2.0;
            assert_eq!(empirical_height(&beads, x, 1.0) as f64, want);
        }
    }

    #[test]
    fn monotone_and_interlacing_across_shapes() {
        let shapes: Vec<Vec<u64>> = vec![
            vec![1],
            vec![2, 1],
            vec![2, 2],
            vec![3, 1],
            vec![3, 2, 1],
            vec![4, 2, 1],
            vec![5, 3, 1, 1],
            vec![2, 2, 2],
            vec![6, 4, 2],
            vec![3, 3, 3],
        ];
        for (si, rows) in shapes.iter().enumerate() {
            let p = partition(rows);
            let mut rng = replicate_rng(1000 + si as u64, 0);
            for _ in 0..1000 {
                let t = hook_walk_sample(&p, &mut rng);
                t.validate().unwrap();
                let pt = poissonize(&t, &mut rng);
                let beads = beads_from_tableau(&pt).unwrap();
                beads.validate_interlacing().unwrap();
            }
        }
    }

    #[test]
    fn height_equivalence_per_cell() {
        // T(x,y) < t iff H(x,t) > (y - |x|)/2 at off-atom times, where a cell
        // in row i, column j (0-based) has x = j-i, y = i+j+1.
        let p = partition(&[4, 3, 1]);
        let mut rng = replicate_rng(5, 0);
        for _ in 0..300 {
            let pt = poissonize(&hook_walk_sample(&p, &mut rng), &mut rng);
            let beads = beads_from_tableau(&pt).unwrap();
            for i in 0..3usize {
                for j in 0..p.rows()[i] as usize {
                    let x = j as i64 - i as i64;
                    let y = (i + j + 1) as f64;
                    for k in 0..10 {
                        let t = 0.0123 + k as f64 / 10.0;
                        let lhs = pt.value(i, j) < t;
                        let rhs = empirical_height(&beads, x, t) as f64 > (y - (x as f64).abs()) / 2.0;
                        assert_eq!(lhs, rhs, "cell ({i},{j}), t={t}");
                    }
                }
            }
        }
    }

    #[test]
    fn reproducible_with_stream_separation() {
        let p = partition(&[4, 4, 2]);
        let a = hook_walk_sample(&p, &mut replicate_rng(99, 3));
        let b = hook_walk_sample(&p, &mut replicate_rng(99, 3));
        assert_eq!(a, b);
        let c = hook_walk_sample(&p, &mut replicate_rng(99, 4));
        assert_ne!(a, c);
    }

    #[test]
    fn rescaled_profile_boundary_row() {
        let heart = diagram::heart();
        let n = 6u64;
        let dilated = heart.dilate(n).to_partition();
        let mut rng = replicate_rng(21, 0);
        let pt = poissonize(&hook_walk_sample(&dilated, &mut rng), &mut rng);
        let beads = beads_from_tableau(&pt).unwrap();
        let normalized = heart.normalize();
        let sqrt_n_cells = (heart.size() as f64).sqrt() * n as f64;
        let x_grid = [-0.7, -0.2, 0.0, 0.4, 0.9];
        let grid = rescaled_height_profile(&heart, n, &beads, &x_grid, &[1.0]).unwrap();
        for (k, &x) in x_grid.iter().enumerate() {
            let snapped = (x * sqrt_n_cells).floor() / sqrt_n_cells;
            let want = (normalized.profile_omega(snapped) - snapped.abs()) / 2.0;
            assert!((grid[k][0] - want).abs() < 1e-12, "x={x}");
        }
        assert!(rescaled_height_profile(&heart, n, &beads, &[5.0], &[0.5]).is_err());
    }

    #[test]
    fn window_recentring() {
        let beads = BeadConfiguration::new(-1, vec![vec![0.2], vec![0.5 + 0.3 / 10.0], vec![0.9]]);
        // N = 100: a bead at t0 + eps/sqrt(N) with eps = 0.3 maps to (0, 0.3).
        let w = window_extract(&beads, 0, 0.5, 100, 1, 2.0).unwrap();
        assert_eq!(w.thread_range(), (-1, 1));
        let local = w.heights(0);
        assert_eq!(local.len(), 1);
        assert!((local[0] - 0.3).abs() < 1e-12);
        // Heights outside the half-height are cut.
        assert!(w.heights(-1).is_empty()); // |0.2-0.5|*10 = 3 > 2
        assert!(w.heights(1).is_empty());
        assert!(window_extract(&beads, 0, 0.5, 100, 5, 2.0).is_err());
    }
}
