//! Deterministic CSV and SVG emission.
//!
//! Every CSV starts with one `#` provenance comment (tool version, shape,
//! seed and any run parameters) followed by a header row. All floats are
//! rendered with a fixed scientific format so that re-running a command with
//! the same configuration reproduces the files byte for byte.

use std::io::{self, Write};

/// Tool tag stamped into every provenance line.
pub const TOOL_TAG: &str = concat!("tableau-limits/", env!("CARGO_PKG_VERSION"));

/// Fixed-width scientific rendering used for every floating-point cell.
pub fn fmt_sci(v: f64) -> String {
    format!("{v:.12e}")
}

/// Run metadata recorded as a single comment line at the top of each file.
#[derive(Debug, Clone)]
pub struct Provenance {
    shape: String,
    params: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(shape: impl Into<String>) -> Self {
        Provenance { shape: shape.into(), params: Vec::new() }
    }

    /// Append one `key=value` pair (seed, grid sizes, ...). Order of calls
    /// is the order in the emitted line.
    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn comment_line(&self) -> String {
        let mut line = format!("# tool={TOOL_TAG} shape={}", self.shape);
        for (k, v) in &self.params {
            line.push_str(&format!(" {k}={v}"));
        }
        line
    }
}

/// Comment line, header row, then one line per record.
pub fn write_csv<W: Write>(
    w: &mut W,
    prov: &Provenance,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> io::Result<()> {
    writeln!(w, "{}", prov.comment_line())?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Height grid rows (x, t, H).
pub fn write_height_grid<W: Write>(
    w: &mut W,
    prov: &Provenance,
    rows: &[(f64, f64, f64)],
) -> io::Result<()> {
    write_csv(
        w,
        prov,
        &["x", "t", "H"],
        rows.iter().map(|&(x, t, h)| vec![fmt_sci(x), fmt_sci(t), fmt_sci(h)]),
    )
}

/// Surface rows (x, y, T-, T+): both envelope times of the inverted height.
pub fn write_surface_grid<W: Write>(
    w: &mut W,
    prov: &Provenance,
    rows: &[(f64, f64, f64, f64)],
) -> io::Result<()> {
    write_csv(
        w,
        prov,
        &["x", "y", "T_minus", "T_plus"],
        rows.iter()
            .map(|&(x, y, tm, tp)| vec![fmt_sci(x), fmt_sci(y), fmt_sci(tm), fmt_sci(tp)]),
    )
}

/// Frozen-boundary polyline rows (s, x, t, is_cusp) ordered by parameter.
pub fn write_boundary<W: Write>(
    w: &mut W,
    prov: &Provenance,
    rows: &[(f64, f64, f64, bool)],
) -> io::Result<()> {
    write_csv(
        w,
        prov,
        &["s", "x", "t", "is_cusp"],
        rows.iter().map(|&(s, x, t, c)| {
            vec![fmt_sci(s), fmt_sci(x), fmt_sci(t), (c as u8).to_string()]
        }),
    )
}

/// Bead dump rows (thread, height), one per bead.
pub fn write_beads<W: Write>(
    w: &mut W,
    prov: &Provenance,
    rows: &[(i64, f64)],
) -> io::Result<()> {
    write_csv(
        w,
        prov,
        &["thread", "height"],
        rows.iter().map(|&(x, h)| vec![x.to_string(), fmt_sci(h)]),
    )
}

/// Kernel evaluations on a (point, point) grid.
pub fn write_kernel_grid<W: Write>(
    w: &mut W,
    prov: &Provenance,
    rows: &[(i64, f64, i64, f64, f64)],
) -> io::Result<()> {
    write_csv(
        w,
        prov,
        &["x1", "t1", "x2", "t2", "K"],
        rows.iter().map(|&(x1, t1, x2, t2, k)| {
            vec![x1.to_string(), fmt_sci(t1), x2.to_string(), fmt_sci(t2), fmt_sci(k)]
        }),
    )
}

/// Per-thread diagonal time integrals against the exact column counts.
pub fn write_kernel_identity<W: Write>(
    w: &mut W,
    prov: &Provenance,
    rows: &[(i64, f64, f64, f64)],
) -> io::Result<()> {
    write_csv(
        w,
        prov,
        &["thread", "integral", "column_count", "residual"],
        rows.iter().map(|&(x, int, cols, res)| {
            vec![x.to_string(), fmt_sci(int), fmt_sci(cols), fmt_sci(res)]
        }),
    )
}

/// Generic two-column numeric curve (phase-diagram curves and the like).
pub fn write_xy<W: Write>(
    w: &mut W,
    prov: &Provenance,
    xname: &str,
    yname: &str,
    pts: &[(f64, f64)],
) -> io::Result<()> {
    write_csv(
        w,
        prov,
        &[xname, yname],
        pts.iter().map(|&(x, y)| vec![fmt_sci(x), fmt_sci(y)]),
    )
}

/// Per-replicate sup-norm errors of the rescaled empirical height.
pub fn write_compare<W: Write>(
    w: &mut W,
    prov: &Provenance,
    rows: &[(u64, u64, f64)],
) -> io::Result<()> {
    write_csv(
        w,
        prov,
        &["n", "replicate", "sup_error"],
        rows.iter().map(|&(n, rep, e)| vec![n.to_string(), rep.to_string(), fmt_sci(e)]),
    )
}

/// Median sup-norm error per dilation.
pub fn write_compare_summary<W: Write>(
    w: &mut W,
    prov: &Provenance,
    rows: &[(u64, f64)],
) -> io::Result<()> {
    write_csv(
        w,
        prov,
        &["n", "median_sup_error"],
        rows.iter().map(|&(n, e)| vec![n.to_string(), fmt_sci(e)]),
    )
}

const SVG_SIZE: f64 = 640.0;
const SVG_MARGIN: f64 = 40.0;

/// Bare SVG writer: one polyline per input chain plus optional point
/// markers, mapped into a fixed square viewport with the y axis pointing up.
/// No axes, no styling beyond a stroke — CSV stays the primary interchange.
pub fn write_svg_polyline<W: Write>(
    w: &mut W,
    chains: &[Vec<(f64, f64)>],
    markers: &[(f64, f64)],
) -> io::Result<()> {
    let all = chains.iter().flatten().chain(markers.iter());
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    if !lo.0.is_finite() {
        // Nothing to draw; keep the document well formed.
        lo = (0.0, 0.0);
        hi = (1.0, 1.0);
    }
    let span = ((hi.0 - lo.0).max(1e-12), (hi.1 - lo.1).max(1e-12));
    let scale = (SVG_SIZE - 2.0 * SVG_MARGIN) / span.0.max(span.1);
    let map = |(x, y): (f64, f64)| {
        let px = SVG_MARGIN + (x - lo.0) * scale;
        let py = SVG_SIZE - SVG_MARGIN - (y - lo.1) * scale;
        (px, py)
    };
    writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SVG_SIZE} {SVG_SIZE}\">"
    )?;
    for chain in chains.iter().filter(|c| !c.is_empty()) {
        let pts: Vec<String> = chain
            .iter()
            .map(|&p| {
                let (px, py) = map(p);
                format!("{px:.3},{py:.3}")
            })
            .collect();
        writeln!(
            w,
            "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        )?;
    }
    for &p in markers {
        let (px, py) = map(p);
        writeln!(w, "  <circle cx=\"{px:.3}\" cy=\"{py:.3}\" r=\"4\" fill=\"red\"/>")?;
    }
    writeln!(w, "</svg>")
}
