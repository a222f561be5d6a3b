//! `tableau-limits`: deterministic experiment driver for limit shapes,
//! frozen boundaries, bead samples, and correlation kernels of random
//! standard Young tableaux.
//!
//! Output files are CSVs (plus bare SVG polylines for boundaries), each with
//! a provenance comment line; re-running a command with the same
//! configuration and seed reproduces every file byte for byte.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num::rational::Ratio;
use rayon::prelude::*;
use serde::Deserialize;

use tableau_limits::diagram::{self, InterlacingDiagram, Partition};
use tableau_limits::emit::{self, Provenance};
use tableau_limits::kernels::{finite_kernel_auto, SpaceTimePoint};
use tableau_limits::limit_surface::{
    self, frozen_boundary, interior_plateaus, phase_curve_q, phase_curve_qpm, surface_t_with_profile,
    HeightProfile,
};
use tableau_limits::quad;
use tableau_limits::sampler::{
    beads_from_tableau, hook_walk_sample, poissonize, replicate_rng, rescaled_height_profile,
    BeadConfiguration,
};

/// Hard ceiling on dilated diagram size for `sample`/`compare`; keeps runs
/// at desk scale.
const SAMPLE_CELL_CAP: u64 = 1_000_000;
/// Ceiling on base diagram size for `kernel`; the double contour integral
/// costs grow with the coordinate span, so big shapes are rejected up front.
const KERNEL_CELL_CAP: u64 = 1024;

#[derive(Parser)]
#[command(
    name = "tableau-limits",
    version,
    about = "Limit shapes, frozen boundaries, bead samples, and correlation kernels of random standard Young tableaux"
)]
struct Cli {
    /// Optional JSON config file; explicit flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (default: $TABLEAU_LIMITS_OUT, else ./out).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Height grid, surface inversion grid, and exact continuity report.
    Surface(SurfaceArgs),
    /// Frozen-boundary polyline (CSV + SVG) with cusp markers.
    Boundary(BoundaryArgs),
    /// Draw uniform Poissonized tableaux of the dilated shape; dump beads.
    Sample(SampleArgs),
    /// Sup-norm error of rescaled sampled heights against the limit height.
    Compare(CompareArgs),
    /// Finite correlation kernel grid and the per-thread box-count identity.
    Kernel(KernelArgs),
    /// Continuity phase-diagram curves in the L-shape (p, q) plane.
    Phase(PhaseArgs),
}

#[derive(Args)]
struct SurfaceArgs {
    /// Shape: builtin name, inline rows like "2,1", or JSON file path.
    #[arg(long)]
    shape: Option<String>,
    /// Grid points per axis for the height and surface CSVs.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct BoundaryArgs {
    #[arg(long)]
    shape: Option<String>,
    /// Parameter samples per interval between poles of the parametrization.
    #[arg(long)]
    per_interval: Option<usize>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    shape: Option<String>,
    /// Dilation factor n (cell count scales by n^2).
    #[arg(long)]
    n: Option<u64>,
    /// Number of independent replicates.
    #[arg(long)]
    reps: Option<u64>,
    /// Base RNG seed; replicate k uses stream k.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    shape: Option<String>,
    /// Comma-separated dilation factors, e.g. "10,20,40".
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid points per axis for the sup-norm comparison.
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    shape: Option<String>,
    /// Time-grid points for the diagonal kernel CSV.
    #[arg(long)]
    tgrid: Option<usize>,
}

#[derive(Args)]
struct PhaseArgs {
    /// Aspect parameter r of the L-shape family, as a rational like "3/2".
    #[arg(long)]
    r: Option<String>,
    /// Curve sample count.
    #[arg(long)]
    points: Option<usize>,
}

/// Values an optional JSON config file may provide; any explicit flag wins.
#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    shape: Option<String>,
    out: Option<PathBuf>,
    n: Option<u64>,
    n_list: Option<String>,
    reps: Option<u64>,
    seed: Option<u64>,
    grid: Option<usize>,
    per_interval: Option<usize>,
    tgrid: Option<usize>,
    r: Option<String>,
    points: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

type CliResult<T> = Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn num_err(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let file_cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            serde_json::from_str::<FileConfig>(&text)
                .map_err(|e| config_err(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let out_dir = resolve_out_dir(cli.out.or(file_cfg.out.clone()))?;
    match cli.command {
        Command::Surface(a) => cmd_surface(a, &file_cfg, &out_dir),
        Command::Boundary(a) => cmd_boundary(a, &file_cfg, &out_dir),
        Command::Sample(a) => cmd_sample(a, &file_cfg, &out_dir),
        Command::Compare(a) => cmd_compare(a, &file_cfg, &out_dir),
        Command::Kernel(a) => cmd_kernel(a, &file_cfg, &out_dir),
        Command::Phase(a) => cmd_phase(a, &file_cfg, &out_dir),
    }
}

// ---------------------------------------------------------------------------
// Configuration resolution
// ---------------------------------------------------------------------------

fn resolve_out_dir(explicit: Option<PathBuf>) -> CliResult<PathBuf> {
    let dir = explicit
        .or_else(|| std::env::var_os("TABLEAU_LIMITS_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Ok(dir)
}

fn parse_ratio(text: &str) -> CliResult<Ratio<i64>> {
    let parse_int = |s: &str| {
        s.trim()
            .parse::<i64>()
            .map_err(|_| config_err(format!("expected integer, got {s:?}")))
    };
    match text.split_once('/') {
        Some((num, den)) => {
            let den = parse_int(den)?;
            if den == 0 {
                return Err(config_err(format!("zero denominator in {text:?}")));
            }
            Ok(Ratio::new(parse_int(num)?, den))
        }
        None => Ok(Ratio::from_integer(parse_int(text)?)),
    }
}

/// Resolve a shape spec: builtin name, `rect:r`, `lshape:p,q,r`, an inline
/// row list like "2,1" or "(2,1)", or a path to a JSON file with either
/// {"rows": [...]} or {"a": [...], "b": [...]}.
fn resolve_shape(spec: &str) -> CliResult<(InterlacingDiagram, String)> {
    let label = spec.to_string();
    match spec {
        "heart" => return Ok((diagram::heart(), label)),
        "pipe" => return Ok((diagram::pipe(), label)),
        "square" => return Ok((diagram::square(), label)),
        _ => {}
    }
    if let Some(r) = spec.strip_prefix("rect:") {
        let (d, _scale) = diagram::rectangle(parse_ratio(r)?)
            .map_err(|e| config_err(format!("rect:{r}: {e}")))?;
        return Ok((d, label));
    }
    if let Some(pqr) = spec.strip_prefix("lshape:") {
        let parts: Vec<&str> = pqr.split(',').collect();
        if parts.len() != 3 {
            return Err(config_err(format!("lshape wants p,q,r; got {pqr:?}")));
        }
        let params = limit_surface::LShapeParams::new(
            parse_ratio(parts[0])?,
            parse_ratio(parts[1])?,
            parse_ratio(parts[2])?,
        )
        .map_err(|e| config_err(e.to_string()))?;
        let (d, _scale) =
            limit_surface::lshape_from_pqr(params).map_err(|e| config_err(e.to_string()))?;
        return Ok((d, label));
    }
    let inline = spec.trim().trim_start_matches('(').trim_end_matches(')');
    if !inline.is_empty() && inline.chars().all(|c| c.is_ascii_digit() || c == ',' || c == ' ') {
        let rows: Result<Vec<u64>, _> = inline
            .split(',')
            .map(|s| s.trim().parse::<u64>())
            .collect();
        if let Ok(rows) = rows {
            let p = Partition::new(rows).map_err(|e| config_err(e.to_string()))?;
            return Ok((InterlacingDiagram::from_partition(&p), label));
        }
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path).map_err(|e| {
        config_err(format!(
            "shape {spec:?} is not a builtin (heart|pipe|square|rect:r|lshape:p,q,r), \
             an inline row list, or a readable JSON file: {e}"
        ))
    })?;
    let d = diagram::shape_from_json(&text).map_err(|e| config_err(format!("{spec}: {e}")))?;
    Ok((d, label))
}

fn require_shape(flag: Option<String>, file: &FileConfig) -> CliResult<(InterlacingDiagram, String)> {
    let spec = flag
        .or_else(|| file.shape.clone())
        .ok_or_else(|| config_err("no shape given (use --shape or a config file)"))?;
    resolve_shape(&spec)
}

fn positive(name: &str, v: u64) -> CliResult<u64> {
    if v == 0 {
        Err(config_err(format!("{name} must be positive")))
    } else {
        Ok(v)
    }
}

fn guard_cells(cells: u64, cap: u64, what: &str) -> CliResult<()> {
    if cells > cap {
        return Err(config_err(format!(
            "{what} has {cells} cells, above the desk-scale cap of {cap}"
        )));
    }
    Ok(())
}

fn create_out(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).map_err(io_err(&path))?))
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

// ---------------------------------------------------------------------------
// surface
// ---------------------------------------------------------------------------

fn cmd_surface(args: SurfaceArgs, file: &FileConfig, out: &Path) -> CliResult<()> {
    let (d, label) = require_shape(args.shape, file)?;
    let grid = positive("grid", args.grid.or(file.grid).unwrap_or(41) as u64)? as usize;
    let shape = d.normalize();
    let (lo, hi) = shape.support();
    let x_grid = linspace(lo, hi, grid);
    let t_grid = linspace(0.0, 1.0, grid);

    struct Column {
        height: Vec<(f64, f64, f64)>,
        surface: Vec<(f64, f64, f64, f64)>,
        plateaus: Vec<(f64, f64)>,
    }
    let columns: Vec<Column> = x_grid
        .par_iter()
        .map(|&x| -> CliResult<Column> {
            let profile = HeightProfile::new(&shape, x, 1e-8).map_err(num_err)?;
            let height = t_grid.iter().map(|&t| (x, t, profile.height(t))).collect();
            let max_h = profile.full_height();
            let surface = linspace(x.abs(), x.abs() + 2.0 * max_h, grid)
                .into_iter()
                .map(|y| {
                    let sv = surface_t_with_profile(&profile, y, 1e-8).map_err(num_err)?;
                    Ok((x, y, sv.t_minus_val, sv.t_plus_val))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(Column { height, surface, plateaus: interior_plateaus(&profile) })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let prov = Provenance::new(&label).with("grid", grid);
    let mut w = create_out(out, "height.csv")?;
    let rows: Vec<_> = columns.iter().flat_map(|c| c.height.iter().copied()).collect();
    emit::write_height_grid(&mut w, &prov, &rows).map_err(num_err)?;
    let mut w = create_out(out, "surface.csv")?;
    let rows: Vec<_> = columns.iter().flat_map(|c| c.surface.iter().copied()).collect();
    emit::write_surface_grid(&mut w, &prov, &rows).map_err(num_err)?;

    // Exact continuity verdict plus the float plateau scan, as a text report.
    let report = limit_surface::continuity_criterion(&d);
    let verdict = if report.holds { "satisfied" } else { "violated" };
    let path = out.join("continuity.txt");
    let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    writeln!(w, "{}", prov.comment_line()).map_err(io_err(&path))?;
    writeln!(w, "verdict: {verdict}").map_err(io_err(&path))?;
    for eq in &report.equations {
        writeln!(
            w,
            "i0={} lhs={} rhs={} residual={}",
            eq.i0,
            eq.lhs,
            eq.rhs,
            eq.residual()
        )
        .map_err(io_err(&path))?;
    }
    for (x, col) in x_grid.iter().zip(&columns) {
        for &(t0, t1) in &col.plateaus {
            writeln!(w, "plateau x={} t=[{}, {}]", emit::fmt_sci(*x), emit::fmt_sci(t0), emit::fmt_sci(t1))
                .map_err(io_err(&path))?;
        }
    }

    println!("continuity report: {verdict}");
    for eq in report.equations.iter().filter(|eq| !eq.holds()) {
        println!("  violated at i0={}: lhs={} rhs={} residual={}", eq.i0, eq.lhs, eq.rhs, eq.residual());
    }
    let plateau_count: usize = columns.iter().map(|c| c.plateaus.len()).sum();
    println!(
        "surface: wrote height.csv, surface.csv, continuity.txt ({} grid columns, {} plateau rows)",
        grid, plateau_count
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// boundary
// ---------------------------------------------------------------------------

fn cmd_boundary(args: BoundaryArgs, file: &FileConfig, out: &Path) -> CliResult<()> {
    let (d, label) = require_shape(args.shape, file)?;
    let per_interval =
        positive("per-interval", args.per_interval.or(file.per_interval).unwrap_or(200) as u64)?
            as usize;
    let shape = d.normalize();
    let s_grid = limit_surface::default_s_grid(&shape, per_interval);
    let fb = frozen_boundary(&shape, &s_grid);
    if fb.samples.is_empty() {
        return Err(CliError::Numerical(
            "frozen boundary tracing produced no points".into(),
        ));
    }

    // Interleave cusp points (vertical tangents) into the s-ordered rows.
    let mut rows: Vec<(f64, f64, f64, bool)> =
        fb.samples.iter().map(|p| (p.s, p.x, p.t, false)).collect();
    let mut cusp_points = Vec::new();
    for &s in &fb.cusps {
        if let Some((x, t)) = limit_surface::boundary_point(&shape, s) {
            rows.push((s, x, t, true));
            cusp_points.push((x, t));
        }
    }
    rows.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());

    let prov = Provenance::new(&label).with("per_interval", per_interval);
    let mut w = create_out(out, "boundary.csv")?;
    emit::write_boundary(&mut w, &prov, &rows).map_err(num_err)?;

    // One polyline chain per parameter interval between poles.
    let interval_of = |s: f64| fb.poles.partition_point(|&p| p < s);
    let mut chains: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    let mut last_interval = None;
    for &(s, x, t, _) in &rows {
        let iv = interval_of(s);
        if last_interval.is_some_and(|prev| prev != iv) && !current.is_empty() {
            chains.push(std::mem::take(&mut current));
        }
        current.push((x, t));
        last_interval = Some(iv);
    }
    if !current.is_empty() {
        chains.push(current);
    }
    let mut w = create_out(out, "boundary.svg")?;
    emit::write_svg_polyline(&mut w, &chains, &cusp_points).map_err(num_err)?;

    println!(
        "boundary: {} points, {} cusps, {} grid points dropped",
        fb.samples.len(),
        fb.cusps.len(),
        fb.dropped
    );
    for (s, (x, t)) in fb.cusps.iter().zip(&cusp_points) {
        println!("  cusp s={} at (x,t)=({}, {})", emit::fmt_sci(*s), emit::fmt_sci(*x), emit::fmt_sci(*t));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

fn draw_beads(d: &InterlacingDiagram, n: u64, seed: u64, stream: u64) -> CliResult<BeadConfiguration> {
    let part = d.dilate(n).to_partition();
    let mut rng = replicate_rng(seed, stream);
    let syt = hook_walk_sample(&part, &mut rng);
    let pt = poissonize(&syt, &mut rng);
    beads_from_tableau(&pt).map_err(num_err)
}

fn cmd_sample(args: SampleArgs, file: &FileConfig, out: &Path) -> CliResult<()> {
    let (d, label) = require_shape(args.shape, file)?;
    let n = positive("n", args.n.or(file.n).unwrap_or(4))?;
    let reps = positive("reps", args.reps.or(file.reps).unwrap_or(1))?;
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let cells = d.size() * n * n;
    guard_cells(cells, SAMPLE_CELL_CAP, "dilated shape")?;

    let beads: Vec<BeadConfiguration> = (0..reps)
        .into_par_iter()
        .map(|rep| draw_beads(&d, n, seed, rep))
        .collect::<CliResult<Vec<_>>>()?;
    for (rep, b) in beads.iter().enumerate() {
        let rows: Vec<(i64, f64)> = {
            let (lo, hi) = b.thread_range();
            (lo..=hi)
                .flat_map(|x| b.heights(x).iter().map(move |&h| (x, h)))
                .collect()
        };
        let prov = Provenance::new(&label)
            .with("seed", seed)
            .with("n", n)
            .with("replicate", rep);
        let mut w = create_out(out, &format!("beads_rep{rep:03}.csv"))?;
        emit::write_beads(&mut w, &prov, &rows).map_err(num_err)?;
    }
    println!(
        "sample: {} replicate(s) of the n={} dilation ({} cells each) written as beads_rep*.csv",
        reps, n, cells
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

fn cmd_compare(args: CompareArgs, file: &FileConfig, out: &Path) -> CliResult<()> {
    let (d, label) = require_shape(args.shape, file)?;
    let n_spec = args.n.or(file.n_list.clone()).unwrap_or_else(|| "10,20".to_string());
    let n_list: Vec<u64> = n_spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| config_err(format!("bad dilation {s:?} in --n")))
                .and_then(|v| positive("n", v))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let reps = positive("reps", args.reps.or(file.reps).unwrap_or(8))?;
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let grid = positive("grid", args.grid.or(file.grid).unwrap_or(21) as u64)? as usize;
    for &n in &n_list {
        guard_cells(d.size() * n * n, SAMPLE_CELL_CAP, "dilated shape")?;
    }

    let shape = d.normalize();
    let (lo, hi) = shape.support();
    let x_grid = linspace(lo, hi, grid);
    // Interior time points: comparing right at t=0 or t=1 only checks the
    // deterministic empty/full configurations.
    let t_grid: Vec<f64> = (0..grid).map(|j| (j as f64 + 0.5) / grid as f64).collect();
    let limit: Vec<Vec<f64>> = x_grid
        .par_iter()
        .map(|&x| -> CliResult<Vec<f64>> {
            let profile = HeightProfile::new(&shape, x, 1e-8).map_err(num_err)?;
            Ok(t_grid.iter().map(|&t| profile.height(t)).collect())
        })
        .collect::<CliResult<Vec<_>>>()?;

    let jobs: Vec<(u64, u64)> = n_list
        .iter()
        .flat_map(|&n| (0..reps).map(move |rep| (n, rep)))
        .collect();
    let errors: Vec<(u64, u64, f64)> = jobs
        .par_iter()
        .map(|&(n, rep)| -> CliResult<(u64, u64, f64)> {
            // Stream ids: replicate blocks per dilation keep draws independent.
            let n_idx = n_list.iter().position(|&v| v == n).unwrap() as u64;
            let beads = draw_beads(&d, n, seed, n_idx * reps + rep)?;
            let emp = rescaled_height_profile(&d, n, &beads, &x_grid, &t_grid).map_err(num_err)?;
            let sup = emp
                .iter()
                .zip(&limit)
                .flat_map(|(er, lr)| er.iter().zip(lr).map(|(e, l)| (e - l).abs()))
                .fold(0.0f64, f64::max);
            Ok((n, rep, sup))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let prov = Provenance::new(&label)
        .with("seed", seed)
        .with("reps", reps)
        .with("grid", grid);
    let mut w = create_out(out, "compare.csv")?;
    emit::write_compare(&mut w, &prov, &errors).map_err(num_err)?;
    let summary: Vec<(u64, f64)> = n_list
        .iter()
        .map(|&n| {
            let errs: Vec<f64> =
                errors.iter().filter(|r| r.0 == n).map(|r| r.2).collect();
            (n, median(errs))
        })
        .collect();
    let mut w = create_out(out, "compare_summary.csv")?;
    emit::write_compare_summary(&mut w, &prov, &summary).map_err(num_err)?;
    for &(n, med) in &summary {
        println!("compare: n={n} median sup error {}", emit::fmt_sci(med));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// kernel
// ---------------------------------------------------------------------------

/// Number of cells of the partition with content (column minus row) `x`.
fn column_count(p: &Partition, x: i64) -> f64 {
    let mut count = 0u64;
    for (i, &len) in p.rows().iter().enumerate() {
        let row = i as i64 + 1;
        // Cells (row, j), j = 1..=len have contents j - row.
        if x + row >= 1 && x + row <= len as i64 {
            count += 1;
        }
    }
    count as f64
}

fn cmd_kernel(args: KernelArgs, file: &FileConfig, out: &Path) -> CliResult<()> {
    let (d, label) = require_shape(args.shape, file)?;
    guard_cells(d.size(), KERNEL_CELL_CAP, "kernel shape")?;
    let tgrid = positive("tgrid", args.tgrid.or(file.tgrid).unwrap_or(9) as u64)? as usize;
    let part = d.to_partition();
    let threads: Vec<i64> = (d.a()[0]..=*d.a().last().unwrap()).collect();
    let t_grid: Vec<f64> = (0..tgrid).map(|j| (j as f64 + 0.5) / tgrid as f64).collect();

    let diag_rows: Vec<(i64, f64, i64, f64, f64)> = threads
        .par_iter()
        .flat_map_iter(|&x| t_grid.iter().map(move |&t| (x, t)))
        .map(|(x, t)| -> CliResult<(i64, f64, i64, f64, f64)> {
            let p = SpaceTimePoint::new(x, t);
            let k = finite_kernel_auto(&d, p, p).map_err(num_err)?;
            Ok((x, t, x, t, k))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let gl = quad::gl_nodes(64);
    let identity_rows: Vec<(i64, f64, f64, f64)> = threads
        .par_iter()
        .map(|&x| -> CliResult<(i64, f64, f64, f64)> {
            let mut integral = 0.0;
            for &(u, w) in &gl {
                let t = 0.5 + 0.5 * u;
                let p = SpaceTimePoint::new(x, t);
                integral += 0.5 * w * finite_kernel_auto(&d, p, p).map_err(num_err)?;
            }
            let cols = column_count(&part, x);
            Ok((x, integral, cols, integral - cols))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let prov = Provenance::new(&label).with("tgrid", tgrid);
    let mut w = create_out(out, "kernel_diag.csv")?;
    emit::write_kernel_grid(&mut w, &prov, &diag_rows).map_err(num_err)?;
    let mut w = create_out(out, "kernel_identity.csv")?;
    emit::write_kernel_identity(&mut w, &prov, &identity_rows).map_err(num_err)?;

    let max_residual = identity_rows.iter().map(|r| r.3.abs()).fold(0.0f64, f64::max);
    println!(
        "kernel: {} threads, box-count identity max |residual| = {}",
        threads.len(),
        emit::fmt_sci(max_residual)
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// phase
// ---------------------------------------------------------------------------

/// Admissibility of an L-shape parameter pair, checked in floats with a
/// hair of slack toward keeping boundary points of the curve.
fn pq_admissible(r: f64, p: f64, q: f64) -> bool {
    let eps = 1e-9;
    p > -1.0 + eps
        && p < r - eps
        && q > p.abs() + eps
        && q <= (p + 2.0).min(2.0 * r - p) + eps
        && q.is_finite()
}

fn cmd_phase(args: PhaseArgs, file: &FileConfig, out: &Path) -> CliResult<()> {
    let r = parse_ratio(&args.r.or(file.r.clone()).unwrap_or_else(|| "1".to_string()))?;
    if r <= Ratio::from_integer(0) {
        return Err(config_err(format!("r={r} must be positive")));
    }
    let points = positive("points", args.points.or(file.points).unwrap_or(257) as u64)? as usize;
    let rf = *r.numer() as f64 / *r.denom() as f64;
    let p_grid = linspace(-1.0, rf, points + 2);
    let p_grid = &p_grid[1..=points];

    // At r = 1 the two closed-form branches degenerate into one circle arc
    // (and have a removable 0/0 at p = 0), so that case uses the direct
    // arc formula for the minus branch and leaves the plus branch empty.
    let square_family = (rf - 1.0).abs() < 1e-12;
    let curve = |sign: i8| -> Vec<(f64, f64)> {
        p_grid
            .iter()
            .filter_map(|&p| {
                let q = if square_family {
                    if sign > 0 {
                        return None;
                    }
                    phase_curve_q(p).ok()?
                } else {
                    phase_curve_qpm(rf, p, sign).ok()?
                };
                pq_admissible(rf, p, q).then_some((p, q))
            })
            .collect()
    };
    let minus = curve(-1);
    let plus = curve(1);

    let label = format!("lshape-family r={r}");
    let prov = Provenance::new(&label).with("points", points);
    let mut w = create_out(out, "phase_minus.csv")?;
    emit::write_xy(&mut w, &prov, "p", "q", &minus).map_err(num_err)?;
    let mut w = create_out(out, "phase_plus.csv")?;
    emit::write_xy(&mut w, &prov, "p", "q", &plus).map_err(num_err)?;

    println!(
        "phase: r={r}, minus branch {} points, plus branch {} points",
        minus.len(),
        plus.len()
    );
    if (rf - 1.0).abs() < 1e-12 {
        let q0 = phase_curve_q(0.0).map_err(num_err)?;
        println!("  Q(0)={}", emit::fmt_sci(q0));
    }
    Ok(())
}
