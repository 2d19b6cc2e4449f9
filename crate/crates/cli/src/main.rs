//! Command-line driver: eigenvalue solves, symmetrization flows, derivative
//! reports, series reconstructions, stability families, bubble equilibria,
//! manifold kernel checks, and polygon sampling. Every command can write its
//! results to JSON/CSV files and records a reproducibility manifest beside
//! the first file output.

mod emit;
mod manifest;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use polyfreq_core::bubble::{self, BubbleParams};
use polyfreq_core::fem::{solve_lambda1, triangulate_with, TriangulateOptions};
use polyfreq_core::io;
use polyfreq_core::manifold::{
    convexity_safe_radius, dpsi_at_regular, dq_at_regular, sample_near_regular,
};
use polyfreq_core::shape_derivatives::derivative_report;
use polyfreq_core::spectra::reconstruct_series;
use polyfreq_core::stability::{
    equivalence_ratio_scan, pi2_over_16_family, sharpness_exponent_fit,
};
use polyfreq_core::symmetrize::{max_side_deviation, run_flow};
use polyfreq_core::{Error as CoreError, Polygon};

use manifest::ExperimentManifest;

#[derive(Parser)]
#[command(
    name = "polyfreq",
    version,
    about = "Spectral geometry of polygons: Dirichlet eigenvalues, \
             symmetrization flows, and stability experiments"
)]
struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the experiment manifest here instead of next to the first file
    /// output.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// First Dirichlet eigenvalue of a polygon by finite elements.
    Eig(EigArgs),
    /// Partial Steiner symmetrization flow toward the regular polygon.
    Flow(FlowArgs),
    /// Eigenvalue derivatives in the window offset, with optional
    /// finite-difference cross-check.
    Deriv(DerivArgs),
    /// Eigenvalue reconstruction from the per-step series along the flow.
    Series(SeriesArgs),
    /// Deficit families: thin isosceles bracketing, sheared-equilateral
    /// sharpness fit, or a triangle scan from a file.
    Stability(StabilityArgs),
    /// Equilibrium scale of the electron-bubble energy.
    Bubble(BubbleArgs),
    /// Kernel dimensions of the constraint Jacobians at the regular polygon.
    Manifold(ManifoldArgs),
    /// Sample near-regular convex polygons to a JSON-lines file.
    Sample(SampleArgs),
}

#[derive(Args, Serialize)]
struct EigArgs {
    /// Polygon JSON file ({"vertices": [[x, y], ...]}).
    #[arg(long)]
    polygon: PathBuf,
    /// Refinement level of the triangulation.
    #[arg(long, default_value_t = 6)]
    refine: usize,
    /// Grade the mesh toward the polygon vertices.
    #[arg(long)]
    grade_vertices: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct FlowArgs {
    /// Polygon JSON file.
    #[arg(long)]
    polygon: PathBuf,
    /// Window attempts before giving up.
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Relative side-deviation tolerance declaring convergence.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Write the CSV trace here (stdout when omitted).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct DerivArgs {
    /// Polygon JSON file.
    #[arg(long)]
    polygon: PathBuf,
    /// Leading vertex index of the symmetrization window.
    #[arg(long)]
    vertex: usize,
    /// Refinement level of the triangulation.
    #[arg(long, default_value_t = 6)]
    refine: usize,
    /// Also compute central finite differences and relative errors.
    #[arg(long)]
    fd_check: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SeriesArgs {
    /// Polygon JSON file.
    #[arg(long)]
    polygon: PathBuf,
    /// Number of leading flow steps kept in the series.
    #[arg(long)]
    terms: usize,
    /// Refinement level of the triangulation.
    #[arg(long, default_value_t = 6)]
    refine: usize,
    /// Write the per-term CSV table here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Family {
    /// Unit-area thin isosceles triangles with rectangle sandwich bounds.
    ThinIsosceles,
    /// Sheared equilateral triangles for the deficit-asymmetry fit.
    ShearedEquilateral,
    /// Eigenvalue/perimeter deficit quotients over triangles from a file.
    TriangleScan,
}

#[derive(Args, Serialize)]
struct StabilityArgs {
    /// Deficit family to run.
    #[arg(long, value_enum)]
    family: Family,
    /// Comma-separated base half-lengths for thin-isosceles (e.g. 5,10,20).
    #[arg(long, value_delimiter = ',')]
    a: Vec<f64>,
    /// Width fraction of the thin-isosceles comparison rectangles, in (0,1).
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Comma-separated shear magnitudes for sheared-equilateral.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    t: Vec<f64>,
    /// JSON-lines file of triangles for triangle-scan.
    #[arg(long)]
    polygons: Option<PathBuf>,
    /// Refinement level of the triangulation.
    #[arg(long, default_value_t = 6)]
    refine: usize,
    /// Write the CSV table here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BubbleArgs {
    /// Eigenvalue coefficient (energy times length squared).
    #[arg(long)]
    psi: f64,
    /// Surface-tension coefficient (energy per length).
    #[arg(long)]
    sigma: f64,
    /// Pressure coefficient (energy per length squared).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pressure: f64,
    /// Order of the regular reference polygon of area pi.
    #[arg(long)]
    n: usize,
    /// Refinement level for its eigenvalue solve.
    #[arg(long, default_value_t = 6)]
    refine: usize,
    /// Permit suction; the equilibrium may then fail to exist.
    #[arg(long)]
    allow_negative_pressure: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ManifoldArgs {
    /// Polygon order.
    #[arg(long)]
    n: usize,
    /// Fixed polygon area.
    #[arg(long, default_value_t = PI)]
    alpha: f64,
    /// Report the constraint-Jacobian kernels at the regular polygon.
    #[arg(long)]
    check_kernels: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Clone, Serialize)]
struct SampleArgs {
    /// Polygon order.
    #[arg(long)]
    n: usize,
    /// Vertex perturbation radius around the regular polygon.
    #[arg(long)]
    radius: f64,
    /// Fixed polygon area.
    #[arg(long, default_value_t = PI)]
    alpha: f64,
    /// RNG seed (the POLYFREQ_SEED environment variable overrides it).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of polygons to draw.
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// JSON-lines output file, one polygon per line.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 1 for validation problems, 2 when an otherwise valid solve fails.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::SolverError(_)) | Some(CoreError::NoConvergence(_)) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    let manifest_path = cli.manifest.as_deref();
    match &cli.command {
        Command::Eig(args) => cmd_eig(args, manifest_path),
        Command::Flow(args) => cmd_flow(args, manifest_path),
        Command::Deriv(args) => cmd_deriv(args, manifest_path),
        Command::Series(args) => cmd_series(args, manifest_path),
        Command::Stability(args) => cmd_stability(args, manifest_path),
        Command::Bubble(args) => cmd_bubble(args, manifest_path),
        Command::Manifold(args) => cmd_manifold(args, manifest_path),
        Command::Sample(args) => cmd_sample(args, manifest_path),
    }
}

fn load_polygon(path: &Path) -> Result<Polygon> {
    io::load_polygon(path).with_context(|| format!("loading {}", path.display()))
}

fn write_json<T: Serialize>(
    value: &T,
    path: Option<&Path>,
    man: &mut ExperimentManifest,
) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => {
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
            man.record_output(p);
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn write_csv(text: &str, path: &Path, man: &mut ExperimentManifest) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    man.record_output(path);
    Ok(())
}

#[derive(Serialize)]
struct EigReport {
    lambda1: f64,
    ndof: usize,
    residual: f64,
    /// Observed convergence order from the last three refinement levels;
    /// absent below refine 2.
    order_estimate: Option<f64>,
}

fn cmd_eig(args: &EigArgs, manifest_path: Option<&Path>) -> Result<()> {
    let mut man = ExperimentManifest::new("eig", args)?;
    man.hash_input(&args.polygon)?;
    let poly = load_polygon(&args.polygon)?;
    let opts = TriangulateOptions { grade_vertices: args.grade_vertices };
    let sol = solve_lambda1(triangulate_with(&poly, args.refine, opts)?)?;
    let order_estimate = if args.refine >= 2 {
        let coarse = solve_lambda1(triangulate_with(&poly, args.refine - 2, opts)?)?.lambda1;
        let mid = solve_lambda1(triangulate_with(&poly, args.refine - 1, opts)?)?.lambda1;
        let (d0, d1) = (coarse - mid, mid - sol.lambda1);
        (d0 > 0.0 && d1 > 0.0).then(|| (d0 / d1).log2())
    } else {
        None
    };
    let report = EigReport {
        lambda1: sol.lambda1,
        ndof: sol.interior.len(),
        residual: sol.residual,
        order_estimate,
    };
    write_json(&report, args.json.as_deref(), &mut man)?;
    man.write(manifest_path)
}

fn cmd_flow(args: &FlowArgs, manifest_path: Option<&Path>) -> Result<()> {
    let mut man = ExperimentManifest::new("flow", args)?;
    man.hash_input(&args.polygon)?;
    let poly = load_polygon(&args.polygon)?;
    let trace = run_flow(&poly, args.max_iter, args.tol)?;
    let csv = emit::flow_csv(&trace);
    match args.trace.as_deref() {
        Some(p) => {
            write_csv(&csv, p, &mut man)?;
            let last = trace.polygons.last().expect("trace never empty");
            let summary = json!({
                "converged": trace.converged,
                "iterations_to_converge": trace.iterations_to_converge,
                "steps": trace.offsets.len(),
                "final_perimeter": trace.perimeters.last(),
                "final_max_side_dev": max_side_deviation(last),
            });
            write_json(&summary, None, &mut man)?;
        }
        None => print!("{csv}"),
    }
    man.write(manifest_path)
}

fn cmd_deriv(args: &DerivArgs, manifest_path: Option<&Path>) -> Result<()> {
    let mut man = ExperimentManifest::new("deriv", args)?;
    man.hash_input(&args.polygon)?;
    let poly = load_polygon(&args.polygon)?;
    let report = derivative_report(&poly, args.vertex, args.refine, args.fd_check)?;
    write_json(&report, args.json.as_deref(), &mut man)?;
    man.write(manifest_path)
}

fn cmd_series(args: &SeriesArgs, manifest_path: Option<&Path>) -> Result<()> {
    let mut man = ExperimentManifest::new("series", args)?;
    man.hash_input(&args.polygon)?;
    let poly = load_polygon(&args.polygon)?;
    let series = reconstruct_series(&poly, args.terms, args.refine)?;
    write_json(&series, args.json.as_deref(), &mut man)?;
    if let Some(p) = args.csv.as_deref() {
        write_csv(&emit::series_csv(&series), p, &mut man)?;
    }
    man.write(manifest_path)
}

fn cmd_stability(args: &StabilityArgs, manifest_path: Option<&Path>) -> Result<()> {
    let mut man = ExperimentManifest::new("stability", args)?;
    match args.family {
        Family::ThinIsosceles => {
            if args.a.is_empty() {
                bail!("thin-isosceles needs --a with at least one base half-length");
            }
            let rows = pi2_over_16_family(&args.a, args.epsilon, args.refine)?;
            write_json(&rows, args.json.as_deref(), &mut man)?;
            if let Some(p) = args.csv.as_deref() {
                write_csv(&emit::thin_family_csv(&rows), p, &mut man)?;
            }
        }
        Family::ShearedEquilateral => {
            if args.t.is_empty() {
                bail!("sheared-equilateral needs --t with at least one shear magnitude");
            }
            let fit = sharpness_exponent_fit(&args.t, args.refine)?;
            write_json(&fit, args.json.as_deref(), &mut man)?;
            if let Some(p) = args.csv.as_deref() {
                write_csv(&emit::sharpness_csv(&args.t, &fit), p, &mut man)?;
            }
        }
        Family::TriangleScan => {
            let Some(path) = args.polygons.as_deref() else {
                bail!("triangle-scan needs --polygons with a JSON-lines file");
            };
            man.hash_input(path)?;
            let polys = load_polygon_lines(path)?;
            let scan = equivalence_ratio_scan(&polys, args.refine)?;
            write_json(&scan, args.json.as_deref(), &mut man)?;
            if let Some(p) = args.csv.as_deref() {
                write_csv(&emit::scan_csv(&scan), p, &mut man)?;
            }
        }
    }
    man.write(manifest_path)
}

fn cmd_bubble(args: &BubbleArgs, manifest_path: Option<&Path>) -> Result<()> {
    let mut man = ExperimentManifest::new("bubble", args)?;
    if args.pressure < 0.0 && !args.allow_negative_pressure {
        bail!("negative pressure requires --allow-negative-pressure");
    }
    let params = BubbleParams::from_regular_polygon(
        args.psi,
        args.sigma,
        args.pressure,
        args.n,
        args.refine,
    )?;
    let a = bubble::equilibrium_scale(&params)?;
    let report = json!({
        "a": a,
        "energy_at_a": bubble::energy(&params, a)?,
        "residual": bubble::energy_slope(&params, a)?,
    });
    write_json(&report, args.json.as_deref(), &mut man)?;
    man.write(manifest_path)
}

fn cmd_manifold(args: &ManifoldArgs, manifest_path: Option<&Path>) -> Result<()> {
    let mut man = ExperimentManifest::new("manifold", args)?;
    if args.check_kernels {
        let reports = vec![dq_at_regular(args.n)?, dpsi_at_regular(args.n)?];
        write_json(&reports, args.json.as_deref(), &mut man)?;
    } else {
        let summary = json!({
            "n": args.n,
            "alpha": args.alpha,
            "convexity_safe_radius": convexity_safe_radius(args.n, args.alpha)?,
        });
        write_json(&summary, args.json.as_deref(), &mut man)?;
    }
    man.write(manifest_path)
}

fn cmd_sample(args: &SampleArgs, manifest_path: Option<&Path>) -> Result<()> {
    let seed = resolve_seed(args.seed)?;
    // The manifest records the seed actually used, so re-running it needs no
    // environment variable.
    let resolved = SampleArgs { seed, ..args.clone() };
    let mut man = ExperimentManifest::new("sample", &resolved)?;
    man.seed = Some(seed);
    let batch = sample_near_regular(args.n, args.radius, args.alpha, seed, args.count)?;
    let mut text = String::new();
    for poly in &batch.polygons {
        text.push_str(&serde_json::to_string(poly)?);
        text.push('\n');
    }
    fs::write(&args.out, text).with_context(|| format!("writing {}", args.out.display()))?;
    man.record_output(&args.out);
    let summary = json!({
        "count": batch.polygons.len(),
        "attempts": batch.attempts,
        "convexity_warning": batch.convexity_warning,
        "out": args.out,
    });
    write_json(&summary, None, &mut man)?;
    man.write(manifest_path)
}

fn resolve_seed(flag: u64) -> Result<u64> {
    match std::env::var("POLYFREQ_SEED") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .with_context(|| format!("POLYFREQ_SEED must be a nonnegative integer, got {text:?}")),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => Err(e).context("reading POLYFREQ_SEED"),
    }
}

fn load_polygon_lines(path: &Path) -> Result<Vec<Polygon>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut polys = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let poly: Polygon = serde_json::from_str(line)
            .with_context(|| format!("{} line {}", path.display(), i + 1))?;
        polys.push(poly);
    }
    if polys.is_empty() {
        bail!("{} holds no polygons", path.display());
    }
    Ok(polys)
}
