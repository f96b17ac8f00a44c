//! `spag` — command-line front end for the spatial-structure library.
//!
//! Subcommands run either a full pipeline (`trace`, `orbit`) or a single
//! graph constructor (`mst`, `knn`, `delaunay`) or field operation
//! (`convolve`). Inputs load from a file or stdin (`-`); results emit as
//! JSON (canonical), SVG (presentation), or a one-line summary. All output
//! is byte-deterministic for identical inputs and parameters.
//!
//! Exit codes: 0 success, 1 input or format error, 2 parameter or usage
//! error, 3 internal invariant violation.

mod svg;

use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spag_core::{
    classify_orbit, load_grid_text, load_pgm, load_points_csv, trace_boundaries, Error, GridField,
    Mask, Metric, NGraph, OrbitParams, PointSet, TracerParams,
};

#[derive(Parser)]
#[command(
    name = "spag",
    version,
    about = "Structural analysis of spatial data: boundary tracing, orbit \
             classification, and neighborhood-graph construction"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Trace the boundaries of a binary grid into segments and contours.
    ///
    /// Parameters: threshold1 (0.5), threshold2 (0.5), separation (2.5),
    /// delta (2.5), epsilon (30).
    Trace(Run),
    /// Classify the shape of a 2-D point cloud.
    ///
    /// Parameters: k_sigma (2), depth (2), min_flag_ratio (2),
    /// closure_ratio (3), path_fraction (0.95), branch_fraction (0.05),
    /// fp_diameter (1e-9), min_points (8), island_balance (0.25).
    Orbit(Run),
    /// Build the minimum spanning tree of a point set.
    ///
    /// Parameters: metric (euclidean | manhattan | chebyshev).
    Mst(Run),
    /// Connect each point to its k nearest neighbors.
    ///
    /// Parameters: k (required), metric (euclidean | manhattan | chebyshev).
    Knn(Run),
    /// Build the Delaunay triangulation of a 2-D point set.
    Delaunay(Run),
    /// Convolve a grid with a mask read from --mask (edge-clamped).
    Convolve(Run),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    GridText,
    Pgm,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Svg,
    Summary,
}

#[derive(Args)]
struct Run {
    /// Input file, or `-` for stdin.
    input: String,
    /// Input format; defaults to grid-text for grid subcommands and csv
    /// for point subcommands.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output kind.
    #[arg(long, value_enum, default_value = "json")]
    emit: Emit,
    /// Write output here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override one parameter, as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Mask file for convolve (grid-text).
    #[arg(long)]
    mask: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spag: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Format(_)
        | Error::Empty(_)
        | Error::Input(_)
        | Error::IllFormed(_)
        | Error::Degenerate(_)
        | Error::Duplicate(_)
        | Error::Containment(_)
        | Error::Io(_) => 1,
        Error::Argument(_) | Error::Config(_) | Error::Unsupported(_) => 2,
        Error::Contract(_) => 3,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Trace(run) => trace_cmd(run),
        Cmd::Orbit(run) => orbit_cmd(run),
        Cmd::Mst(run) => graph_cmd(run, GraphKind::Mst),
        Cmd::Knn(run) => graph_cmd(run, GraphKind::Knn),
        Cmd::Delaunay(run) => graph_cmd(run, GraphKind::Delaunay),
        Cmd::Convolve(run) => convolve_cmd(run),
    }
}

fn read_input(path: &str) -> Result<String, Error> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn write_output(run: &Run, content: &str) -> Result<(), Error> {
    match &run.output {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

/// Parse `--param key=value` pairs against a closed key list.
fn parse_params(pairs: &[String], allowed: &[&str]) -> Result<BTreeMap<String, String>, Error> {
    let mut map = BTreeMap::new();
    for pair in pairs {
        let Some((key, value)) = pair.split_once('=') else {
            return Err(Error::Argument(format!(
                "--param needs key=value, got {pair:?}"
            )));
        };
        if !allowed.contains(&key) {
            return Err(Error::Argument(format!(
                "unknown parameter {key:?}; valid here: {}",
                allowed.join(", ")
            )));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Argument(format!("parameter {key:?} given twice")));
        }
    }
    Ok(map)
}

fn real_param(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64, Error> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Argument(format!("parameter {key} is not a number: {v:?}"))),
    }
}

fn count_param(map: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize, Error> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| Error::Argument(format!("parameter {key} is not a count: {v:?}"))),
    }
}

fn load_grid(run: &Run) -> Result<GridField, Error> {
    let text = read_input(&run.input)?;
    match run.format.unwrap_or(Format::GridText) {
        Format::GridText => load_grid_text(&text),
        Format::Pgm => load_pgm(&text),
        Format::Csv => Err(Error::Input(
            "this subcommand reads a grid; csv holds points".into(),
        )),
    }
}

fn load_points(run: &Run) -> Result<PointSet, Error> {
    let text = read_input(&run.input)?;
    match run.format.unwrap_or(Format::Csv) {
        Format::Csv => load_points_csv(&text),
        Format::GridText | Format::Pgm => Err(Error::Input(
            "this subcommand reads csv points, not a grid".into(),
        )),
    }
}

fn trace_cmd(run: Run) -> Result<(), Error> {
    let map = parse_params(
        &run.params,
        &["threshold1", "threshold2", "separation", "delta", "epsilon"],
    )?;
    let d = TracerParams::default();
    let params = TracerParams {
        threshold1: real_param(&map, "threshold1", d.threshold1)?,
        threshold2: real_param(&map, "threshold2", d.threshold2)?,
        separation: real_param(&map, "separation", d.separation)?,
        delta: real_param(&map, "delta", d.delta)?,
        epsilon: real_param(&map, "epsilon", d.epsilon)?,
    };
    let grid = load_grid(&run)?;
    let result = trace_boundaries(&grid, &params)?;
    let out = match run.emit {
        Emit::Json => result.to_json(),
        Emit::Svg => svg::trace_svg(&result),
        Emit::Summary => format!("{}\n", result.summary()),
    };
    write_output(&run, &out)
}

fn orbit_cmd(run: Run) -> Result<(), Error> {
    let map = parse_params(
        &run.params,
        &[
            "k_sigma",
            "depth",
            "min_flag_ratio",
            "closure_ratio",
            "path_fraction",
            "branch_fraction",
            "fp_diameter",
            "min_points",
            "island_balance",
        ],
    )?;
    let d = OrbitParams::default();
    let params = OrbitParams {
        k_sigma: real_param(&map, "k_sigma", d.k_sigma)?,
        depth: count_param(&map, "depth", d.depth)?,
        min_flag_ratio: real_param(&map, "min_flag_ratio", d.min_flag_ratio)?,
        closure_ratio: real_param(&map, "closure_ratio", d.closure_ratio)?,
        path_fraction: real_param(&map, "path_fraction", d.path_fraction)?,
        branch_fraction: real_param(&map, "branch_fraction", d.branch_fraction)?,
        fp_diameter: real_param(&map, "fp_diameter", d.fp_diameter)?,
        min_points: count_param(&map, "min_points", d.min_points)?,
        island_balance: real_param(&map, "island_balance", d.island_balance)?,
    };
    if run.emit == Emit::Svg {
        return Err(Error::Argument(
            "orbit reports have no geometry to render; use --emit json or summary".into(),
        ));
    }
    let points = load_points(&run)?;
    let report = classify_orbit(&points, &params)?;
    let out = match run.emit {
        Emit::Json => report.to_json(),
        Emit::Summary => format!("{}\n", report.summary()),
        Emit::Svg => unreachable!(),
    };
    write_output(&run, &out)
}

enum GraphKind {
    Mst,
    Knn,
    Delaunay,
}

fn graph_cmd(run: Run, kind: GraphKind) -> Result<(), Error> {
    let allowed: &[&str] = match kind {
        GraphKind::Mst => &["metric"],
        GraphKind::Knn => &["k", "metric"],
        GraphKind::Delaunay => &[],
    };
    let map = parse_params(&run.params, allowed)?;
    let metric = match map.get("metric") {
        None => Metric::Euclidean,
        Some(name) => Metric::by_name(name)?,
    };
    let points = load_points(&run)?;
    let g: NGraph = match kind {
        GraphKind::Mst => NGraph::mst(&points, &metric)?,
        GraphKind::Knn => {
            let Some(k) = map.get("k") else {
                return Err(Error::Argument("knn needs --param k=<count>".into()));
            };
            let k: usize = k
                .parse()
                .map_err(|_| Error::Argument(format!("parameter k is not a count: {k:?}")))?;
            NGraph::knn(&points, k, &metric)?
        }
        GraphKind::Delaunay => NGraph::delaunay(&points)?,
    };
    let out = match run.emit {
        Emit::Json => {
            let mut s =
                serde_json::to_string_pretty(&g).map_err(|e| Error::Format(e.to_string()))?;
            s.push('\n');
            s
        }
        Emit::Svg => svg::graph_svg(&g),
        Emit::Summary => format!("nodes={} edges={}\n", g.len(), g.edges().len()),
    };
    write_output(&run, &out)
}

fn convolve_cmd(run: Run) -> Result<(), Error> {
    parse_params(&run.params, &[])?;
    if run.emit == Emit::Svg {
        return Err(Error::Argument(
            "convolution yields a grid, not geometry; use --emit json or summary".into(),
        ));
    }
    let Some(mask_path) = &run.mask else {
        return Err(Error::Argument("convolve needs --mask <grid-text file>".into()));
    };
    let grid = load_grid(&run)?;
    let mask_grid = load_grid_text(&std::fs::read_to_string(mask_path)?)?;
    let mut weights = Vec::new();
    for r in 0..mask_grid.height() {
        for c in 0..mask_grid.width() {
            weights.push(mask_grid.get(r, c));
        }
    }
    let mask = Mask::new(mask_grid.width(), mask_grid.height(), weights)?;
    let out_grid = spag_core::geometry::convolve(&grid, &mask)?;
    let out = match run.emit {
        Emit::Json => {
            let rows: Vec<Vec<f64>> = (0..out_grid.height())
                .map(|r| (0..out_grid.width()).map(|c| out_grid.get(r, c)).collect())
                .collect();
            let doc = serde_json::json!({
                "width": out_grid.width(),
                "height": out_grid.height(),
                "values": rows,
            });
            let mut s =
                serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))?;
            s.push('\n');
            s
        }
        Emit::Summary => format!(
            "width={} height={}\n",
            out_grid.width(),
            out_grid.height()
        ),
        Emit::Svg => unreachable!(),
    };
    write_output(&run, &out)
}
