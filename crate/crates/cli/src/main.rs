//! Command-line front end: geodesics, transport, convolution, checks, and
//! SO(3) decompositions, configured by JSON and reporting JSON to stdout.
//!
//! Exit codes: 0 on success/pass, 1 on check failure or runtime error,
//! 2 on configuration errors (bad flags, unknown presets, malformed files).

use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use covconv::convolution::{convolve_field, ConvolutionSpec};
use covconv::geometry::{parallel_transport, presets, trace_geodesic, transport_matrix, Path,
    PointCoords, TangentVec};
use covconv::harness::{run_check, CheckReport, ExperimentConfig, CHECK_NAMES};
use covconv::rep::so3_tensor_multiplicities;
use covconv::tensor::{component_labels, TensorRank, TensorValue};
use covconv::{Error, Result};

#[derive(Parser)]
#[command(
    name = "covconv",
    version,
    about = "Covariant convolution on chart-described Riemannian manifolds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a geodesic from a point and initial velocity.
    Geodesic {
        /// Manifold preset name (flat2d-cartesian, flat2d-polar, sphere, graph-quadratic).
        #[arg(long)]
        manifold: String,
        /// Positional parameters of the manifold preset.
        #[arg(long, value_delimiter = ',', num_args = 0.., allow_hyphen_values = true)]
        manifold_params: Vec<f64>,
        /// Start coordinates, comma separated (radians for angular charts).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        /// Initial velocity components, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        v: Vec<f64>,
        /// RK4 steps per unit curve parameter.
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Write the sampled trajectory to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Parallel-transport a tensor along a polyline path.
    Transport {
        #[arg(long)]
        manifold: String,
        #[arg(long, value_delimiter = ',', num_args = 0.., allow_hyphen_values = true)]
        manifold_params: Vec<f64>,
        /// Waypoints as `x1,y1;x2,y2;...` (straight chart segments between).
        #[arg(long)]
        path: String,
        /// Tensor components at the start point, comma separated, row-major.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        components: Vec<f64>,
        /// Tensor rank as `contravariant,covariant`; default vector (1,0).
        #[arg(long, default_value = "1,0")]
        rank: String,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Convolve a field with a kernel at configured output points.
    Convolve {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Write output components per point to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a named covariance check from a configuration.
    Check {
        /// Check name; defaults to the `check` key of the config.
        name: Option<String>,
        #[arg(long)]
        config: PathBuf,
        /// Write the per-point error table to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Decompose the n-th tensor power of the SO(3) vector representation.
    Decompose {
        /// Tensor power, up to 20.
        #[arg(long)]
        n: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(passed) => {
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Runs a subcommand; `Ok(false)` means a check ran cleanly and failed.
fn dispatch(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Geodesic {
            manifold,
            manifold_params,
            x,
            v,
            steps,
            csv,
        } => run_geodesic(&manifold, &manifold_params, x, v, steps, csv.as_deref()),
        Cmd::Transport {
            manifold,
            manifold_params,
            path,
            components,
            rank,
            steps,
        } => run_transport(&manifold, &manifold_params, &path, components, &rank, steps),
        Cmd::Convolve { config, csv } => run_convolve(&config, csv.as_deref()),
        Cmd::Check { name, config, csv } => run_check_cmd(name.as_deref(), &config, csv.as_deref()),
        Cmd::Decompose { n } => {
            let table = so3_tensor_multiplicities(n)?;
            println!("{}", serde_json::to_string_pretty(&table.to_json())?);
            Ok(true)
        }
    }
}

fn run_geodesic(
    manifold: &str,
    params: &[f64],
    x: Vec<f64>,
    v: Vec<f64>,
    steps: usize,
    csv: Option<&FsPath>,
) -> Result<bool> {
    if steps == 0 {
        return Err(Error::InvalidArgument("--steps must be positive".into()));
    }
    let m = presets::manifold_by_name(manifold, params)?;
    if x.len() != m.dim() || v.len() != m.dim() {
        return Err(Error::InvalidArgument(format!(
            "--x and --v need {} components for '{}'",
            m.dim(),
            m.name()
        )));
    }
    let start = TangentVec::new(PointCoords::new(x), v)?;
    let geo = trace_geodesic(&m, &start, steps)?;
    if let Some(path) = csv {
        write_path_csv(path, &geo.path)?;
    }
    let report = json!({
        "manifold": m.name(),
        "start": start.base.as_slice(),
        "velocity": start.components,
        "end": geo.path.end().as_slice(),
        "speed": m.norm(&start)?,
        "n_samples": geo.path.samples().len(),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(true)
}

fn run_transport(
    manifold: &str,
    params: &[f64],
    path_arg: &str,
    components: Vec<f64>,
    rank_arg: &str,
    steps: usize,
) -> Result<bool> {
    if steps == 0 {
        return Err(Error::InvalidArgument("--steps must be positive".into()));
    }
    let m = presets::manifold_by_name(manifold, params)?;
    let path = parse_path(path_arg, m.dim())?;
    path.validate_in(&m)?;
    let rank = parse_rank(rank_arg)?;
    let input = TensorValue::new(rank, path.start().clone(), components)
        .map_err(|e| Error::InvalidArgument(format!("--components: {e}")))?;
    let output = parallel_transport(&m, &path, &input, steps)?;
    let p = transport_matrix(&m, &path, steps)?;
    let matrix: Vec<Vec<f64>> = (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| p[(i, j)]).collect())
        .collect();
    let report = json!({
        "manifold": m.name(),
        "start": path.start().as_slice(),
        "end": path.end().as_slice(),
        "rank": [rank.n_out, rank.n_in],
        "input": input.components,
        "output": output.components,
        "transport_matrix": matrix,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(true)
}

fn run_convolve(config: &FsPath, csv: Option<&FsPath>) -> Result<bool> {
    let cfg = ExperimentConfig::load(config)?;
    let m = cfg.build_manifold()?;
    let x = cfg.ref_point()?;
    let kernel = cfg.build_kernel(&m, &x)?;
    let field = cfg.build_field(m.name())?;
    let spec = ConvolutionSpec {
        sharing_mode: cfg.sharing_mode,
        output_points: cfg.output_points(),
        steps_per_unit: cfg.steps(),
    };
    let outputs = convolve_field(&m, &kernel, &field, &spec)?;
    let rank = kernel.rank_out();

    let csv_target = csv
        .map(PathBuf::from)
        .or_else(|| cfg.artifacts_dir.as_ref().map(|d| d.join("outputs.csv")));
    if let Some(target) = &csv_target {
        write_outputs_csv(target, &outputs)?;
    }
    let report = json!({
        "manifold": m.name(),
        "rank": [rank.n_out, rank.n_in],
        "outputs": outputs
            .iter()
            .map(|o| json!({"coords": o.base.as_slice(), "components": o.components}))
            .collect::<Vec<_>>(),
        "csv": csv_target,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(true)
}

fn run_check_cmd(name: Option<&str>, config: &FsPath, csv: Option<&FsPath>) -> Result<bool> {
    let cfg = ExperimentConfig::load(config)?;
    let name = match name.or(cfg.check.as_deref()) {
        Some(n) => n.to_string(),
        None => {
            return Err(Error::Config(format!(
                "no check named on the command line or in the config; available: {}",
                CHECK_NAMES.join(", ")
            )))
        }
    };
    let report = run_check(&name, &cfg)?;
    let csv_target = csv.map(PathBuf::from).or_else(|| {
        cfg.artifacts_dir
            .as_ref()
            .map(|d| d.join(format!("{name}_points.csv")))
    });
    if let Some(target) = &csv_target {
        write_points_csv(target, &report)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    eprintln!("{}", report.summary());
    Ok(report.passed())
}

/// Parses `x1,y1;x2,y2;...` into a polyline path.
fn parse_path(arg: &str, dim: usize) -> Result<Path> {
    let points = arg
        .split(';')
        .map(|chunk| {
            let coords = chunk
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidArgument(format!("bad coordinate '{t}'")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if coords.len() != dim {
                return Err(Error::InvalidArgument(format!(
                    "waypoint '{chunk}' needs {dim} coordinates"
                )));
            }
            Ok(PointCoords::new(coords))
        })
        .collect::<Result<Vec<_>>>()?;
    Path::from_points(points).map_err(|e| Error::InvalidArgument(format!("--path: {e}")))
}

fn parse_rank(arg: &str) -> Result<TensorRank> {
    let parts: Vec<&str> = arg.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidArgument(
            "--rank must be 'contravariant,covariant', e.g. 1,0".into(),
        ));
    }
    let n_out = parts[0]
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::InvalidArgument(format!("bad rank '{arg}'")))?;
    let n_in = parts[1]
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::InvalidArgument(format!("bad rank '{arg}'")))?;
    Ok(TensorRank::new(n_out, n_in))
}

fn ensure_parent(path: &FsPath) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

fn write_path_csv(target: &FsPath, path: &Path) -> Result<()> {
    ensure_parent(target)?;
    let mut w = csv::Writer::from_path(target)?;
    let dim = path.dim();
    let mut header = vec!["param".to_string()];
    header.extend((1..=dim).map(|i| format!("coord{i}")));
    w.write_record(&header)?;
    for (t, s) in path.params().iter().zip(path.samples()) {
        let mut row = vec![format!("{t:.17e}")];
        row.extend(s.as_slice().iter().map(|c| format!("{c:.17e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_outputs_csv(target: &FsPath, outputs: &[TensorValue]) -> Result<()> {
    ensure_parent(target)?;
    let mut w = csv::Writer::from_path(target)?;
    let first = outputs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no outputs to write".into()))?;
    let dim = first.base.dim();
    let mut header: Vec<String> = (1..=dim).map(|i| format!("coord{i}")).collect();
    header.extend(component_labels(first.rank, dim, "out_"));
    w.write_record(&header)?;
    for out in outputs {
        let mut row: Vec<String> = out.base.as_slice().iter().map(|c| format!("{c:.17e}")).collect();
        row.extend(out.components.iter().map(|c| format!("{c:.17e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_points_csv(target: &FsPath, report: &CheckReport) -> Result<()> {
    ensure_parent(target)?;
    let mut w = csv::Writer::from_path(target)?;
    let dim = report.points.first().map_or(2, |p| p.coords.len());
    let mut header: Vec<String> = (1..=dim).map(|i| format!("coord{i}")).collect();
    header.push("error".into());
    w.write_record(&header)?;
    for p in &report.points {
        let mut row: Vec<String> = p.coords.iter().map(|c| format!("{c:.17e}")).collect();
        row.push(format!("{:.17e}", p.error));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
