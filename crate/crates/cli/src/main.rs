//! `poreaxis` command-line driver.
//!
//! Exit status: 0 on success, 1 when validation fails (bad input files,
//! failed comparison), 2 on usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use poreaxis::geom::Point;
use poreaxis::io;
use poreaxis::oracle;
use poreaxis::render::{self, RenderOptions};
use poreaxis::tracer::{self, TraceConfig};

#[derive(Parser)]
#[command(name = "poreaxis", version, about = "Pore-network extraction by tracing medial axes of a continuous distance field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract a pore network and write pores.csv, throats.csv and network.json.
    Extract {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rasterize the scene and write the grid distance map and ridge set.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Cell size.
        #[arg(long, value_parser = positive)]
        eps: f64,
        /// Output directory for dist.csv and ridge.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check an extracted network against a grid ridge set; exits 1 on failure.
    Compare {
        /// Directory holding network.json.
        #[arg(long)]
        network: PathBuf,
        /// Cell size of the ridge set.
        #[arg(long, value_parser = positive)]
        eps: f64,
        /// ridge.csv written by `oracle`; computed from --scene when omitted.
        #[arg(long, required_unless_present = "scene")]
        ridge: Option<PathBuf>,
        #[arg(long)]
        scene: Option<PathBuf>,
    },
    /// Compare grid cost against traced distance evaluations over a list of cell sizes.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated cell sizes; taken from the config file when omitted.
        #[arg(long, value_delimiter = ',', value_parser = positive)]
        eps: Vec<f64>,
    },
    /// Draw a network as SVG (2D) or legacy VTK (chosen by the --out extension).
    Render {
        #[arg(long)]
        scene: PathBuf,
        /// Directory holding network.json.
        #[arg(long)]
        network: PathBuf,
        /// Output file ending in .svg or .vtk.
        #[arg(long)]
        out: PathBuf,
        /// Optional ridge.csv overlay (SVG only); needs --eps.
        #[arg(long, requires = "eps")]
        ridge: Option<PathBuf>,
        #[arg(long, value_parser = positive)]
        eps: Option<f64>,
        /// JSON run configuration whose `render` section sets colors and widths.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Scene document (JSON).
    #[arg(long)]
    scene: PathBuf,
    /// JSON run configuration (`trace`, `render`, `eps` sections); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Starting point for the first ascent, `x,y[,z]`.
    #[arg(long, value_parser = point)]
    seed_point: Option<Point>,
    /// Keep dead-end pores and throats in the output.
    #[arg(long)]
    keep_dead_ends: Option<bool>,
    /// Worker threads for extraction (output does not depend on it).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
}

/// Contents of a `--config` file; every section is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    trace: TraceConfig,
    render: RenderOptions,
    eps: Vec<f64>,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn point(s: &str) -> std::result::Result<Point, String> {
    let coords: Vec<f64> = s
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format!("bad coordinate in `{s}`: {e}"))?;
    Point::from_slice(&coords).ok_or_else(|| format!("expected 2 or 3 coordinates, got {}", coords.len()))
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else { return Ok(RunConfig::default()) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if cfg.eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        bail!("{}: eps values must be positive", path.display());
    }
    Ok(cfg)
}

impl Common {
    fn setup(&self) -> Result<(poreaxis::scene::Scene, RunConfig)> {
        let scene = io::load_scene(&self.scene)?;
        let mut cfg = load_config(self.config.as_deref())?;
        if let Some(p) = self.seed_point {
            cfg.trace.seed = Some(p);
        }
        if let Some(k) = self.keep_dead_ends {
            cfg.trace.keep_dead_ends = k;
        }
        cfg.trace.validate()?;
        Ok((scene, cfg))
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Extract { common, out } => {
            let (scene, cfg) = common.setup()?;
            let net = tracer::extract_network_with_threads(&scene, &cfg.trace, common.threads as usize)?;
            io::export_network(&net, &out)?;
            let stats = poreaxis::network::stats(&net);
            println!(
                "{} pores, {} throats, {} distance evaluations{}",
                net.pores.len(),
                net.throats.len(),
                net.provenance.counters.dist_evaluations,
                if net.provenance.complete { "" } else { " (incomplete: budget exhausted)" }
            );
            println!("{}", serde_json::to_string(&stats)?);
            Ok(true)
        }
        Command::Oracle { common, eps, out } => {
            let (scene, cfg) = common.setup()?;
            let grid = oracle::grid_distance_transform(oracle::rasterize(&scene, eps)?)?;
            let ridge = oracle::grid_ridge(&grid, cfg.trace.frontier.ridge_angle_min)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            oracle::write_dist_csv(&grid, &out.join("dist.csv"))?;
            oracle::write_ridge_csv(&ridge, &out.join("ridge.csv"))?;
            println!("{} cells, {} void, {} ridge cells", grid.cell_count(), grid.void_count(), ridge.len());
            Ok(true)
        }
        Command::Compare { network, eps, ridge, scene } => {
            let net = io::import_network(&network)?;
            let ridge = match (ridge, scene) {
                (Some(path), _) => oracle::read_ridge_csv(&path, net.dim, eps)?,
                (None, Some(scene)) => {
                    let scene = io::load_scene(&scene)?;
                    let grid = oracle::grid_distance_transform(oracle::rasterize(&scene, eps)?)?;
                    oracle::grid_ridge(&grid, TraceConfig::default().frontier.ridge_angle_min)?
                }
                (None, None) => unreachable!("clap requires --ridge or --scene"),
            };
            let report = oracle::compare(&net, &ridge, eps)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            println!("{}", if report.pass { "PASS" } else { "FAIL" });
            Ok(report.pass)
        }
        Command::Bench { common, eps } => {
            let (scene, cfg) = common.setup()?;
            let eps = if eps.is_empty() { cfg.eps.clone() } else { eps };
            if eps.is_empty() {
                bail!("no cell sizes given (use --eps or the config `eps` list)");
            }
            let mut traced = Vec::new();
            let mut grids = Vec::new();
            for &e in &eps {
                let net = tracer::extract_network_with_threads(&scene, &cfg.trace, common.threads as usize)?;
                traced.push(net.provenance.counters);
                let grid = oracle::grid_distance_transform(oracle::rasterize(&scene, e)?)?;
                oracle::grid_ridge(&grid, cfg.trace.frontier.ridge_angle_min)?;
                grids.push(grid.cost(scene.length_scale()));
            }
            let report = oracle::complexity_report(scene.dim(), &traced, &grids);
            println!("{:>10} {:>10} {:>14} {:>14} {:>12} {:>10}", "eps", "L/eps", "grid_cells", "traced_evals", "ratio", "rel_cost");
            let base = report.rows.first().map_or(1, |r| r.grid_cells) as f64;
            for r in &report.rows {
                println!(
                    "{:>10} {:>10.3} {:>14} {:>14} {:>12.3} {:>10.3}",
                    r.eps,
                    r.l_over_eps,
                    r.grid_cells,
                    r.traced_evaluations,
                    r.ratio,
                    r.grid_cells as f64 / base
                );
            }
            println!("grid exponent: {:.4}", report.grid_exponent);
            println!("traced exponent: {:.4}", report.traced_exponent);
            println!("pores + throats: {}", report.centers);
            println!("per-center ratio (d=3, L/eps=10): {}", oracle::per_center_ratio(10.0, 3));
            Ok(true)
        }
        Command::Render { scene, network, out, ridge, eps, config } => {
            let scene = io::load_scene(&scene)?;
            let net = io::import_network(&network)?;
            let cfg = load_config(config.as_deref())?;
            let ext = out.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
            let body = match ext.as_str() {
                "svg" => {
                    let ridge = match (ridge, eps) {
                        (Some(path), Some(e)) => Some(oracle::read_ridge_csv(&path, net.dim, e)?),
                        _ => None,
                    };
                    render::render_svg(&net, &scene, ridge.as_ref(), &cfg.render)?
                }
                "vtk" => render::render_vtk(&net),
                _ => bail!("output must end in .svg or .vtk: {}", out.display()),
            };
            std::fs::write(&out, body).with_context(|| format!("writing {}", out.display()))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
