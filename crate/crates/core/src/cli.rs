//! `planforge` command line.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::pipeline::{self, Config};
use crate::synth::{self, FloorSpec};
use crate::types::SceneScale;
use crate::{evaluate, plan_io, svg};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "PLANFORGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "planforge", version, about = "Floor plans from corner depth captures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reconstruct a floor plan from a capture manifest.
    Reconstruct {
        manifest: PathBuf,
        /// Output plan file.
        #[arg(short, long)]
        out: PathBuf,
        /// Also render the plan as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Boundary alignment distance, m.
        #[arg(long, default_value_t = crate::assemble::DEFAULT_SNAP_DIST)]
        snap_dist: f64,
        /// Near-collinear merge angle, degrees.
        #[arg(long, default_value_t = crate::assemble::DEFAULT_SNAP_ANGLE_DEG)]
        snap_angle_deg: f64,
        /// Cap on edge points per capture.
        #[arg(long, default_value_t = crate::backproject::DEFAULT_MAX_POINTS)]
        max_points: usize,
        /// Dump clouds, boundaries, means and wedges into this directory.
        #[arg(long)]
        keep_intermediates: Option<PathBuf>,
    },
    /// Compare a plan with ground truth.
    Eval {
        plan: PathBuf,
        ground_truth: PathBuf,
        /// Also write the report here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset from a floor spec.
    Synth {
        spec: PathBuf,
        out_dir: PathBuf,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a plan file as SVG.
    Render { plan: PathBuf, svg: PathBuf },
}

fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Reconstruct {
            manifest,
            out,
            svg: svg_path,
            seed,
            snap_dist,
            snap_angle_deg,
            max_points,
            keep_intermediates,
        } => {
            let cfg = Config { seed, snap_dist, snap_angle_deg, max_points, keep_intermediates, ..Config::default() };
            let rec = pipeline::reconstruct_path(&manifest, &cfg)?;
            plan_io::write_plan(&rec.plan, &out)?;
            if let Some(p) = svg_path {
                write_text(&p, &svg::render_svg(&rec.plan))?;
            }
            for r in &rec.plan.rooms {
                println!("{}\t{:.6} m^2", r.id, r.area());
            }
            Ok(())
        }
        Command::Eval { plan, ground_truth, out } => {
            let plan = plan_io::read_plan(&plan)?;
            let gt: synth::GroundTruth = plan_io::read_json(&ground_truth)?;
            let report = evaluate::evaluate(&plan, &gt)?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| Error::invalid("report", e.to_string()))?;
            println!("{text}");
            if let Some(p) = out {
                write_text(&p, &format!("{text}\n"))?;
            }
            Ok(())
        }
        Command::Synth { spec, out_dir, seed } => {
            let mut floor: FloorSpec = plan_io::read_json(&spec)?;
            if let Some(s) = seed {
                floor.seed = s;
            }
            let (manifest, gt) = synth::generate(
                &floor,
                &synth::default_intrinsics(),
                SceneScale::new(synth::DEFAULT_SCALE)?,
                &out_dir,
            )?;
            println!(
                "{} captures, {} rooms written to {}",
                manifest.capture_count(),
                gt.rooms.len(),
                out_dir.display()
            );
            Ok(())
        }
        Command::Render { plan, svg: svg_path } => {
            let plan = plan_io::read_plan(&plan)?;
            write_text(&svg_path, &svg::render_svg(&plan))
        }
    }
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::invalid("environment", format!("{THREADS_ENV}={v:?} must be a positive integer"))),
        },
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 success, 1 input error, 2 pipeline error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = thread_cap().and_then(|cap| match cap {
        None => execute(cli.command),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid("thread pool", e.to_string()))?
            .install(|| execute(cli.command)),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
