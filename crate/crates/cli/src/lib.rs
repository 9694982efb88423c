//! `swcs` command-line front end: simulate datasets, reconstruct them,
//! score the results, sweep solver parameters and summarize runs.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod manifest;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use swcs::pipeline::SolverChoice;

pub use error::{CliError, Result};
use experiment::Overrides;

#[derive(Debug, Parser)]
#[command(name = "swcs", version, about = "Sliding-window compressed-sensing reconstruction of dynamic radial MRI")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a phantom acquisition: k-space, trajectories and ground truth.
    Simulate(RunArgs),
    /// Reconstruct frames from a dataset, an external k-space file or a fresh simulation.
    Reconstruct {
        #[command(flatten)]
        run: RunArgs,
        /// Dataset directory written by `simulate`.
        #[arg(long, value_name = "DIR")]
        data: Option<PathBuf>,
    },
    /// Score a reconstruction against the ground truth of its dataset.
    Metrics(MetricsArgs),
    /// Reconstruct over a grid of solver parameters and report the best point.
    Sweep(RunArgs),
    /// Summarize a run directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Frames to process, e.g. `152,600` or `301-701:2`.
    #[arg(long, value_name = "LIST", value_parser = parse_frames)]
    pub frames: Option<FrameList>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_solver)]
    pub solver: Option<SolverChoice>,
}

impl RunArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, solver: self.solver, frames: self.frames.clone().map(|f| f.0) }
    }

    pub fn workers(&self) -> usize {
        self.workers.map(|w| w as usize).unwrap_or_else(default_workers)
    }
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Run directory written by `reconstruct`.
    #[arg(long, value_name = "DIR")]
    pub recon: PathBuf,
    /// Dataset directory written by `simulate`.
    #[arg(long, value_name = "DIR")]
    pub truth: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long, value_name = "DIR")]
    pub run: PathBuf,
    /// Also write the report to `DIR/report.txt`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn parse_solver(s: &str) -> std::result::Result<SolverChoice, String> {
    s.parse().map_err(|e: swcs::SwcsError| e.to_string())
}

/// Sorted, deduplicated frame indices from `--frames`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameList(pub Vec<usize>);

/// Comma-separated frames and inclusive ranges `a-b`, optionally strided
/// as `a-b:s`. The result is sorted and deduplicated.
pub fn parse_frames(s: &str) -> std::result::Result<FrameList, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a frame number"));
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        match part.split_once('-') {
            None => out.push(num(part)?),
            Some((a, rest)) => {
                let (b, step) = match rest.split_once(':') {
                    Some((b, st)) => (num(b)?, num(st)?),
                    None => (num(rest)?, 1),
                };
                let a = num(a)?;
                if step == 0 || b < a {
                    return Err(format!("bad range `{part}`"));
                }
                out.extend((a..=b).step_by(step));
            }
        }
    }
    if out.is_empty() {
        return Err("empty frame list".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(FrameList(out))
}

/// Runs one parsed command, writing progress and summaries to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => commands::simulate::run(&args),
        Command::Reconstruct { run, data } => commands::reconstruct::run(&run, data.as_deref()),
        Command::Metrics(args) => commands::metrics::run(&args),
        Command::Sweep(args) => commands::sweep::run(&args),
        Command::Report(args) => commands::report::run(&args),
    }
}
