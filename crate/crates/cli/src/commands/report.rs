use std::fmt::Write as _;

use crate::commands::{metrics, reconstruct, sweep};
use crate::error::{read_to_string, CliError, Result};
use crate::manifest::{Manifest, MANIFEST_FILE};
use crate::output::OutputDir;
use crate::ReportArgs;

pub const REPORT_FILE: &str = "report.txt";

fn summarize(m: &Manifest, s: &mut String) {
    let c = &m.config;
    let _ = writeln!(s, "command      {} (swcs {})", m.command, m.version);
    let _ = writeln!(s, "config hash  {}", m.config_hash);
    let _ = writeln!(s, "seed         {}", m.seed);
    let _ = writeln!(s, "experiment   {:?}, {}x{} grid, {} trajectories", c.kind, c.grid.n, c.grid.n, c.grid.trajectories);
    let _ = writeln!(
        s,
        "windows      estimate span {}, residual span {}, solver {}",
        c.swcs.estimate_span,
        c.swcs.residual_span,
        c.swcs.solver.name()
    );
    if m.noise_std > 0.0 {
        let _ = writeln!(s, "noise std    {:e}", m.noise_std);
    }
    let _ = writeln!(s, "frames       {} written, {} failed", m.frames.len(), m.failures.len());
    for f in &m.failures {
        let _ = writeln!(s, "  frame {} failed: {}", f.frame, f.error);
    }
    if !m.diagnostics.is_empty() {
        let _ = writeln!(s, "\n{:>6} {:>11} {:>11} {:>6} {:>11} {:>11} {:>5}", "frame", "estimate", "residual", "iters", "|r| start", "|r| end", "conv");
        for d in &m.diagnostics {
            let g = &d.diagnostics;
            let window = |w: [usize; 2], clamped: bool| format!("{}-{}{}", w[0], w[1], if clamped { "*" } else { "" });
            let _ = writeln!(
                s,
                "{:>6} {:>11} {:>11} {:>6} {:>11.4e} {:>11.4e} {:>5}",
                d.frame,
                window(g.estimate_window, g.estimate_clamped),
                window(g.residual_window, g.residual_clamped),
                g.solver_iterations,
                g.data_residual_initial,
                g.data_residual_final,
                if g.solver_converged { "yes" } else { "no" }
            );
        }
        if m.diagnostics.iter().any(|d| d.diagnostics.estimate_clamped || d.diagnostics.residual_clamped) {
            let _ = writeln!(s, "(* window shifted to fit inside the acquisition)");
        }
    }
}

/// Prints a plain-text summary of the manifest and any result tables in
/// the run directory.
pub fn run(args: &ReportArgs) -> Result<()> {
    let mut s = String::new();
    let has_manifest = args.run.join(MANIFEST_FILE).exists();
    if has_manifest {
        summarize(&Manifest::load(&args.run)?, &mut s);
    }
    let mut tables = 0;
    for name in [reconstruct::RMSE_FILE, metrics::FWHM_FILE, metrics::TIMES_FILE, sweep::BEST_FILE] {
        let path = args.run.join(name);
        if path.exists() {
            let _ = write!(s, "\n{name}\n{}", read_to_string(&path)?);
            tables += 1;
        }
    }
    if !has_manifest && tables == 0 {
        return Err(CliError::invalid(format!("{} holds no manifest or result tables", args.run.display())));
    }
    print!("{s}");
    if let Some(dir) = &args.out {
        let mut out = OutputDir::create(dir)?;
        out.write(REPORT_FILE, s.as_bytes())?;
        out.commit();
    }
    Ok(())
}
