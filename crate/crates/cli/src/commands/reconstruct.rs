use std::path::Path;

use swcs::io::{write_complex_f32, write_convergence_csv, write_pgm};
use swcs::pipeline::{reconstruct_sequence, FrameResult};

use super::num;
use crate::error::Result;
use crate::experiment::{acquisition, apply_overrides, frame_name, load_config, noise_std, output_root, truth};
use crate::manifest::{FrameFailure, FrameRecord, Manifest, MANIFEST_FILE};
use crate::output::OutputDir;
use crate::RunArgs;

pub const RMSE_FILE: &str = "rmse.csv";

/// Per frame: `frames/frame_XXXX_{estimate,residual,recon}.c32`, magnitude
/// previews of the estimate and reconstruction, and the solver's residual
/// history. Simulated runs also get `rmse.csv`. Frames that fail are
/// recorded in the manifest and the run carries on.
pub fn run(args: &RunArgs, data: Option<&Path>) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    apply_overrides(&mut cfg, &args.overrides())?;
    let acq = acquisition(&cfg, data)?;
    let mut swcs_cfg = cfg.swcs.clone();
    swcs_cfg.noise_std = noise_std(&cfg, &acq);
    let results = reconstruct_sequence(&acq, &swcs_cfg, args.workers())?;
    let frames = swcs_cfg.frame_list(acq.total());

    let mut out = OutputDir::create(&output_root(&cfg, args.out.as_deref())?)?;
    let mut manifest = Manifest::new("reconstruct", &cfg);
    manifest.noise_std = swcs_cfg.noise_std;
    let mut rmse_rows = Vec::new();
    for (m, res) in frames.iter().zip(results) {
        match res {
            Ok(r) => {
                write_frame(&mut out, &r, cfg.grid.n)?;
                if let Some(t) = truth(&cfg, r.frame)? {
                    rmse_rows.push((r.frame, t.rmse(&r.estimate)?, t.rmse(&r.reconstruction)?));
                }
                manifest.frames.push(r.frame);
                manifest.diagnostics.push(FrameRecord { frame: r.frame, diagnostics: r.diagnostics });
            }
            Err(e) => {
                eprintln!("warning: frame {m} failed: {e}");
                manifest.failures.push(FrameFailure { frame: *m, error: e.to_string() });
            }
        }
    }
    if !rmse_rows.is_empty() {
        let scheme = cfg.scheme();
        let mut csv = String::from("frame,time,estimate_rmse,swcs_rmse\n");
        for (m, e, s) in &rmse_rows {
            csv += &format!("{m},{},{},{}\n", scheme.frame_time(*m), num(*e), num(*s));
        }
        out.write(RMSE_FILE, csv.as_bytes())?;
    }
    out.write(MANIFEST_FILE, manifest.to_toml_string().as_bytes())?;
    println!(
        "reconstructed {} frames ({} failed) with {} -> {}",
        manifest.frames.len(),
        manifest.failures.len(),
        cfg.swcs.solver.name(),
        out.root().display()
    );
    for (m, e, s) in &rmse_rows {
        println!("frame {m}: estimate rmse {e:.4}, swcs rmse {s:.4}");
    }
    out.commit();
    Ok(())
}

fn write_frame(out: &mut OutputDir, r: &FrameResult, n: usize) -> Result<()> {
    let base = format!("frames/{}", frame_name(r.frame));
    out.write_with(format!("{base}_estimate.c32"), |w| write_complex_f32(w, &r.estimate))?;
    out.write_with(format!("{base}_residual.c32"), |w| write_complex_f32(w, &r.residual))?;
    out.write_with(format!("{base}_recon.c32"), |w| write_complex_f32(w, &r.reconstruction))?;
    out.write_with(format!("{base}_estimate.pgm"), |w| write_pgm(w, n, &r.estimate.magnitude()))?;
    out.write_with(format!("{base}_recon.pgm"), |w| write_pgm(w, n, &r.reconstruction.magnitude()))?;
    let residuals: Vec<f64> = r.diagnostics.solver_log.iter().map(|s| s.0).collect();
    out.write_with(format!("{base}_solver.csv"), |w| write_convergence_csv(w, &residuals))?;
    Ok(())
}
