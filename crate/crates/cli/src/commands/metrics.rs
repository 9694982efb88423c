use std::path::Path;

use swcs::config::{ExperimentConfig, ExperimentKind};
use swcs::io::{parse_complex_image, parse_real_image};
use swcs::metrics::{
    fwhm, midpoint_half_max_times, separability_times, theoretical_fwhm, theoretical_t0, theoretical_t2, Profile,
    ProfileSequence,
};
use swcs::Image;

use super::num;
use crate::error::{read, CliError, Result};
use crate::experiment::{frame_name, truth_mask, Truth};
use crate::manifest::Manifest;
use crate::output::OutputDir;
use crate::MetricsArgs;

pub const FWHM_FILE: &str = "fwhm.csv";
pub const TIMES_FILE: &str = "times.csv";

struct Frame {
    m: usize,
    time: i64,
    estimate: Image,
    recon: Image,
    truth: Truth,
}

fn load_frames(recon_dir: &Path, truth_dir: &Path, recon: &Manifest, truth: &Manifest) -> Result<Vec<Frame>> {
    let n = recon.config.grid.n;
    if truth.config.grid != recon.config.grid {
        return Err(CliError::invalid("reconstruction and dataset were made on different grids"));
    }
    let missing: Vec<usize> = recon.frames.iter().copied().filter(|m| !truth.frames.contains(m)).collect();
    if !missing.is_empty() {
        return Err(CliError::invalid(format!("frame-set mismatch: no ground truth for frames {missing:?}")));
    }
    if recon.frames.is_empty() {
        return Err(CliError::invalid(format!("{} has no reconstructed frames", recon_dir.display())));
    }
    let scheme = recon.config.scheme();
    let bad = |p: &Path, e: swcs::SwcsError| CliError::invalid(format!("{}: {e}", p.display()));
    recon
        .frames
        .iter()
        .map(|&m| {
            let base = recon_dir.join("frames").join(frame_name(m));
            let load = |suffix: &str| {
                let p = base.with_file_name(format!("{}_{suffix}.c32", frame_name(m)));
                parse_complex_image(&read(&p)?, n).map_err(|e| bad(&p, e))
            };
            let tp = truth_dir.join("truth").join(format!("{}.f32", frame_name(m)));
            let image = parse_real_image(&read(&tp)?, n).map_err(|e| bad(&tp, e))?;
            Ok(Frame {
                m,
                time: scheme.frame_time(m),
                estimate: load("estimate")?,
                recon: load("recon")?,
                truth: Truth { image, mask: truth_mask(&truth.config, m)? },
            })
        })
        .collect()
}

fn fwhm_cell(img: &Image) -> String {
    Profile::from_image(img).and_then(|p| fwhm(&p)).map(num).unwrap_or_else(|_| "nan".into())
}

fn times_row(name: &str, frames: &[Frame], pick: impl Fn(&Frame) -> &Image, cfg: &ExperimentConfig) -> Result<String> {
    let profiles = frames.iter().map(|f| Ok((f.time, Profile::from_image(pick(f))?))).collect::<swcs::Result<Vec<_>>>()?;
    let seq = ProfileSequence::new(profiles)?;
    let (t0, t1) = midpoint_half_max_times(&seq);
    let (t2, t3) = separability_times(&seq, &cfg.metrics.peak_detection);
    Ok(format!("{name},{t0},{t1},{t2},{t3}\n"))
}

/// Writes `rmse.csv`, plus `fwhm.csv` and `times.csv` for Gaussian phantoms.
/// Times are signed frame times; see the README for the sentinels.
pub fn run(args: &MetricsArgs) -> Result<()> {
    let recon = Manifest::load(&args.recon)?.expect_command(&args.recon, "reconstruct")?;
    let truth = Manifest::load(&args.truth)?.expect_command(&args.truth, "simulate")?;
    let frames = load_frames(&args.recon, &args.truth, &recon, &truth)?;
    let mut out = OutputDir::create(&args.out)?;

    let mut rmse = String::from("frame,time,estimate_rmse,swcs_rmse\n");
    for f in &frames {
        rmse += &format!("{},{},{},{}\n", f.m, f.time, num(f.truth.rmse(&f.estimate)?), num(f.truth.rmse(&f.recon)?));
    }
    out.write(super::reconstruct::RMSE_FILE, rmse.as_bytes())?;

    if truth.config.kind == ExperimentKind::Gaussians {
        let spec = truth.config.gaussian_spec().expect("validated");
        let theory = if spec.velocity == 0.0 { num(theoretical_fwhm(spec.sigma)) } else { "nan".into() };
        let mut csv = String::from("frame,time,estimate,swcs,truth,theory\n");
        for f in &frames {
            csv += &format!(
                "{},{},{},{},{},{theory}\n",
                f.m,
                f.time,
                fwhm_cell(&f.estimate),
                fwhm_cell(&f.recon),
                fwhm_cell(&f.truth.image)
            );
        }
        out.write(FWHM_FILE, csv.as_bytes())?;

        let cfg = &recon.config;
        let mut csv = String::from("series,t0,t1,t2,t3\n");
        csv += &times_row("estimate", &frames, |f| &f.estimate, cfg)?;
        csv += &times_row("swcs", &frames, |f| &f.recon, cfg)?;
        csv += &times_row("truth", &frames, |f| &f.truth.image, cfg)?;
        let cell = |t: Option<f64>, sign: f64| t.map(|t| num(sign * t)).unwrap_or_else(|| "unresolved".into());
        let (t0, t2) = (theoretical_t0(&spec), theoretical_t2(&spec));
        csv += &format!("theory,{},{},{},{}\n", cell(t0, 1.0), cell(t0, -1.0), cell(t2, 1.0), cell(t2, -1.0));
        out.write(TIMES_FILE, csv.as_bytes())?;
    }
    println!("scored {} frames -> {}", frames.len(), out.root().display());
    out.commit();
    Ok(())
}
