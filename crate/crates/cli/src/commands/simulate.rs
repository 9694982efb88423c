use swcs::io::{write_kspace, write_pgm, write_real_f32};
use swcs::trajectories::write_csv;

use crate::error::Result;
use crate::experiment::{apply_overrides, frame_name, load_config, output_root, simulate, truth, KSPACE_FILE, TRAJECTORY_FILE};
use crate::manifest::{Manifest, MANIFEST_FILE};
use crate::output::OutputDir;
use crate::RunArgs;

/// Writes `kspace.bin`, `trajectories.csv`, `truth/frame_XXXX.{f32,pgm}` for
/// the configured frames (all when none are listed) and the manifest.
pub fn run(args: &RunArgs) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    apply_overrides(&mut cfg, &args.overrides())?;
    let acq = simulate(&cfg)?;
    let mut out = OutputDir::create(&output_root(&cfg, args.out.as_deref())?)?;
    out.write_with(KSPACE_FILE, |w| write_kspace(w, &acq.data))?;
    out.write_with(TRAJECTORY_FILE, |w| Ok(write_csv(w, &acq.trajectories)?))?;
    let frames = cfg.swcs.frame_list(acq.total());
    for &m in &frames {
        let t = truth(&cfg, m)?.expect("simulated data has a ground truth");
        let mag = t.image.magnitude();
        out.write_with(format!("truth/{}.f32", frame_name(m)), |w| write_real_f32(w, &mag))?;
        out.write_with(format!("truth/{}.pgm", frame_name(m)), |w| write_pgm(w, cfg.grid.n, &mag))?;
    }
    let mut manifest = Manifest::new("simulate", &cfg);
    manifest.frames = frames;
    out.write(MANIFEST_FILE, manifest.to_toml_string().as_bytes())?;
    println!(
        "simulated {} trajectories x {} samples, {} truth frames -> {}",
        acq.total(),
        acq.data.k(),
        manifest.frames.len(),
        out.root().display()
    );
    out.commit();
    Ok(())
}
