//! Loading configs and datasets, and the ground truth that goes with them.

use std::io::BufReader;
use std::path::{Path, PathBuf};

use swcs::config::{ExperimentConfig, ExperimentKind};
use swcs::io::parse_kspace;
use swcs::metrics::MaskedPair;
use swcs::phantoms::{gaussian_frame, shepp_logan_slice, shepp_logan_slice_mask, slice_position};
use swcs::pipeline::{Acquisition, SolverChoice};
use swcs::simulate::{simulate_gaussians, simulate_shepp_logan};
use swcs::trajectories::{read_csv, RadialScheme};
use swcs::Image;

use crate::error::{io_at, read, read_to_string, CliError, Result};
use crate::manifest::embedded_config;

pub const KSPACE_FILE: &str = "kspace.bin";
pub const TRAJECTORY_FILE: &str = "trajectories.csv";

/// Reads a config file or the config embedded in a run manifest. Relative
/// paths inside it are taken from the file's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = read_to_string(path)?;
    let text = embedded_config(&text).unwrap_or(text);
    let mut cfg = ExperimentConfig::from_toml_str(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    let rebase = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    if let Some(ext) = cfg.external.as_mut() {
        rebase(&mut ext.kspace);
        if let Some(t) = ext.trajectories.as_mut() {
            rebase(t);
        }
    }
    if let Some(o) = cfg.output.as_mut() {
        rebase(o);
    }
    Ok(cfg)
}

/// Command-line settings that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub solver: Option<SolverChoice>,
    pub frames: Option<Vec<usize>>,
}

pub fn apply_overrides(cfg: &mut ExperimentConfig, o: &Overrides) -> Result<()> {
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if let Some(solver) = o.solver {
        cfg.swcs.solver = solver;
    }
    if let Some(frames) = &o.frames {
        cfg.swcs.frames = frames.clone();
    }
    cfg.validate()?;
    Ok(())
}

pub fn output_root(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<PathBuf> {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::invalid("no output directory: pass --out or set `output` in the config"))
}

pub fn frame_name(m: usize) -> String {
    format!("frame_{m:04}")
}

pub fn is_simulated(cfg: &ExperimentConfig) -> bool {
    cfg.kind != ExperimentKind::ExternalKspace
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Acquisition> {
    let noise = cfg.noise_spec();
    let noise = (noise.relative_sigma > 0.0).then_some(&noise);
    let scheme = cfg.scheme();
    let acq = match cfg.kind {
        ExperimentKind::Gaussians => simulate_gaussians(&cfg.gaussian_spec().expect("validated"), &scheme, noise)?,
        ExperimentKind::SheppLogan => simulate_shepp_logan(&cfg.shepp_logan_spec().expect("validated"), &scheme, noise)?,
        ExperimentKind::ExternalKspace => {
            return Err(CliError::invalid("kind = \"external-kspace\" has nothing to simulate"));
        }
    };
    Ok(acq)
}

/// Reads k-space plus trajectories, checking both against the grid section.
/// Without a trajectory file the golden-angle scheme of the grid is assumed.
pub fn read_acquisition(cfg: &ExperimentConfig, kspace: &Path, trajectories: Option<&Path>) -> Result<Acquisition> {
    let data = parse_kspace(&read(kspace)?).map_err(|e| CliError::invalid(format!("{}: {e}", kspace.display())))?;
    let (m, k) = (data.trajectory_count(), data.k());
    if m != cfg.grid.trajectories || k != cfg.samples() {
        return Err(CliError::invalid(format!(
            "{} holds {m} trajectories of {k} samples, but the grid expects {} of {}",
            kspace.display(),
            cfg.grid.trajectories,
            cfg.samples()
        )));
    }
    let trajs = match trajectories {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(io_at(path))?;
            read_csv(BufReader::new(file), m / 2 + 1).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?
        }
        None => RadialScheme { samples: k, ..RadialScheme::for_image(cfg.grid.n, m) }.trajectories()?,
    };
    Ok(Acquisition::new(cfg.grid.n, trajs, data)?)
}

/// The acquisition a `reconstruct` or `sweep` run works on: a dataset
/// directory when given, the external k-space file, or a fresh simulation.
pub fn acquisition(cfg: &ExperimentConfig, data_dir: Option<&Path>) -> Result<Acquisition> {
    if let Some(dir) = data_dir {
        return read_acquisition(cfg, &dir.join(KSPACE_FILE), Some(&dir.join(TRAJECTORY_FILE)));
    }
    match &cfg.external {
        Some(ext) if cfg.kind == ExperimentKind::ExternalKspace => {
            read_acquisition(cfg, &ext.kspace, ext.trajectories.as_deref())
        }
        _ => simulate(cfg),
    }
}

/// Per-component noise level for the fidelity bound: the configured value,
/// or the relative noise level scaled by the largest sample.
pub fn noise_std(cfg: &ExperimentConfig, acq: &Acquisition) -> f64 {
    if cfg.swcs.noise_std > 0.0 {
        cfg.swcs.noise_std
    } else {
        cfg.noise.relative_sigma * acq.data.max_abs()
    }
}

/// Ground-truth frame `m` and the pixels RMSE is measured over.
#[derive(Debug, Clone)]
pub struct Truth {
    pub image: Image,
    pub mask: Vec<bool>,
}

impl Truth {
    pub fn rmse(&self, img: &Image) -> Result<f64> {
        Ok(swcs::metrics::rmse(&MaskedPair::from_images(img, &self.image, &self.mask)?))
    }
}

/// `None` for external data, which has no ground truth.
pub fn truth(cfg: &ExperimentConfig, m: usize) -> Result<Option<Truth>> {
    let n = cfg.grid.n;
    Ok(match cfg.kind {
        ExperimentKind::Gaussians => {
            let spec = cfg.gaussian_spec().expect("validated");
            let t = cfg.scheme().frame_time(m);
            Some(Truth { image: gaussian_frame(&spec, t)?, mask: vec![true; n * n] })
        }
        ExperimentKind::SheppLogan => {
            let spec = cfg.shepp_logan_spec().expect("validated");
            let z = slice_position(m, &spec);
            Some(Truth { image: shepp_logan_slice(&spec, z)?, mask: shepp_logan_slice_mask(&spec, z)? })
        }
        ExperimentKind::ExternalKspace => None,
    })
}

/// RMSE mask for frame `m` without rasterizing the whole truth.
pub fn truth_mask(cfg: &ExperimentConfig, m: usize) -> Result<Vec<bool>> {
    let n = cfg.grid.n;
    Ok(match cfg.kind {
        ExperimentKind::SheppLogan => {
            let spec = cfg.shepp_logan_spec().expect("validated");
            shepp_logan_slice_mask(&spec, slice_position(m, &spec))?
        }
        _ => vec![true; n * n],
    })
}
