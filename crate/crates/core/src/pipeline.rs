//! Per-frame reconstruction `x = x_M + dx`: a Hamming-weighted estimate from
//! the wide window plus a sparse residual recovered from the narrow window,
//! both centered on the frame being reconstructed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cg::CgConfig;
use crate::error::{Result, SwcsError};
use crate::estimate::reconstruct_estimate;
use crate::image::Image;
use crate::operators::{ForwardOperator, KSpaceData, WindowWeights};
use crate::solvers::{komp_solve, residual_data, split_bregman_solve, KompConfig, ResidualProblem, SplitBregmanConfig};
use crate::trajectories::{sliding_window, Trajectory, WindowSelection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    Komp,
    #[default]
    Bregman,
    /// Estimate only; the residual is forced to zero.
    None,
}

impl std::str::FromStr for SolverChoice {
    type Err = SwcsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "komp" => Ok(SolverChoice::Komp),
            "bregman" => Ok(SolverChoice::Bregman),
            "none" => Ok(SolverChoice::None),
            other => Err(SwcsError::param("solver", format!("expected komp, bregman or none, got `{other}`"))),
        }
    }
}

impl SolverChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SolverChoice::Komp => "komp",
            SolverChoice::Bregman => "bregman",
            SolverChoice::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMode {
    /// One estimate per frame from the window centered on it.
    #[default]
    Sliding,
    /// A single estimate from every trajectory, shared by all frames.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwcsConfig {
    /// Estimate window span: `estimate_span + 1` trajectories.
    pub estimate_span: usize,
    /// Residual window span: `residual_span + 1` trajectories.
    pub residual_span: usize,
    pub solver: SolverChoice,
    pub estimate_mode: EstimateMode,
    pub estimate_cg: CgConfig,
    pub komp: KompConfig,
    pub bregman: SplitBregmanConfig,
    /// Per-component noise standard deviation of the data (0 if unknown/noiseless).
    pub noise_std: f64,
    /// Fidelity bound as a multiple of the expected noise energy of the window.
    pub epsilon_factor: f64,
    /// Lower bound on the fidelity bound, relative to `||r||^2`.
    pub epsilon_relative_floor: f64,
    /// Frames (trajectory indices) to reconstruct; empty means all.
    pub frames: Vec<usize>,
}

impl Default for SwcsConfig {
    fn default() -> Self {
        SwcsConfig {
            estimate_span: 304,
            residual_span: 72,
            solver: SolverChoice::default(),
            estimate_mode: EstimateMode::default(),
            estimate_cg: CgConfig::default(),
            komp: KompConfig::default(),
            bregman: SplitBregmanConfig::default(),
            noise_std: 0.0,
            epsilon_factor: 1.1,
            epsilon_relative_floor: 1e-8,
            frames: Vec::new(),
        }
    }
}

impl SwcsConfig {
    pub fn validate(&self, total: usize) -> Result<()> {
        if self.residual_span == 0 || self.residual_span % 2 != 0 || self.estimate_span % 2 != 0 {
            return Err(SwcsError::param("swcs.residual_span", "window spans must be even and positive"));
        }
        let too_wide = match self.solver {
            SolverChoice::None => self.residual_span > self.estimate_span,
            _ => self.residual_span >= self.estimate_span,
        };
        if too_wide {
            return Err(SwcsError::param("swcs.residual_span", "residual window must be narrower than the estimate window"));
        }
        if self.estimate_span >= total {
            return Err(SwcsError::param("swcs.estimate_span", format!("must be smaller than {total} trajectories")));
        }
        if let Some(&f) = self.frames.iter().find(|&&f| f == 0 || f > total) {
            return Err(SwcsError::FrameOutOfRange { frame: f as i64, min: 1, max: total as i64 });
        }
        if !(self.noise_std >= 0.0 && self.epsilon_factor >= 0.0 && self.epsilon_relative_floor >= 0.0) {
            return Err(SwcsError::param("swcs.noise_std", "noise and fidelity settings must be non-negative"));
        }
        self.estimate_cg.validate()?;
        match self.solver {
            SolverChoice::Komp => self.komp.validate(),
            SolverChoice::Bregman => self.bregman.validate(),
            SolverChoice::None => Ok(()),
        }
    }

    pub fn frame_list(&self, total: usize) -> Vec<usize> {
        if self.frames.is_empty() {
            (1..=total).collect()
        } else {
            self.frames.clone()
        }
    }
}

/// A complete acquisition: every trajectory and its samples, in order.
#[derive(Debug, Clone)]
pub struct Acquisition {
    pub n: usize,
    pub trajectories: Vec<Trajectory>,
    pub data: KSpaceData,
}

impl Acquisition {
    pub fn new(n: usize, trajectories: Vec<Trajectory>, data: KSpaceData) -> Result<Self> {
        let indices: Vec<usize> = trajectories.iter().map(|t| t.index).collect();
        if indices.as_slice() != data.trajectory_indices() {
            return Err(SwcsError::shape("data for every trajectory in order", "mismatched trajectory indices"));
        }
        if trajectories.iter().any(|t| t.len() != data.k()) {
            return Err(SwcsError::shape(format!("{} samples per trajectory", data.k()), "different spoke length"));
        }
        if indices.iter().enumerate().any(|(i, &m)| m != i + 1) {
            return Err(SwcsError::shape("trajectories numbered 1..=M", "gaps in trajectory indices"));
        }
        Ok(Acquisition { n, trajectories, data })
    }

    pub fn total(&self) -> usize {
        self.trajectories.len()
    }

    fn window(&self, w: &WindowSelection) -> Result<(ForwardOperator, KSpaceData)> {
        let trajs = &self.trajectories[w.first() - 1..w.first() - 1 + w.len()];
        Ok((ForwardOperator::new(self.n, trajs)?, self.data.select(&w.indices)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FrameDiagnostics {
    pub estimate_window: [usize; 2],
    pub residual_window: [usize; 2],
    /// The estimate window was shifted to fit inside the acquisition.
    pub estimate_clamped: bool,
    pub residual_clamped: bool,
    pub estimate_iterations: usize,
    pub estimate_residual: f64,
    pub estimate_converged: bool,
    pub solver: String,
    pub solver_iterations: usize,
    pub epsilon: f64,
    pub data_residual_initial: f64,
    pub data_residual_final: f64,
    pub solver_converged: bool,
    /// Per-iteration CG residuals of the estimate.
    #[serde(skip)]
    pub estimate_log: Vec<f64>,
    /// Per-iteration `(data residual norm, support size or objective)`.
    #[serde(skip)]
    pub solver_log: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct FrameResult {
    pub frame: usize,
    pub estimate: Image,
    pub residual: Image,
    pub reconstruction: Image,
    pub diagnostics: FrameDiagnostics,
}

/// Estimate from the Hamming-weighted window described by `w`.
fn estimate_for(acq: &Acquisition, w: &WindowSelection, cfg: &CgConfig) -> Result<(Image, FrameDiagnostics)> {
    let (op, y) = acq.window(w)?;
    let est = reconstruct_estimate(&y, &op, &WindowWeights::hamming(w.len()), cfg, None)?;
    let diag = FrameDiagnostics {
        estimate_window: [w.first(), *w.indices.last().unwrap()],
        estimate_clamped: w.clamped,
        estimate_iterations: est.report.iterations,
        estimate_residual: est.report.final_residual(),
        estimate_converged: est.report.converged,
        estimate_log: est.report.residuals.clone(),
        ..Default::default()
    };
    Ok((est.image, diag))
}

/// The estimate shared by all frames in [`EstimateMode::Global`].
pub fn global_estimate(acq: &Acquisition, cfg: &SwcsConfig) -> Result<(Image, FrameDiagnostics)> {
    let total = acq.total();
    let w = WindowSelection { center: total / 2 + 1, half_width: total / 2, indices: (1..=total).collect(), clamped: false };
    estimate_for(acq, &w, &cfg.estimate_cg)
}

pub fn reconstruct_frame(acq: &Acquisition, m0: usize, cfg: &SwcsConfig) -> Result<FrameResult> {
    cfg.validate(acq.total())?;
    let shared = match cfg.estimate_mode {
        EstimateMode::Global => Some(global_estimate(acq, cfg)?),
        EstimateMode::Sliding => None,
    };
    reconstruct_frame_inner(acq, m0, cfg, shared.as_ref())
}

fn reconstruct_frame_inner(
    acq: &Acquisition,
    m0: usize,
    cfg: &SwcsConfig,
    shared: Option<&(Image, FrameDiagnostics)>,
) -> Result<FrameResult> {
    let (estimate, mut diag) = match shared {
        Some((img, d)) => (img.clone(), d.clone()),
        None => estimate_for(acq, &sliding_window(m0, cfg.estimate_span, acq.total())?, &cfg.estimate_cg)?,
    };
    let rw = sliding_window(m0, cfg.residual_span, acq.total())?;
    diag.residual_window = [rw.first(), *rw.indices.last().unwrap()];
    diag.residual_clamped = rw.clamped;
    diag.solver = cfg.solver.name().to_string();

    let residual = match cfg.solver {
        SolverChoice::None => Image::zeros(acq.n),
        choice => {
            let (op, y) = acq.window(&rw)?;
            let r = residual_data(&y, &op, &estimate)?;
            let r_sq = crate::linalg::norm_sqr(r.samples());
            let noise_energy = 2.0 * cfg.noise_std * cfg.noise_std * op.sample_count() as f64;
            let eps = (cfg.epsilon_factor * noise_energy).max(cfg.epsilon_relative_floor * r_sq);
            diag.epsilon = eps;
            let problem = ResidualProblem::new(&op, &r, eps)?;
            match choice {
                SolverChoice::Komp => {
                    let res = komp_solve(&problem, &cfg.komp)?;
                    diag.solver_iterations = res.iterations;
                    diag.solver_converged = res.converged;
                    diag.data_residual_initial = res.residual_norms[0];
                    diag.data_residual_final = *res.residual_norms.last().unwrap();
                    diag.solver_log =
                        res.residual_norms.iter().zip(&res.support_sizes).map(|(&r, &s)| (r, s as f64)).collect();
                    res.image
                }
                _ => {
                    let res = split_bregman_solve(&problem, &cfg.bregman)?;
                    diag.solver_iterations = res.outer_iterations;
                    diag.solver_converged = res.converged;
                    diag.data_residual_initial = res.residual_norms[0];
                    diag.data_residual_final = *res.residual_norms.last().unwrap();
                    // Objective at the end of each outer iteration; at dx = u = 0 it is ||r||^2.
                    let sweeps = cfg.bregman.sweeps;
                    let obj: Vec<f64> = res.objective.chunks(sweeps).map(|c| *c.last().unwrap()).collect();
                    diag.solver_log = res
                        .residual_norms
                        .iter()
                        .enumerate()
                        .map(|(i, &r)| (r, if i == 0 { r * r } else { obj[i - 1] }))
                        .collect();
                    res.image
                }
            }
        }
    };
    let reconstruction = estimate.add(&residual)?.with_frame(m0);
    Ok(FrameResult {
        frame: m0,
        estimate: estimate.with_frame(m0),
        residual: residual.with_frame(m0),
        reconstruction,
        diagnostics: diag,
    })
}

/// Reconstructs every frame of `cfg.frames` (all frames when empty) on a pool
/// of `workers` threads. Results come back in the requested order; a failing
/// frame does not stop the others.
pub fn reconstruct_sequence(acq: &Acquisition, cfg: &SwcsConfig, workers: usize) -> Result<Vec<Result<FrameResult>>> {
    cfg.validate(acq.total())?;
    let frames = cfg.frame_list(acq.total());
    let shared = match cfg.estimate_mode {
        EstimateMode::Global => Some(global_estimate(acq, cfg)?),
        EstimateMode::Sliding => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SwcsError::param("workers", e.to_string()))?;
    Ok(pool.install(|| {
        frames.par_iter().map(|&m| reconstruct_frame_inner(acq, m, cfg, shared.as_ref())).collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantoms::{GaussianPhantomSpec, NoiseSpec};
    use crate::simulate::simulate_gaussians;
    use crate::trajectories::RadialScheme;

    fn moving(n: usize, total: usize, velocity: f64) -> Acquisition {
        let half = (total / 2) as i64;
        let spec = GaussianPhantomSpec { sigma: 1.5, velocity, t_min: -half, t_max: half, n };
        let noise = NoiseSpec { relative_sigma: 1e-3, seed: 9 };
        simulate_gaussians(&spec, &RadialScheme::for_image(n, total), Some(&noise)).unwrap()
    }

    fn small_cfg(solver: SolverChoice) -> SwcsConfig {
        let mut cfg = SwcsConfig { estimate_span: 24, residual_span: 8, solver, ..Default::default() };
        cfg.komp.k = 64;
        cfg.bregman.lambda1 = 500.0;
        cfg.bregman.lambda2 = 5.0;
        cfg
    }

    fn same(a: &Image, b: &Image) -> bool {
        a.data() == b.data()
    }

    #[test]
    fn static_noiseless_scene_needs_no_correction() {
        let n = 16;
        let spec = GaussianPhantomSpec { sigma: 2.0, velocity: 0.0, t_min: -40, t_max: 40, n };
        let acq = simulate_gaussians(&spec, &RadialScheme::for_image(n, 80), None).unwrap();
        for solver in [SolverChoice::Komp, SolverChoice::Bregman] {
            let mut cfg = small_cfg(solver);
            cfg.estimate_cg = CgConfig::new(200, 1e-10);
            let r = reconstruct_frame(&acq, 40, &cfg).unwrap();
            assert!(r.residual.norm() <= 1e-3 * r.estimate.norm(), "{} vs {}", r.residual.norm(), r.estimate.norm());
        }
    }

    #[test]
    fn reconstruction_is_estimate_plus_residual() {
        let acq = moving(16, 60, 0.1);
        for solver in [SolverChoice::Komp, SolverChoice::Bregman] {
            let r = reconstruct_frame(&acq, 25, &small_cfg(solver)).unwrap();
            assert!(r.residual.norm() > 0.0);
            for ((x, m), d) in r.reconstruction.data().iter().zip(r.estimate.data()).zip(r.residual.data()) {
                assert_eq!(*x, m + d);
            }
            assert_eq!(r.reconstruction.frame, Some(25));
        }
    }

    #[test]
    fn sequence_matches_single_frames_in_any_order() {
        let acq = moving(16, 60, 0.1);
        let mut cfg = small_cfg(SolverChoice::Bregman);
        cfg.frames = vec![30, 3, 17];
        let seq = reconstruct_sequence(&acq, &cfg, 1).unwrap();
        cfg.frames = vec![17, 30, 3];
        let permuted = reconstruct_sequence(&acq, &cfg, 3).unwrap();
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let (a, b) = (seq[i].as_ref().unwrap(), permuted[j].as_ref().unwrap());
            assert_eq!(a.frame, b.frame);
            assert!(same(&a.reconstruction, &b.reconstruction));
        }
        let single = reconstruct_frame(&acq, 17, &cfg).unwrap();
        assert!(same(&single.reconstruction, &seq[2].as_ref().unwrap().reconstruction));
        assert_eq!(single.diagnostics, seq[2].as_ref().unwrap().diagnostics);
    }

    #[test]
    fn degenerate_baseline_is_the_sliding_estimate() {
        let acq = moving(16, 60, 0.1);
        let cfg = SwcsConfig { residual_span: 24, ..small_cfg(SolverChoice::None) };
        let r = reconstruct_frame(&acq, 30, &cfg).unwrap();
        assert!(same(&r.reconstruction, &r.estimate));
        assert!(r.residual.data().iter().all(|v| v.norm() == 0.0));
        let w = sliding_window(30, 24, 60).unwrap();
        let (expected, _) = estimate_for(&acq, &w, &cfg.estimate_cg).unwrap();
        assert!(same(&r.estimate, &expected));
        assert!(SwcsConfig { residual_span: 24, ..small_cfg(SolverChoice::Komp) }.validate(60).is_err());
    }

    #[test]
    fn boundary_frames_are_flagged() {
        let acq = moving(16, 60, 0.1);
        let r = reconstruct_frame(&acq, 2, &small_cfg(SolverChoice::Komp)).unwrap();
        assert!(r.diagnostics.estimate_clamped && r.diagnostics.residual_clamped);
        assert_eq!(r.diagnostics.estimate_window, [1, 25]);
        let r = reconstruct_frame(&acq, 30, &small_cfg(SolverChoice::Komp)).unwrap();
        assert!(!r.diagnostics.estimate_clamped);
        assert_eq!(r.diagnostics.estimate_window, [18, 42]);
        assert_eq!(r.diagnostics.residual_window, [26, 34]);
    }

    #[test]
    fn global_mode_shares_one_estimate() {
        let acq = moving(16, 40, 0.1);
        let mut cfg = small_cfg(SolverChoice::Komp);
        cfg.estimate_mode = EstimateMode::Global;
        cfg.frames = vec![10, 20];
        let seq = reconstruct_sequence(&acq, &cfg, 2).unwrap();
        let (a, b) = (seq[0].as_ref().unwrap(), seq[1].as_ref().unwrap());
        assert!(same(&a.estimate, &b.estimate));
        assert_eq!(a.diagnostics.estimate_window, [1, 40]);
        assert!(!same(&a.reconstruction, &b.reconstruction));
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let acq = moving(16, 40, 0.1);
        let cfg = small_cfg(SolverChoice::Komp);
        assert!(matches!(reconstruct_frame(&acq, 0, &cfg), Err(SwcsError::FrameOutOfRange { .. })));
        assert!(matches!(reconstruct_frame(&acq, 41, &cfg), Err(SwcsError::FrameOutOfRange { .. })));
        let odd = SwcsConfig { residual_span: 7, ..cfg.clone() };
        assert!(odd.validate(40).is_err());
        let wide = SwcsConfig { estimate_span: 40, ..cfg.clone() };
        assert!(wide.validate(40).is_err());
        let frames = SwcsConfig { frames: vec![5, 99], ..cfg };
        assert!(reconstruct_sequence(&acq, &frames, 1).is_err());
        assert!("lasso".parse::<SolverChoice>().is_err());
        assert_eq!("komp".parse::<SolverChoice>().unwrap(), SolverChoice::Komp);
    }

    #[test]
    fn acquisition_checks_consistency() {
        let acq = moving(8, 10, 0.1);
        let short = acq.data.select(&[1, 2, 3]).unwrap();
        assert!(Acquisition::new(8, acq.trajectories.clone(), short).is_err());
    }
}
