//! Experiment recipes in TOML. Unknown keys are rejected, and every error
//! names the offending field by its dotted path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SwcsError};
use crate::metrics::PeakDetection;
use crate::phantoms::{kak_slaney_ellipsoids, Ellipsoid, GaussianPhantomSpec, NoiseSpec, SheppLoganSpec};
use crate::pipeline::SwcsConfig;
use crate::trajectories::RadialScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Gaussians,
    SheppLogan,
    ExternalKspace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Image size in pixels.
    pub n: usize,
    /// Trajectories in the acquisition, one per frame.
    pub trajectories: usize,
    /// Samples per trajectory; twice the image size when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSection {
    pub sigma: f64,
    pub velocity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheppLoganSection {
    /// Pixels.
    pub slice_thickness: f64,
    pub speed: f64,
    #[serde(default = "default_fov")]
    pub fov: f64,
    #[serde(default = "kak_slaney_ellipsoids")]
    pub ellipsoids: Vec<Ellipsoid>,
}

fn default_fov() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalSection {
    /// K-space file, relative to the config file.
    pub kspace: PathBuf,
    /// Trajectory CSV; golden-angle spokes are assumed when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    /// Standard deviation relative to the largest sample magnitude.
    pub relative_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub peak_detection: PeakDetection,
}

/// Parameter grid for `sweep`; an empty list keeps the configured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub komp_k: Vec<usize>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
}

impl SweepSection {
    pub fn is_empty(&self) -> bool {
        self.komp_k.is_empty() && self.lambda1.is_empty() && self.lambda2.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussians: Option<GaussianSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shepp_logan: Option<SheppLoganSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalSection>,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub swcs: SwcsConfig,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default, skip_serializing_if = "SweepSection::is_empty")]
    pub sweep: SweepSection,
}

fn at(path: impl Into<String>, reason: impl Into<String>) -> SwcsError {
    SwcsError::Config { path: path.into(), reason: reason.into() }
}

/// Re-homes a nested validation error under `section`.
fn under(section: &str, e: SwcsError) -> SwcsError {
    match e {
        SwcsError::InvalidParameter { name, reason } => {
            let name = name.strip_prefix(&format!("{section}.")).unwrap_or(name);
            at(format!("{section}.{name}"), reason)
        }
        SwcsError::FrameOutOfRange { frame, min, max } => {
            at(format!("{section}.frames"), format!("frame {frame} outside {min}..={max}"))
        }
        other => at(section, other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| at("<document>", e.message().to_string()))?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let msg = e.inner().message().to_string();
            at(if path == "." { "<document>".to_string() } else { path }, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        ExperimentConfig::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.n < 4 || g.n % 2 != 0 {
            return Err(at("grid.n", format!("image size must be even and >= 4, got {}", g.n)));
        }
        if g.trajectories == 0 {
            return Err(at("grid.trajectories", "at least one trajectory is required"));
        }
        if let Some(k) = g.samples {
            if k < 2 || k % 2 != 0 {
                return Err(at("grid.samples", format!("must be even and >= 2, got {k}")));
            }
        }
        NoiseSpec { relative_sigma: self.noise.relative_sigma, seed: self.seed }
            .validate()
            .map_err(|e| under("noise", e))?;
        match self.kind {
            ExperimentKind::Gaussians => {
                let s = self.gaussians.as_ref().ok_or_else(|| at("gaussians", "required for kind = \"gaussians\""))?;
                self.gaussian_spec_from(s).validate().map_err(|e| under("gaussians", e))?;
            }
            ExperimentKind::SheppLogan => {
                let s = self.shepp_logan.as_ref().ok_or_else(|| at("shepp_logan", "required for kind = \"shepp-logan\""))?;
                self.shepp_logan_spec_from(s).validate().map_err(|e| under("shepp_logan", e))?;
            }
            ExperimentKind::ExternalKspace => {
                if self.external.is_none() {
                    return Err(at("external", "required for kind = \"external-kspace\""));
                }
            }
        }
        self.swcs.estimate_cg.validate().map_err(|e| under("swcs.estimate_cg", e))?;
        self.swcs.komp.validate().map_err(|e| under("swcs.komp", e))?;
        self.swcs.komp.inner.validate().map_err(|e| under("swcs.komp.inner", e))?;
        self.swcs.bregman.validate().map_err(|e| under("swcs.bregman", e))?;
        self.swcs.bregman.inner.validate().map_err(|e| under("swcs.bregman.inner", e))?;
        self.swcs.validate(g.trajectories).map_err(|e| under("swcs", e))?;
        self.metrics.peak_detection.validate().map_err(|e| under("metrics", e))?;
        if self.sweep.komp_k.contains(&0) {
            return Err(at("sweep.komp_k", "K must be >= 1"));
        }
        if self.sweep.lambda1.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(at("sweep.lambda1", "values must be positive"));
        }
        if self.sweep.lambda2.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
            return Err(at("sweep.lambda2", "values must be non-negative"));
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.grid.samples.unwrap_or(2 * self.grid.n)
    }

    pub fn scheme(&self) -> RadialScheme {
        RadialScheme { samples: self.samples(), ..RadialScheme::for_image(self.grid.n, self.grid.trajectories) }
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec { relative_sigma: self.noise.relative_sigma, seed: self.seed }
    }

    fn gaussian_spec_from(&self, s: &GaussianSection) -> GaussianPhantomSpec {
        let scheme = self.scheme();
        GaussianPhantomSpec {
            sigma: s.sigma,
            velocity: s.velocity,
            t_min: scheme.frame_time(1),
            t_max: scheme.frame_time(scheme.count.max(2)),
            n: self.grid.n,
        }
    }

    fn shepp_logan_spec_from(&self, s: &SheppLoganSection) -> SheppLoganSpec {
        SheppLoganSpec {
            ellipsoids: s.ellipsoids.clone(),
            slice_thickness: s.slice_thickness,
            speed: s.speed,
            frames: self.grid.trajectories,
            n: self.grid.n,
            fov: s.fov,
        }
    }

    pub fn gaussian_spec(&self) -> Option<GaussianPhantomSpec> {
        self.gaussians.as_ref().map(|s| self.gaussian_spec_from(s))
    }

    pub fn shepp_logan_spec(&self) -> Option<SheppLoganSpec> {
        self.shepp_logan.as_ref().map(|s| self.shepp_logan_spec_from(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::SolverChoice;

    const SHEPP: &str = r#"
kind = "shepp-logan"
seed = 7

[grid]
n = 64
trajectories = 200

[shepp_logan]
slice_thickness = 1.12
speed = 0.04

[noise]
relative_sigma = 5e-4

[swcs]
estimate_span = 60
residual_span = 14
solver = "komp"
frames = [50, 120]

[swcs.komp]
k = 128
"#;

    fn config_error(text: &str) -> (String, String) {
        match ExperimentConfig::from_toml_str(text) {
            Err(SwcsError::Config { path, reason }) => (path, reason),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_a_recipe() {
        let cfg = ExperimentConfig::from_toml_str(SHEPP).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::SheppLogan);
        assert_eq!(cfg.samples(), 128);
        assert_eq!(cfg.swcs.solver, SolverChoice::Komp);
        assert_eq!(cfg.swcs.komp.k, 128);
        assert_eq!(cfg.swcs.komp.max_iterations, crate::solvers::KompConfig::default().max_iterations);
        let spec = cfg.shepp_logan_spec().unwrap();
        assert_eq!(spec.ellipsoids.len(), 10);
        assert_eq!(spec.frames, 200);
        assert_eq!(cfg.noise_spec().seed, 7);
    }

    #[test]
    fn roundtrips_through_toml() {
        let cfg = ExperimentConfig::from_toml_str(SHEPP).unwrap();
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let (path, reason) = config_error(&SHEPP.replace("k = 128", "kk = 128"));
        assert_eq!(path, "swcs.komp.kk");
        assert!(reason.contains("unknown field"), "{reason}");
        let (path, _) = config_error(&SHEPP.replace("speed = 0.04", "speed = 0.04\nsped = 1"));
        assert_eq!(path, "shepp_logan.sped");
    }

    #[test]
    fn type_errors_name_their_path() {
        let (path, _) = config_error(&SHEPP.replace("n = 64", "n = \"big\""));
        assert_eq!(path, "grid.n");
    }

    #[test]
    fn semantic_errors_name_their_path() {
        assert_eq!(config_error(&SHEPP.replace("trajectories = 200", "trajectories = 0")).0, "grid.trajectories");
        assert_eq!(config_error(&SHEPP.replace("n = 64", "n = 63")).0, "grid.n");
        assert_eq!(config_error(&SHEPP.replace("relative_sigma = 5e-4", "relative_sigma = -1.0")).0, "noise.relative_sigma");
        assert_eq!(config_error(&SHEPP.replace("frames = [50, 120]", "frames = [500]")).0, "swcs.frames");
        assert_eq!(config_error(&SHEPP.replace("k = 128", "k = 0")).0, "swcs.komp.k");
        assert_eq!(config_error(&SHEPP.replace("slice_thickness = 1.12", "slice_thickness = 0.0")).0, "shepp_logan.slice_thickness");
    }

    #[test]
    fn kind_requires_its_section() {
        let text = SHEPP.replace("kind = \"shepp-logan\"", "kind = \"gaussians\"");
        assert_eq!(config_error(&text).0, "gaussians");
        let (path, _) = config_error(&SHEPP.replace("kind = \"shepp-logan\"", "kind = \"mri\""));
        assert_eq!(path, "kind");
    }

    #[test]
    fn gaussian_time_range_follows_the_grid() {
        let text = r#"
kind = "gaussians"
[grid]
n = 256
trajectories = 1000
[gaussians]
sigma = 4.0
velocity = 0.064
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        let spec = cfg.gaussian_spec().unwrap();
        assert_eq!((spec.t_min, spec.t_max), (-500, 499));
        assert_eq!(cfg.scheme().samples, 512);
        assert_eq!(cfg.scheme().count, 1000);
    }

    #[test]
    fn malformed_documents_are_config_errors() {
        assert_eq!(config_error("kind = ").0, "<document>");
    }
}
