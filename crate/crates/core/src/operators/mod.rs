//! The non-uniform Fourier map between images and radial k-space samples,
//! its adjoint, and per-trajectory window weighting.

mod fft2;
mod ndft;
mod nufft;
mod toeplitz;

use std::fmt;

use num_complex::Complex64;

use crate::error::{Result, SwcsError};
use crate::image::Image;
use crate::trajectories::Trajectory;

pub use nufft::DEFAULT_WIDTH as DEFAULT_GRIDDING_WIDTH;
pub use toeplitz::{ExplicitNormal, NormalOperator, ToeplitzNormal};

/// Complex samples for an ordered set of trajectories, `k` samples each.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceData {
    k: usize,
    trajectories: Vec<usize>,
    samples: Vec<Complex64>,
}

impl KSpaceData {
    pub fn new(k: usize, trajectories: Vec<usize>, samples: Vec<Complex64>) -> Result<Self> {
        if k == 0 || trajectories.is_empty() {
            return Err(SwcsError::param("k", "k-space data needs at least one trajectory and sample"));
        }
        if samples.len() != k * trajectories.len() {
            return Err(SwcsError::shape(format!("{} samples", k * trajectories.len()), samples.len()));
        }
        Ok(KSpaceData { k, trajectories, samples })
    }

    pub fn zeros(k: usize, trajectories: Vec<usize>) -> Self {
        let len = k * trajectories.len();
        KSpaceData { k, trajectories, samples: vec![Complex64::new(0.0, 0.0); len] }
    }

    /// Samples per trajectory.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn trajectory_count(&self) -> usize {
        self.trajectories.len()
    }

    pub fn trajectory_indices(&self) -> &[usize] {
        &self.trajectories
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Samples of the `i`-th stored trajectory (storage position, not index).
    pub fn trajectory(&self, i: usize) -> &[Complex64] {
        &self.samples[i * self.k..(i + 1) * self.k]
    }

    pub fn position_of(&self, index: usize) -> Option<usize> {
        self.trajectories.iter().position(|&m| m == index)
    }

    /// Copies out the listed trajectories (by acquisition index) in that order.
    pub fn select(&self, indices: &[usize]) -> Result<KSpaceData> {
        let mut samples = Vec::with_capacity(indices.len() * self.k);
        for &m in indices {
            let pos = self
                .position_of(m)
                .ok_or_else(|| SwcsError::shape(format!("trajectory {m} in data"), "missing trajectory"))?;
            samples.extend_from_slice(self.trajectory(pos));
        }
        KSpaceData::new(self.k, indices.to_vec(), samples)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Which evaluation path a [`ForwardOperator`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Direct summation; exact, `O(n^2)` per sample.
    Direct,
    /// Oversampled FFT plus kernel interpolation of the given width.
    #[default]
    Gridding,
    GriddingWidth(usize),
}

enum Backend {
    Direct,
    Gridding(nufft::NufftPlan),
}

/// The map `F` from an `n x n` image to samples on a set of trajectories.
pub struct ForwardOperator {
    n: usize,
    k: usize,
    trajectories: Vec<usize>,
    coords: Vec<[f64; 2]>,
    engine: Engine,
    backend: Backend,
}

impl fmt::Debug for ForwardOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForwardOperator")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("trajectories", &self.trajectories.len())
            .field("engine", &self.engine)
            .finish()
    }
}

impl ForwardOperator {
    pub fn new(n: usize, trajectories: &[Trajectory]) -> Result<Self> {
        Self::with_engine(n, trajectories, Engine::default())
    }

    pub fn with_engine(n: usize, trajectories: &[Trajectory], engine: Engine) -> Result<Self> {
        let k = trajectories.first().map(|t| t.len()).unwrap_or(0);
        if trajectories.iter().any(|t| t.len() != k) {
            return Err(SwcsError::param("trajectories", "all trajectories must have the same sample count"));
        }
        let coords: Vec<[f64; 2]> = trajectories.iter().flat_map(|t| t.samples.iter().copied()).collect();
        let indices = trajectories.iter().map(|t| t.index).collect();
        Self::from_coords(n, k, indices, coords, engine)
    }

    /// Builds an operator from raw sample coordinates grouped `k` per trajectory.
    pub fn from_coords(n: usize, k: usize, trajectories: Vec<usize>, coords: Vec<[f64; 2]>, engine: Engine) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(SwcsError::param("n", format!("image size must be even and >= 2, got {n}")));
        }
        if k == 0 || trajectories.is_empty() || coords.len() != k * trajectories.len() {
            return Err(SwcsError::shape(format!("{} coordinates", k * trajectories.len()), coords.len()));
        }
        let limit = std::f64::consts::PI + 1e-12;
        if coords.iter().any(|c| !(c[0].abs() <= limit && c[1].abs() <= limit)) {
            return Err(SwcsError::param("trajectories", "sample coordinates must lie in [-pi, pi]^2"));
        }
        let backend = match engine {
            Engine::Direct => Backend::Direct,
            Engine::Gridding => Backend::Gridding(nufft::NufftPlan::new(n, &coords, nufft::DEFAULT_WIDTH)),
            Engine::GriddingWidth(w) => Backend::Gridding(nufft::NufftPlan::new(n, &coords, w.max(2))),
        };
        Ok(ForwardOperator { n, k, trajectories, coords, engine, backend })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn trajectory_indices(&self) -> &[usize] {
        &self.trajectories
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn sample_count(&self) -> usize {
        self.coords.len()
    }

    pub fn pixel_count(&self) -> usize {
        self.n * self.n
    }

    /// `y = F x` on raw buffers.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.pixel_count(), "image buffer length");
        let mut out = vec![Complex64::new(0.0, 0.0); self.sample_count()];
        match &self.backend {
            Backend::Direct => ndft::forward(self.n, &self.coords, x, &mut out),
            Backend::Gridding(plan) => plan.forward(x, &mut out),
        }
        out
    }

    /// `x = F^H y` on raw buffers.
    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.sample_count(), "sample buffer length");
        let mut out = vec![Complex64::new(0.0, 0.0); self.pixel_count()];
        match &self.backend {
            Backend::Direct => ndft::adjoint(self.n, &self.coords, y, &mut out),
            Backend::Gridding(plan) => plan.adjoint(y, &mut out),
        }
        out
    }

    pub fn forward(&self, x: &Image) -> Result<KSpaceData> {
        if x.n() != self.n {
            return Err(SwcsError::shape(format!("{0}x{0} image", self.n), format!("{0}x{0}", x.n())));
        }
        KSpaceData::new(self.k, self.trajectories.clone(), self.apply(x.data()))
    }

    pub fn adjoint(&self, y: &KSpaceData) -> Result<Image> {
        self.check_data(y)?;
        Image::from_vec(self.n, self.apply_adjoint(y.samples()))
    }

    pub fn check_data(&self, y: &KSpaceData) -> Result<()> {
        if y.k() != self.k || y.trajectory_indices() != self.trajectories.as_slice() {
            return Err(SwcsError::shape(
                format!("{} trajectories x {} samples", self.trajectories.len(), self.k),
                format!("{} trajectories x {} samples", y.trajectory_count(), y.k()),
            ));
        }
        Ok(())
    }

    /// The same sample set mapped from a `2n x 2n` image; used to build the
    /// Toeplitz kernel of the normal operator.
    pub(crate) fn doubled(&self) -> Result<ForwardOperator> {
        Self::from_coords(2 * self.n, self.k, self.trajectories.clone(), self.coords.clone(), self.engine)
    }
}

/// Hamming taper `0.54 - 0.46 cos(2 pi m / len)` at position `m` of a window of length `len`.
pub fn hamming_weight(m: usize, len: usize) -> f64 {
    0.54 - 0.46 * (2.0 * std::f64::consts::PI * m as f64 / len as f64).cos()
}

/// One scalar weight per trajectory (the diagonal of `W`).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowWeights {
    weights: Vec<f64>,
}

impl WindowWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(SwcsError::param("weights", "window weights must be finite"));
        }
        Ok(WindowWeights { weights })
    }

    pub fn uniform(count: usize) -> Self {
        WindowWeights { weights: vec![1.0; count] }
    }

    /// Hamming weights indexed from the window start, so position `count / 2`
    /// (the window center) gets weight 1.
    pub fn hamming(count: usize) -> Self {
        if count == 1 {
            return Self::uniform(1);
        }
        let span = count - 1;
        WindowWeights { weights: (0..count).map(|m| hamming_weight(m, span)).collect() }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Per-sample weights for `k` samples per trajectory.
    pub fn per_sample(&self, k: usize) -> Vec<f64> {
        self.weights.iter().flat_map(|&w| std::iter::repeat_n(w, k)).collect()
    }
}

/// Scales every sample of trajectory `m` by `w[m]`.
pub fn apply_window(y: &KSpaceData, w: &WindowWeights) -> Result<KSpaceData> {
    if w.len() != y.trajectory_count() {
        return Err(SwcsError::shape(format!("{} weights", y.trajectory_count()), w.len()));
    }
    let mut out = y.clone();
    let k = y.k();
    for (chunk, &wm) in out.samples.chunks_exact_mut(k).zip(w.as_slice()) {
        chunk.iter_mut().for_each(|v| *v *= wm);
    }
    Ok(out)
}
