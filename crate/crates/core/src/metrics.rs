//! Image-quality measures: masked RMSE, FWHM and the merge/separation times
//! of the two-Gaussian experiment.

use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwcsError};
use crate::image::Image;
use crate::phantoms::GaussianPhantomSpec;

/// Real samples along a line, with their (increasing) pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    values: Vec<f64>,
    coords: Vec<f64>,
}

impl Profile {
    pub fn new(values: Vec<f64>, coords: Vec<f64>) -> Result<Self> {
        if values.len() != coords.len() {
            return Err(SwcsError::shape(format!("{} coordinates", values.len()), coords.len()));
        }
        if values.len() < 3 {
            return Err(SwcsError::Metric("profile needs at least 3 samples".into()));
        }
        if values.iter().chain(&coords).any(|v| !v.is_finite()) {
            return Err(SwcsError::Metric("profile contains non-finite values".into()));
        }
        if coords.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SwcsError::Metric("profile coordinates must increase".into()));
        }
        Ok(Profile { values, coords })
    }

    /// Samples at `0, 1, .., len-1` shifted so that index `len/2` sits at 0.
    pub fn centered(values: Vec<f64>) -> Result<Self> {
        let c = (values.len() / 2) as f64;
        let coords = (0..values.len()).map(|i| i as f64 - c).collect();
        Profile::new(values, coords)
    }

    /// Magnitudes along the `y = 0` row of an image.
    pub fn from_image(img: &Image) -> Result<Self> {
        Profile::centered(img.center_row())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Linear interpolation at coordinate `x`; `None` outside the samples.
    pub fn at(&self, x: f64) -> Option<f64> {
        let c = &self.coords;
        if x < c[0] || x > c[c.len() - 1] {
            return None;
        }
        let i = c.partition_point(|&v| v <= x).clamp(1, c.len() - 1);
        let f = (x - c[i - 1]) / (c[i] - c[i - 1]);
        Some(self.values[i - 1] + f * (self.values[i] - self.values[i - 1]))
    }

    /// Band-limited interpolation on a grid `factor` times finer, for
    /// uniformly spaced samples.
    pub fn upsampled(&self, factor: usize) -> Result<Profile> {
        let n = self.len();
        if factor <= 1 {
            return Ok(self.clone());
        }
        let step = self.coords[1] - self.coords[0];
        if self.coords.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1.0)) {
            return Err(SwcsError::Metric("band-limited interpolation needs uniform samples".into()));
        }
        let m = n * factor;
        let mut planner = FftPlanner::<f64>::new();
        let mut spec: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        planner.plan_fft_forward(n).process(&mut spec);
        let mut padded = vec![Complex64::new(0.0, 0.0); m];
        let half = n / 2;
        for j in 0..n.div_ceil(2) {
            padded[j] = spec[j];
        }
        for j in (half + 1)..n {
            padded[m - n + j] = spec[j];
        }
        if n % 2 == 0 {
            padded[half] = spec[half] * 0.5;
            padded[m - half] = spec[half] * 0.5;
        }
        planner.plan_fft_inverse(m).process(&mut padded);
        let scale = 1.0 / n as f64;
        let values: Vec<f64> = padded.iter().take(m - factor + 1).map(|v| v.re * scale).collect();
        let dx = step / factor as f64;
        let coords = (0..values.len()).map(|i| self.coords[0] + i as f64 * dx).collect();
        Profile::new(values, coords)
    }
}

/// Reconstruction and truth magnitudes with the mask selecting the pixels
/// that count.
#[derive(Debug, Clone)]
pub struct MaskedPair {
    recon: Vec<f64>,
    truth: Vec<f64>,
    mask: Vec<bool>,
}

impl MaskedPair {
    pub fn new(recon: Vec<f64>, truth: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if recon.len() != truth.len() || recon.len() != mask.len() {
            return Err(SwcsError::shape(
                format!("{} values in each of recon, truth and mask", recon.len()),
                format!("{} and {}", truth.len(), mask.len()),
            ));
        }
        if !mask.iter().any(|&b| b) {
            return Err(SwcsError::Metric("mask is empty".into()));
        }
        Ok(MaskedPair { recon, truth, mask })
    }

    /// Compares magnitudes; phase is discarded.
    pub fn from_images(recon: &Image, truth: &Image, mask: &[bool]) -> Result<Self> {
        if recon.n() != truth.n() {
            return Err(SwcsError::shape(format!("{0}x{0} truth", recon.n()), format!("{0}x{0}", truth.n())));
        }
        MaskedPair::new(recon.magnitude(), truth.magnitude(), mask.to_vec())
    }

    pub fn mask_size(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

pub fn rmse(p: &MaskedPair) -> f64 {
    let (sum, count) = p
        .recon
        .iter()
        .zip(&p.truth)
        .zip(&p.mask)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, c), ((r, t), _)| (s + (r - t) * (r - t), c + 1));
    (sum / count as f64).sqrt()
}

/// Width between the half-maximum crossings either side of the peak, each
/// located by linear interpolation. A flat top is measured from its edges.
pub fn fwhm(profile: &Profile) -> Result<f64> {
    let v = profile.values();
    let c = profile.coords();
    let peak = profile.max();
    if peak <= 0.0 {
        return Err(SwcsError::Metric("profile has no positive peak".into()));
    }
    let first = v.iter().position(|&x| x == peak).unwrap();
    let last = v.iter().rposition(|&x| x == peak).unwrap();
    let half = peak / 2.0;
    let crossing = |i: usize, j: usize| c[i] + (half - v[i]) / (v[j] - v[i]) * (c[j] - c[i]);
    let left = (1..=first).rev().find(|&i| v[i - 1] < half).map(|i| crossing(i - 1, i));
    let right = (last..v.len() - 1).find(|&i| v[i + 1] < half).map(|i| crossing(i, i + 1));
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(SwcsError::Metric("no half-maximum crossing on one side of the peak".into())),
    }
}

pub fn theoretical_fwhm(sigma: f64) -> f64 {
    2.0 * (2.0 * std::f64::consts::LN_2).sqrt() * sigma
}

/// Outcome of a merge or separation time search over a frame sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resolution {
    At(i64),
    /// The Gaussians appear merged in every frame examined.
    Unresolved,
    /// The Gaussians appear separate in every frame examined.
    AlwaysSeparated,
}

impl Resolution {
    pub fn frame(&self) -> Option<i64> {
        match self {
            Resolution::At(t) => Some(*t),
            _ => None,
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::At(t) => write!(f, "{t}"),
            Resolution::Unresolved => f.write_str("unresolved"),
            Resolution::AlwaysSeparated => f.write_str("always-separated"),
        }
    }
}

/// Profiles indexed by signed frame time, in increasing time order.
#[derive(Debug, Clone)]
pub struct ProfileSequence {
    frames: Vec<(i64, Profile)>,
}

impl ProfileSequence {
    pub fn new(mut frames: Vec<(i64, Profile)>) -> Result<Self> {
        if frames.is_empty() {
            return Err(SwcsError::Metric("empty frame sequence".into()));
        }
        frames.sort_by_key(|f| f.0);
        if frames.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(SwcsError::Metric("duplicate frame times".into()));
        }
        Ok(ProfileSequence { frames })
    }

    pub fn frames(&self) -> &[(i64, Profile)] {
        &self.frames
    }

    fn before(&self) -> impl DoubleEndedIterator<Item = &(i64, Profile)> {
        self.frames.iter().filter(|f| f.0 < 0)
    }

    fn after(&self) -> impl DoubleEndedIterator<Item = &(i64, Profile)> {
        self.frames.iter().filter(|f| f.0 > 0)
    }
}

/// Scans `frames` in order for the first frame where `hit` holds after a
/// frame where it did not.
/// Returns `all_hit` when it holds in every frame and `no_hit` when in none.
fn first_transition<'a>(
    frames: impl Iterator<Item = &'a (i64, Profile)>,
    hit: impl Fn(&Profile) -> bool,
    all_hit: Resolution,
    no_hit: Resolution,
) -> Resolution {
    let mut seen_miss = false;
    let mut seen_hit = false;
    for (t, p) in frames {
        if hit(p) {
            if seen_miss {
                return Resolution::At(*t);
            }
            seen_hit = true;
        } else {
            seen_miss = true;
        }
    }
    if seen_hit {
        all_hit
    } else {
        no_hit
    }
}

/// Midpoint value at least half of the frame's own profile maximum.
pub fn midpoint_merged(p: &Profile) -> bool {
    p.at(0.0).is_some_and(|v| v >= 0.5 * p.max())
}

/// `(t0, t1)`: the first approaching frame and the last parting frame at
/// which the midpoint reaches half maximum. A side on which the midpoint is
/// at half maximum in every frame is [`Resolution::Unresolved`].
pub fn midpoint_half_max_times(seq: &ProfileSequence) -> (Resolution, Resolution) {
    let (all, none) = (Resolution::Unresolved, Resolution::AlwaysSeparated);
    let t0 = first_transition(seq.before(), midpoint_merged, all, none);
    let t1 = first_transition(seq.after().rev(), midpoint_merged, all, none);
    (t0, t1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PeakDetection {
    /// Minimum dip below the lower of the two peaks, relative to the maximum.
    pub dip_depth: f64,
    /// The second peak must reach this fraction of the maximum.
    pub min_peak_ratio: f64,
    /// Band-limited upsampling factor applied before peak search.
    pub upsample: usize,
}

impl Default for PeakDetection {
    fn default() -> Self {
        PeakDetection { dip_depth: 1e-3, min_peak_ratio: 0.5, upsample: 8 }
    }
}

impl PeakDetection {
    pub fn validate(&self) -> Result<()> {
        if !(self.dip_depth >= 0.0 && (0.0..=1.0).contains(&self.min_peak_ratio) && self.upsample >= 1) {
            return Err(SwcsError::param("peak_detection", "need dip_depth >= 0, min_peak_ratio in [0, 1], upsample >= 1"));
        }
        Ok(())
    }

    /// Two local maxima separated by a strict dip.
    pub fn two_peaks(&self, p: &Profile) -> bool {
        let fine = match p.upsampled(self.upsample) {
            Ok(f) => f,
            Err(_) => p.clone(),
        };
        let v = fine.values();
        let peak = fine.max();
        if peak <= 0.0 {
            return false;
        }
        let top = v.iter().position(|&x| x == peak).unwrap();
        let floor = self.min_peak_ratio * peak;
        let dip_needed = self.dip_depth * peak;
        let is_max = |i: usize| v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] >= floor;
        (1..v.len() - 1).filter(|&i| i != top && is_max(i)).any(|i| {
            let (a, b) = if i < top { (i, top) } else { (top, i) };
            let dip = v[a..=b].iter().copied().fold(f64::INFINITY, f64::min);
            v[i].min(peak) - dip > dip_needed
        })
    }
}

/// `(t2, t3)`: the last approaching frame and the first parting frame at
/// which two peaks are distinguishable.
pub fn separability_times(seq: &ProfileSequence, det: &PeakDetection) -> (Resolution, Resolution) {
    // Scan outwards from t = 0 for the first merged-to-separated change.
    let two = |p: &Profile| det.two_peaks(p);
    let (all, none) = (Resolution::AlwaysSeparated, Resolution::Unresolved);
    (first_transition(seq.before().rev(), two, all, none), first_transition(seq.after(), two, all, none))
}

/// Profile of the noise-free phantom along `y = 0` at frame time `t`.
pub fn gaussian_truth_profile(spec: &GaussianPhantomSpec, t: i64) -> Result<Profile> {
    spec.validate()?;
    let c = (spec.n / 2) as f64;
    let values = (0..spec.n).map(|i| spec.value(t, i as f64 - c, 0.0)).collect();
    Profile::centered(values)
}

fn two_gaussians(d: f64, sigma: f64, x: f64) -> f64 {
    let s2 = 2.0 * sigma * sigma;
    (-(x - d).powi(2) / s2).exp() + (-(x + d).powi(2) / s2).exp()
}

fn profile_max(d: f64, sigma: f64) -> f64 {
    if d <= sigma {
        return two_gaussians(d, sigma, 0.0);
    }
    // Unimodal on [0, d + sigma] away from the origin: golden-section search.
    let (mut a, mut b) = (0.0, d + sigma);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = b - r * (b - a);
        let x2 = a + r * (b - a);
        if two_gaussians(d, sigma, x1) < two_gaussians(d, sigma, x2) {
            a = x1;
        } else {
            b = x2;
        }
    }
    two_gaussians(d, sigma, 0.5 * (a + b))
}

/// Half-separation at which the continuous midpoint value equals half the
/// profile maximum.
pub fn midpoint_half_max_separation(sigma: f64) -> f64 {
    let h = |d: f64| two_gaussians(d, sigma, 0.0) - 0.5 * profile_max(d, sigma);
    let (mut lo, mut hi) = (sigma, 10.0 * sigma);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Continuous-phantom `t0`; `None` when the Gaussians do not move.
pub fn theoretical_t0(spec: &GaussianPhantomSpec) -> Option<f64> {
    (spec.velocity > 0.0).then(|| -midpoint_half_max_separation(spec.sigma) / spec.velocity)
}

/// Continuous-phantom `t2 = -sigma / v`.
pub fn theoretical_t2(spec: &GaussianPhantomSpec) -> Option<f64> {
    (spec.velocity > 0.0).then(|| -spec.sigma / spec.velocity)
}
