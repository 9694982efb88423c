//! 3-D Shepp-Logan head phantom (Kak-Slaney ellipsoid table) imaged on a
//! slice that moves through the volume along z.
//!
//! Phantom coordinates span `[-fov/2, fov/2]` across the image width; the
//! image grid and all k-space coordinates are in pixel units. Every ellipsoid
//! is rotated about z only, so a z-slice through it is an ellipse with the
//! same orientation and semi-axes scaled by `sqrt(1 - ((z - z0) / c)^2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwcsError};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ellipsoid {
    pub center: [f64; 3],
    pub semi_axes: [f64; 3],
    /// Rotation about the z axis, degrees.
    pub rotation: f64,
    pub intensity: f64,
}

impl Ellipsoid {
    const fn new(center: [f64; 3], semi_axes: [f64; 3], rotation: f64, intensity: f64) -> Self {
        Ellipsoid { center, semi_axes, rotation, intensity }
    }

    /// Cross-section scale at height `z` (phantom units), if the plane cuts it.
    fn section_scale(&self, z: f64) -> Option<f64> {
        let t = (z - self.center[2]) / self.semi_axes[2];
        (t.abs() < 1.0).then(|| (1.0 - t * t).sqrt())
    }

    fn contains(&self, x: f64, y: f64, z: f64) -> bool {
        let (s, c) = self.rotation.to_radians().sin_cos();
        let (dx, dy, dz) = (x - self.center[0], y - self.center[1], z - self.center[2]);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        let [a, b, cz] = self.semi_axes;
        (u / a).powi(2) + (v / b).powi(2) + (dz / cz).powi(2) <= 1.0
    }
}

/// Kak-Slaney 3-D Shepp-Logan parameters.
pub fn kak_slaney_ellipsoids() -> Vec<Ellipsoid> {
    vec![
        Ellipsoid::new([0.0, 0.0, 0.0], [0.69, 0.92, 0.9], 0.0, 2.0),
        Ellipsoid::new([0.0, 0.0, 0.0], [0.6624, 0.874, 0.88], 0.0, -0.98),
        Ellipsoid::new([-0.22, 0.0, -0.25], [0.41, 0.16, 0.21], 108.0, -0.02),
        Ellipsoid::new([0.22, 0.0, -0.25], [0.31, 0.11, 0.22], 72.0, -0.02),
        Ellipsoid::new([0.0, 0.35, -0.25], [0.21, 0.25, 0.5], 0.0, 0.01),
        Ellipsoid::new([0.0, 0.1, -0.25], [0.046, 0.046, 0.046], 0.0, 0.01),
        Ellipsoid::new([-0.08, -0.65, -0.25], [0.046, 0.023, 0.02], 0.0, 0.01),
        Ellipsoid::new([0.06, -0.65, -0.25], [0.046, 0.023, 0.02], 90.0, 0.01),
        Ellipsoid::new([0.06, -0.105, 0.625], [0.056, 0.04, 0.1], 90.0, 0.02),
        Ellipsoid::new([0.0, 0.1, 0.625], [0.056, 0.056, 0.1], 0.0, -0.02),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheppLoganSpec {
    #[serde(default = "kak_slaney_ellipsoids")]
    pub ellipsoids: Vec<Ellipsoid>,
    /// Slice thickness in pixels; the slice advances `thickness * speed` per frame.
    pub slice_thickness: f64,
    /// Through-plane speed, slice thicknesses per frame.
    pub speed: f64,
    /// Total number of frames; the slice is at `z = 0` on frame `frames / 2 + 1`.
    pub frames: usize,
    pub n: usize,
    /// Phantom extent (phantom units) covered by the image width.
    #[serde(default = "default_fov")]
    pub fov: f64,
}

fn default_fov() -> f64 {
    2.0
}

impl SheppLoganSpec {
    pub fn new(n: usize, frames: usize, slice_thickness: f64, speed: f64) -> Self {
        SheppLoganSpec { ellipsoids: kak_slaney_ellipsoids(), slice_thickness, speed, frames, n, fov: default_fov() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ellipsoids.is_empty() {
            return Err(SwcsError::param("ellipsoids", "at least one ellipsoid is required"));
        }
        for e in &self.ellipsoids {
            if e.semi_axes.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
                return Err(SwcsError::param("ellipsoids", "semi-axes must be positive"));
            }
            if !e.intensity.is_finite() || !e.rotation.is_finite() || e.center.iter().any(|c| !c.is_finite()) {
                return Err(SwcsError::param("ellipsoids", "ellipsoid parameters must be finite"));
            }
        }
        if !(self.slice_thickness > 0.0) || !self.speed.is_finite() {
            return Err(SwcsError::param("slice_thickness", "thickness must be positive and speed finite"));
        }
        if self.frames == 0 || self.n < 2 || !(self.fov > 0.0) {
            return Err(SwcsError::param("frames", "frames, n and fov must be positive"));
        }
        Ok(())
    }

    pub fn center_frame(&self) -> usize {
        self.frames / 2 + 1
    }

    /// Pixel size in phantom units.
    pub fn pixel(&self) -> f64 {
        self.fov / self.n as f64
    }
}

/// Slice offset in pixels at frame `m`: `thickness * speed * (m - center)`.
pub fn slice_position(m: usize, spec: &SheppLoganSpec) -> f64 {
    spec.slice_thickness * spec.speed * (m as f64 - spec.center_frame() as f64)
}

/// `2 J1(q) / q`, continuous at 0.
fn jinc(q: f64) -> f64 {
    if q.abs() < 1e-8 {
        1.0 - q * q / 8.0
    } else {
        2.0 * libm::j1(q) / q
    }
}

/// Analytic 2-D Fourier transform of the slice at offset `z` (pixels),
/// normalized like the pixel-sum forward model.
pub fn shepp_logan_slice_kspace(spec: &SheppLoganSpec, z: f64, coords: &[[f64; 2]]) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let pix = spec.pixel();
    let z_ph = z * pix;
    struct Section {
        cx: f64,
        cy: f64,
        a: f64,
        b: f64,
        cos: f64,
        sin: f64,
        weight: f64,
    }
    let sections: Vec<Section> = spec
        .ellipsoids
        .iter()
        .filter_map(|e| {
            let s = e.section_scale(z_ph)?;
            let a = e.semi_axes[0] * s / pix;
            let b = e.semi_axes[1] * s / pix;
            let (sin, cos) = e.rotation.to_radians().sin_cos();
            Some(Section {
                cx: e.center[0] / pix,
                cy: e.center[1] / pix,
                a,
                b,
                cos,
                sin,
                weight: e.intensity * PI * a * b,
            })
        })
        .collect();
    Ok(coords
        .iter()
        .map(|k| {
            sections
                .iter()
                .map(|s| {
                    let ku = k[0] * s.cos + k[1] * s.sin;
                    let kv = -k[0] * s.sin + k[1] * s.cos;
                    let q = ((s.a * ku).powi(2) + (s.b * kv).powi(2)).sqrt();
                    Complex64::from_polar(s.weight * jinc(q), -(k[0] * s.cx + k[1] * s.cy))
                })
                .sum()
        })
        .collect())
}

/// Slice rasterized at pixel centers.
pub fn shepp_logan_slice(spec: &SheppLoganSpec, z: f64) -> Result<Image> {
    spec.validate()?;
    let pix = spec.pixel();
    let z_ph = z * pix;
    Ok(Image::from_fn(spec.n, |x, y| {
        let (xp, yp) = (x * pix, y * pix);
        let v: f64 = spec.ellipsoids.iter().filter(|e| e.contains(xp, yp, z_ph)).map(|e| e.intensity).sum();
        Complex64::new(v, 0.0)
    }))
}

/// Pixels inside the outermost ellipsoid (the first table entry) on this slice.
pub fn shepp_logan_slice_mask(spec: &SheppLoganSpec, z: f64) -> Result<Vec<bool>> {
    spec.validate()?;
    let pix = spec.pixel();
    let z_ph = z * pix;
    let outer = &spec.ellipsoids[0];
    let half = (spec.n / 2) as f64;
    let n = spec.n;
    Ok((0..n * n)
        .map(|i| {
            let x = (i % n) as f64 - half;
            let y = (i / n) as f64 - half;
            outer.contains(x * pix, y * pix, z_ph)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slice_position_examples() {
        let spec = SheppLoganSpec::new(64, 1000, 1.0, 0.01);
        assert_eq!(spec.center_frame(), 501);
        assert_eq!(slice_position(501, &spec), 0.0);
        assert!((slice_position(601, &spec) - 1.0).abs() < 1e-12);
        let fast = SheppLoganSpec { speed: 0.04, ..spec.clone() };
        assert!((slice_position(700, &fast) - 4.0 * slice_position(700, &spec)).abs() < 1e-12);
    }

    #[test]
    fn empty_beyond_phantom() {
        let spec = SheppLoganSpec::new(64, 1000, 1.0, 0.0);
        // z = 0.95 phantom units lies above every ellipsoid.
        let z = 0.95 / spec.pixel();
        let v = shepp_logan_slice_kspace(&spec, z, &[[0.0, 0.0], [0.5, -0.3]]).unwrap();
        assert!(v.iter().all(|c| c.norm() == 0.0));
        assert!(shepp_logan_slice_mask(&spec, z).unwrap().iter().all(|&m| !m));
    }

    #[test]
    fn dc_is_area_weighted_sum() {
        let spec = SheppLoganSpec::new(128, 1000, 1.0, 0.0);
        let dc = shepp_logan_slice_kspace(&spec, 0.0, &[[0.0, 0.0]]).unwrap()[0];
        let pix2 = spec.pixel().powi(2);
        // At z = 0: ellipsoids a, b, e intersect the plane.
        let expected: f64 = kak_slaney_ellipsoids()
            .iter()
            .filter_map(|e| e.section_scale(0.0).map(|s| e.intensity * PI * e.semi_axes[0] * e.semi_axes[1] * s * s))
            .sum::<f64>()
            / pix2;
        assert!((dc.re - expected).abs() < 1e-9 * expected && dc.im.abs() < 1e-9 * expected);
        let sections = kak_slaney_ellipsoids().iter().filter(|e| e.section_scale(0.0).is_some()).count();
        assert_eq!(sections, 3);
    }

    #[test]
    fn hermitian_symmetry() {
        let spec = SheppLoganSpec::new(64, 1000, 1.0, 0.02);
        let ks = [[0.4, -1.1], [-0.4, 1.1]];
        let v = shepp_logan_slice_kspace(&spec, -7.0, &ks).unwrap();
        assert!((v[0] - v[1].conj()).norm() < 1e-12 * v[0].norm().max(1.0));
    }

    #[test]
    fn slice_is_real_and_nonnegative_inside_skull() {
        let spec = SheppLoganSpec::new(64, 1000, 1.0, 0.0);
        let img = shepp_logan_slice(&spec, 0.0).unwrap();
        assert!(img.data().iter().all(|v| v.im == 0.0 && v.re >= -1e-12));
        assert!((img.get(0, 0).unwrap().re - 1.02).abs() < 1e-12);
    }

    #[test]
    fn jinc_limits() {
        assert_eq!(jinc(0.0), 1.0);
        assert!((jinc(1e-9) - 1.0).abs() < 1e-15);
        // first zero of J1 at 3.8317
        assert!(jinc(3.831_705_970_207_512).abs() < 1e-12);
    }
}
