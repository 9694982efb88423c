//! Two identical Gaussians moving apart along x: centers at `(+-v t, 0)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwcsError};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPhantomSpec {
    /// Standard deviation in pixels.
    pub sigma: f64,
    /// Speed of each center in pixels per frame.
    pub velocity: f64,
    pub t_min: i64,
    pub t_max: i64,
    pub n: usize,
}

impl GaussianPhantomSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(SwcsError::param("sigma", format!("must be positive, got {}", self.sigma)));
        }
        if !(self.velocity >= 0.0 && self.velocity.is_finite()) {
            return Err(SwcsError::param("velocity", format!("must be non-negative, got {}", self.velocity)));
        }
        if self.t_min >= self.t_max {
            return Err(SwcsError::param("t_min", "frame range must satisfy t_min < t_max"));
        }
        if self.n < 2 {
            return Err(SwcsError::param("n", "image size must be >= 2"));
        }
        Ok(())
    }

    fn check_time(&self, t: i64) -> Result<()> {
        if t < self.t_min || t > self.t_max {
            return Err(SwcsError::FrameOutOfRange { frame: t, min: self.t_min, max: self.t_max });
        }
        Ok(())
    }

    /// Offset of the right-hand center at time `t`.
    pub fn offset(&self, t: i64) -> f64 {
        self.velocity * t as f64
    }

    /// Noise-free value at continuous coordinate `(x, y)`.
    pub fn value(&self, t: i64, x: f64, y: f64) -> f64 {
        let d = self.offset(t);
        let s2 = 2.0 * self.sigma * self.sigma;
        (-((x - d).powi(2) + y * y) / s2).exp() + (-((x + d).powi(2) + y * y) / s2).exp()
    }
}

/// Rasterized frame: pixel values sampled at pixel centers.
pub fn gaussian_frame(spec: &GaussianPhantomSpec, t: i64) -> Result<Image> {
    spec.validate()?;
    spec.check_time(t)?;
    Ok(Image::from_fn(spec.n, |x, y| Complex64::new(spec.value(t, x, y), 0.0)))
}

/// Continuous Fourier transform of the frame,
/// `2 pi sigma^2 exp(-sigma^2 |k|^2 / 2) * 2 cos(kx v t)`, which is what the
/// pixel-sum forward model returns for a well-sampled Gaussian.
pub fn gaussian_kspace(spec: &GaussianPhantomSpec, t: i64, coords: &[[f64; 2]]) -> Result<Vec<Complex64>> {
    spec.validate()?;
    spec.check_time(t)?;
    let s2 = spec.sigma * spec.sigma;
    let amp = 2.0 * PI * s2;
    let d = spec.offset(t);
    Ok(coords
        .iter()
        .map(|k| {
            let kk = k[0] * k[0] + k[1] * k[1];
            Complex64::new(amp * (-s2 * kk / 2.0).exp() * 2.0 * (k[0] * d).cos(), 0.0)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sigma: f64, velocity: f64) -> GaussianPhantomSpec {
        GaussianPhantomSpec { sigma, velocity, t_min: -500, t_max: 499, n: 256 }
    }

    #[test]
    fn coincident_at_time_zero() {
        let f = gaussian_frame(&spec(4.0, 0.064), 0).unwrap();
        assert!((f.get(0, 0).unwrap().re - 2.0).abs() < 1e-15);
        let max = f.magnitude().into_iter().fold(0.0, f64::max);
        assert_eq!(max, 2.0);
    }

    #[test]
    fn centers_follow_velocity() {
        let s = spec(2.0, 0.128);
        assert!((s.offset(500 - 1) - 63.872).abs() < 1e-12);
        let s = GaussianPhantomSpec { t_max: 500, ..s };
        assert!((s.offset(500) - 64.0).abs() < 1e-12);
        let f = gaussian_frame(&s, 500).unwrap();
        assert!((f.get(64, 0).unwrap().re - 1.0).abs() < 1e-12);
        assert!((f.get(-64, 0).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn time_reversal_symmetry() {
        let s = spec(3.0, 0.07);
        let a = gaussian_frame(&s, -37).unwrap();
        let b = gaussian_frame(&s, 37).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn kspace_dc_and_symmetry() {
        let s = spec(4.0, 0.064);
        let dc = gaussian_kspace(&s, 0, &[[0.0, 0.0]]).unwrap()[0];
        assert!((dc.re - 2.0 * 2.0 * PI * 16.0).abs() < 1e-9 && dc.im == 0.0);
        let ks = [[0.3, -0.2], [-0.3, 0.2], [1.0, 1.2]];
        let v = gaussian_kspace(&s, 120, &ks).unwrap();
        assert!((v[0] - v[1].conj()).norm() < 1e-12);
        assert!(v.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn rejects_out_of_range_time() {
        assert!(gaussian_frame(&spec(2.0, 0.1), 500).is_err());
        assert!(gaussian_kspace(&spec(2.0, 0.1), -501, &[[0.0, 0.0]]).is_err());
        assert!(gaussian_frame(&spec(0.0, 0.1), 0).is_err());
    }
}
