//! Square complex images on a centered pixel grid.
//!
//! Pixel `(ix, iy)` sits at coordinate `(ix - n/2, iy - n/2)`, so the center
//! of the image is pixel `(n/2, n/2)`. Storage is row-major (`iy * n + ix`).

use num_complex::Complex64;

use crate::error::{Result, SwcsError};

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    n: usize,
    data: Vec<Complex64>,
    /// Frame (trajectory) index this image belongs to, if any.
    pub frame: Option<usize>,
}

impl Image {
    pub fn zeros(n: usize) -> Self {
        Image { n, data: vec![Complex64::new(0.0, 0.0); n * n], frame: None }
    }

    pub fn from_vec(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n < 2 {
            return Err(SwcsError::param("n", format!("image size must be >= 2, got {n}")));
        }
        if data.len() != n * n {
            return Err(SwcsError::shape(format!("{} pixels", n * n), data.len()));
        }
        if data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(SwcsError::param("data", "image values must be finite"));
        }
        Ok(Image { n, data, frame: None })
    }

    pub fn from_real(n: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(n, data.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Builds an image by evaluating `f(x, y)` at every centered pixel coordinate.
    pub fn from_fn(n: usize, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let half = (n / 2) as f64;
        let mut data = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                data.push(f(ix as f64 - half, iy as f64 - half));
            }
        }
        Image { n, data, frame: None }
    }

    pub fn with_frame(mut self, frame: usize) -> Self {
        self.frame = Some(frame);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// Centered coordinate of a storage index.
    pub fn coord(&self, idx: usize) -> (i64, i64) {
        let half = (self.n / 2) as i64;
        ((idx % self.n) as i64 - half, (idx / self.n) as i64 - half)
    }

    pub fn get(&self, x: i64, y: i64) -> Option<Complex64> {
        let half = (self.n / 2) as i64;
        let (ix, iy) = (x + half, y + half);
        if ix < 0 || iy < 0 || ix >= self.n as i64 || iy >= self.n as i64 {
            return None;
        }
        Some(self.data[iy as usize * self.n + ix as usize])
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.norm()).collect()
    }

    /// Magnitudes along the row through the image center (y = 0).
    pub fn center_row(&self) -> Vec<f64> {
        let row = self.n / 2;
        self.data[row * self.n..(row + 1) * self.n].iter().map(|v| v.norm()).collect()
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.data)
    }

    /// Elementwise sum; sizes must agree.
    pub fn add(&self, other: &Image) -> Result<Image> {
        if self.n != other.n {
            return Err(SwcsError::shape(format!("{0}x{0} image", self.n), format!("{0}x{0}", other.n)));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Image { n: self.n, data, frame: self.frame })
    }
}
