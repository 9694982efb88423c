//! Normal operators `F^H D F` for conjugate-gradient solves.
//!
//! For a diagonal sample weighting `D`, `F^H D F` is a convolution with the
//! kernel `T(d) = sum_s D_s exp(i k_s . d)`, `d` in `[-n, n)^2`. Embedding it
//! in a `2n` circulant reduces each application to two FFTs.

use num_complex::Complex64;

use super::fft2::Fft2;
use super::ForwardOperator;
use crate::error::{Result, SwcsError};

/// A Hermitian positive semi-definite operator on image buffers.
pub trait NormalOperator: Sync {
    /// Number of unknowns.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64>;
}

/// `F^H D F` evaluated through its Toeplitz embedding.
#[derive(Debug)]
pub struct ToeplitzNormal {
    n: usize,
    fft: Fft2,
    kernel_hat: Vec<Complex64>,
    rows: Vec<usize>,
}

impl ToeplitzNormal {
    /// `sample_weights` is the diagonal `D` (one entry per sample); `None` means identity.
    pub fn new(op: &ForwardOperator, sample_weights: Option<&[f64]>) -> Result<Self> {
        let s = op.sample_count();
        let d: Vec<Complex64> = match sample_weights {
            Some(w) if w.len() != s => return Err(SwcsError::shape(format!("{s} sample weights"), w.len())),
            Some(w) => w.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            None => vec![Complex64::new(1.0, 0.0); s],
        };
        let n = op.n();
        let g = 2 * n;
        let big = op.doubled()?;
        // Storage (iy, ix) of the doubled image is lag (ix - n, iy - n).
        let lags = big.apply_adjoint(&d);
        let mut kernel = vec![Complex64::new(0.0, 0.0); g * g];
        for iy in 0..g {
            let cy = (iy as i64 - n as i64).rem_euclid(g as i64) as usize;
            for ix in 0..g {
                let cx = (ix as i64 - n as i64).rem_euclid(g as i64) as usize;
                kernel[cy * g + cx] = lags[iy * g + ix];
            }
        }
        let fft = Fft2::new(g);
        let all: Vec<usize> = (0..g).collect();
        fft.forward_sparse_rows(&mut kernel, &all);
        let scale = 1.0 / (g * g) as f64;
        kernel.iter_mut().for_each(|v| *v *= scale);
        let half = (n / 2) as i64;
        let rows = (0..n as i64).map(|i| (i - half).rem_euclid(g as i64) as usize).collect();
        Ok(ToeplitzNormal { n, fft, kernel_hat: kernel, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl NormalOperator for ToeplitzNormal {
    fn len(&self) -> usize {
        self.n * self.n
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let (n, g) = (self.n, 2 * self.n);
        assert_eq!(x.len(), n * n, "image buffer length");
        let mut grid = vec![Complex64::new(0.0, 0.0); g * g];
        for (iy, &gy) in self.rows.iter().enumerate() {
            for (ix, &gx) in self.rows.iter().enumerate() {
                grid[gy * g + gx] = x[iy * n + ix];
            }
        }
        self.fft.forward_sparse_rows(&mut grid, &self.rows);
        grid.iter_mut().zip(&self.kernel_hat).for_each(|(v, k)| *v *= k);
        self.fft.inverse_to_rows(&mut grid, &self.rows);
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for (iy, &gy) in self.rows.iter().enumerate() {
            for (ix, &gx) in self.rows.iter().enumerate() {
                out[iy * n + ix] = grid[gy * g + gx];
            }
        }
        out
    }
}

/// `F^H D F` applied as an explicit forward/adjoint pair.
pub struct ExplicitNormal<'a> {
    pub op: &'a ForwardOperator,
    pub sample_weights: Option<Vec<f64>>,
}

impl NormalOperator for ExplicitNormal<'_> {
    fn len(&self) -> usize {
        self.op.pixel_count()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = self.op.apply(x);
        if let Some(w) = &self.sample_weights {
            y.iter_mut().zip(w).for_each(|(v, &d)| *v *= d);
        }
        self.op.apply_adjoint(&y)
    }
}
