//! Square 2-D FFTs built from rustfft row transforms.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse (unnormalized) transforms of a `g x g` row-major grid.
pub(crate) struct Fft2 {
    g: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("g", &self.g).finish()
    }
}

impl Fft2 {
    pub fn new(g: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 { g, forward: planner.plan_fft_forward(g), inverse: planner.plan_fft_inverse(g) }
    }

    pub fn size(&self) -> usize {
        self.g
    }

    /// Forward transform (`exp(-2 pi i jk / g)`). Only `rows` are transformed
    /// along the first axis; all other rows must be zero on entry.
    pub fn forward_sparse_rows(&self, grid: &mut [Complex64], rows: &[usize]) {
        self.transform(grid, rows, true);
    }

    /// Inverse transform (`exp(+2 pi i jk / g)`, no `1/g^2`). Only `rows` of
    /// the result are valid on exit.
    pub fn inverse_to_rows(&self, grid: &mut [Complex64], rows: &[usize]) {
        self.transform(grid, rows, false);
    }

    fn transform(&self, grid: &mut [Complex64], rows: &[usize], forward: bool) {
        let g = self.g;
        debug_assert_eq!(grid.len(), g * g);
        let fft = if forward { &self.forward } else { &self.inverse };
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        if forward {
            for &r in rows {
                fft.process_with_scratch(&mut grid[r * g..(r + 1) * g], &mut scratch);
            }
            self.columns(grid, fft.as_ref(), &mut scratch);
        } else {
            self.columns(grid, fft.as_ref(), &mut scratch);
            for &r in rows {
                fft.process_with_scratch(&mut grid[r * g..(r + 1) * g], &mut scratch);
            }
        }
    }

    fn columns(&self, grid: &mut [Complex64], fft: &dyn Fft<f64>, scratch: &mut [Complex64]) {
        let g = self.g;
        let mut t = vec![Complex64::new(0.0, 0.0); g * g];
        transpose(grid, &mut t, g);
        fft.process_with_scratch(&mut t, scratch);
        transpose(&t, grid, g);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], g: usize) {
    const B: usize = 32;
    for i0 in (0..g).step_by(B) {
        for j0 in (0..g).step_by(B) {
            for i in i0..(i0 + B).min(g) {
                for j in j0..(j0 + B).min(g) {
                    dst[j * g + i] = src[i * g + j];
                }
            }
        }
    }
}
