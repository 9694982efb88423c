//! Sparse recovery of the per-frame residual `dx` from narrow-window data:
//!
//! ```text
//! min ||dx||_1   subject to   ||F_nu dx - (y_nu - F_nu x_M)||^2 <= eps
//! ```
//!
//! Sparsity is imposed directly on the pixels of `dx`.

mod bregman;
mod komp;

use num_complex::Complex64;

pub use bregman::{split_bregman_solve, SplitBregmanConfig, SplitBregmanResult};
pub use komp::{komp_solve, KompConfig, KompResult};

use crate::error::{Result, SwcsError};
use crate::image::Image;
use crate::operators::{ForwardOperator, KSpaceData, NormalOperator, ToeplitzNormal};

/// `r = y_nu - F_nu x_M`.
pub fn residual_data(y: &KSpaceData, op: &ForwardOperator, estimate: &Image) -> Result<KSpaceData> {
    op.check_data(y)?;
    let predicted = op.forward(estimate)?;
    let samples = y.samples().iter().zip(predicted.samples()).map(|(a, b)| a - b).collect();
    KSpaceData::new(y.k(), y.trajectory_indices().to_vec(), samples)
}

/// Complex soft threshold: shrinks the magnitude by `tau`, keeps the phase.
pub fn soft_threshold(v: Complex64, tau: f64) -> Complex64 {
    let mag = v.norm();
    if mag <= tau || mag == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        v * ((mag - tau) / mag)
    }
}

/// Operator, residual data and fidelity bound of one residual recovery.
pub struct ResidualProblem<'a> {
    op: &'a ForwardOperator,
    normal: ToeplitzNormal,
    data: Vec<Complex64>,
    epsilon: f64,
}

impl<'a> ResidualProblem<'a> {
    pub fn new(op: &'a ForwardOperator, r: &KSpaceData, epsilon: f64) -> Result<Self> {
        op.check_data(r)?;
        if !(epsilon >= 0.0) {
            return Err(SwcsError::param("epsilon", "fidelity bound must be non-negative"));
        }
        Ok(ResidualProblem { op, normal: ToeplitzNormal::new(op, None)?, data: r.samples().to_vec(), epsilon })
    }

    pub fn op(&self) -> &ForwardOperator {
        self.op
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `F^H F x` through the Toeplitz embedding.
    pub(crate) fn gram(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.normal.apply(x)
    }

    /// `r - F x`
    pub(crate) fn misfit(&self, x: &[Complex64]) -> Vec<Complex64> {
        let fx = self.op.apply(x);
        self.data.iter().zip(fx).map(|(a, b)| a - b).collect()
    }
}

#[cfg(test)]
mod tests;
