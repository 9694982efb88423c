//! Split-Bregman l1 minimization of the residual.
//!
//! Each sweep minimizes
//! `||F dx - f||^2 + lambda1 ||u - dx||^2 + lambda2 ||u||_1`
//! alternately in `dx` (CG on `(F^H F + lambda1 I) dx = F^H f + lambda1 u`)
//! and in `u` (soft threshold at `lambda2 / (2 lambda1)`). After the sweeps
//! the Bregman data is updated, `f <- f + (r - F dx)`.
//!
//! The single-weight form `||F dx - r||^2 + lambda ||dx||_1` corresponds to a
//! `u`-step threshold of `lambda / 2`, i.e. `lambda = lambda2 / lambda1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{soft_threshold, ResidualProblem};
use crate::cg::{self, CgConfig};
use crate::error::{Result, SwcsError};
use crate::image::Image;
use crate::linalg::{dot, norm_sqr};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitBregmanConfig {
    /// Weight of the `||u - dx||^2` coupling.
    pub lambda1: f64,
    /// Weight of `||u||_1`.
    pub lambda2: f64,
    /// Bregman data updates.
    pub outer_iterations: usize,
    /// `dx`/`u` alternations per outer iteration.
    pub sweeps: usize,
    pub inner: CgConfig,
}

impl Default for SplitBregmanConfig {
    fn default() -> Self {
        SplitBregmanConfig { lambda1: 1e6, lambda2: 4000.0, outer_iterations: 6, sweeps: 1, inner: CgConfig::new(10, 1e-4) }
    }
}

impl SplitBregmanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 > 0.0 && self.lambda1.is_finite()) {
            return Err(SwcsError::param("lambda1", "must be positive"));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(SwcsError::param("lambda2", "must be non-negative"));
        }
        if self.outer_iterations == 0 || self.sweeps == 0 {
            return Err(SwcsError::param("outer_iterations", "outer iterations and sweeps must be >= 1"));
        }
        self.inner.validate()
    }

    pub fn threshold(&self) -> f64 {
        self.lambda2 / (2.0 * self.lambda1)
    }
}

#[derive(Debug, Clone)]
pub struct SplitBregmanResult {
    pub image: Image,
    /// The thresholded split variable at exit.
    pub split: Image,
    pub outer_iterations: usize,
    /// `||r - F dx||` after each outer iteration, starting with `||r||`.
    pub residual_norms: Vec<f64>,
    /// Split objective after every sweep, for the Bregman data of that sweep.
    pub objective: Vec<f64>,
    pub converged: bool,
}

fn l1(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).sum()
}

pub fn split_bregman_solve(p: &ResidualProblem<'_>, cfg: &SplitBregmanConfig) -> Result<SplitBregmanResult> {
    cfg.validate()?;
    let op = p.op();
    let len = op.pixel_count();
    let zero = Complex64::new(0.0, 0.0);
    let mut dx = vec![zero; len];
    let mut u = vec![zero; len];
    let mut f = p.data().to_vec();
    let r_norm = norm_sqr(p.data()).sqrt();
    let mut result = SplitBregmanResult {
        image: Image::zeros(op.n()),
        split: Image::zeros(op.n()),
        outer_iterations: 0,
        residual_norms: vec![r_norm],
        objective: Vec::new(),
        converged: false,
    };
    if r_norm * r_norm <= p.epsilon() {
        result.converged = true;
        return Ok(result);
    }
    let tau = cfg.threshold();
    let lambda1 = cfg.lambda1;
    for outer in 1..=cfg.outer_iterations {
        let fh_f = op.apply_adjoint(&f);
        let f_sq = norm_sqr(&f);
        for _ in 0..cfg.sweeps {
            let rhs: Vec<Complex64> = fh_f.iter().zip(&u).map(|(a, b)| a + b * lambda1).collect();
            let apply = |v: &[Complex64]| {
                let mut out = p.gram(v);
                out.iter_mut().zip(v).for_each(|(o, vi)| *o += vi * lambda1);
                out
            };
            let (next, _) = cg::solve(apply, &rhs, Some(dx), &cfg.inner);
            dx = next;
            u = dx.iter().map(|&v| soft_threshold(v, tau)).collect();

            // ||F dx - f||^2 = dx^H G dx - 2 Re dx^H F^H f + ||f||^2
            let g = p.gram(&dx);
            let data_term = (dot(&dx, &g).re - 2.0 * dot(&dx, &fh_f).re + f_sq).max(0.0);
            let coupling: f64 = u.iter().zip(&dx).map(|(a, b)| (a - b).norm_sqr()).sum();
            result.objective.push(data_term + lambda1 * coupling + cfg.lambda2 * l1(&u));
        }
        let misfit = p.misfit(&dx);
        let rr = norm_sqr(&misfit);
        result.outer_iterations = outer;
        result.residual_norms.push(rr.sqrt());
        if rr <= p.epsilon() {
            result.converged = true;
            break;
        }
        f.iter_mut().zip(&misfit).for_each(|(fi, m)| *fi += m);
    }
    result.image = Image::from_vec(op.n(), dx)?;
    result.split = Image::from_vec(op.n(), u)?;
    Ok(result)
}
