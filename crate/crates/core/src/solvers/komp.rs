//! K-fold orthogonal matching pursuit: each pass adds the `k` pixels whose
//! columns correlate best with the current data residual, then re-fits all
//! selected pixels by least squares.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ResidualProblem;
use crate::cg::{self, CgConfig};
use crate::error::{Result, SwcsError};
use crate::image::Image;
use crate::linalg::norm_sqr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KompConfig {
    /// Pixels added to the support per iteration.
    pub k: usize,
    pub max_iterations: usize,
    /// Least-squares fit on the current support.
    pub inner: CgConfig,
}

impl Default for KompConfig {
    fn default() -> Self {
        KompConfig { k: 65536, max_iterations: 4, inner: CgConfig::new(10, 1e-4) }
    }
}

impl KompConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(SwcsError::param("k", "must be >= 1"));
        }
        if self.max_iterations == 0 {
            return Err(SwcsError::param("max_iterations", "must be >= 1"));
        }
        self.inner.validate()
    }
}

#[derive(Debug, Clone)]
pub struct KompResult {
    pub image: Image,
    /// Selected pixel indices in selection order.
    pub support: Vec<usize>,
    pub iterations: usize,
    /// `||r - F dx||` after each iteration, starting with `||r||`.
    pub residual_norms: Vec<f64>,
    pub support_sizes: Vec<usize>,
    /// Met `||r - F dx||^2 <= eps`.
    pub converged: bool,
    /// Stopped because no remaining column had a non-zero correlation.
    pub exhausted: bool,
}

/// Indices of the `k` largest `|c|` among pixels not yet selected. Ties go to
/// the lower index.
fn select(corr: &[Complex64], selected: &[bool], k: usize) -> Vec<usize> {
    let mut cand: Vec<(f64, usize)> =
        corr.iter().enumerate().filter(|(i, _)| !selected[*i]).map(|(i, c)| (c.norm_sqr(), i)).filter(|(m, _)| *m > 0.0).collect();
    let order = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if cand.len() > k {
        cand.select_nth_unstable_by(k - 1, order);
        cand.truncate(k);
    }
    cand.sort_by(order);
    cand.into_iter().map(|(_, i)| i).collect()
}

pub fn komp_solve(p: &ResidualProblem<'_>, cfg: &KompConfig) -> Result<KompResult> {
    cfg.validate()?;
    let op = p.op();
    let len = op.pixel_count();
    let mut x = vec![Complex64::new(0.0, 0.0); len];
    let mut selected = vec![false; len];
    let mut support = Vec::new();
    let mut misfit = p.data().to_vec();
    let mut rr = norm_sqr(&misfit);
    let mut result = KompResult {
        image: Image::zeros(op.n()),
        support: Vec::new(),
        iterations: 0,
        residual_norms: vec![rr.sqrt()],
        support_sizes: vec![0],
        converged: false,
        exhausted: false,
    };
    if rr <= p.epsilon() {
        result.converged = true;
        return Ok(result);
    }
    let rhs_full = op.apply_adjoint(p.data());
    for it in 1..=cfg.max_iterations {
        let corr = op.apply_adjoint(&misfit);
        let picked = select(&corr, &selected, cfg.k);
        if picked.is_empty() {
            result.exhausted = true;
            break;
        }
        for &i in &picked {
            selected[i] = true;
        }
        support.extend_from_slice(&picked);

        let mask = |v: &mut Vec<Complex64>| {
            for (vi, &s) in v.iter_mut().zip(&selected) {
                if !s {
                    *vi = Complex64::new(0.0, 0.0);
                }
            }
        };
        let mut b = rhs_full.clone();
        mask(&mut b);
        let apply = |v: &[Complex64]| {
            let mut out = p.gram(v);
            mask(&mut out);
            out
        };
        let (fit, _) = cg::solve(apply, &b, Some(x.clone()), &cfg.inner);
        x = fit;
        misfit = p.misfit(&x);
        rr = norm_sqr(&misfit);
        result.iterations = it;
        result.residual_norms.push(rr.sqrt());
        result.support_sizes.push(support.len());
        if rr <= p.epsilon() {
            result.converged = true;
            break;
        }
    }
    result.image = Image::from_vec(op.n(), x)?;
    result.support = support;
    Ok(result)
}
