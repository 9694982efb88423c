//! Conjugate gradient on Hermitian positive semi-definite systems `A x = b`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SwcsError};
use crate::linalg::{axpy, dot, norm, norm_sqr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitialGuess {
    #[default]
    Zero,
    /// Start from a caller-supplied image (e.g. a neighbouring frame).
    Provided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CgConfig {
    pub max_iterations: usize,
    /// Stop once `||b - A x|| / ||b||` drops below this.
    pub tolerance: f64,
    pub initial_guess: InitialGuess,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig { max_iterations: 50, tolerance: 1e-6, initial_guess: InitialGuess::Zero }
    }
}

impl CgConfig {
    pub fn new(max_iterations: usize, tolerance: f64) -> Self {
        CgConfig { max_iterations, tolerance, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(SwcsError::param("max_iterations", "must be >= 1"));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(SwcsError::param("tolerance", format!("must lie in (0, 1), got {}", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CgReport {
    pub iterations: usize,
    /// Relative residual `||b - A x_i|| / ||b||`, starting with the initial iterate.
    pub residuals: Vec<f64>,
    /// Quadratic objective `x^H A x - 2 Re(x^H b)` per iterate; CG never increases it.
    pub objective: Vec<f64>,
    pub converged: bool,
}

impl CgReport {
    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(0.0)
    }
}

fn objective(x: &[Complex64], r: &[Complex64], b: &[Complex64]) -> f64 {
    // x^H A x - 2 Re x^H b with A x = b - r
    -(dot(x, b).re + dot(x, r).re)
}

/// Solves `A x = b` starting from `x0` (zero when `None`).
pub fn solve<A>(apply: A, b: &[Complex64], x0: Option<Vec<Complex64>>, cfg: &CgConfig) -> (Vec<Complex64>, CgReport)
where
    A: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let b_norm = norm(b);
    let mut report = CgReport::default();
    if b_norm == 0.0 {
        report.residuals.push(0.0);
        report.objective.push(0.0);
        report.converged = true;
        return (vec![Complex64::new(0.0, 0.0); b.len()], report);
    }
    let (mut x, mut r) = match x0 {
        Some(x) => {
            let ax = apply(&x);
            let r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            (x, r)
        }
        None => (vec![Complex64::new(0.0, 0.0); b.len()], b.to_vec()),
    };
    let mut rr = norm_sqr(&r);
    report.residuals.push(rr.sqrt() / b_norm);
    report.objective.push(objective(&x, &r, b));
    if rr.sqrt() <= cfg.tolerance * b_norm {
        report.converged = true;
        return (x, report);
    }
    let mut p = r.clone();
    for it in 1..=cfg.max_iterations {
        let ap = apply(&p);
        let pap = dot(&p, &ap).re;
        if pap <= 0.0 || !pap.is_finite() {
            // Search direction in the null space: nothing left to reduce.
            break;
        }
        let alpha = rr / pap;
        axpy(Complex64::new(alpha, 0.0), &p, &mut x);
        axpy(Complex64::new(-alpha, 0.0), &ap, &mut r);
        let rr_new = norm_sqr(&r);
        report.iterations = it;
        report.residuals.push(rr_new.sqrt() / b_norm);
        report.objective.push(objective(&x, &r, b));
        if rr_new.sqrt() <= cfg.tolerance * b_norm {
            report.converged = true;
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + *pi * beta;
        }
    }
    (x, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn solves_small_spd_system() {
        // A = [[4, 1], [1, 3]], b = [1, 2] -> x = [1/11, 7/11]
        let apply = |x: &[Complex64]| vec![x[0] * 4.0 + x[1], x[0] + x[1] * 3.0];
        let (x, rep) = solve(apply, &[c(1.0), c(2.0)], None, &CgConfig::new(10, 1e-12));
        assert!(rep.converged);
        assert!((x[0] - c(1.0 / 11.0)).norm() < 1e-12 && (x[1] - c(7.0 / 11.0)).norm() < 1e-12);
        assert!(rep.iterations <= 2);
    }

    #[test]
    fn zero_rhs_returns_zero_immediately() {
        let (x, rep) = solve(|x: &[Complex64]| x.to_vec(), &[c(0.0); 4], None, &CgConfig::default());
        assert_eq!(rep.iterations, 0);
        assert!(x.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn objective_never_increases() {
        let d: Vec<f64> = (1..=40).map(|i| (i * i) as f64).collect();
        let apply = |x: &[Complex64]| x.iter().zip(&d).map(|(v, s)| v * *s).collect::<Vec<_>>();
        let b: Vec<Complex64> = (0..40).map(|i| Complex64::new((i as f64).sin(), (i as f64).cos())).collect();
        let (_, rep) = solve(apply, &b, None, &CgConfig::new(30, 1e-14));
        for w in rep.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn config_validation() {
        assert!(CgConfig::new(0, 1e-6).validate().is_err());
        assert!(CgConfig::new(5, 1.5).validate().is_err());
        assert!(CgConfig::default().validate().is_ok());
    }
}
