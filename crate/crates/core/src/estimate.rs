//! Blurred estimate from a wide window: Hamming-weighted least squares
//! `min ||W F x - W y||^2` solved by CG on the normal equations
//! `F^H W^2 F x = F^H W^2 y`.

use crate::cg::{self, CgConfig, CgReport, InitialGuess};
use crate::error::{Result, SwcsError};
use crate::image::Image;
use crate::operators::{apply_window, ForwardOperator, NormalOperator, ToeplitzNormal, WindowWeights};

#[derive(Debug, Clone)]
pub struct Estimate {
    pub image: Image,
    pub report: CgReport,
}

/// Reconstructs `x_M` from `y` (the data of the trajectories in `op`).
///
/// `initial` is used only when `cfg.initial_guess` is [`InitialGuess::Provided`].
/// Running out of iterations is not an error; check `report.converged`.
pub fn reconstruct_estimate(
    y: &crate::operators::KSpaceData,
    op: &ForwardOperator,
    w: &WindowWeights,
    cfg: &CgConfig,
    initial: Option<&Image>,
) -> Result<Estimate> {
    cfg.validate()?;
    op.check_data(y)?;
    if w.len() != y.trajectory_count() {
        return Err(SwcsError::shape(format!("{} window weights", y.trajectory_count()), w.len()));
    }
    // W^2 y, then F^H.
    let yw2 = apply_window(&apply_window(y, w)?, w)?;
    let rhs = op.apply_adjoint(yw2.samples());
    let d: Vec<f64> = w.per_sample(op.k()).iter().map(|v| v * v).collect();
    let normal = ToeplitzNormal::new(op, Some(&d))?;
    let x0 = match (cfg.initial_guess, initial) {
        (InitialGuess::Provided, Some(img)) => {
            if img.n() != op.n() {
                return Err(SwcsError::shape(format!("{0}x{0} initial image", op.n()), img.n()));
            }
            Some(img.data().to_vec())
        }
        _ => None,
    };
    let (x, report) = cg::solve(|v| normal.apply(v), &rhs, x0, cfg);
    Ok(Estimate { image: Image::from_vec(op.n(), x)?, report })
}
