//! Synthetic acquisitions: analytic k-space of a phantom sampled along
//! golden-angle spokes, one spoke per frame.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SwcsError};
use crate::operators::KSpaceData;
use crate::phantoms::{add_noise, gaussian_kspace, shepp_logan_slice_kspace, slice_position, GaussianPhantomSpec, NoiseSpec, SheppLoganSpec};
use crate::pipeline::Acquisition;
use crate::trajectories::{RadialScheme, Trajectory};

fn assemble(
    n: usize,
    scheme: &RadialScheme,
    noise: Option<&NoiseSpec>,
    spoke: impl Fn(&Trajectory) -> Result<Vec<Complex64>> + Sync,
) -> Result<Acquisition> {
    let trajectories = scheme.trajectories()?;
    let per_spoke: Vec<Vec<Complex64>> = trajectories.par_iter().map(&spoke).collect::<Result<_>>()?;
    let data = KSpaceData::new(scheme.samples, (1..=scheme.count).collect(), per_spoke.concat())?;
    let data = match noise {
        Some(spec) => add_noise(&data, spec)?,
        None => data,
    };
    Acquisition::new(n, trajectories, data)
}

/// Two moving Gaussians; trajectory `m` sees the phantom at frame time
/// `scheme.frame_time(m)`.
pub fn simulate_gaussians(spec: &GaussianPhantomSpec, scheme: &RadialScheme, noise: Option<&NoiseSpec>) -> Result<Acquisition> {
    spec.validate()?;
    let (first, last) = (scheme.frame_time(1), scheme.frame_time(scheme.count));
    if first < spec.t_min || last > spec.t_max {
        return Err(SwcsError::param("t_min", format!("phantom time range must cover {first}..={last}")));
    }
    assemble(spec.n, scheme, noise, |t| gaussian_kspace(spec, t.frame_time, &t.samples))
}

/// Shepp-Logan slice moving through the volume; trajectory `m` sees the
/// slice at `slice_position(m)`.
pub fn simulate_shepp_logan(spec: &SheppLoganSpec, scheme: &RadialScheme, noise: Option<&NoiseSpec>) -> Result<Acquisition> {
    spec.validate()?;
    if spec.frames != scheme.count {
        return Err(SwcsError::shape(format!("{} frames", scheme.count), spec.frames));
    }
    assemble(spec.n, scheme, noise, |t| shepp_logan_slice_kspace(spec, slice_position(t.index, spec), &t.samples))
}
