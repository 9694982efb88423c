//! Ground-truth dynamic phantoms with analytic k-space, plus measurement noise.

mod gaussian;
mod noise;
mod shepp_logan;

pub use gaussian::{gaussian_frame, gaussian_kspace, GaussianPhantomSpec};
pub use noise::{add_noise, NoiseSpec};
pub use shepp_logan::{
    kak_slaney_ellipsoids, shepp_logan_slice, shepp_logan_slice_kspace, shepp_logan_slice_mask, slice_position,
    Ellipsoid, SheppLoganSpec,
};
