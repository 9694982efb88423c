//! Sliding-window plus compressed-sensing reconstruction of dynamic radial MRI.
//!
//! A blurred estimate is reconstructed from a wide, Hamming-weighted window
//! of golden-angle spokes; the per-frame correction is then recovered from a
//! narrow window as a sparse residual, either greedily (K-fold orthogonal
//! matching pursuit) or by split-Bregman l1 minimization.

pub mod cg;
pub mod config;
pub mod error;
pub mod estimate;
pub mod image;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod operators;
pub mod phantoms;
pub mod pipeline;
pub mod simulate;
pub mod solvers;
pub mod trajectories;

pub use error::{Result, SwcsError};
pub use image::Image;
