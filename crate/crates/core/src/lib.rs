//! Regularization of time-dependent linear inverse problems in
//! Lebesgue-Bochner spaces, with a dynamic parallel-beam CT toolkit.
//!
//! - [`geometry`]: norms, duality mappings and smoothness constants.
//! - [`radon`]: static and dynamic Radon transforms and their adjoints.
//! - [`dct`]: cosine transform and the spectral temporal filter.
//! - [`solvers`]: dual Tikhonov method, temporal variational method, Landweber, FBP.
//! - [`phantoms`]: simulated moving phantoms and noise.
//! - [`metrics`]: relative errors, SSIM, PSNR.
//! - [`harness`]: configuration, file formats, experiment drivers and the CLI.

pub mod dct;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod phantoms;
pub mod radon;
pub mod solvers;

pub use error::{Error, Result};
