//! Kernel estimation of first-order intensity for planar point patterns that
//! are invariant along an unknown direction.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod normal;
pub mod quadrature;

pub use error::Error;
pub use geometry::{chord_measure, chord_midpoint, v_range, ChordProfile, Point, Subspace, Window};
pub use kernels::{
    correction_2d, correction_substat_closed, correction_substat_quadrature, kernel_1d, Bandwidth,
    KernelSpec,
};
pub mod estimate;
pub mod experiments;
pub mod optimize;
pub mod pattern;
pub mod simulate;

pub use estimate::{
    fit_theta, fit_theta_with, intensity_2d, intensity_stationary, intensity_substat, loglik,
    profile_loglik, select_bandwidth, FitConfig, FitResult, IntensityEstimator, LoglikConfig,
    ProfileCriterion,
};
pub use experiments::{root_mise, root_mse_theta, ExperimentPlan, ExperimentResult};
pub use pattern::PointPattern;
pub use simulate::{simulate_poisson_beta, simulate_thomas, PoissonBetaModel, RngStream, ThomasModel};
