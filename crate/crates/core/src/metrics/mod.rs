//! Distances between distributions, KL bounds and rate fits.

mod kl;
mod rate;
mod tv;

#[cfg(test)]
mod tests;

pub use kl::{kl_gaussians_1d, kl_gaussians_same_cov, kl_step_gaussian, pinsker_check};
pub use rate::{fit_rate, fit_rate_dropping_smallest, ols, LineFit, RateFit};
pub(crate) use tv::unit_vector;
pub use tv::{
    exact_gaussian_estimate, exact_isotropic_estimate, grid_masses, tv_cells_times_isotropic,
    tv_gaussians_1d, tv_grid, tv_histograms_1d, tv_isotropic_gaussians, tv_sliced, CellMasses,
    GridSpec, Resolution, TvEstimate, TvMethod, CELL_INTEGRAL_TOL, GRID_COVERAGE_TOL,
};
