//! Checks on solved maps: area density and monotonicity, preimage counts,
//! injectivity, comparison geometry of the pull-back metric and flatness.

mod comparison;
mod density;
mod injectivity;

pub use comparison::{
    bishop_gromov_samples, check_bishop_gromov, check_cn, corrupted_metric, flatness_report, isoperimetric_ratio,
};
pub use density::{
    boundary_distance, check_monotonicity, density_profile, grid_barycentrics, radius_grid, sample_map_cells, theta_from_cells,
    DensityProfile, MonotonicityVerdict, SampledCell,
};
pub(crate) use density::{check_grid, profile_from};
pub use injectivity::{count_preimages, injectivity_report, preimage_clusters, InjectivityReport, Witness};
