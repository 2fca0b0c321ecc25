//! Disc meshes, piecewise-linear maps into a target, pull-back forms, energies
//! and the pull-back metric.

mod disc;
pub(crate) mod map;
mod pullback;

pub use disc::DiscMesh;
pub use map::{
    barycentric_geodesic, ks_energy, map_area, pullback_form, reshetnyak_energy, MeshMap, MeshMapFile, PullbackForm,
    TriangleStats,
};
pub use pullback::{sub_triangle_centroids, DomainPoint, PullbackField, PullbackMetric};

use crate::error::Result;

/// Concentric-ring disc mesh with `rings` rings.
pub fn generate_disc_mesh(rings: usize) -> Result<DiscMesh> {
    DiscMesh::concentric(rings)
}

pub fn pullback_metric(map: &MeshMap, subdivision: usize) -> Result<PullbackMetric> {
    PullbackMetric::new(map, subdivision)
}
