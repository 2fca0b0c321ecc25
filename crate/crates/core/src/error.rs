use thiserror::Error;

use crate::space::Point;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point references missing chart {chart}")]
    InvalidChart { chart: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid space description: {0}")]
    InvalidSpace(String),

    #[error("geodesic not resolved: {0}")]
    GeodesicNotResolved(String),

    #[error("degenerate angle query: {0}")]
    DegenerateQuery(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { best: Point, residual: f64, iterations: usize },

    #[error("operation needs a two-dimensional space")]
    NotTwoDimensional,

    #[error("degenerate vertex {0}: consecutive vertices coincide")]
    DegenerateVertex(usize),

    #[error("curve sampler failed: {0}")]
    SamplerFailure(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("singular pull-back system on triangle {0}")]
    SingularSystem(usize),

    #[error("radius {radius} exceeds admissible limit {limit}")]
    RadiusTooLarge { radius: f64, limit: f64 },

    #[error("negative sector angle {angle} at curve vertex {vertex}")]
    DegenerateAngle { vertex: usize, angle: f64 },

    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),

    #[error("scene error: {0}")]
    Scene(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
