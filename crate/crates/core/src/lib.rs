//! Discrete Plateau problems in piecewise-flat CAT(0) spaces.
//!
//! The crate is organised the way a computation flows: a [`space`] and a
//! polygonal [`curve`] in it are handed to the [`solve`] module, which relaxes a
//! [`mesh`] map of the unit disc; [`analyze`] checks density, multiplicity and
//! comparison properties of the result, and [`funnel`] glues a flat funnel
//! along the curve to study area growth and the Fáry–Milnor alternative.

pub mod analyze;
pub mod curve;
pub mod error;
pub mod funnel;
pub mod geom;
pub mod mesh;
pub mod report;
pub mod scene;
pub mod solve;
pub mod space;

pub use error::{Error, Result};
pub use space::{MetricSpace, Point, TargetSpace};
