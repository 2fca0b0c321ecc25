//! Target spaces and their metric oracles.

mod angle;
pub mod complex;
pub mod cone;
pub mod desc;
mod frechet;
pub mod glued;

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use desc::SpaceDesc;
pub use angle::{upper_angle, AngleQuery};
pub use complex::{ChartPolygon, Gluing, PolyhedralComplex};
pub use cone::EuclideanCone;
pub use frechet::{frechet_mean, frechet_mean_with, FrechetOptions};
pub use glued::GluedPlanes;

use crate::error::{Error, Result};
use crate::geom;
use crate::report::ComparisonReport;

/// A location in a target space: chart id plus chart-local coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub chart: usize,
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(chart: usize, coords: Vec<f64>) -> Self {
        Self { chart, coords }
    }

    /// Point in the single chart of a Euclidean space.
    pub fn euclidean(coords: &[f64]) -> Self {
        Self { chart: 0, coords: coords.to_vec() }
    }
}

/// What the analysis code needs from a space: a metric with geodesics.
pub trait MetricSpace: Send + Sync {
    fn distance(&self, p: &Point, q: &Point) -> Result<f64>;
    fn geodesic_point(&self, p: &Point, q: &Point, t: f64) -> Result<Point>;
}

#[derive(Clone, Debug)]
pub enum TargetSpace {
    Euclidean { dim: usize },
    Cone(EuclideanCone),
    Glued(GluedPlanes),
    Complex(PolyhedralComplex),
}

impl TargetSpace {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("Euclidean dimension must be positive".into()));
        }
        Ok(Self::Euclidean { dim })
    }

    pub fn cone(angle: f64) -> Result<Self> {
        Ok(Self::Cone(EuclideanCone::new(angle)?))
    }

    pub fn glued_planes(angle: f64) -> Result<Self> {
        Ok(Self::Glued(GluedPlanes::new(angle)?))
    }

    pub fn complex(charts: Vec<ChartPolygon>, gluings: Vec<Gluing>, subdivision: usize) -> Result<Self> {
        Ok(Self::Complex(PolyhedralComplex::new(charts, gluings, subdivision)?))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Euclidean { .. } => "euclidean",
            Self::Cone(_) => "cone",
            Self::Glued(_) => "glued_planes",
            Self::Complex(_) => "complex",
        }
    }

    pub fn chart_count(&self) -> usize {
        match self {
            Self::Euclidean { .. } | Self::Cone(_) => 1,
            Self::Glued(_) => 2,
            Self::Complex(c) => c.chart_count(),
        }
    }

    /// Dimension of the chart coordinates.
    pub fn coord_dim(&self) -> usize {
        match self {
            Self::Euclidean { dim } => *dim,
            _ => 2,
        }
    }

    pub fn is_two_dimensional(&self) -> bool {
        self.coord_dim() == 2
    }

    pub fn validate(&self, p: &Point) -> Result<()> {
        match self {
            Self::Euclidean { dim } => {
                if p.chart != 0 {
                    return Err(Error::InvalidChart { chart: p.chart });
                }
                if p.coords.len() != *dim || p.coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidPoint(format!("expected {dim} finite coordinates, got {:?}", p.coords)));
                }
                Ok(())
            }
            Self::Cone(c) => c.validate(p),
            Self::Glued(g) => g.validate(p),
            Self::Complex(c) => c.validate(p),
        }
    }

    /// Canonical representative (cone angles wrapped, sector points in chart 0).
    pub fn canonical(&self, p: &Point) -> Point {
        match self {
            Self::Cone(c) => c.canonical(p),
            Self::Glued(g) => g.canonical(p),
            _ => p.clone(),
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.validate(p)?;
        self.validate(q)?;
        Ok(match self {
            Self::Euclidean { .. } => euclid_dist(&p.coords, &q.coords),
            Self::Cone(c) => c.distance(p, q),
            Self::Glued(g) => g.distance(p, q),
            Self::Complex(c) => c.distance(p, q)?,
        })
    }

    pub fn geodesic_point(&self, p: &Point, q: &Point, t: f64) -> Result<Point> {
        self.validate(p)?;
        self.validate(q)?;
        if t <= 0.0 {
            return Ok(p.clone());
        }
        if t >= 1.0 {
            return Ok(q.clone());
        }
        Ok(match self {
            Self::Euclidean { .. } => {
                Point::new(0, p.coords.iter().zip(&q.coords).map(|(a, b)| a + t * (b - a)).collect())
            }
            Self::Cone(c) => c.geodesic_point(p, q, t),
            Self::Glued(g) => g.geodesic_point(p, q, t),
            Self::Complex(c) => c.geodesic_point(p, q, t)?,
        })
    }

    /// Same point up to chart changes, within `1e-12` in coordinates.
    pub fn same_point(&self, p: &Point, q: &Point) -> bool {
        let a = self.canonical(p);
        let b = self.canonical(q);
        if a.chart == b.chart && a.coords.iter().zip(&b.coords).all(|(x, y)| (x - y).abs() <= 1e-12) {
            return true;
        }
        match self {
            Self::Complex(_) | Self::Cone(_) => self.distance(p, q).map_or(false, |d| d <= 1e-12),
            _ => false,
        }
    }

    /// Total angle around `p`.
    pub fn link_length(&self, p: &Point) -> Result<f64> {
        self.validate(p)?;
        Ok(match self {
            Self::Euclidean { dim } => {
                if *dim != 2 {
                    return Err(Error::NotTwoDimensional);
                }
                2.0 * PI
            }
            Self::Cone(c) => c.link_length(p),
            Self::Glued(g) => g.link_length(p),
            Self::Complex(c) => c.link_length(p),
        })
    }

    /// Distinguished points whose link may differ from `2π`.
    pub fn singular_points(&self) -> Vec<Point> {
        match self {
            Self::Euclidean { .. } => Vec::new(),
            Self::Cone(c) => vec![c.tip()],
            Self::Glued(_) => vec![Point::new(0, vec![0.0, 0.0])],
            Self::Complex(c) => (0..c.vertex_count()).filter(|&v| c.is_interior_vertex(v)).map(|v| c.vertex_point(v)).collect(),
        }
    }

    /// A random point from a bounded region of the space (used for sampling checks).
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Point {
        match self {
            Self::Euclidean { dim } => Point::new(0, (0..*dim).map(|_| rng.gen_range(-1.0..1.0)).collect()),
            Self::Cone(c) => c.point(rng.gen_range(0.0..1.0), rng.gen_range(0.0..c.angle())),
            Self::Glued(g) => g.point(rng.gen_range(0..2), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            Self::Complex(c) => {
                let f = rng.gen_range(0..c.chart_count());
                let n = c.charts()[f].vertices.len();
                // random point of a random fan triangle
                let i = rng.gen_range(1..n - 1);
                let (a, b, d) = (c.corner(f, 0), c.corner(f, i), c.corner(f, i + 1));
                let (mut s, mut t): (f64, f64) = (rng.gen(), rng.gen());
                if s + t > 1.0 {
                    s = 1.0 - s;
                    t = 1.0 - t;
                }
                let y = geom::add(a, geom::add(geom::scale(geom::sub(b, a), s), geom::scale(geom::sub(d, a), t)));
                Point::new(f, y.to_vec())
            }
        }
    }

    /// Samples random triples and reports the largest violation of the CN
    /// midpoint inequality, plus every interior singular point whose link is
    /// shorter than `2π`.
    pub fn verify_cat0(&self, samples: usize, seed: u64) -> Result<ComparisonReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = ComparisonReport::default();
        for _ in 0..samples {
            let x = self.sample_point(&mut rng);
            let y = self.sample_point(&mut rng);
            let z = self.sample_point(&mut rng);
            let m = self.geodesic_point(&y, &z, 0.5)?;
            let d = cn_defect(
                self.distance(&x, &m)?,
                self.distance(&x, &y)?,
                self.distance(&x, &z)?,
                self.distance(&y, &z)?,
            );
            report.record_cn(d);
        }
        if self.is_two_dimensional() {
            for (i, p) in self.singular_points().iter().enumerate() {
                let link = self.link_length(p)?;
                report.angle_defects.push(crate::report::AngleDefect { vertex: i, defect: 2.0 * PI - link });
                if link < 2.0 * PI - 1e-9 {
                    report.positive_curvature.push(i);
                }
            }
        }
        Ok(report)
    }
}

impl MetricSpace for TargetSpace {
    fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        TargetSpace::distance(self, p, q)
    }

    fn geodesic_point(&self, p: &Point, q: &Point, t: f64) -> Result<Point> {
        TargetSpace::geodesic_point(self, p, q, t)
    }
}

/// `d(x,m)^2 - d(x,y)^2/2 - d(x,z)^2/2 + d(y,z)^2/4`, positive when the CN
/// inequality fails.
pub fn cn_defect(xm: f64, xy: f64, xz: f64, yz: f64) -> f64 {
    xm * xm - 0.5 * xy * xy - 0.5 * xz * xz + 0.25 * yz * yz
}

pub(crate) fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pythagoras() {
        let s = TargetSpace::euclidean(3).unwrap();
        let d = s.distance(&Point::euclidean(&[0.0, 0.0, 0.0]), &Point::euclidean(&[3.0, 4.0, 0.0])).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn missing_chart_is_rejected() {
        let s = TargetSpace::glued_planes(PI).unwrap();
        let err = s.distance(&Point::new(2, vec![0.0, 0.0]), &Point::new(0, vec![1.0, 0.0]));
        assert!(matches!(err, Err(Error::InvalidChart { chart: 2 })));
    }

    #[test]
    fn link_needs_a_surface() {
        let s = TargetSpace::euclidean(3).unwrap();
        assert!(matches!(s.link_length(&Point::euclidean(&[0.0; 3])), Err(Error::NotTwoDimensional)));
    }

    #[test]
    fn small_cone_is_flagged() {
        let s = TargetSpace::cone(PI).unwrap();
        let r = s.verify_cat0(50, 1).unwrap();
        assert_eq!(r.positive_curvature, vec![0]);
        let s = TargetSpace::cone(3.0 * PI).unwrap();
        let r = s.verify_cat0(500, 1).unwrap();
        assert!(r.cn_defect_max <= 1e-12, "{}", r.cn_defect_max);
        assert!(r.positive_curvature.is_empty());
    }
}
