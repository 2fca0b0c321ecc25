//! Closed polygonal curves, total curvature and inscribed polygons.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{upper_angle, AngleQuery, Point, TargetSpace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonalCurve {
    vertices: Vec<Point>,
    edge_lengths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub kappa: f64,
    /// `π - ∠_{x_i}(x_{i-1}, x_{i+1})` per vertex, clamped to `[0, π]`.
    pub turning_angles: Vec<f64>,
    pub fenchel_ok: bool,
}

impl CurvatureReport {
    pub fn kappa_over_pi(&self) -> f64 {
        self.kappa / PI
    }
}

impl PolygonalCurve {
    /// Closed polygon through `vertices` (the closing edge is implicit).
    pub fn new(space: &TargetSpace, vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidCurve(format!("a closed polygon needs at least 3 vertices, got {}", vertices.len())));
        }
        let vertices: Vec<Point> = vertices.iter().map(|p| space.canonical(p)).collect();
        let n = vertices.len();
        let mut edge_lengths = Vec::with_capacity(n);
        for i in 0..n {
            let d = space.distance(&vertices[i], &vertices[(i + 1) % n])?;
            if d == 0.0 {
                return Err(Error::DegenerateVertex(i));
            }
            edge_lengths.push(d);
        }
        Ok(Self { vertices, edge_lengths })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.edge_lengths.iter().sum()
    }

    /// Cumulative arc length at each vertex, starting from 0.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for l in &self.edge_lengths {
            acc += l;
            out.push(acc);
        }
        out
    }

    /// Edge index and fraction along it for the arc-length parameter `t`.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let total = self.length();
        let s = t.rem_euclid(1.0) * total;
        let mut acc = 0.0;
        for (i, &l) in self.edge_lengths.iter().enumerate() {
            if s < acc + l || i + 1 == self.len() {
                return (i, ((s - acc) / l).clamp(0.0, 1.0));
            }
            acc += l;
        }
        unreachable!()
    }

    /// Constant-speed parametrization on `[0, 1)`, starting at the first vertex.
    pub fn arc_length_param(&self, space: &TargetSpace, t: f64) -> Result<Point> {
        let (i, u) = self.locate(t);
        if u == 0.0 {
            return Ok(self.vertices[i].clone());
        }
        space.geodesic_point(&self.vertices[i], &self.vertices[(i + 1) % self.len()], u)
    }

    /// Arc-length parameter in `[0, 1)` of a point on the curve: the edge
    /// minimizing `d(a, q) + d(q, b) - ℓ` and the offset `d(a, q)` along it.
    pub fn project(&self, space: &TargetSpace, q: &Point) -> Result<f64> {
        let cum = self.cumulative();
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..self.len() {
            let (a, b) = (&self.vertices[i], &self.vertices[(i + 1) % self.len()]);
            let (da, db) = (space.distance(a, q)?, space.distance(q, b)?);
            let excess = da + db - self.edge_lengths[i];
            if excess < best.0 {
                best = (excess, (cum[i] + da.min(self.edge_lengths[i])) / self.length());
            }
        }
        Ok(best.1.rem_euclid(1.0))
    }

    /// Arc-length parameter of vertex `i`.
    pub fn vertex_param(&self, i: usize) -> f64 {
        self.cumulative()[i] / self.length()
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self, space: &TargetSpace) -> Result<Self> {
        let mut v = self.vertices.clone();
        v.reverse();
        Self::new(space, v)
    }

    /// Interior angle at vertex `i`.
    pub fn vertex_angle(&self, space: &TargetSpace, i: usize) -> Result<f64> {
        let n = self.len();
        let q = AngleQuery::new(
            space,
            self.vertices[i].clone(),
            self.vertices[(i + n - 1) % n].clone(),
            self.vertices[(i + 1) % n].clone(),
        )?;
        upper_angle(space, &q)
    }

    /// Smallest distance between non-adjacent edges (sampled), a simplicity flag.
    pub fn min_edge_separation(&self, space: &TargetSpace, samples: usize) -> Result<f64> {
        let n = self.len();
        let mut pts: Vec<Vec<Point>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = Vec::with_capacity(samples + 1);
            for k in 0..=samples {
                e.push(space.geodesic_point(&self.vertices[i], &self.vertices[(i + 1) % n], k as f64 / samples as f64)?);
            }
            pts.push(e);
        }
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                for a in &pts[i] {
                    for b in &pts[j] {
                        best = best.min(space.distance(a, b)?);
                    }
                }
            }
        }
        Ok(best)
    }
}

/// Total curvature of a closed polygon from its vertex angles.
pub fn total_curvature(space: &TargetSpace, curve: &PolygonalCurve) -> Result<CurvatureReport> {
    let mut turning_angles = Vec::with_capacity(curve.len());
    for i in 0..curve.len() {
        let a = curve.vertex_angle(space, i)?;
        turning_angles.push((PI - a).clamp(0.0, PI));
    }
    let kappa: f64 = turning_angles.iter().sum();
    Ok(CurvatureReport { kappa, turning_angles, fenchel_ok: kappa >= 2.0 * PI - 1e-9 })
}

/// Polygon inscribed at parameters `i/n`.
pub fn inscribe<F>(space: &TargetSpace, mut sampler: F, n: usize) -> Result<PolygonalCurve>
where
    F: FnMut(f64) -> Result<Point>,
{
    if n < 3 {
        return Err(Error::InvalidCurve(format!("inscribed polygon needs n >= 3, got {n}")));
    }
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        v.push(sampler(i as f64 / n as f64)?);
    }
    PolygonalCurve::new(space, v)
}

/// Curve description: chart-addressed `points`, or raw `coords` for
/// Euclidean targets. `closed: false` marks an open polyline, which is
/// rejected when the curve is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDesc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default = "closed_default")]
    pub closed: bool,
}

fn closed_default() -> bool {
    true
}

impl CurveDesc {
    pub fn from_points(points: Vec<Point>) -> Self {
        CurveDesc { points: Some(points), coords: None, closed: true }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn points(&self) -> Result<Vec<Point>> {
        match (&self.points, &self.coords) {
            (Some(p), None) => Ok(p.clone()),
            (None, Some(c)) => Ok(c.iter().map(|c| Point::euclidean(c)).collect()),
            _ => Err(Error::InvalidCurve("give exactly one of `points` and `coords`".into())),
        }
    }

    pub fn build(&self, space: &TargetSpace) -> Result<PolygonalCurve> {
        if !self.closed {
            return Err(Error::InvalidCurve("open polygon: the curve must be closed".into()));
        }
        PolygonalCurve::new(space, self.points()?)
    }
}

/// Regular `n`-gon inscribed in the circle of radius `r` in the plane.
pub fn regular_polygon(n: usize, r: f64) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            Point::euclidean(&[r * t.cos(), r * t.sin()])
        })
        .collect()
}

/// Smooth trefoil knot `(sin t + 2 sin 2t, cos t - 2 cos 2t, -sin 3t)`.
pub fn trefoil_point(u: f64) -> Point {
    let t = 2.0 * PI * u;
    Point::euclidean(&[t.sin() + 2.0 * (2.0 * t).sin(), t.cos() - 2.0 * (2.0 * t).cos(), -(3.0 * t).sin()])
}

/// Closed polygon that winds twice around the apex of `GluedPlanes(π)`:
/// through the shared upper half plane, the lower half of sheet 0, the upper
/// half plane again and the lower half of sheet 1. Vertex `k` sits at angle
/// `θ_k = π/n_4 (k + 1/2)`, `n_4 = n/4`, on the radius `1.5 - 0.5 cos(θ/2 - π/4)`
/// so that the two passes through the shared half plane do not meet.
pub fn double_winding_polygon(n: usize) -> Vec<Point> {
    let n = n.max(8) / 4 * 4;
    (0..n)
        .map(|k| {
            let theta = 4.0 * PI * (k as f64 + 0.5) / n as f64;
            let r = 1.5 - 0.5 * (theta / 2.0 - PI / 4.0).cos();
            let chart = if (theta / PI) as usize == 3 { 1 } else { 0 };
            Point::new(chart, vec![r * theta.cos(), r * theta.sin()])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_and_triangle_have_curvature_two_pi() {
        let s = TargetSpace::euclidean(2).unwrap();
        let sq = PolygonalCurve::new(&s, regular_polygon(4, 1.0)).unwrap();
        assert!((total_curvature(&s, &sq).unwrap().kappa - 2.0 * PI).abs() < 1e-12);
        let tri = PolygonalCurve::new(&s, regular_polygon(3, 1.0)).unwrap();
        assert!((total_curvature(&s, &tri).unwrap().kappa - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn arc_length_parameter_on_the_unit_square() {
        let s = TargetSpace::euclidean(2).unwrap();
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]].iter().map(|c| Point::euclidean(c)).collect();
        let c = PolygonalCurve::new(&s, pts).unwrap();
        assert_eq!(c.arc_length_param(&s, 0.0).unwrap().coords, vec![0.0, 0.0]);
        assert_eq!(c.arc_length_param(&s, 0.25).unwrap().coords, vec![1.0, 0.0]);
        assert_eq!(c.arc_length_param(&s, 0.125).unwrap().coords, vec![0.5, 0.0]);
    }

    #[test]
    fn double_winding_polygon_has_curvature_four_pi() {
        let s = TargetSpace::glued_planes(PI).unwrap();
        let c = PolygonalCurve::new(&s, double_winding_polygon(16)).unwrap();
        let k = total_curvature(&s, &c).unwrap().kappa;
        assert!((k - 4.0 * PI).abs() < 1e-9, "{}", k / PI);
    }

    #[test]
    fn coincident_vertices_are_rejected() {
        let s = TargetSpace::euclidean(2).unwrap();
        let pts = [[0.0, 0.0], [0.0, 0.0], [1.0, 1.0]].iter().map(|c| Point::euclidean(c)).collect();
        assert!(matches!(PolygonalCurve::new(&s, pts), Err(Error::DegenerateVertex(0))));
    }
}
