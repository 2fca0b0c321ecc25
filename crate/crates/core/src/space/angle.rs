use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::space::{Point, TargetSpace};

/// Angle at `base` between the geodesics towards `x` and `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleQuery {
    pub base: Point,
    pub x: Point,
    pub y: Point,
    /// Strictly decreasing probe radii.
    pub probe_radii: Vec<f64>,
}

impl AngleQuery {
    /// Probe radii `(δ, δ/2)` with `δ = 1e-3 · min(d(q,x), d(q,y))`.
    pub fn new(space: &TargetSpace, base: Point, x: Point, y: Point) -> Result<Self> {
        let a = space.distance(&base, &x)?;
        let b = space.distance(&base, &y)?;
        if a == 0.0 || b == 0.0 {
            return Err(Error::DegenerateQuery("angle vertex coincides with an endpoint".into()));
        }
        let delta = 1e-3 * a.min(b);
        Ok(Self { base, x, y, probe_radii: vec![delta, 0.5 * delta] })
    }
}

/// Euclidean comparison angle opposite `c` in a triangle with sides `a`, `b`, `c`.
pub(crate) fn comparison_angle(a: f64, b: f64, c: f64) -> f64 {
    if a == b {
        // isoceles probe triangle: half-chord over apothem stays accurate near 0 and π
        let h = 0.5 * c.min(2.0 * a);
        return 2.0 * h.atan2(((a - h) * (a + h)).sqrt());
    }
    crate::geom::law_of_cosines_angle(a, b, c)
}

/// Upper angle from comparison angles at the probe radii, extrapolated to zero
/// radius with one Richardson step; exact in flat charts.
pub fn upper_angle(space: &TargetSpace, q: &AngleQuery) -> Result<f64> {
    let dx = space.distance(&q.base, &q.x)?;
    let dy = space.distance(&q.base, &q.y)?;
    if dx == 0.0 || dy == 0.0 {
        return Err(Error::DegenerateQuery("angle vertex coincides with an endpoint".into()));
    }
    if let TargetSpace::Euclidean { .. } = space {
        let u: Vec<f64> = q.x.coords.iter().zip(&q.base.coords).map(|(a, b)| a - b).collect();
        let v: Vec<f64> = q.y.coords.iter().zip(&q.base.coords).map(|(a, b)| a - b).collect();
        return Ok(vector_angle(&u, &v));
    }
    if q.probe_radii.is_empty() {
        return Err(Error::DegenerateQuery("no probe radii".into()));
    }
    if q.probe_radii.windows(2).any(|w| !(w[1] < w[0])) || q.probe_radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::DegenerateQuery("probe radii must be positive and strictly decreasing".into()));
    }
    let r_max = q.probe_radii[0];
    if r_max >= dx || r_max >= dy {
        return Err(Error::DegenerateQuery(format!("probe radius {r_max} exceeds a geodesic length")));
    }
    let mut angles = Vec::with_capacity(q.probe_radii.len());
    for &r in &q.probe_radii {
        let xr = space.geodesic_point(&q.base, &q.x, r / dx)?;
        let yr = space.geodesic_point(&q.base, &q.y, r / dy)?;
        let c = space.distance(&xr, &yr)?;
        angles.push(comparison_angle(r, r, c));
    }
    let n = angles.len();
    let a = if n >= 2 {
        let rho = q.probe_radii[n - 2] / q.probe_radii[n - 1];
        (rho * angles[n - 1] - angles[n - 2]) / (rho - 1.0)
    } else {
        angles[0]
    };
    Ok(a.clamp(0.0, PI))
}

/// Angle between two nonzero vectors of any dimension, in `[0, π]`.
pub(crate) fn vector_angle(u: &[f64], v: &[f64]) -> f64 {
    // atan2 of |u x v| and u.v via Lagrange's identity keeps small angles accurate
    let uv: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let mut cross2 = 0.0;
    for i in 0..u.len() {
        for j in (i + 1)..u.len() {
            let c = u[i] * v[j] - u[j] * v[i];
            cross2 += c * c;
        }
    }
    cross2.sqrt().atan2(uv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(space: &TargetSpace, b: Point, x: Point, y: Point) -> f64 {
        let query = AngleQuery::new(space, b, x, y).unwrap();
        upper_angle(space, &query).unwrap()
    }

    #[test]
    fn right_and_straight_angles() {
        let s = TargetSpace::euclidean(2).unwrap();
        let o = Point::euclidean(&[0.0, 0.0]);
        assert_eq!(q(&s, o.clone(), Point::euclidean(&[1.0, 0.0]), Point::euclidean(&[0.0, 1.0])), PI / 2.0);
        assert_eq!(q(&s, o, Point::euclidean(&[1.0, 0.0]), Point::euclidean(&[-2.0, 0.0])), PI);
    }

    #[test]
    fn cone_tip_truncates_at_pi() {
        let s = TargetSpace::cone(3.0 * PI).unwrap();
        let TargetSpace::Cone(c) = &s else { unreachable!() };
        let a = q(&s, c.tip(), c.point(1.0, 0.0), c.point(1.0, 2.0 * PI));
        assert!((a - PI).abs() < 1e-12);
    }

    #[test]
    fn probes_beyond_the_geodesic_are_rejected() {
        let s = TargetSpace::cone(3.0 * PI).unwrap();
        let TargetSpace::Cone(c) = &s else { unreachable!() };
        let query = AngleQuery { base: c.tip(), x: c.point(1.0, 0.0), y: c.point(1.0, 1.0), probe_radii: vec![2.0, 1.0] };
        assert!(matches!(upper_angle(&s, &query), Err(Error::DegenerateQuery(_))));
    }
}
