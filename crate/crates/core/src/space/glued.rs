//! Two Euclidean planes glued along a closed flat sector.
//!
//! Both planes share the coordinate system in which the sector is
//! `{ angle in [0, alpha] }` with apex at the origin. Chart `0` is the first
//! plane, chart `1` the second; points of the shared sector are always
//! stored in chart `0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::space::Point;

const SECTOR_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct GluedPlanes {
    angle: f64,
    rays: [Vec2; 2],
}

/// Where a geodesic between two points of different sheets crosses the
/// boundary of the shared sector.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Crossing {
    pub point: Vec2,
    pub length: f64,
}

impl GluedPlanes {
    pub fn new(angle: f64) -> Result<Self> {
        if !(angle > 0.0 && angle <= PI) {
            return Err(Error::InvalidSpace(format!("glued sector angle must lie in (0, pi], got {angle}")));
        }
        Ok(Self { angle, rays: [[1.0, 0.0], [angle.cos(), angle.sin()]] })
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn rays(&self) -> [Vec2; 2] {
        self.rays
    }

    pub fn in_sector(&self, c: Vec2) -> bool {
        let n = geom::norm(c);
        if n == 0.0 {
            return true;
        }
        let tol = SECTOR_TOL * n.max(1.0);
        geom::cross(self.rays[0], c) >= -tol && geom::cross(c, self.rays[1]) >= -tol
    }

    pub fn point(&self, chart: usize, x: f64, y: f64) -> Point {
        let chart = if self.in_sector([x, y]) { 0 } else { chart };
        Point::new(chart, vec![x, y])
    }

    pub fn validate(&self, p: &Point) -> Result<()> {
        if p.chart > 1 {
            return Err(Error::InvalidChart { chart: p.chart });
        }
        if p.coords.len() != 2 || p.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("glued-plane point needs finite [x, y], got {:?}", p.coords)));
        }
        Ok(())
    }

    pub fn canonical(&self, p: &Point) -> Point {
        self.point(p.chart, p.coords[0], p.coords[1])
    }

    /// True when `p` is a point of plane `k` (its own sheet or the shared sector).
    pub fn in_plane(&self, p: &Point, k: usize) -> bool {
        p.chart == k || self.in_sector(xy(p))
    }

    fn same_plane(&self, p: &Point, q: &Point) -> bool {
        p.chart == q.chart || self.in_sector(xy(p)) || self.in_sector(xy(q))
    }

    /// Minimizes `|a - s| + |s - b|` over `s` on the boundary rays of the sector.
    pub(crate) fn best_crossing(&self, a: Vec2, b: Vec2) -> Crossing {
        let mut best = Crossing { point: [0.0, 0.0], length: f64::INFINITY };
        for e in self.rays {
            let t = ray_argmin(a, b, e);
            let s = geom::scale(e, t);
            let len = geom::dist(a, s) + geom::dist(s, b);
            if len < best.length {
                best = Crossing { point: s, length: len };
            }
        }
        best
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        // fixed argument order keeps the result exactly symmetric
        let (p, q) = if (p.chart, xy(p)[0], xy(p)[1]) <= (q.chart, xy(q)[0], xy(q)[1]) { (p, q) } else { (q, p) };
        let (a, b) = (xy(p), xy(q));
        if self.same_plane(p, q) {
            geom::dist(a, b)
        } else {
            self.best_crossing(a, b).length
        }
    }

    pub fn geodesic_point(&self, p: &Point, q: &Point, t: f64) -> Point {
        if t <= 0.0 {
            return p.clone();
        }
        if t >= 1.0 {
            return q.clone();
        }
        let (a, b) = (xy(p), xy(q));
        if self.same_plane(p, q) {
            let chart = if self.in_sector(a) { q.chart } else { p.chart };
            let m = geom::lerp(a, b, t);
            return self.point(chart, m[0], m[1]);
        }
        let c = self.best_crossing(a, b);
        let first = geom::dist(a, c.point);
        let s = t * c.length;
        if s <= first {
            let m = if first > 0.0 { geom::lerp(a, c.point, s / first) } else { a };
            self.point(p.chart, m[0], m[1])
        } else {
            let rest = c.length - first;
            let m = if rest > 0.0 { geom::lerp(c.point, b, (s - first) / rest) } else { b };
            self.point(q.chart, m[0], m[1])
        }
    }

    /// Distance from the point with coordinates `x` in plane `k` to `p`, together
    /// with the first waypoint of the geodesic (the target itself when the
    /// geodesic is straight in plane `k`).
    pub(crate) fn plane_distance(&self, k: usize, x: Vec2, p: &Point) -> (f64, Vec2) {
        let b = xy(p);
        if self.in_plane(p, k) || self.in_sector(x) {
            (geom::dist(x, b), b)
        } else {
            let c = self.best_crossing(x, b);
            (c.length, c.point)
        }
    }

    pub fn link_length(&self, p: &Point) -> f64 {
        let c = xy(p);
        if geom::norm(c) == 0.0 {
            return 4.0 * PI - self.angle;
        }
        let n = geom::norm(c);
        let tol = SECTOR_TOL * n.max(1.0);
        let on_ray = self.rays.iter().any(|e| geom::cross(*e, c).abs() <= tol && geom::dot(*e, c) > 0.0);
        if on_ray {
            3.0 * PI
        } else {
            2.0 * PI
        }
    }
}

#[inline]
pub(crate) fn xy(p: &Point) -> Vec2 {
    [p.coords[0], p.coords[1]]
}

/// Minimizer over `t >= 0` of `|a - t e| + |b - t e|` for a unit vector `e`.
fn ray_argmin(a: Vec2, b: Vec2, e: Vec2) -> f64 {
    let sa = geom::cross(e, a);
    let sb0 = geom::cross(e, b);
    // reflect b when both lie strictly on the same side of the line
    let sb = if sa * sb0 > 0.0 { -sb0 } else { sb0 };
    let ta = geom::dot(e, a);
    let tb = geom::dot(e, b);
    let denom = sa - sb;
    let t = if denom.abs() < 1e-300 {
        // both on the line: any t between the projections is optimal
        ta.min(tb)
    } else {
        ta + (tb - ta) * sa / denom
    };
    t.max(0.0)
}
