//! The Euclidean cone `C_alpha` over a circle of length `alpha`.
//!
//! Points are stored in polar form `[r, theta]` with `theta` in `[0, alpha)`;
//! the tip is `[0, 0]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::space::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct EuclideanCone {
    angle: f64,
}

impl EuclideanCone {
    pub fn new(angle: f64) -> Result<Self> {
        if !(angle > 0.0) || !angle.is_finite() {
            return Err(Error::InvalidSpace(format!("cone angle must be positive, got {angle}")));
        }
        Ok(Self { angle })
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn tip(&self) -> Point {
        Point::new(0, vec![0.0, 0.0])
    }

    /// Point at radius `r` and angular coordinate `theta` (taken modulo the cone angle).
    pub fn point(&self, r: f64, theta: f64) -> Point {
        if r <= 0.0 {
            return self.tip();
        }
        Point::new(0, vec![r, self.wrap(theta)])
    }

    pub fn wrap(&self, theta: f64) -> f64 {
        let w = theta.rem_euclid(self.angle);
        if w >= self.angle {
            0.0
        } else {
            w
        }
    }

    pub fn validate(&self, p: &Point) -> Result<()> {
        if p.chart != 0 {
            return Err(Error::InvalidChart { chart: p.chart });
        }
        if p.coords.len() != 2 || p.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("cone point needs finite [r, theta], got {:?}", p.coords)));
        }
        if p.coords[0] < 0.0 {
            return Err(Error::InvalidPoint(format!("negative cone radius {}", p.coords[0])));
        }
        Ok(())
    }

    pub fn canonical(&self, p: &Point) -> Point {
        self.point(p.coords[0], p.coords[1])
    }

    /// Signed angular offset from `a` to `b`, in `(-alpha/2, alpha/2]`.
    pub fn signed_offset(&self, a: f64, b: f64) -> f64 {
        let d = (b - a).rem_euclid(self.angle);
        if d > 0.5 * self.angle {
            d - self.angle
        } else {
            d
        }
    }

    /// Angular separation of two directions on the link circle.
    pub fn separation(&self, a: f64, b: f64) -> f64 {
        self.signed_offset(a, b).abs()
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let (r1, t1) = (p.coords[0], p.coords[1]);
        let (r2, t2) = (q.coords[0], q.coords[1]);
        if r1 == 0.0 || r2 == 0.0 {
            return r1 + r2;
        }
        let sep = self.separation(t1, t2);
        if sep >= PI {
            r1 + r2
        } else {
            // (r1 - r2)^2 + 4 r1 r2 sin^2(sep/2) avoids cancellation for nearby points
            let h = (0.5 * sep).sin();
            ((r1 - r2) * (r1 - r2) + 4.0 * r1 * r2 * h * h).sqrt()
        }
    }

    pub fn geodesic_point(&self, p: &Point, q: &Point, t: f64) -> Point {
        if t <= 0.0 {
            return p.clone();
        }
        if t >= 1.0 {
            return q.clone();
        }
        let (r1, t1) = (p.coords[0], p.coords[1]);
        let (r2, t2) = (q.coords[0], q.coords[1]);
        if r1 == 0.0 || r2 == 0.0 || self.separation(t1, t2) >= PI {
            let s = t * (r1 + r2);
            return if s <= r1 { self.point(r1 - s, t1) } else { self.point(s - r1, t2) };
        }
        let delta = self.signed_offset(t1, t2);
        let a = [r1, 0.0];
        let b = [r2 * delta.cos(), r2 * delta.sin()];
        let m = geom::lerp(a, b, t);
        self.point(geom::norm(m), t1 + m[1].atan2(m[0]))
    }

    /// Develops `p` into the tangent plane at the non-tip point `x`, where `x`
    /// sits at `[r_x, 0]`. Returns the log vector `log_x(p)`.
    pub fn log(&self, x: &Point, p: &Point) -> Vec2 {
        let (rx, tx) = (x.coords[0], x.coords[1]);
        let (rp, tp) = (p.coords[0], p.coords[1]);
        if rp == 0.0 {
            return [-rx, 0.0];
        }
        let delta = self.signed_offset(tx, tp);
        if delta.abs() >= PI {
            return [-(rx + rp), 0.0];
        }
        [rp * delta.cos() - rx, rp * delta.sin()]
    }

    /// Exponential map at the non-tip point `x` for a tangent vector expressed
    /// in the frame used by [`EuclideanCone::log`].
    pub fn exp(&self, x: &Point, v: Vec2) -> Point {
        let (rx, tx) = (x.coords[0], x.coords[1]);
        let m = [rx + v[0], v[1]];
        let r = geom::norm(m);
        if r < 1e-300 {
            return self.tip();
        }
        self.point(r, tx + m[1].atan2(m[0]))
    }

    pub fn link_length(&self, p: &Point) -> f64 {
        if p.coords[0] == 0.0 {
            self.angle
        } else {
            2.0 * PI
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn through_tip_when_separation_at_least_pi() {
        let c = EuclideanCone::new(3.0 * PI).unwrap();
        let p = c.point(1.0, 0.0);
        let q = c.point(1.0, 1.5 * PI);
        assert!((c.distance(&p, &q) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn development_distance_for_small_separation() {
        let c = EuclideanCone::new(3.0 * PI).unwrap();
        let p = c.point(1.0, 0.2);
        let q = c.point(1.0, 0.2 + 0.5 * PI);
        assert!((c.distance(&p, &q) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn wraps_angles_across_the_seam() {
        let c = EuclideanCone::new(3.0 * PI).unwrap();
        let p = c.point(1.0, 0.1);
        let q = c.point(1.0, 3.0 * PI - 0.1);
        let expect = 2.0 * (0.1f64).sin();
        assert!((c.distance(&p, &q) - expect).abs() < 1e-14);
    }

    #[test]
    fn midpoint_passes_through_tip() {
        let c = EuclideanCone::new(4.0 * PI).unwrap();
        let p = c.point(1.0, 0.0);
        let q = c.point(1.0, 2.0 * PI);
        let m = c.geodesic_point(&p, &q, 0.5);
        assert_eq!(m.coords[0], 0.0);
    }

    #[test]
    fn log_exp_roundtrip() {
        let c = EuclideanCone::new(3.0 * PI).unwrap();
        let x = c.point(1.0, 2.0);
        let p = c.point(0.7, 2.9);
        let v = c.log(&x, &p);
        let back = c.exp(&x, v);
        assert!(c.distance(&back, &p) < 1e-14);
    }
}
