//! Small planar vector helpers shared by the chart code.

pub type Vec2 = [f64; 2];

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: Vec2, s: f64) -> Vec2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// z-component of the planar cross product.
#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Vec2, b: Vec2) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn lerp(a: Vec2, b: Vec2, t: f64) -> Vec2 {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

#[inline]
pub fn rotate(a: Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    [c * a[0] - s * a[1], s * a[0] + c * a[1]]
}

/// Twice the signed area of the triangle `abc` (positive when counter-clockwise).
#[inline]
pub fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    cross(sub(b, a), sub(c, a))
}

/// Unsigned angle between two nonzero vectors, in `[0, pi]`.
pub fn angle_between(a: Vec2, b: Vec2) -> f64 {
    cross(a, b).abs().atan2(dot(a, b))
}

/// Interior angle opposite side `c` in a triangle with side lengths `a`, `b`, `c`.
/// Violations of the triangle inequality clamp to `0` or `pi`.
pub fn law_of_cosines_angle(a: f64, b: f64, c: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return 0.0;
    }
    let cos = ((a * a + b * b - c * c) / (2.0 * a * b)).clamp(-1.0, 1.0);
    cos.acos()
}

/// Area of a triangle from its side lengths (Heron, in the numerically stable
/// sorted form). Non-realizable length triples give `0`.
pub fn heron(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if p <= 0.0 {
        0.0
    } else {
        0.25 * p.sqrt()
    }
}

/// Orientation-preserving rigid motion of the plane: `x -> R x + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rigid {
    pub cos: f64,
    pub sin: f64,
    pub t: Vec2,
}

impl Rigid {
    pub const IDENTITY: Rigid = Rigid { cos: 1.0, sin: 0.0, t: [0.0, 0.0] };

    /// The motion taking segment `(a0, a1)` onto `(b0, b1)`; the segments must
    /// have equal length.
    pub fn from_segments(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> Rigid {
        let da = sub(a1, a0);
        let db = sub(b1, b0);
        let ang = db[1].atan2(db[0]) - da[1].atan2(da[0]);
        let (sin, cos) = ang.sin_cos();
        let r = Rigid { cos, sin, t: [0.0, 0.0] };
        let ra0 = r.apply_linear(a0);
        Rigid { cos, sin, t: sub(b0, ra0) }
    }

    #[inline]
    pub fn apply_linear(&self, v: Vec2) -> Vec2 {
        [self.cos * v[0] - self.sin * v[1], self.sin * v[0] + self.cos * v[1]]
    }

    #[inline]
    pub fn apply(&self, v: Vec2) -> Vec2 {
        add(self.apply_linear(v), self.t)
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Rigid) -> Rigid {
        Rigid {
            cos: self.cos * other.cos - self.sin * other.sin,
            sin: self.sin * other.cos + self.cos * other.sin,
            t: self.apply(other.t),
        }
    }

    pub fn inverse(&self) -> Rigid {
        let inv = Rigid { cos: self.cos, sin: -self.sin, t: [0.0, 0.0] };
        let t = inv.apply_linear(self.t);
        Rigid { cos: self.cos, sin: -self.sin, t: [-t[0], -t[1]] }
    }
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
/// Returns `(argmin, min)`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    // endpoints are candidates too: the minimum of a clamped convex function
    // often sits exactly on the boundary
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigid_from_segments_maps_endpoints() {
        let m = Rigid::from_segments([0.0, 0.0], [1.0, 0.0], [2.0, 1.0], [2.0, 2.0]);
        let p = m.apply([0.0, 0.0]);
        let q = m.apply([1.0, 0.0]);
        assert!(dist(p, [2.0, 1.0]) < 1e-15);
        assert!(dist(q, [2.0, 2.0]) < 1e-15);
        let back = m.inverse().apply(q);
        assert!(dist(back, [1.0, 0.0]) < 1e-15);
    }

    #[test]
    fn heron_matches_right_triangle() {
        assert!((heron(3.0, 4.0, 5.0) - 6.0).abs() < 1e-12);
        assert_eq!(heron(1.0, 1.0, 3.0), 0.0);
    }

    #[test]
    fn golden_finds_clamped_minimum() {
        let (x, _) = golden_min(|t| (t + 1.0).powi(2), 0.0, 2.0, 60);
        assert!(x.abs() < 1e-12);
    }
}
