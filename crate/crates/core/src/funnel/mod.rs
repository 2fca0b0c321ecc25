//! Flat funnel glued along the curve, distances in the extended space, the
//! extension of a solved disc to a proper plane and the Fáry–Milnor pipeline.
//!
//! Funnel charts are numbered cyclically: chart `2i` is the half-strip
//! `[0, ℓ_i] × [0, R]` over edge `i` (from vertex `i` to vertex `i + 1`, the
//! curve on `t = 0`), chart `2i + 1` is the sector at vertex `i + 1` with its
//! apex at the origin, the leg shared with strip `i` along `+y` and the leg
//! shared with strip `i + 1` turned clockwise by the sector angle.

mod plane;
mod verdict;

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{total_curvature, CurvatureReport, PolygonalCurve};
use crate::error::{Error, Result};
use crate::geom::{self, Rigid, Vec2};
use crate::space::complex::string_pull;
use crate::space::{Point, TargetSpace};

pub use plane::{area_growth, extend_plateau, key_estimate_check, ExtendedPlane, FunnelCell, GrowthReport, KeyEstimate};
pub use verdict::{fary_milnor, fary_milnor_from, FaryMilnorOptions, FaryMilnorReport, FaryMilnorVerdict};

/// Point of the extended space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtPoint {
    Base { point: Point },
    Funnel { chart: usize, pos: Vec2 },
}

#[derive(Clone, Debug)]
pub struct FunnelExtension {
    base: Arc<TargetSpace>,
    curve: PolygonalCurve,
    curvature: CurvatureReport,
    /// Sector angle at each curve vertex.
    sectors: Vec<f64>,
    radius: f64,
    portals_per_edge: usize,
    /// Curve points `s_k = ℓ_j k / m` on every edge `j`, `k = 0..=m`.
    portals: Vec<Vec<Point>>,
    portal_matrix: OnceLock<Vec<f64>>,
}

/// Serializable description of a funnel extension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunnelSummary {
    pub kappa: f64,
    pub sector_angles: Vec<f64>,
    pub strip_widths: Vec<f64>,
    pub radius: f64,
    pub portals_per_edge: usize,
    pub curve_length: f64,
}

/// Distances from a base point to the portal points, for repeated queries.
#[derive(Clone, Debug)]
pub struct BaseSource {
    point: Point,
    portal: Vec<Vec<f64>>,
}

/// Maximum base distance between curve vertices.
pub fn curve_diameter(space: &TargetSpace, curve: &PolygonalCurve) -> Result<f64> {
    let v = curve.vertices();
    let mut d: f64 = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            d = d.max(space.distance(&v[i], &v[j])?);
        }
    }
    Ok(d)
}

/// Glues half-strips along the edges and sectors of angle `π - ∠` at the
/// vertices of `curve`, truncated at `radius`.
pub fn build_funnel(space: Arc<TargetSpace>, curve: &PolygonalCurve, radius: f64, portals_per_edge: usize) -> Result<FunnelExtension> {
    if !(radius > 0.0) {
        return Err(Error::InvalidConfig(format!("funnel radius must be positive, got {radius}")));
    }
    let n = curve.len();
    let mut sectors = Vec::with_capacity(n);
    for i in 0..n {
        let angle = PI - curve.vertex_angle(&space, i)?;
        if angle < -1e-9 {
            return Err(Error::DegenerateAngle { vertex: i, angle });
        }
        sectors.push(angle.clamp(0.0, PI));
    }
    let curvature = total_curvature(&space, curve)?;
    let m = portals_per_edge.max(1);
    let verts = curve.vertices();
    let portals = (0..n)
        .map(|j| {
            (0..=m)
                .map(|k| match k {
                    0 => Ok(verts[j].clone()),
                    k if k == m => Ok(verts[(j + 1) % n].clone()),
                    k => space.geodesic_point(&verts[j], &verts[(j + 1) % n], k as f64 / m as f64),
                })
                .collect::<Result<Vec<Point>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FunnelExtension {
        base: space,
        curve: curve.clone(),
        curvature,
        sectors,
        radius,
        portals_per_edge: m,
        portals,
        portal_matrix: OnceLock::new(),
    })
}

impl FunnelExtension {
    pub fn base(&self) -> &Arc<TargetSpace> {
        &self.base
    }

    pub fn curve(&self) -> &PolygonalCurve {
        &self.curve
    }

    pub fn curvature(&self) -> &CurvatureReport {
        &self.curvature
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn sector_angles(&self) -> &[f64] {
        &self.sectors
    }

    pub fn edge_count(&self) -> usize {
        self.curve.len()
    }

    pub fn chart_count(&self) -> usize {
        2 * self.curve.len()
    }

    pub fn summary(&self) -> FunnelSummary {
        FunnelSummary {
            kappa: self.curvature.kappa,
            sector_angles: self.sectors.clone(),
            strip_widths: self.curve.edge_lengths().to_vec(),
            radius: self.radius,
            portals_per_edge: self.portals_per_edge,
            curve_length: self.curve.length(),
        }
    }

    /// Sum of the sector angles.
    pub fn sector_sum(&self) -> f64 {
        self.sectors.iter().sum()
    }

    /// Length of the curve at funnel distance `r` from the glued curve.
    pub fn level_length(&self, r: f64) -> f64 {
        self.curve.length() + self.sector_sum() * r
    }

    /// Area of the truncated funnel.
    pub fn funnel_area(&self) -> f64 {
        self.curve.length() * self.radius + 0.5 * self.sector_sum() * self.radius * self.radius
    }

    /// Point at height `t` over parameter `s` of edge `edge`.
    pub fn strip_point(&self, edge: usize, s: f64, t: f64) -> ExtPoint {
        ExtPoint::Funnel { chart: 2 * edge, pos: [s, t] }
    }

    /// Point at distance `rho` from vertex `vertex`, `phi` radians clockwise
    /// from the leg shared with the strip of the incoming edge.
    pub fn sector_point(&self, vertex: usize, rho: f64, phi: f64) -> ExtPoint {
        let n = self.curve.len();
        ExtPoint::Funnel { chart: 2 * ((vertex + n - 1) % n) + 1, pos: [rho * phi.sin(), rho * phi.cos()] }
    }

    fn sector_angle_of_chart(&self, chart: usize) -> f64 {
        let n = self.curve.len();
        self.sectors[((chart - 1) / 2 + 1) % n]
    }

    /// Distance from a funnel point to the glued curve.
    pub fn depth(&self, chart: usize, pos: Vec2) -> f64 {
        if chart % 2 == 0 {
            pos[1].max(0.0)
        } else {
            geom::norm(pos)
        }
    }

    pub fn validate(&self, p: &ExtPoint) -> Result<()> {
        match p {
            ExtPoint::Base { point } => self.base.validate(point),
            ExtPoint::Funnel { chart, pos } => {
                if *chart >= self.chart_count() {
                    return Err(Error::InvalidChart { chart: *chart });
                }
                let slack = 1e-9 * (1.0 + self.radius);
                let ok = if chart % 2 == 0 {
                    let l = self.curve.edge_lengths()[chart / 2];
                    pos[0] >= -slack && pos[0] <= l + slack && pos[1] >= -slack && pos[1] <= self.radius + slack
                } else {
                    let a = self.sector_angle_of_chart(*chart);
                    let phi = pos[0].atan2(pos[1]);
                    geom::norm(*pos) <= self.radius + slack && (geom::norm(*pos) <= slack || (phi >= -1e-9 && phi <= a + 1e-9))
                };
                if ok {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!("{pos:?} outside funnel chart {chart}")))
                }
            }
        }
    }

    /// Next chart in direction `forward` and the motion taking its coordinates
    /// into the coordinates of `chart`.
    fn step(&self, chart: usize, forward: bool) -> (usize, Rigid) {
        let nc = self.chart_count();
        let lengths = self.curve.edge_lengths();
        if forward {
            let next = (chart + 1) % nc;
            if chart % 2 == 0 {
                (next, Rigid { cos: 1.0, sin: 0.0, t: [lengths[chart / 2], 0.0] })
            } else {
                let a = self.sector_angle_of_chart(chart);
                (next, Rigid { cos: a.cos(), sin: -a.sin(), t: [0.0, 0.0] })
            }
        } else {
            let prev = (chart + nc - 1) % nc;
            if chart % 2 == 1 {
                (prev, Rigid { cos: 1.0, sin: 0.0, t: [-lengths[(chart - 1) / 2], 0.0] })
            } else {
                let a = self.sector_angle_of_chart(prev);
                (prev, Rigid { cos: a.cos(), sin: a.sin(), t: [0.0, 0.0] })
            }
        }
    }

    /// The side shared by `chart` and its neighbor in direction `forward`, as
    /// `(vertex end, far end)` in the coordinates of `chart`.
    fn shared_side(&self, chart: usize, forward: bool, far: f64) -> (Vec2, Vec2) {
        let lengths = self.curve.edge_lengths();
        match (chart % 2 == 0, forward) {
            (true, true) => {
                let l = lengths[chart / 2];
                ([l, 0.0], [l, far])
            }
            (true, false) | (false, false) => ([0.0, 0.0], [0.0, far]),
            (false, true) => {
                let a = self.sector_angle_of_chart(chart);
                ([0.0, 0.0], [far * a.sin(), far * a.cos()])
            }
        }
    }

    /// Length of the shortest path inside the funnel that runs through the
    /// charts from `a` to `b` in direction `forward`.
    fn chain_length(&self, a: (usize, Vec2), b: (usize, Vec2), forward: bool) -> f64 {
        let far = 10.0 * (self.radius + self.curve.length());
        let mut chart = a.0;
        let mut t = Rigid::IDENTITY;
        let mut portals = Vec::new();
        for _ in 0..self.chart_count() {
            if chart == b.0 {
                break;
            }
            let (v, f) = self.shared_side(chart, forward, far);
            let (v, f) = (t.apply(v), t.apply(f));
            // the funnel lies to the left when walking forward
            portals.push(if forward { (f, v) } else { (v, f) });
            let (next, step) = self.step(chart, forward);
            t = t.compose(&step);
            chart = next;
        }
        let end = t.apply(b.1);
        let (poly, _) = string_pull(a.1, end, &portals);
        poly.windows(2).map(|w| geom::dist(w[0], w[1])).sum()
    }

    /// Intrinsic distance of the funnel alone.
    pub fn funnel_distance(&self, a: (usize, Vec2), b: (usize, Vec2)) -> f64 {
        if a.0 == b.0 {
            return geom::dist(a.1, b.1);
        }
        self.chain_length(a, b, true).min(self.chain_length(a, b, false))
    }

    /// Edges visible from a funnel point, with the point in each edge's strip
    /// coordinates. Only charts within half a turn of the point are unfolded.
    fn visible_edges(&self, chart: usize, pos: Vec2) -> Vec<(usize, Vec2)> {
        let mut out = Vec::new();
        let nc = self.chart_count();
        if chart % 2 == 0 && pos[1] >= 0.0 {
            out.push((chart / 2, pos));
        }
        for forward in [true, false] {
            let mut c = chart;
            let mut t = Rigid::IDENTITY;
            let mut turned = 0.0;
            for _ in 0..nc - 1 {
                if c % 2 == 1 && c != chart {
                    turned += self.sector_angle_of_chart(c);
                }
                if turned > PI + 1e-12 {
                    break;
                }
                let (next, step) = self.step(c, forward);
                t = t.compose(&step);
                c = next;
                if c == chart {
                    break;
                }
                if c % 2 == 0 {
                    let local = t.inverse().apply(pos);
                    if local[1] >= 0.0 && !out.iter().any(|(e, _)| *e == c / 2) {
                        out.push((c / 2, local));
                    }
                }
            }
        }
        out
    }

    /// Portal distances from a base point.
    pub fn base_source(&self, p: &Point) -> Result<BaseSource> {
        let portal = self
            .portals
            .par_iter()
            .map(|edge| edge.iter().map(|g| self.base.distance(p, g)).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(BaseSource { point: p.clone(), portal })
    }

    fn edge_point(&self, edge: usize, s: f64) -> Result<Point> {
        let n = self.curve.len();
        let l = self.curve.edge_lengths()[edge];
        let v = self.curve.vertices();
        let u = (s / l).clamp(0.0, 1.0);
        if u == 0.0 {
            return Ok(v[edge].clone());
        }
        if u == 1.0 {
            return Ok(v[(edge + 1) % n].clone());
        }
        self.base.geodesic_point(&v[edge], &v[(edge + 1) % n], u)
    }

    /// Distance from a base source to a funnel point. With `refine` the
    /// crossing point is optimized continuously on the best edges; otherwise
    /// it is the best portal.
    pub fn source_to_funnel(&self, src: &BaseSource, chart: usize, pos: Vec2, refine: bool) -> Result<f64> {
        let m = self.portals_per_edge;
        let lengths = self.curve.edge_lengths();
        let mut ranked: Vec<(f64, usize, usize, Vec2)> = Vec::new();
        for (e, local) in self.visible_edges(chart, pos) {
            let l = lengths[e];
            let (mut best, mut bk) = (f64::INFINITY, 0);
            for k in 0..=m {
                let s = l * k as f64 / m as f64;
                let d = src.portal[e][k] + geom::dist(local, [s, 0.0]);
                if d < best {
                    best = d;
                    bk = k;
                }
            }
            ranked.push((best, e, bk, local));
        }
        if ranked.is_empty() {
            return Ok(f64::INFINITY);
        }
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
        if !refine {
            return Ok(ranked[0].0);
        }
        let mut best = ranked[0].0;
        for &(_, e, k, local) in ranked.iter().take(2) {
            let l = lengths[e];
            let lo = l * k.saturating_sub(1) as f64 / m as f64;
            let hi = l * (k + 1).min(m) as f64 / m as f64;
            let mut err = None;
            let (_, v) = geom::golden_min(
                |s| match self.edge_point(e, s).and_then(|g| self.base.distance(&src.point, &g)) {
                    Ok(d) => d + geom::dist(local, [s, 0.0]),
                    Err(x) => {
                        err.get_or_insert(x);
                        f64::INFINITY
                    }
                },
                lo,
                hi,
                60,
            );
            if let Some(x) = err {
                return Err(x);
            }
            best = best.min(v);
        }
        Ok(best)
    }

    fn portal_matrix(&self) -> Result<&Vec<f64>> {
        if let Some(m) = self.portal_matrix.get() {
            return Ok(m);
        }
        let flat: Vec<&Point> = self.portals.iter().flatten().collect();
        let np = flat.len();
        let rows = (0..np)
            .into_par_iter()
            .map(|i| (0..np).map(|j| if i == j { Ok(0.0) } else { self.base.distance(flat[i], flat[j]) }).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        let _ = self.portal_matrix.set(rows.concat());
        Ok(self.portal_matrix.get().unwrap())
    }

    /// Shortest path between funnel points that crosses the base.
    fn through_base(&self, a: (usize, Vec2), b: (usize, Vec2)) -> Result<f64> {
        let m = self.portals_per_edge;
        let lengths = self.curve.edge_lengths();
        let va = self.visible_edges(a.0, a.1);
        let vb = self.visible_edges(b.0, b.1);
        if va.is_empty() || vb.is_empty() {
            return Ok(f64::INFINITY);
        }
        let matrix = self.portal_matrix()?;
        let np = self.portals.len() * (m + 1);
        // best portal pair per pair of visible edges
        let mut pairs: Vec<(f64, usize, usize, usize, usize)> = Vec::new();
        for (ia, &(ea, la)) in va.iter().enumerate() {
            let da: Vec<f64> = (0..=m).map(|k| geom::dist(la, [lengths[ea] * k as f64 / m as f64, 0.0])).collect();
            for (ib, &(eb, lb)) in vb.iter().enumerate() {
                let db: Vec<f64> = (0..=m).map(|k| geom::dist(lb, [lengths[eb] * k as f64 / m as f64, 0.0])).collect();
                let mut best = (f64::INFINITY, ia, ib, 0, 0);
                for ka in 0..=m {
                    let row = &matrix[(ea * (m + 1) + ka) * np..];
                    for kb in 0..=m {
                        let d = da[ka] + row[eb * (m + 1) + kb] + db[kb];
                        if d < best.0 {
                            best = (d, ia, ib, ka, kb);
                        }
                    }
                }
                pairs.push(best);
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut value = pairs[0].0;
        for &(_, ia, ib, ka, kb) in pairs.iter().take(3) {
            let (ea, la) = va[ia];
            let (eb, lb) = vb[ib];
            let s0 = [lengths[ea] * ka as f64 / m as f64, lengths[eb] * kb as f64 / m as f64];
            value = value.min(self.refine_crossings((ea, la), (eb, lb), s0)?);
            // a shared corner is a kink of the cost where line searches stall;
            // restart half a portal spacing inside both edges
            let nudge = |s: f64, l: f64| if s < 0.5 * l { s + 0.5 * l / m as f64 } else { s - 0.5 * l / m as f64 };
            let s1 = [nudge(s0[0], lengths[ea]), nudge(s0[1], lengths[eb])];
            value = value.min(self.refine_crossings((ea, la), (eb, lb), s1)?);
        }
        Ok(value)
    }

    /// Minimizes the length of the path `a -> edge_a(s) -> edge_b(t) -> b`
    /// over the two crossing parameters, starting from `s0`: alternating line
    /// searches with a pattern move along the last displacement.
    fn refine_crossings(&self, a: (usize, Vec2), b: (usize, Vec2), s0: [f64; 2]) -> Result<f64> {
        let lengths = self.curve.edge_lengths();
        let (ea, la) = a;
        let (eb, lb) = b;
        let mut err = None;
        let mut cost = |x: [f64; 2]| -> f64 {
            match self.edge_point(ea, x[0]).and_then(|g| Ok((g, self.edge_point(eb, x[1])?))).and_then(|(g, h)| self.base.distance(&g, &h)) {
                Ok(d) => geom::dist(la, [x[0], 0.0]) + d + geom::dist(lb, [x[1], 0.0]),
                Err(e) => {
                    err.get_or_insert(e);
                    f64::INFINITY
                }
            }
        };
        let hi = [lengths[ea], lengths[eb]];
        let mut x = s0;
        let mut value = cost(x);
        for _ in 0..100 {
            let start = (x, value);
            for k in 0..2 {
                let (t, v) = geom::golden_min(
                    |t| {
                        let mut y = x;
                        y[k] = t;
                        cost(y)
                    },
                    0.0,
                    hi[k],
                    60,
                );
                if v < value {
                    x[k] = t;
                    value = v;
                }
            }
            let d = [x[0] - start.0[0], x[1] - start.0[1]];
            // largest step keeping both parameters on their edges
            let reach = (0..2)
                .map(|k| match d[k] {
                    dk if dk > 0.0 => (hi[k] - x[k]) / dk,
                    dk if dk < 0.0 => -x[k] / dk,
                    _ => f64::INFINITY,
                })
                .fold(f64::INFINITY, f64::min);
            if reach.is_finite() && reach > 0.0 {
                let (t, v) = geom::golden_min(|t| cost([x[0] + t * d[0], x[1] + t * d[1]]), 0.0, reach, 60);
                if v < value {
                    x = [(x[0] + t * d[0]).clamp(0.0, hi[0]), (x[1] + t * d[1]).clamp(0.0, hi[1])];
                    value = v;
                }
            }
            if start.1 - value <= 1e-15 * (1.0 + value) {
                break;
            }
        }
        if let Some(e) = err {
            return Err(e);
        }
        Ok(value)
    }

    /// Distance in the extended space.
    pub fn extended_distance(&self, p: &ExtPoint, q: &ExtPoint) -> Result<f64> {
        match (p, q) {
            (ExtPoint::Base { point: a }, ExtPoint::Base { point: b }) => self.base.distance(a, b),
            (ExtPoint::Base { point }, ExtPoint::Funnel { chart, pos }) | (ExtPoint::Funnel { chart, pos }, ExtPoint::Base { point }) => {
                self.source_to_funnel(&self.base_source(point)?, *chart, *pos, true)
            }
            (ExtPoint::Funnel { chart: ca, pos: pa }, ExtPoint::Funnel { chart: cb, pos: pb }) => {
                let direct = self.funnel_distance((*ca, *pa), (*cb, *pb));
                Ok(direct.min(self.through_base((*ca, *pa), (*cb, *pb))?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::regular_polygon;

    fn square() -> (Arc<TargetSpace>, PolygonalCurve) {
        let s = Arc::new(TargetSpace::euclidean(2).unwrap());
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]].map(|c| Point::euclidean(&c)).to_vec();
        let c = PolygonalCurve::new(&s, pts).unwrap();
        (s, c)
    }

    #[test]
    fn sectors_sum_to_total_curvature() {
        let s = Arc::new(TargetSpace::euclidean(2).unwrap());
        let c = PolygonalCurve::new(&s, regular_polygon(12, 1.0)).unwrap();
        let f = build_funnel(s, &c, 4.0, 8).unwrap();
        assert!((f.sector_sum() - 2.0 * PI).abs() < 1e-9);
        assert!((f.level_length(2.0) - (c.length() + 4.0 * PI)).abs() < 1e-9);
    }

    #[test]
    fn same_strip_is_euclidean() {
        let (s, c) = square();
        let f = build_funnel(s, &c, 8.0, 16).unwrap();
        let d = f.extended_distance(&f.strip_point(1, 0.2, 0.5), &f.strip_point(1, 0.9, 2.0)).unwrap();
        assert!((d - (0.7f64.powi(2) + 1.5f64.powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn around_a_corner_matches_the_plane() {
        // the square is traversed counter-clockwise, so the funnel of edge 0
        // (bottom side) lies below it; in the plane strip 0 point (s, t) sits at (s, -t)
        let (s, c) = square();
        let f = build_funnel(s, &c, 8.0, 16).unwrap();
        let p = f.strip_point(0, 0.5, 0.5);
        let q = f.strip_point(1, 0.5, 0.5);
        // strip 1 is the right side: (1 + t, s)
        let planar = geom::dist([0.5, -0.5], [1.5, 0.5]);
        assert!((f.extended_distance(&p, &q).unwrap() - planar).abs() < 1e-9);
    }
}
