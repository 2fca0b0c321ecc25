use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::{self, Vec2};
use crate::mesh::{DiscMesh, MeshMap};
use crate::space::complex::{DistanceField, Endpoint};
use crate::space::{Point, PolyhedralComplex};

/// A point of the domain given by a triangle and barycentric coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainPoint {
    pub tri: usize,
    pub bary: [f64; 3],
}

/// Intrinsic metric on the domain induced by image edge lengths: every mesh
/// triangle becomes a flat triangle with the image side lengths.
#[derive(Clone, Debug)]
pub struct PullbackMetric {
    mesh: DiscMesh,
    lengths: Vec<[f64; 3]>,
    complex: PolyhedralComplex,
    /// Complex vertex id of every mesh vertex.
    vertex_ids: Vec<usize>,
}

/// Distances from one source to every mesh vertex and graph node.
#[derive(Clone, Debug)]
pub struct PullbackField {
    field: DistanceField,
    nodes: Vec<f64>,
    pub vertex: Vec<f64>,
}

impl PullbackMetric {
    pub fn new(map: &MeshMap, subdivision: usize) -> Result<Self> {
        Self::from_lengths(&map.mesh, map.triangle_lengths()?, subdivision)
    }

    /// Lengths shorter than `1e-9` of the longest one are raised to that floor
    /// so every triangle stays a valid chart.
    pub fn from_lengths(mesh: &DiscMesh, lengths: Vec<[f64; 3]>, subdivision: usize) -> Result<Self> {
        let longest = lengths.iter().flatten().cloned().fold(0.0, f64::max);
        let floor = 1e-9 * longest.max(f64::MIN_POSITIVE);
        let clamped: Vec<[f64; 3]> = lengths.iter().map(|l| l.map(|x| x.max(floor))).collect();
        let complex = PolyhedralComplex::from_triangle_lengths(mesh.triangles(), &clamped, subdivision)?;
        let mut vertex_ids = vec![usize::MAX; mesh.vertex_count()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for k in 0..3 {
                vertex_ids[tri[k]] = complex.vertex_id(t, k);
            }
        }
        Ok(Self { mesh: mesh.clone(), lengths, complex, vertex_ids })
    }

    pub fn mesh(&self) -> &DiscMesh {
        &self.mesh
    }

    pub fn complex(&self) -> &PolyhedralComplex {
        &self.complex
    }

    /// Unclamped image lengths per triangle side.
    pub fn lengths(&self) -> &[[f64; 3]] {
        &self.lengths
    }

    /// Chart coordinates of a domain point (affine correspondence per triangle).
    pub fn chart_pos(&self, p: DomainPoint) -> Vec2 {
        let mut y = [0.0, 0.0];
        for k in 0..3 {
            y = geom::add(y, geom::scale(self.complex.corner(p.tri, k), p.bary[k]));
        }
        y
    }

    pub fn endpoint(&self, p: DomainPoint) -> Endpoint {
        for k in 0..3 {
            if p.bary[k] == 1.0 {
                return Endpoint::Vertex(self.vertex_ids[self.mesh.triangles()[p.tri][k]]);
            }
        }
        Endpoint::Interior { face: p.tri, pos: self.chart_pos(p) }
    }

    pub fn vertex_endpoint(&self, v: usize) -> Endpoint {
        Endpoint::Vertex(self.vertex_ids[v])
    }

    /// Domain point as a point of the intrinsic complex.
    pub fn point(&self, p: DomainPoint) -> Point {
        let y = self.chart_pos(p);
        Point::new(p.tri, y.to_vec())
    }

    /// Domain point of vertex `v`.
    pub fn vertex_domain_point(&self, v: usize) -> DomainPoint {
        let t = self.mesh.vertex_triangles(v)[0];
        let k = self.mesh.triangles()[t].iter().position(|&u| u == v).unwrap();
        let mut bary = [0.0; 3];
        bary[k] = 1.0;
        DomainPoint { tri: t, bary }
    }

    /// Interior angle of triangle `t` at corner `k` from the side lengths.
    pub fn corner_angle(&self, t: usize, k: usize) -> f64 {
        let l = self.lengths[t];
        // sides adjacent to corner k, and the opposite one
        let a = l[k];
        let b = l[(k + 2) % 3];
        let c = l[(k + 1) % 3];
        let area = geom::heron(a, b, c);
        (4.0 * area).atan2(a * a + b * b - c * c)
    }

    /// Total pull-back angle at mesh vertex `v`.
    pub fn angle_sum(&self, v: usize) -> f64 {
        self.mesh
            .vertex_triangles(v)
            .iter()
            .map(|&t| {
                let k = self.mesh.triangles()[t].iter().position(|&u| u == v).unwrap();
                self.corner_angle(t, k)
            })
            .sum()
    }

    /// `2π - angle_sum(v)` for interior vertices.
    pub fn angle_defect(&self, v: usize) -> f64 {
        2.0 * PI - self.angle_sum(v)
    }

    /// Pull-back area of triangle `t`.
    pub fn triangle_area(&self, t: usize) -> f64 {
        let l = self.lengths[t];
        geom::heron(l[0], l[1], l[2])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.mesh.triangle_count()).map(|t| self.triangle_area(t)).sum()
    }

    /// Graph (subdivided 1-skeleton) distances from a source.
    pub fn graph_field(&self, source: DomainPoint) -> DistanceField {
        self.complex.distance_field(self.endpoint(source))
    }

    /// Graph distance between two domain points.
    pub fn graph_distance(&self, field: &DistanceField, target: DomainPoint) -> f64 {
        self.complex.graph_distance(field, self.endpoint(target))
    }

    /// Taut distance from the source of a graph field to `target`.
    pub fn taut_distance(&self, field: &DistanceField, target: DomainPoint) -> f64 {
        let approx = self.graph_distance(field, target);
        match self.complex.path_to(field, self.endpoint(target)) {
            Ok(path) => path.length.min(approx),
            Err(_) => approx,
        }
    }

    /// Taut distances from `source` to every node, extended into faces.
    pub fn field(&self, source: DomainPoint) -> PullbackField {
        let field = self.graph_field(source);
        let nodes = self.complex.node_distances(&field);
        let vertex = self.vertex_ids.iter().map(|&id| nodes[id]).collect();
        PullbackField { field, nodes, vertex }
    }

    /// Distance from the field's source to `p`.
    pub fn field_distance(&self, f: &PullbackField, p: DomainPoint) -> f64 {
        match self.endpoint(p) {
            Endpoint::Vertex(id) => f.nodes[id],
            Endpoint::Interior { face, pos } => self.complex.extend_from_nodes(&f.field, &f.nodes, face, pos),
        }
    }

    /// Taut distance from the field's source to `p`.
    pub fn exact_field_distance(&self, f: &PullbackField, p: DomainPoint) -> f64 {
        let approx = self.field_distance(f, p);
        match self.complex.path_to(&f.field, self.endpoint(p)) {
            Ok(path) => path.length.min(approx),
            Err(_) => approx,
        }
    }

    /// Geodesic distance between two domain points.
    pub fn distance(&self, p: DomainPoint, q: DomainPoint) -> Result<f64> {
        Ok(self.complex.shortest_path(self.endpoint(p), self.endpoint(q))?.length)
    }

    /// Point at fraction `t` along the geodesic from `p` to `q`, as a domain point.
    pub fn geodesic_point(&self, p: DomainPoint, q: DomainPoint, t: f64) -> Result<DomainPoint> {
        let path = self.complex.shortest_path(self.endpoint(p), self.endpoint(q))?;
        let (face, y) = path.point_at(t);
        Ok(self.domain_point(face, y))
    }

    /// Inverse of [`PullbackMetric::chart_pos`].
    pub fn domain_point(&self, face: usize, y: Vec2) -> DomainPoint {
        let [a, b, c] = [0, 1, 2].map(|k| self.complex.corner(face, k));
        let area = geom::orient(a, b, c);
        let bary = [geom::orient(y, b, c) / area, geom::orient(a, y, c) / area, geom::orient(a, b, y) / area];
        let s: f64 = bary.iter().map(|x| x.max(0.0)).sum();
        DomainPoint { tri: face, bary: bary.map(|x| x.max(0.0) / s) }
    }

    /// Distance from the field's source to the boundary loop.
    pub fn distance_to_boundary(&self, f: &PullbackField) -> f64 {
        let mut best = f64::INFINITY;
        let b = self.mesh.boundary();
        for i in 0..b.len() {
            let (u, v) = (b[i], b[(i + 1) % b.len()]);
            best = best.min(f.vertex[u]);
            // the boundary edge as seen from its triangle
            let e = crate::mesh::map::edge_id(&self.mesh, u, v);
            let t = self.mesh.edge_triangles(e)[0];
            let tri = self.mesh.triangles()[t];
            let ku = tri.iter().position(|&x| x == u).unwrap();
            let kv = tri.iter().position(|&x| x == v).unwrap();
            let steps = 8;
            for s in 1..steps {
                let w = s as f64 / steps as f64;
                let mut bary = [0.0; 3];
                bary[ku] = 1.0 - w;
                bary[kv] = w;
                best = best.min(self.exact_field_distance(f, DomainPoint { tri: t, bary }));
            }
        }
        best
    }
}

/// Centroids of the `n²` congruent sub-triangles of the standard simplex.
pub fn sub_triangle_centroids(n: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(n * n);
    let h = 1.0 / n as f64;
    for i in 0..n {
        for j in 0..(n - i) {
            // upward triangle (i, j), (i+1, j), (i, j+1)
            let (a, b) = ((i as f64 + 1.0 / 3.0) * h, (j as f64 + 1.0 / 3.0) * h);
            out.push([1.0 - a - b, a, b]);
            if i + j + 1 < n {
                let (a, b) = ((i as f64 + 2.0 / 3.0) * h, (j as f64 + 2.0 / 3.0) * h);
                out.push([1.0 - a - b, a, b]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_pullback_is_flat_with_exact_vertex_distances() {
        let map = MeshMap::identity(DiscMesh::concentric(4).unwrap());
        let pb = PullbackMetric::new(&map, 3).unwrap();
        for v in map.mesh.interior_vertices() {
            assert!(pb.angle_defect(v).abs() < 1e-12);
        }
        let f = pb.field(pb.vertex_domain_point(0));
        for (v, z) in map.mesh.vertices().iter().enumerate() {
            assert!((f.vertex[v] - geom::norm(*z)).abs() < 1e-12, "{v}: {} vs {}", f.vertex[v], geom::norm(*z));
        }
        // the boundary is the inscribed 24-gon
        let db = pb.distance_to_boundary(&f);
        assert!((db - (PI / 24.0).cos()).abs() < 1e-12, "{db}");
    }

    #[test]
    fn centroid_grid_is_uniform() {
        for n in 1..6 {
            let c = sub_triangle_centroids(n);
            assert_eq!(c.len(), n * n);
            let mean: Vec<f64> = (0..3).map(|k| c.iter().map(|b| b[k]).sum::<f64>() / c.len() as f64).collect();
            assert!(mean.iter().all(|m| (m - 1.0 / 3.0).abs() < 1e-12));
        }
    }
}
