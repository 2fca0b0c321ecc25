use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};

/// Triangulated closed unit disc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiscMeshData", into = "DiscMeshData")]
pub struct DiscMesh {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
    edges: Vec<[usize; 2]>,
    /// Sorted neighbor lists.
    neighbors: Vec<Vec<usize>>,
    /// Edge index per sorted neighbor entry.
    neighbor_edges: Vec<Vec<usize>>,
    vertex_triangles: Vec<Vec<usize>>,
    /// Triangles on each side of every edge.
    edge_triangles: Vec<Vec<usize>>,
    on_boundary: Vec<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DiscMeshData {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
}

impl TryFrom<DiscMeshData> for DiscMesh {
    type Error = Error;
    fn try_from(d: DiscMeshData) -> Result<Self> {
        DiscMesh::new(d.vertices, d.triangles, d.boundary)
    }
}

impl From<DiscMesh> for DiscMeshData {
    fn from(m: DiscMesh) -> Self {
        Self { vertices: m.vertices, triangles: m.triangles, boundary: m.boundary }
    }
}

impl DiscMesh {
    /// Checks the disc invariants and builds adjacency.
    pub fn new(vertices: Vec<Vec2>, triangles: Vec<[usize; 3]>, boundary: Vec<usize>) -> Result<Self> {
        let nv = vertices.len();
        for t in &triangles {
            if t.iter().any(|&i| i >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t:?} references a missing vertex")));
            }
            if geom::orient(vertices[t[0]], vertices[t[1]], vertices[t[2]]) <= 0.0 {
                return Err(Error::InvalidMesh(format!("triangle {t:?} is degenerate or clockwise")));
            }
        }
        let mut edge_ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut edge_triangles: Vec<Vec<usize>> = Vec::new();
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]));
                let id = *edge_ids.entry((a, b)).or_insert_with(|| {
                    edges.push([a, b]);
                    edge_triangles.push(Vec::new());
                    edges.len() - 1
                });
                edge_triangles[id].push(ti);
            }
        }
        if edge_triangles.iter().any(|t| t.len() > 2) {
            return Err(Error::InvalidMesh("an edge is shared by more than two triangles".into()));
        }
        let euler = nv as i64 - edges.len() as i64 + triangles.len() as i64;
        if euler != 1 {
            return Err(Error::InvalidMesh(format!("Euler characteristic {euler}, expected 1 for a disc")));
        }
        let mut on_boundary = vec![false; nv];
        for (e, ts) in edges.iter().zip(&edge_triangles) {
            if ts.len() == 1 {
                on_boundary[e[0]] = true;
                on_boundary[e[1]] = true;
            }
        }
        let marked: Vec<usize> = (0..nv).filter(|&i| on_boundary[i]).collect();
        let mut sorted_boundary = boundary.clone();
        sorted_boundary.sort_unstable();
        if sorted_boundary != marked {
            return Err(Error::InvalidMesh("boundary loop does not match the boundary edges".into()));
        }
        for &b in &boundary {
            if (geom::norm(vertices[b]) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMesh(format!("boundary vertex {b} is off the unit circle")));
            }
        }
        for i in 0..nv {
            if !on_boundary[i] && geom::norm(vertices[i]) >= 1.0 {
                return Err(Error::InvalidMesh(format!("interior vertex {i} is not inside the disc")));
            }
        }
        let mut neighbors = vec![Vec::new(); nv];
        
        for (id, e) in edges.iter().enumerate() {
            neighbors[e[0]].push((e[1], id));
            neighbors[e[1]].push((e[0], id));
        }
        let (neighbors, neighbor_edges): (Vec<Vec<usize>>, Vec<Vec<usize>>) = neighbors
            .into_iter()
            .map(|mut l: Vec<(usize, usize)>| {
                l.sort_unstable();
                l.into_iter().unzip()
            })
            .unzip();
        let mut vertex_triangles = vec![Vec::new(); nv];
        for (ti, t) in triangles.iter().enumerate() {
            for &v in t {
                vertex_triangles[v].push(ti);
            }
        }
        Ok(Self { vertices, triangles, boundary, edges, neighbors, neighbor_edges, vertex_triangles, edge_triangles, on_boundary })
    }

    /// Concentric-ring triangulation: ring `k` has `6k` vertices at radius
    /// `k / rings`, consecutive rings are zipped by angle and the result is
    /// made Delaunay by edge flips (so all cotangent weights are positive).
    pub fn concentric(rings: usize) -> Result<Self> {
        if rings == 0 {
            return Err(Error::InvalidMesh("rings must be at least 1".into()));
        }
        let mut vertices: Vec<Vec2> = vec![[0.0, 0.0]];
        let mut ring_start = vec![0usize];
        for k in 1..=rings {
            ring_start.push(vertices.len());
            let n = 6 * k;
            let r = k as f64 / rings as f64;
            for j in 0..n {
                let (s, c) = (2.0 * PI * j as f64 / n as f64).sin_cos();
                if k == rings {
                    // exactly on the unit circle
                    let h = c.hypot(s);
                    vertices.push([c / h, s / h]);
                } else {
                    vertices.push([r * c, r * s]);
                }
            }
        }
        let mut triangles = Vec::new();
        for k in 1..=rings {
            let outer: Vec<usize> = (0..6 * k).map(|j| ring_start[k] + j).collect();
            if k == 1 {
                for j in 0..6 {
                    triangles.push([0, outer[j], outer[(j + 1) % 6]]);
                }
                continue;
            }
            let inner: Vec<usize> = (0..6 * (k - 1)).map(|j| ring_start[k - 1] + j).collect();
            let (ni, no) = (inner.len(), outer.len());
            // zip the two rings by angle; ties advance the outer ring
            let (mut i, mut j) = (0usize, 0usize);
            while i < ni || j < no {
                let next_inner = (i + 1) as f64 / ni as f64;
                let next_outer = (j + 1) as f64 / no as f64;
                if j < no && (i == ni || next_outer <= next_inner) {
                    triangles.push([inner[i % ni], outer[j], outer[(j + 1) % no]]);
                    j += 1;
                } else {
                    triangles.push([inner[i % ni], outer[j % no], inner[(i + 1) % ni]]);
                    i += 1;
                }
            }
        }
        delaunay_flips(&vertices, &mut triangles);
        let boundary: Vec<usize> = (0..6 * rings).map(|j| ring_start[rings] + j).collect();
        Self::new(vertices, triangles, boundary)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Boundary loop in counter-clockwise order.
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Edge ids parallel to [`DiscMesh::neighbors`].
    pub fn neighbor_edges(&self, v: usize) -> &[usize] {
        &self.neighbor_edges[v]
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vertex_triangles[v]
    }

    pub fn edge_triangles(&self, e: usize) -> &[usize] {
        &self.edge_triangles[e]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| !self.on_boundary[v]).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        0.5 * geom::orient(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Longest domain edge.
    pub fn mesh_size(&self) -> f64 {
        self.edges.iter().map(|e| geom::dist(self.vertices[e[0]], self.vertices[e[1]])).fold(0.0, f64::max)
    }

    pub fn min_angle(&self) -> f64 {
        let mut m = PI;
        for t in &self.triangles {
            for k in 0..3 {
                let p = self.vertices[t[k]];
                let a = geom::sub(self.vertices[t[(k + 1) % 3]], p);
                let b = geom::sub(self.vertices[t[(k + 2) % 3]], p);
                m = m.min(geom::angle_between(a, b));
            }
        }
        m
    }

    /// Cotangent weight `(cot α + cot β) / 2` of every edge, with `α`, `β`
    /// the angles opposite the edge.
    pub fn cotangent_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.edges.len()];
        for (e, edge) in self.edges.iter().enumerate() {
            for &t in &self.edge_triangles[e] {
                let tri = self.triangles[t];
                let o = *tri.iter().find(|&&v| v != edge[0] && v != edge[1]).unwrap();
                let p = self.vertices[o];
                let a = geom::sub(self.vertices[edge[0]], p);
                let b = geom::sub(self.vertices[edge[1]], p);
                w[e] += 0.5 * geom::dot(a, b) / geom::cross(a, b).abs();
            }
        }
        w
    }

    /// Proper vertex coloring of the interior vertices (greedy, in index order);
    /// vertices of one class are pairwise non-adjacent.
    pub fn interior_color_classes(&self) -> Vec<Vec<usize>> {
        let mut color = vec![usize::MAX; self.vertices.len()];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for v in self.interior_vertices() {
            let used: Vec<usize> = self.neighbors[v].iter().map(|&u| color[u]).filter(|&c| c != usize::MAX).collect();
            let c = (0..).find(|c| !used.contains(c)).unwrap();
            color[v] = c;
            if c == classes.len() {
                classes.push(Vec::new());
            }
            classes[c].push(v);
        }
        classes
    }

    /// Triangle containing the domain point `z` and its barycentric coordinates.
    pub fn locate(&self, z: Vec2) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for t in 0..self.triangles.len() {
            let b = self.barycentric(t, z);
            let worst = b.iter().cloned().fold(f64::INFINITY, f64::min);
            if worst >= -1e-12 {
                return Some((t, b));
            }
            if best.as_ref().map_or(true, |(_, _, w)| worst > *w) {
                best = Some((t, b, worst));
            }
        }
        best.filter(|(_, _, w)| *w > -1e-9).map(|(t, b, _)| (t, b))
    }

    pub fn barycentric(&self, t: usize, z: Vec2) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        let area = geom::orient(a, b, c);
        [geom::orient(z, b, c) / area, geom::orient(a, z, c) / area, geom::orient(a, b, z) / area]
    }

    pub fn point_at(&self, t: usize, bary: [f64; 3]) -> Vec2 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }
}

/// Lawson flips until every interior edge has opposite angles summing to at most π.
fn delaunay_flips(v: &[Vec2], triangles: &mut [[usize; 3]]) {
    let angle = |o: usize, a: usize, b: usize| geom::angle_between(geom::sub(v[a], v[o]), geom::sub(v[b], v[o]));
    loop {
        let mut half: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                half.insert((tri[k], tri[(k + 1) % 3]), (t, tri[(k + 2) % 3]));
            }
        }
        let mut touched = vec![false; triangles.len()];
        let mut flipped = false;
        for (&(a, b), &(t, o)) in &half {
            let Some(&(u, o2)) = half.get(&(b, a)) else { continue };
            if a > b || touched[t] || touched[u] {
                continue;
            }
            if angle(o, a, b) + angle(o2, b, a) > PI + 1e-12 {
                triangles[t] = [o, a, o2];
                triangles[u] = [o2, b, o];
                touched[t] = true;
                touched[u] = true;
                flipped = true;
            }
        }
        if !flipped {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_ring_is_a_hexagon() {
        let m = DiscMesh::concentric(1).unwrap();
        assert_eq!(m.vertex_count(), 7);
        assert_eq!(m.triangle_count(), 6);
    }

    #[test]
    fn ring_counts_and_quality() {
        for n in 1..=12 {
            let m = DiscMesh::concentric(n).unwrap();
            assert_eq!(m.vertex_count(), 1 + 3 * n * (n + 1));
            assert_eq!(m.triangle_count(), 6 * n * n);
            assert_eq!(m.boundary().len(), 6 * n);
            assert!(m.min_angle() >= 40f64.to_radians(), "rings {n}: {}", m.min_angle().to_degrees());
        }
    }

    #[test]
    fn cotangent_weights_are_positive() {
        for n in 1..=24 {
            let m = DiscMesh::concentric(n).unwrap();
            assert!(m.cotangent_weights().iter().all(|&w| w > 0.0), "rings {n}");
        }
    }

    #[test]
    fn color_classes_are_independent() {
        let m = DiscMesh::concentric(6).unwrap();
        for class in m.interior_color_classes() {
            for &v in &class {
                assert!(m.neighbors(v).iter().all(|u| !class.contains(u)));
            }
        }
    }
}
