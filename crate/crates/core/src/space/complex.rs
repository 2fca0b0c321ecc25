//! Flat polygonal chart complexes.
//!
//! Every chart is a convex polygon (counter-clockwise) with its own planar
//! coordinates; gluings identify boundary edges by orientation-reversing
//! isometries. Distances come from Dijkstra on an edge-subdivision graph
//! followed by unfolding the chart corridor of the discrete path and pulling
//! it taut with the funnel (string-pulling) algorithm.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Rigid, Vec2};
use crate::space::Point;

/// Convex chart polygon, counter-clockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartPolygon {
    pub vertices: Vec<Vec2>,
}

/// Identifies edge `a.1` of chart `a.0` with edge `b.1` of chart `b.0`
/// (edge `i` runs from vertex `i` to vertex `i + 1`), reversing orientation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gluing {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

#[derive(Clone, Debug)]
struct Face {
    verts: Vec<Vec2>,
    /// Neighbor across each edge: `(face, edge)`.
    across: Vec<Option<(usize, usize)>>,
    /// Maps the neighbor's coordinates into this face's coordinates.
    from_neighbor: Vec<Option<Rigid>>,
    /// Global vertex id per local vertex.
    vid: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
enum NodeKind {
    Vertex(usize),
    /// Interior subdivision point of the edge `(face, edge)` of the canonical side.
    Edge { face: usize, edge: usize },
}

#[derive(Clone, Copy, Debug)]
struct Arc {
    to: u32,
    face: u32,
    w: f64,
}

/// Where a path starts or ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Endpoint {
    /// Complex vertex by global id.
    Vertex(usize),
    /// A point given in the coordinates of `face`.
    Interior { face: usize, pos: Vec2 },
}

/// A taut path through an unfolded chart corridor.
#[derive(Clone, Debug)]
pub struct ComplexPath {
    /// Charts in order of traversal.
    pub faces: Vec<usize>,
    /// Unfolding transform per chart (chart coordinates into the common plane).
    pub(crate) transforms: Vec<Rigid>,
    /// Arc-length parameter at which the path leaves `faces[i]`.
    pub exits: Vec<f64>,
    /// Taut polyline in the common plane.
    pub polyline: Vec<Vec2>,
    pub length: f64,
}

impl ComplexPath {
    /// Point at arc-length fraction `t`, in chart coordinates.
    pub fn point_at(&self, t: f64) -> (usize, Vec2) {
        let s = t.clamp(0.0, 1.0) * self.length;
        let k = self.exits.iter().take_while(|&&e| e < s).count().min(self.faces.len() - 1);
        let mut acc = 0.0;
        let mut y = *self.polyline.last().unwrap();
        for w in self.polyline.windows(2) {
            let l = geom::dist(w[0], w[1]);
            if acc + l >= s {
                let u = if l > 0.0 { (s - acc) / l } else { 0.0 };
                y = geom::lerp(w[0], w[1], u.clamp(0.0, 1.0));
                break;
            }
            acc += l;
        }
        (self.faces[k], self.transforms[k].inverse().apply(y))
    }

    /// Initial direction of the path in the coordinates of its first chart,
    /// scaled to the path length.
    pub fn initial_vector(&self) -> Vec2 {
        if self.polyline.len() < 2 || self.length == 0.0 {
            return [0.0, 0.0];
        }
        let d = geom::sub(self.polyline[1], self.polyline[0]);
        let n = geom::norm(d);
        let v = geom::scale(d, self.length / n);
        self.transforms[0].inverse().apply_linear(v)
    }
}

#[derive(Clone, Debug)]
pub struct PolyhedralComplex {
    charts: Vec<ChartPolygon>,
    gluings: Vec<Gluing>,
    faces: Vec<Face>,
    vertex_count: usize,
    /// `(face, local index)` incidences per global vertex.
    star: Vec<Vec<(usize, usize)>>,
    interior: Vec<bool>,
    subdivision: usize,
    nodes: Vec<NodeKind>,
    /// Nodes on each face boundary with their local coordinates.
    face_nodes: Vec<Vec<(u32, Vec2)>>,
    adjacency: Vec<Vec<Arc>>,
    diameter: f64,
}

/// Single-source shortest-path tree on the subdivision graph.
#[derive(Clone, Debug)]
pub struct DistanceField {
    source: Endpoint,
    dist: Vec<f64>,
    parent: Vec<u32>,
    parent_face: Vec<u32>,
}

const SOURCE: u32 = u32::MAX;

#[derive(PartialEq)]
struct HeapItem(f64, u32);
impl Eq for HeapItem {}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PolyhedralComplex {
    pub fn new(charts: Vec<ChartPolygon>, gluings: Vec<Gluing>, subdivision: usize) -> Result<Self> {
        if charts.is_empty() {
            return Err(Error::InvalidSpace("complex without charts".into()));
        }
        let subdivision = subdivision.max(1);
        let mut faces: Vec<Face> = Vec::with_capacity(charts.len());
        for (i, c) in charts.iter().enumerate() {
            let n = c.vertices.len();
            if n < 3 {
                return Err(Error::InvalidSpace(format!("chart {i} has fewer than 3 vertices")));
            }
            for k in 0..n {
                let a = c.vertices[k];
                let b = c.vertices[(k + 1) % n];
                let d = c.vertices[(k + 2) % n];
                if geom::orient(a, b, d) < 0.0 {
                    return Err(Error::InvalidSpace(format!("chart {i} is not convex and counter-clockwise")));
                }
                if geom::dist(a, b) == 0.0 {
                    return Err(Error::InvalidSpace(format!("chart {i} has a zero-length edge")));
                }
            }
            faces.push(Face {
                verts: c.vertices.clone(),
                across: vec![None; n],
                from_neighbor: vec![None; n],
                vid: vec![0; n],
            });
        }
        // union-find over (face, local vertex)
        let offsets: Vec<usize> = faces
            .iter()
            .scan(0, |acc, f| {
                let o = *acc;
                *acc += f.verts.len();
                Some(o)
            })
            .collect();
        let total: usize = faces.iter().map(|f| f.verts.len()).sum();
        let mut uf: Vec<usize> = (0..total).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        for (gi, g) in gluings.iter().enumerate() {
            let (fa, ea) = g.a;
            let (fb, eb) = g.b;
            if fa >= faces.len() || fb >= faces.len() || ea >= faces[fa].verts.len() || eb >= faces[fb].verts.len() {
                return Err(Error::InvalidSpace(format!("gluing {gi} references a missing chart edge")));
            }
            if (fa, ea) == (fb, eb) || faces[fa].across[ea].is_some() || faces[fb].across[eb].is_some() {
                return Err(Error::InvalidSpace(format!("gluing {gi} reuses an edge")));
            }
            let na = faces[fa].verts.len();
            let nb = faces[fb].verts.len();
            let (a0, a1) = (faces[fa].verts[ea], faces[fa].verts[(ea + 1) % na]);
            let (b0, b1) = (faces[fb].verts[eb], faces[fb].verts[(eb + 1) % nb]);
            let la = geom::dist(a0, a1);
            let lb = geom::dist(b0, b1);
            if (la - lb).abs() > 1e-9 * la.max(lb) {
                return Err(Error::InvalidSpace(format!("gluing {gi} joins edges of lengths {la} and {lb}")));
            }
            faces[fa].across[ea] = Some((fb, eb));
            faces[fb].across[eb] = Some((fa, ea));
            // b's edge runs backwards along a's edge
            faces[fa].from_neighbor[ea] = Some(Rigid::from_segments(b1, b0, a0, a1));
            faces[fb].from_neighbor[eb] = Some(Rigid::from_segments(a1, a0, b0, b1));
            let x = find(&mut uf, offsets[fa] + ea);
            let y = find(&mut uf, offsets[fb] + (eb + 1) % nb);
            uf[x] = y;
            let x = find(&mut uf, offsets[fa] + (ea + 1) % na);
            let y = find(&mut uf, offsets[fb] + eb);
            uf[x] = y;
        }
        let mut ids = vec![usize::MAX; total];
        let mut vertex_count = 0;
        for (fi, f) in faces.iter_mut().enumerate() {
            for k in 0..f.verts.len() {
                let r = find(&mut uf, offsets[fi] + k);
                if ids[r] == usize::MAX {
                    ids[r] = vertex_count;
                    vertex_count += 1;
                }
                f.vid[k] = ids[r];
            }
        }
        let mut star = vec![Vec::new(); vertex_count];
        for (fi, f) in faces.iter().enumerate() {
            for (k, &v) in f.vid.iter().enumerate() {
                star[v].push((fi, k));
            }
        }
        let mut interior = vec![true; vertex_count];
        for f in &faces {
            let n = f.verts.len();
            for e in 0..n {
                if f.across[e].is_none() {
                    interior[f.vid[e]] = false;
                    interior[f.vid[(e + 1) % n]] = false;
                }
            }
        }
        let mut cx = Self {
            charts,
            gluings,
            faces,
            vertex_count,
            star,
            interior,
            subdivision,
            nodes: Vec::new(),
            face_nodes: Vec::new(),
            adjacency: Vec::new(),
            diameter: 0.0,
        };
        cx.build_graph();
        Ok(cx)
    }

    /// Builds a complex from triangles given only by their side lengths, glued
    /// along shared edges of the index triangulation (orientation as given).
    /// `lengths[t][k]` is the length of the side from corner `k` to `k + 1`.
    pub fn from_triangle_lengths(triangles: &[[usize; 3]], lengths: &[[f64; 3]], subdivision: usize) -> Result<Self> {
        use std::collections::HashMap;
        let mut charts = Vec::with_capacity(triangles.len());
        for l in lengths {
            charts.push(ChartPolygon { vertices: lay_out_triangle(l[0], l[1], l[2]).to_vec() });
        }
        let mut open: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        let mut gluings = Vec::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if let Some(other) = open.remove(&(b, a)) {
                    gluings.push(Gluing { a: other, b: (t, k) });
                } else {
                    open.insert((a, b), (t, k));
                }
            }
        }
        gluings.sort_by_key(|g| (g.a, g.b));
        Self::new(charts, gluings, subdivision)
    }

    fn build_graph(&mut self) {
        let k = self.subdivision;
        let mut nodes: Vec<NodeKind> = (0..self.vertex_count).map(NodeKind::Vertex).collect();
        let mut face_nodes: Vec<Vec<(u32, Vec2)>> = vec![Vec::new(); self.faces.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            for (li, &v) in f.vid.iter().enumerate() {
                face_nodes[fi].push((v as u32, f.verts[li]));
            }
        }
        for fi in 0..self.faces.len() {
            let n = self.faces[fi].verts.len();
            for e in 0..n {
                let canonical = match self.faces[fi].across[e] {
                    Some(other) => (fi, e) < other,
                    None => true,
                };
                if !canonical {
                    continue;
                }
                let base = nodes.len();
                for _ in 1..k {
                    nodes.push(NodeKind::Edge { face: fi, edge: e });
                }
                let (a, b) = (self.faces[fi].verts[e], self.faces[fi].verts[(e + 1) % n]);
                for j in 1..k {
                    let t = j as f64 / k as f64;
                    face_nodes[fi].push(((base + j - 1) as u32, geom::lerp(a, b, t)));
                }
                if let Some((g, eg)) = self.faces[fi].across[e] {
                    let m = self.faces[g].verts.len();
                    let (c, d) = (self.faces[g].verts[eg], self.faces[g].verts[(eg + 1) % m]);
                    for j in 1..k {
                        let t = j as f64 / k as f64;
                        // the neighbor runs the shared edge backwards
                        face_nodes[g].push(((base + j - 1) as u32, geom::lerp(d, c, t)));
                    }
                }
            }
        }
        let mut adjacency: Vec<Vec<Arc>> = vec![Vec::new(); nodes.len()];
        let mut diameter: f64 = 0.0;
        for (fi, fnodes) in face_nodes.iter().enumerate() {
            for i in 0..fnodes.len() {
                for j in (i + 1)..fnodes.len() {
                    let (a, pa) = fnodes[i];
                    let (b, pb) = fnodes[j];
                    let w = geom::dist(pa, pb);
                    diameter = diameter.max(w);
                    adjacency[a as usize].push(Arc { to: b, face: fi as u32, w });
                    adjacency[b as usize].push(Arc { to: a, face: fi as u32, w });
                }
            }
        }
        self.nodes = nodes;
        self.face_nodes = face_nodes;
        self.adjacency = adjacency;
        self.diameter = diameter;
    }

    pub fn charts(&self) -> &[ChartPolygon] {
        &self.charts
    }

    pub fn gluings(&self) -> &[Gluing] {
        &self.gluings
    }

    pub fn chart_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn subdivision(&self) -> usize {
        self.subdivision
    }

    /// Largest chart diameter; sets the scale for tolerances.
    pub fn chart_scale(&self) -> f64 {
        self.diameter
    }

    pub fn is_interior_vertex(&self, v: usize) -> bool {
        self.interior[v]
    }

    /// Global id of corner `k` of chart `face`.
    pub fn vertex_id(&self, face: usize, k: usize) -> usize {
        self.faces[face].vid[k]
    }

    /// Chart coordinates of corner `k` of `face`.
    pub fn corner(&self, face: usize, k: usize) -> Vec2 {
        self.faces[face].verts[k]
    }

    /// Some chart containing vertex `v` with its local coordinates.
    pub fn vertex_point(&self, v: usize) -> Point {
        let (f, k) = self.star[v][0];
        Point::new(f, self.faces[f].verts[k].to_vec())
    }

    /// Sum of chart angles at vertex `v`.
    pub fn angle_sum(&self, v: usize) -> f64 {
        self.star[v].iter().map(|&(f, k)| self.corner_angle(f, k)).sum()
    }

    fn corner_angle(&self, f: usize, k: usize) -> f64 {
        let verts = &self.faces[f].verts;
        let n = verts.len();
        let p = verts[k];
        geom::angle_between(geom::sub(verts[(k + n - 1) % n], p), geom::sub(verts[(k + 1) % n], p))
    }

    /// Total chart area.
    pub fn face_area(&self, f: usize) -> f64 {
        let v = &self.faces[f].verts;
        let mut a = 0.0;
        for i in 1..v.len() - 1 {
            a += 0.5 * geom::orient(v[0], v[i], v[i + 1]);
        }
        a
    }

    pub fn validate(&self, p: &Point) -> Result<()> {
        if p.chart >= self.faces.len() {
            return Err(Error::InvalidChart { chart: p.chart });
        }
        if p.coords.len() != 2 || p.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("chart point needs finite [x, y], got {:?}", p.coords)));
        }
        if !self.contains(p.chart, [p.coords[0], p.coords[1]], 1e-9 * self.diameter.max(1.0)) {
            return Err(Error::InvalidPoint(format!("point {:?} lies outside chart {}", p.coords, p.chart)));
        }
        Ok(())
    }

    fn contains(&self, f: usize, y: Vec2, tol: f64) -> bool {
        let v = &self.faces[f].verts;
        let n = v.len();
        (0..n).all(|e| {
            let a = v[e];
            let b = v[(e + 1) % n];
            geom::orient(a, b, y) / geom::dist(a, b) >= -tol
        })
    }

    /// Global vertex at `p`, if `p` coincides with a chart corner.
    pub fn vertex_at(&self, p: &Point) -> Option<usize> {
        let f = &self.faces[p.chart];
        let y = [p.coords[0], p.coords[1]];
        let tol = 1e-12 * self.diameter.max(1.0);
        f.verts.iter().position(|&c| geom::dist(c, y) <= tol).map(|k| f.vid[k])
    }

    pub fn endpoint(&self, p: &Point) -> Endpoint {
        match self.vertex_at(p) {
            Some(v) => Endpoint::Vertex(v),
            None => Endpoint::Interior { face: p.chart, pos: [p.coords[0], p.coords[1]] },
        }
    }

    /// Dijkstra from `source`; stops early once `stop_at` is settled.
    pub fn distance_field(&self, source: Endpoint) -> DistanceField {
        self.run_dijkstra(source, None)
    }

    fn run_dijkstra(&self, source: Endpoint, stop_at: Option<Endpoint>) -> DistanceField {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![SOURCE; n];
        let mut parent_face = vec![u32::MAX; n];
        let mut heap = BinaryHeap::new();
        match source {
            Endpoint::Vertex(v) => {
                dist[v] = 0.0;
                heap.push(HeapItem(0.0, v as u32));
            }
            Endpoint::Interior { face, pos } => {
                for &(node, y) in &self.face_nodes[face] {
                    let d = geom::dist(pos, y);
                    if d < dist[node as usize] {
                        dist[node as usize] = d;
                        parent_face[node as usize] = face as u32;
                        heap.push(HeapItem(d, node));
                    }
                }
            }
        }
        let mut best_target = f64::INFINITY;
        if let (Some(Endpoint::Interior { face: tf, pos: tp }), Endpoint::Interior { face: sf, pos: sp }) = (stop_at, source) {
            if tf == sf {
                best_target = geom::dist(sp, tp);
            }
        }
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > dist[u as usize] {
                continue;
            }
            if let Some(target) = stop_at {
                if d >= best_target {
                    break;
                }
                match target {
                    Endpoint::Vertex(v) if v as u32 == u => break,
                    Endpoint::Interior { face, pos } => {
                        if let Some(&(_, y)) = self.face_nodes[face].iter().find(|(m, _)| *m == u) {
                            best_target = best_target.min(d + geom::dist(y, pos));
                        }
                    }
                    _ => {}
                }
            }
            for arc in &self.adjacency[u as usize] {
                let nd = d + arc.w;
                let t = arc.to as usize;
                if nd < dist[t] {
                    dist[t] = nd;
                    parent[t] = u;
                    parent_face[t] = arc.face;
                    heap.push(HeapItem(nd, arc.to));
                }
            }
        }
        DistanceField { source, dist, parent, parent_face }
    }

    /// Approximate (graph) distance from the field's source to `target`.
    pub fn graph_distance(&self, field: &DistanceField, target: Endpoint) -> f64 {
        self.best_entry(field, target).map(|(_, d)| d).unwrap_or(f64::INFINITY)
    }

    /// The node through which the graph path reaches `target` (or `None` for a
    /// direct hop inside the source chart), with the graph distance.
    fn best_entry(&self, field: &DistanceField, target: Endpoint) -> Option<(Option<u32>, f64)> {
        match target {
            Endpoint::Vertex(v) => {
                if field.source == target {
                    return Some((None, 0.0));
                }
                let d = field.dist[v];
                d.is_finite().then_some((Some(v as u32), d))
            }
            Endpoint::Interior { face, pos } => {
                let mut best: Option<(Option<u32>, f64)> = None;
                if let Endpoint::Interior { face: sf, pos: sp } = field.source {
                    if sf == face {
                        best = Some((None, geom::dist(sp, pos)));
                    }
                }
                for &(node, y) in &self.face_nodes[face] {
                    let d = field.dist[node as usize] + geom::dist(y, pos);
                    if best.map_or(true, |(_, b)| d < b) {
                        best = Some((Some(node), d));
                    }
                }
                best.filter(|(_, d)| d.is_finite())
            }
        }
    }

    /// Taut shortest path from the field's source to `target`.
    pub fn path_to(&self, field: &DistanceField, target: Endpoint) -> Result<ComplexPath> {
        let (entry, _) = self
            .best_entry(field, target)
            .ok_or_else(|| Error::GeodesicNotResolved("target unreachable from source".into()))?;
        // hops: (node, face used to reach it), from source towards target
        let mut hops: Vec<(u32, u32)> = Vec::new();
        if let Some(mut u) = entry {
            loop {
                let pf = field.parent_face[u as usize];
                let p = field.parent[u as usize];
                if p == SOURCE && pf == u32::MAX {
                    // u is the source vertex itself
                    hops.push((u, u32::MAX));
                    break;
                }
                hops.push((u, pf));
                if p == SOURCE {
                    break;
                }
                u = p;
            }
            hops.reverse();
        }
        let target_face = match target {
            Endpoint::Interior { face, .. } => Some(face),
            Endpoint::Vertex(_) => None,
        };
        self.corridor_path(field.source, &hops, target, target_face)
    }

    /// Taut distance from the field's source to every graph node (chart
    /// corners and edge subdivision points).
    pub fn node_distances(&self, field: &DistanceField) -> Vec<f64> {
        use rayon::prelude::*;
        let mut slot: Vec<Option<Endpoint>> = vec![None; self.nodes.len()];
        for (fi, fnodes) in self.face_nodes.iter().enumerate() {
            for &(node, y) in fnodes {
                let n = node as usize;
                if slot[n].is_none() {
                    slot[n] = Some(match self.nodes[n] {
                        NodeKind::Vertex(v) => Endpoint::Vertex(v),
                        NodeKind::Edge { .. } => Endpoint::Interior { face: fi, pos: y },
                    });
                }
            }
        }
        slot.par_iter()
            .enumerate()
            .map(|(n, target)| match target {
                _ if field.dist[n] == 0.0 => 0.0,
                Some(t) => self.path_to(field, *t).map(|p| p.length.min(field.dist[n])).unwrap_or(field.dist[n]),
                None => field.dist[n],
            })
            .collect()
    }

    /// Distance to a point of `face` extended from per-node distances:
    /// the best entry through one of the face's nodes.
    pub fn extend_from_nodes(&self, field: &DistanceField, node_dist: &[f64], face: usize, pos: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        if let Endpoint::Interior { face: sf, pos: sp } = field.source {
            if sf == face {
                best = geom::dist(sp, pos);
            }
        }
        for &(node, y) in &self.face_nodes[face] {
            best = best.min(node_dist[node as usize] + geom::dist(y, pos));
        }
        best
    }

    pub fn shortest_path(&self, from: Endpoint, to: Endpoint) -> Result<ComplexPath> {
        let field = self.run_dijkstra(from, Some(to));
        self.path_to(&field, to)
    }

    fn corridor_path(
        &self,
        source: Endpoint,
        hops: &[(u32, u32)],
        target: Endpoint,
        target_face: Option<usize>,
    ) -> Result<ComplexPath> {
        // chart sequence with the edge crossed out of each chart
        let mut seq: Vec<usize> = Vec::new();
        let mut crossings: Vec<usize> = Vec::new();
        let start_face = match source {
            Endpoint::Interior { face, .. } => face,
            Endpoint::Vertex(v) => {
                let f = hops.iter().map(|h| h.1).find(|&f| f != u32::MAX).map(|f| f as usize).or(target_face);
                f.unwrap_or(self.star[v][0].0)
            }
        };
        seq.push(start_face);
        let mut at_node: Option<u32> = match source {
            Endpoint::Vertex(v) => Some(v as u32),
            _ => None,
        };
        let step_to = |seq: &mut Vec<usize>,
                       crossings: &mut Vec<usize>,
                       via: Option<u32>,
                       next: usize,
                       around: (Option<Vec2>, Option<Vec2>)|
         -> Result<()> {
            let cur = *seq.last().unwrap();
            if cur == next {
                return Ok(());
            }
            match via.map(|n| self.nodes[n as usize]) {
                Some(NodeKind::Edge { face, edge }) => {
                    let e = if face == cur {
                        edge
                    } else {
                        let (g, eg) = self.faces[face].across[edge].expect("edge node on glued edge");
                        debug_assert_eq!(g, cur);
                        eg
                    };
                    crossings.push(e);
                    seq.push(next);
                    Ok(())
                }
                Some(NodeKind::Vertex(v)) => self.fan(v, cur, next, around, seq, crossings),
                None => Err(Error::GeodesicNotResolved("corridor jumps between charts".into())),
            }
        };
        let source_pos = match source {
            Endpoint::Interior { pos, .. } => Some(pos),
            Endpoint::Vertex(_) => None,
        };
        let target_pos = match target {
            Endpoint::Interior { pos, .. } => Some(pos),
            Endpoint::Vertex(_) => None,
        };
        for (i, &(node, face)) in hops.iter().enumerate() {
            if face != u32::MAX {
                // neighbors of the transition point, for choosing a side at vertices
                let prev = if i >= 2 {
                    self.node_pos(seq[seq.len() - 1], hops[i - 2].0)
                } else {
                    source_pos
                };
                let next = self.node_pos(face as usize, node);
                step_to(&mut seq, &mut crossings, at_node, face as usize, (prev, next))?;
            }
            at_node = Some(node);
        }
        if let Some(tf) = target_face {
            let prev = match hops.len() {
                0 => None,
                1 => source_pos,
                n => self.node_pos(*seq.last().unwrap(), hops[n - 2].0),
            };
            step_to(&mut seq, &mut crossings, at_node, tf, (prev, target_pos))?;
        }
        // the corridor from graph hops can miss the straight path; swing it
        // around bend vertices while that shortens the path
        self.drop_backtracks(&mut seq, &mut crossings);
        let mut best = self.pull(source, target, &seq, &crossings);
        let slack = 1e-14 * self.diameter.max(1.0);
        for _ in 0..4 * seq.len() + 16 {
            let better = self
                .swings(&best.1, &seq, &crossings)
                .into_iter()
                .map(|(s2, c2)| {
                    let cand = self.pull(source, target, &s2, &c2);
                    (s2, c2, cand)
                })
                .find(|c| c.2 .0.length < best.0.length - slack);
            let Some((s2, c2, cand)) = better else { break };
            seq = s2;
            crossings = c2;
            best = cand;
        }
        Ok(best.0)
    }

    /// Removes steps that cross an edge and immediately cross it back.
    fn drop_backtracks(&self, seq: &mut Vec<usize>, crossings: &mut Vec<usize>) {
        let mut i = 0;
        while i + 1 < crossings.len() {
            if self.faces[seq[i]].across[crossings[i]] == Some((seq[i + 1], crossings[i + 1])) {
                seq.drain(i + 1..i + 3);
                crossings.drain(i..i + 2);
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
    }

    /// Unfolds the corridor and pulls the string through it; also returns the
    /// portal index and vertex id of each bend.
    fn pull(&self, source: Endpoint, target: Endpoint, seq: &[usize], crossings: &[usize]) -> (ComplexPath, Vec<Option<(usize, usize)>>) {
        let mut transforms = vec![Rigid::IDENTITY];
        let mut portals: Vec<(Vec2, Vec2)> = Vec::with_capacity(crossings.len() + 2);
        let mut ids: Vec<(usize, usize)> = Vec::with_capacity(crossings.len());
        for (i, &e) in crossings.iter().enumerate() {
            let f = &self.faces[seq[i]];
            let n = f.verts.len();
            let t = transforms[i];
            let (lid, rid) = (f.vid[(e + 1) % n], f.vid[e]);
            // reuse the unfolded position of a vertex shared with the previous
            // portal; rounding offsets would skew the funnel at its apex
            let mut portal = (t.apply(f.verts[(e + 1) % n]), t.apply(f.verts[e]));
            if let (Some(&(pl, pr)), Some(&(a, b))) = (ids.last(), portals.last()) {
                if pl == lid {
                    portal.0 = a;
                }
                if pr == rid {
                    portal.1 = b;
                }
            }
            portals.push(portal);
            ids.push((lid, rid));
            let g = f.from_neighbor[e].expect("crossing a glued edge");
            transforms.push(t.compose(&g));
        }
        let start = match source {
            Endpoint::Interior { pos, .. } => pos,
            Endpoint::Vertex(v) => self.local_vertex(seq[0], v),
        };
        let last = seq.len() - 1;
        let end_local = match target {
            Endpoint::Interior { pos, .. } => pos,
            Endpoint::Vertex(v) => self.local_vertex(seq[last], v),
        };
        let mut end = transforms[last].apply(end_local);
        if let (Endpoint::Vertex(v), Some(&(l, r)), Some(&(pl, pr))) = (target, portals.last(), ids.last()) {
            if pl == v {
                end = l;
            } else if pr == v {
                end = r;
            }
        }
        let (polyline, apexes) = string_pull(start, end, &portals);
        let bends = apexes
            .iter()
            .map(|&(i, left)| (1..=ids.len()).contains(&i).then(|| (i - 1, if left { ids[i - 1].0 } else { ids[i - 1].1 })))
            .collect();
        let length = polyline.windows(2).map(|w| geom::dist(w[0], w[1])).sum();
        let exits = crossing_parameters(&polyline, &portals);
        (ComplexPath { faces: seq.to_vec(), transforms, exits, polyline, length }, bends)
    }

    /// Corridors rerouted around each bend vertex the other way.
    fn swings(&self, bends: &[Option<(usize, usize)>], seq: &[usize], crossings: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut out = Vec::new();
        for &(k, v) in bends.iter().flatten() {
            if !self.interior[v] {
                continue;
            }
            let touches = |p: usize| {
                let f = &self.faces[seq[p]];
                let n = f.verts.len();
                let e = crossings[p];
                f.vid[e] == v || f.vid[(e + 1) % n] == v
            };
            let mut a = k;
            while a > 0 && touches(a - 1) {
                a -= 1;
            }
            let mut b = k;
            while b + 1 < crossings.len() && touches(b + 1) {
                b += 1;
            }
            let (fa, fb) = (seq[a], seq[b + 1]);
            let Some(ka) = self.faces[fa].vid.iter().position(|&x| x == v) else { continue };
            let forward = crossings[a] == ka;
            let mut f = fa;
            let mut steps: Vec<(usize, usize)> = Vec::new();
            let mut reached = false;
            for _ in 0..=self.star[v].len() {
                let face = &self.faces[f];
                let n = face.verts.len();
                let kk = face.vid.iter().position(|&x| x == v).unwrap();
                let e = if forward { (kk + n - 1) % n } else { kk };
                let Some((g, _)) = face.across[e] else { break };
                steps.push((f, e));
                f = g;
                if f == fb {
                    reached = true;
                    break;
                }
            }
            if !reached {
                continue;
            }
            let mut s2: Vec<usize> = seq[..=a].to_vec();
            let mut c2: Vec<usize> = crossings[..a].to_vec();
            for (f, e) in steps {
                c2.push(e);
                s2.push(self.faces[f].across[e].unwrap().0);
            }
            s2.extend_from_slice(&seq[b + 2..]);
            c2.extend_from_slice(&crossings[b + 1..]);
            self.drop_backtracks(&mut s2, &mut c2);
            out.push((s2, c2));
        }
        out
    }

    fn local_vertex(&self, f: usize, v: usize) -> Vec2 {
        let face = &self.faces[f];
        let k = face.vid.iter().position(|&x| x == v).expect("vertex in chart");
        face.verts[k]
    }

    fn node_pos(&self, f: usize, node: u32) -> Option<Vec2> {
        self.face_nodes[f].iter().find(|(m, _)| *m == node).map(|&(_, y)| y)
    }

    /// Walks around vertex `v` from chart `from` to chart `to` on the side with
    /// the smaller total angle between the neighboring path points `around`
    /// (given in the coordinates of `from` and `to`).
    fn fan(
        &self,
        v: usize,
        from: usize,
        to: usize,
        around: (Option<Vec2>, Option<Vec2>),
        seq: &mut Vec<usize>,
        crossings: &mut Vec<usize>,
    ) -> Result<()> {
        let partial = |f: usize, toward: Option<Vec2>, forward_edge_start: bool| -> f64 {
            let face = &self.faces[f];
            let n = face.verts.len();
            let k = face.vid.iter().position(|&x| x == v).unwrap();
            let Some(y) = toward else { return 0.0 };
            let a = geom::sub(y, face.verts[k]);
            if geom::norm(a) == 0.0 {
                return 0.0;
            }
            let e = if forward_edge_start {
                geom::sub(face.verts[(k + 1) % n], face.verts[k])
            } else {
                geom::sub(face.verts[(k + n - 1) % n], face.verts[k])
            };
            geom::angle_between(a, e)
        };
        let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
        for forward in [true, false] {
            let mut f = from;
            let mut steps: Vec<(usize, usize)> = Vec::new();
            let mut angle = partial(from, around.0, forward);
            let mut ok = false;
            for _ in 0..=self.star[v].len() {
                let face = &self.faces[f];
                let n = face.verts.len();
                let k = face.vid.iter().position(|&x| x == v).expect("vertex in chart");
                let e = if forward { k } else { (k + n - 1) % n };
                let Some((g, _)) = face.across[e] else { break };
                steps.push((f, e));
                f = g;
                if f == to {
                    ok = true;
                    angle += partial(to, around.1, !forward);
                    break;
                }
                let kk = self.faces[f].vid.iter().position(|&x| x == v).unwrap();
                angle += self.corner_angle(f, kk);
            }
            if ok && best.as_ref().map_or(true, |(a, _)| angle < *a) {
                best = Some((angle, steps));
            }
        }
        let (_, steps) = best.ok_or_else(|| Error::GeodesicNotResolved(format!("cannot walk around vertex {v}")))?;
        for (f, e) in steps {
            debug_assert_eq!(*seq.last().unwrap(), f);
            crossings.push(e);
            seq.push(self.faces[f].across[e].unwrap().0);
        }
        Ok(())
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        if p.chart == q.chart && p.coords == q.coords {
            return Ok(0.0);
        }
        let key = |x: &Point| (x.chart, x.coords[0], x.coords[1]);
        let (p, q) = if key(p) <= key(q) { (p, q) } else { (q, p) };
        Ok(self.shortest_path(self.endpoint(p), self.endpoint(q))?.length)
    }

    pub fn geodesic_point(&self, p: &Point, q: &Point, t: f64) -> Result<Point> {
        if t <= 0.0 {
            return Ok(p.clone());
        }
        if t >= 1.0 {
            return Ok(q.clone());
        }
        let path = self.shortest_path(self.endpoint(p), self.endpoint(q))?;
        let (f, y) = path.point_at(t);
        Ok(Point::new(f, y.to_vec()))
    }

    /// Log vector at `x` (in the coordinates of `x`'s chart).
    pub fn log(&self, x: &Point, p: &Point) -> Result<Vec2> {
        let path = self.shortest_path(Endpoint::Interior { face: x.chart, pos: [x.coords[0], x.coords[1]] }, self.endpoint(p))?;
        Ok(path.initial_vector())
    }

    /// Follows the straight ray from `x` along `v` across charts. Stops early at
    /// the complex boundary or when the ray runs into a vertex.
    pub fn exp(&self, x: &Point, v: Vec2) -> Point {
        let mut f = x.chart;
        let mut y = [x.coords[0], x.coords[1]];
        let mut remaining = geom::norm(v);
        if remaining == 0.0 {
            return x.clone();
        }
        let mut d = geom::scale(v, 1.0 / remaining);
        let eps = 1e-14 * self.diameter.max(1.0);
        for _ in 0..100_000 {
            let face = &self.faces[f];
            let n = face.verts.len();
            let mut exit: Option<(f64, usize)> = None;
            for e in 0..n {
                let a = face.verts[e];
                let b = face.verts[(e + 1) % n];
                let ab = geom::sub(b, a);
                let denom = geom::cross(d, ab);
                if denom <= 0.0 {
                    // ray not heading out through this edge
                    continue;
                }
                let lam = geom::cross(geom::sub(a, y), ab) / denom;
                if lam > -eps && exit.map_or(true, |(l, _)| lam < l) {
                    exit = Some((lam.max(0.0), e));
                }
            }
            let Some((lam, e)) = exit else { break };
            if lam >= remaining {
                y = geom::add(y, geom::scale(d, remaining));
                return Point::new(f, y.to_vec());
            }
            y = geom::add(y, geom::scale(d, lam));
            remaining -= lam;
            let a = face.verts[e];
            let b = face.verts[(e + 1) % n];
            if geom::dist(y, a) < eps || geom::dist(y, b) < eps {
                return Point::new(f, y.to_vec());
            }
            match (face.across[e], face.from_neighbor[e]) {
                (Some((g, _)), Some(m)) => {
                    let inv = m.inverse();
                    y = inv.apply(y);
                    d = inv.apply_linear(d);
                    f = g;
                }
                _ => return Point::new(f, y.to_vec()),
            }
        }
        Point::new(f, y.to_vec())
    }

    pub fn link_length(&self, p: &Point) -> f64 {
        match self.vertex_at(p) {
            Some(v) => self.angle_sum(v),
            None => {
                // on an edge of the boundary, the link is a half circle
                let f = &self.faces[p.chart];
                let n = f.verts.len();
                let y = [p.coords[0], p.coords[1]];
                let tol = 1e-12 * self.diameter.max(1.0);
                for e in 0..n {
                    let (a, b) = (f.verts[e], f.verts[(e + 1) % n]);
                    if f.across[e].is_none() && (geom::orient(a, b, y) / geom::dist(a, b)).abs() <= tol {
                        return PI;
                    }
                }
                2.0 * PI
            }
        }
    }
}

/// Lays out a triangle with side lengths `ab`, `bc`, `ca` counter-clockwise
/// with `a` at the origin and `b` on the positive x-axis. Length triples that
/// violate the triangle inequality are flattened.
pub fn lay_out_triangle(ab: f64, bc: f64, ca: f64) -> [Vec2; 3] {
    let x = if ab > 0.0 { (ab * ab + ca * ca - bc * bc) / (2.0 * ab) } else { 0.0 };
    let h2 = ca * ca - x * x;
    let h = if h2 > 0.0 { h2.sqrt() } else { 0.0 };
    // keep a sliver of area so the chart stays a valid convex polygon
    let h = h.max(1e-12 * ab.max(ca).max(bc).max(1e-300));
    [[0.0, 0.0], [ab, 0.0], [x, h]]
}

#[inline]
fn triarea2(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    -geom::orient(a, b, c)
}

/// Funnel algorithm over portals `(left, right)`.
pub(crate) fn string_pull(start: Vec2, end: Vec2, portals: &[(Vec2, Vec2)]) -> (Vec<Vec2>, Vec<(usize, bool)>) {
    let mut all: Vec<(Vec2, Vec2)> = Vec::with_capacity(portals.len() + 2);
    all.push((start, start));
    all.extend_from_slice(portals);
    all.push((end, end));
    let mut path = vec![start];
    let mut apexes = Vec::new();
    let mut apex = start;
    let (mut left, mut right) = (start, start);
    let (mut left_i, mut right_i) = (0usize, 0usize);
    let mut i = 1;
    while i < all.len() {
        let (l, r) = all[i];
        if triarea2(apex, right, r) <= 0.0 {
            if apex == right || triarea2(apex, left, r) > 0.0 {
                right = r;
                right_i = i;
            } else {
                path.push(left);
                apexes.push((left_i, true));
                apex = left;
                let apex_i = left_i;
                left = apex;
                right = apex;
                left_i = apex_i;
                right_i = apex_i;
                i = apex_i + 1;
                continue;
            }
        }
        if triarea2(apex, left, l) >= 0.0 {
            if apex == left || triarea2(apex, right, l) < 0.0 {
                left = l;
                left_i = i;
            } else {
                path.push(right);
                apexes.push((right_i, false));
                apex = right;
                let apex_i = right_i;
                left = apex;
                right = apex;
                left_i = apex_i;
                right_i = apex_i;
                i = apex_i + 1;
                continue;
            }
        }
        i += 1;
    }
    if *path.last().unwrap() != end || path.len() == 1 {
        path.push(end);
    }
    (path, apexes)
}

/// Arc-length parameter at which the polyline crosses each portal.
fn crossing_parameters(polyline: &[Vec2], portals: &[(Vec2, Vec2)]) -> Vec<f64> {
    let mut out = Vec::with_capacity(portals.len());
    let lens: Vec<f64> = polyline.windows(2).map(|w| geom::dist(w[0], w[1])).collect();
    let mut seg = 0usize;
    let mut acc = 0.0;
    let mut bent = false;
    for &(l, r) in portals {
        // the polyline may bend at portal vertices, so only accept crossings
        // inside the portal segment
        let (mut k, mut at) = (seg, acc);
        // past a bend vertex the unfolded corridor may overlap earlier segments
        if k < lens.len() && bent && polyline[k + 1] != l && polyline[k + 1] != r {
            at += lens[k];
            k += 1;
        }
        let mut found = None;
        while k < lens.len() {
            let (p0, p1) = (polyline[k], polyline[k + 1]);
            if p1 == l || p1 == r {
                found = Some((k, at, at + lens[k]));
                break;
            }
            let s0 = geom::orient(l, r, p0);
            let s1 = geom::orient(l, r, p1);
            if s0 == 0.0 || (s0 > 0.0) != (s1 > 0.0) || s1 == 0.0 {
                let u = if s0 == 0.0 { 0.0 } else { (s0 / (s0 - s1)).clamp(0.0, 1.0) };
                let x = geom::lerp(p0, p1, u);
                let d = geom::sub(r, l);
                let w = geom::dot(geom::sub(x, l), d) / geom::dot(d, d).max(f64::MIN_POSITIVE);
                if (-1e-9..=1.0 + 1e-9).contains(&w) {
                    found = Some((k, at, at + u * lens[k]));
                    break;
                }
            }
            at += lens[k];
            k += 1;
        }
        match found {
            Some((k, at, s)) => {
                bent = k + 1 < polyline.len() && (polyline[k + 1] == l || polyline[k + 1] == r) && s == at + lens[k];
                seg = k;
                acc = at;
                out.push(s);
            }
            None => out.push(acc),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64) -> ChartPolygon {
        ChartPolygon { vertices: vec![[x0, y0], [x0 + 1.0, y0], [x0 + 1.0, y0 + 1.0], [x0, y0 + 1.0]] }
    }

    /// Flat L: three unit squares, (0,0), (1,0), (0,1).
    pub(crate) fn l_shape() -> PolyhedralComplex {
        PolyhedralComplex::new(
            vec![square(0.0, 0.0), square(1.0, 0.0), square(0.0, 1.0)],
            vec![Gluing { a: (0, 1), b: (1, 3) }, Gluing { a: (0, 2), b: (2, 0) }],
            4,
        )
        .unwrap()
    }

    #[test]
    fn straight_across_a_glued_edge() {
        let c = l_shape();
        let p = Point::new(0, vec![0.2, 0.3]);
        let q = Point::new(1, vec![1.7, 0.6]);
        let d = c.distance(&p, &q).unwrap();
        assert!((d - (1.5f64.powi(2) + 0.3f64.powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bends_around_the_reflex_corner() {
        let c = l_shape();
        let p = Point::new(1, vec![1.9, 0.9]);
        let q = Point::new(2, vec![0.9, 1.9]);
        let d = c.distance(&p, &q).unwrap();
        let corner = [1.0, 1.0];
        let expect = geom::dist([1.9, 0.9], corner) + geom::dist(corner, [0.9, 1.9]);
        assert!((d - expect).abs() < 1e-12, "{d} vs {expect}");
    }

    #[test]
    fn midpoint_matches_planar_unfolding() {
        let c = l_shape();
        let p = Point::new(0, vec![0.5, 0.5]);
        let q = Point::new(1, vec![1.7, 0.25]);
        let m = c.geodesic_point(&p, &q, 0.5).unwrap();
        assert_eq!(m.chart, 1);
        assert!((m.coords[0] - 1.1).abs() < 1e-12 && (m.coords[1] - 0.375).abs() < 1e-12);
    }

    #[test]
    fn interior_vertex_link() {
        // four unit squares around the origin
        let c = PolyhedralComplex::new(
            vec![square(0.0, 0.0), square(-1.0, 0.0), square(-1.0, -1.0), square(0.0, -1.0)],
            vec![
                Gluing { a: (0, 3), b: (1, 1) },
                Gluing { a: (1, 0), b: (2, 2) },
                Gluing { a: (2, 1), b: (3, 3) },
                Gluing { a: (3, 2), b: (0, 0) },
            ],
            3,
        )
        .unwrap();
        let v = c.vertex_at(&Point::new(0, vec![0.0, 0.0])).unwrap();
        assert!(c.is_interior_vertex(v));
        assert!((c.angle_sum(v) - 2.0 * PI).abs() < 1e-12);
        // straight through the vertex's neighborhood
        let p = Point::new(0, vec![0.5, 0.1]);
        let q = Point::new(2, vec![-0.5, -0.1]);
        assert!((c.distance(&p, &q).unwrap() - (1.0f64 + 0.04).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exp_crosses_charts() {
        let c = l_shape();
        let x = Point::new(0, vec![0.5, 0.5]);
        let y = c.exp(&x, [1.0, 0.0]);
        assert_eq!(y.chart, 1);
        assert!((y.coords[0] - 1.5).abs() < 1e-12);
    }
}
