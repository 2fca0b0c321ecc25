use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::mesh::DiscMesh;
use crate::space::desc::SpaceDesc;
use crate::space::{Point, TargetSpace};

/// Piecewise-linear map from a disc mesh into a target space, given by the
/// image of every vertex.
#[derive(Clone, Debug)]
pub struct MeshMap {
    pub mesh: DiscMesh,
    pub images: Vec<Point>,
    pub space: Arc<TargetSpace>,
}

/// Symmetric form `[[a, b], [b, c]]` reproducing the squared image lengths of a
/// triangle's edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PullbackForm {
    pub q: [f64; 3],
    pub psd: bool,
}

impl PullbackForm {
    /// Solves `Q(e_i, e_i) = len_i^2` for the three domain edge vectors.
    pub fn from_edges(edges: [Vec2; 3], sq_lengths: [f64; 3]) -> Option<Self> {
        let rows: Vec<[f64; 3]> = edges.iter().map(|e| [e[0] * e[0], 2.0 * e[0] * e[1], e[1] * e[1]]).collect();
        let det3 = |m: [[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let m = [rows[0], rows[1], rows[2]];
        let d = det3(m);
        let scale = edges.iter().map(|e| geom::dot(*e, *e)).fold(0.0, f64::max);
        if d.abs() <= 1e-14 * scale.powi(3) {
            return None;
        }
        let mut q = [0.0; 3];
        for (j, qj) in q.iter_mut().enumerate() {
            let mut mj = m;
            for i in 0..3 {
                mj[i][j] = sq_lengths[i];
            }
            *qj = det3(mj) / d;
        }
        let mut form = Self { q, psd: true };
        let [lo, hi] = form.eigenvalues();
        form.psd = lo >= -1e-10 * hi.abs().max(f64::MIN_POSITIVE);
        Some(form)
    }

    pub fn trace(&self) -> f64 {
        self.q[0] + self.q[2]
    }

    pub fn det(&self) -> f64 {
        self.q[0] * self.q[2] - self.q[1] * self.q[1]
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = 0.5 * (self.q[0] + self.q[2]);
        let r = (0.5 * (self.q[0] - self.q[2])).hypot(self.q[1]);
        [m - r, m + r]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues()[1]
    }

    /// Jacobian of the seminorm, eigenvalues clamped at zero.
    pub fn jacobian(&self) -> f64 {
        let [lo, hi] = self.eigenvalues();
        (lo.max(0.0) * hi.max(0.0)).sqrt()
    }

    pub fn eval(&self, v: Vec2) -> f64 {
        self.q[0] * v[0] * v[0] + 2.0 * self.q[1] * v[0] * v[1] + self.q[2] * v[1] * v[1]
    }
}

/// Per-triangle summary for CSV export.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleStats {
    pub area: f64,
    pub trace: f64,
    pub lambda_max: f64,
    pub det: f64,
}

/// JSON interchange for a mesh map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshMapFile {
    pub space: SpaceDesc,
    pub mesh: DiscMesh,
    pub images: Vec<Point>,
}

impl MeshMap {
    pub fn new(mesh: DiscMesh, images: Vec<Point>, space: Arc<TargetSpace>) -> Result<Self> {
        if images.len() != mesh.vertex_count() {
            return Err(Error::InvalidMesh(format!(
                "{} images for {} vertices",
                images.len(),
                mesh.vertex_count()
            )));
        }
        for p in &images {
            space.validate(p)?;
        }
        Ok(Self { mesh, images, space })
    }

    /// The map `z -> f(z)` evaluated at every domain vertex.
    pub fn from_fn<F: FnMut(Vec2) -> Point>(mesh: DiscMesh, space: Arc<TargetSpace>, mut f: F) -> Result<Self> {
        let images = mesh.vertices().iter().map(|&z| f(z)).collect();
        Self::new(mesh, images, space)
    }

    /// Inclusion of the disc into the plane.
    pub fn identity(mesh: DiscMesh) -> Self {
        let space = Arc::new(TargetSpace::Euclidean { dim: 2 });
        Self::from_fn(mesh, space, |z| Point::euclidean(&z)).expect("planar images are valid")
    }

    /// Image length of every mesh edge.
    pub fn edge_lengths(&self) -> Result<Vec<f64>> {
        self.mesh
            .edges()
            .par_iter()
            .map(|e| self.space.distance(&self.images[e[0]], &self.images[e[1]]))
            .collect()
    }

    /// `lengths[t][k]`: image length of the side from corner `k` to `k + 1`.
    pub fn triangle_lengths(&self) -> Result<Vec<[f64; 3]>> {
        let edge_len = self.edge_lengths()?;
        Ok(self.lengths_from_edges(&edge_len))
    }

    pub(crate) fn lengths_from_edges(&self, edge_len: &[f64]) -> Vec<[f64; 3]> {
        let mesh = &self.mesh;
        mesh.triangles()
            .iter()
            .map(|t| {
                let mut l = [0.0; 3];
                for k in 0..3 {
                    l[k] = edge_len[edge_id(mesh, t[k], t[(k + 1) % 3])];
                }
                l
            })
            .collect()
    }

    pub fn pullback_form(&self, t: usize) -> Result<PullbackForm> {
        let tri = self.mesh.triangles()[t];
        let mut l = [0.0; 3];
        for k in 0..3 {
            l[k] = self.space.distance(&self.images[tri[k]], &self.images[tri[(k + 1) % 3]])?;
        }
        form_for(&self.mesh, t, l)
    }

    pub fn pullback_forms(&self) -> Result<Vec<PullbackForm>> {
        let lengths = self.triangle_lengths()?;
        forms_from_lengths(&self.mesh, &lengths)
    }

    /// `Σ |T| trace(Q_T)`.
    pub fn ks_energy(&self) -> Result<f64> {
        Ok(self.triangle_stats()?.iter().map(|s| s.trace).sum())
    }

    /// `Σ |T| λ_max(Q_T)`.
    pub fn reshetnyak_energy(&self) -> Result<f64> {
        Ok(self.triangle_stats()?.iter().map(|s| s.lambda_max).sum())
    }

    /// `Σ |T| sqrt(det Q_T)` with negative eigenvalues clamped.
    pub fn area(&self) -> Result<f64> {
        Ok(self.triangle_stats()?.iter().map(|s| s.area).sum())
    }

    /// Area-weighted quantities per triangle (`trace`, `lambda_max` and `area`
    /// already multiplied by the domain area; `det` is the raw determinant).
    pub fn triangle_stats(&self) -> Result<Vec<TriangleStats>> {
        let forms = self.pullback_forms()?;
        Ok(stats_from_forms(&self.mesh, &forms))
    }

    /// `ks / (2 area)`: 1 exactly for conformal maps.
    pub fn conformality_ratio(&self) -> Result<f64> {
        let s = self.triangle_stats()?;
        let ks: f64 = s.iter().map(|s| s.trace).sum();
        let area: f64 = s.iter().map(|s| s.area).sum();
        Ok(if area > 0.0 { ks / (2.0 * area) } else { f64::INFINITY })
    }

    /// Writes `triangle,area,trace,lambda_max,det`.
    pub fn write_triangle_csv(&self, path: &Path) -> Result<()> {
        let stats = self.triangle_stats()?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "triangle,domain_area,trace,lambda_max,det")?;
        for (t, s) in stats.iter().enumerate() {
            let a = self.mesh.triangle_area(t);
            writeln!(f, "{t},{:.17e},{:.17e},{:.17e},{:.17e}", a, s.trace / a, s.lambda_max / a, s.det)?;
        }
        Ok(())
    }

    pub fn to_file(&self) -> MeshMapFile {
        MeshMapFile { space: self.space.describe(), mesh: self.mesh.clone(), images: self.images.clone() }
    }

    pub fn from_file(file: MeshMapFile) -> Result<Self> {
        let space = Arc::new(file.space.build()?);
        Self::new(file.mesh, file.images, space)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_file())?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Image of the domain point `bary` in triangle `t`: the geodesic
    /// interpolation `geod(geod(A, B, λb/(λa+λb)), C, λc)`.
    pub fn eval(&self, t: usize, bary: [f64; 3]) -> Result<Point> {
        let [a, b, c] = self.mesh.triangles()[t].map(|i| &self.images[i]);
        barycentric_geodesic(&*self.space, a, b, c, bary)
    }
}

/// Geodesic barycentric interpolation inside a triangle with vertices `a, b, c`.
pub fn barycentric_geodesic<S: crate::space::MetricSpace + ?Sized>(
    space: &S,
    a: &Point,
    b: &Point,
    c: &Point,
    bary: [f64; 3],
) -> Result<Point> {
    let ab = bary[0] + bary[1];
    if ab <= 0.0 {
        return Ok(c.clone());
    }
    let p = space.geodesic_point(a, b, bary[1] / ab)?;
    space.geodesic_point(&p, c, bary[2])
}

pub(crate) fn edge_id(mesh: &DiscMesh, a: usize, b: usize) -> usize {
    let nb = mesh.neighbors(a);
    let k = nb.binary_search(&b).expect("triangle sides are mesh edges");
    mesh.neighbor_edges(a)[k]
}

pub(crate) fn form_for(mesh: &DiscMesh, t: usize, lengths: [f64; 3]) -> Result<PullbackForm> {
    let tri = mesh.triangles()[t];
    let v = mesh.vertices();
    let edges = [
        geom::sub(v[tri[1]], v[tri[0]]),
        geom::sub(v[tri[2]], v[tri[1]]),
        geom::sub(v[tri[0]], v[tri[2]]),
    ];
    PullbackForm::from_edges(edges, lengths.map(|l| l * l)).ok_or(Error::SingularSystem(t))
}

pub(crate) fn forms_from_lengths(mesh: &DiscMesh, lengths: &[[f64; 3]]) -> Result<Vec<PullbackForm>> {
    (0..mesh.triangle_count()).into_par_iter().map(|t| form_for(mesh, t, lengths[t])).collect()
}

pub(crate) fn stats_from_forms(mesh: &DiscMesh, forms: &[PullbackForm]) -> Vec<TriangleStats> {
    forms
        .iter()
        .enumerate()
        .map(|(t, q)| {
            let a = mesh.triangle_area(t);
            TriangleStats { area: a * q.jacobian(), trace: a * q.trace(), lambda_max: a * q.lambda_max(), det: q.det() }
        })
        .collect()
}

pub fn pullback_form(map: &MeshMap, t: usize) -> Result<PullbackForm> {
    map.pullback_form(t)
}

pub fn ks_energy(map: &MeshMap) -> Result<f64> {
    map.ks_energy()
}

pub fn reshetnyak_energy(map: &MeshMap) -> Result<f64> {
    map.reshetnyak_energy()
}

pub fn map_area(map: &MeshMap) -> Result<f64> {
    map.area()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_form_is_the_identity() {
        let m = MeshMap::identity(DiscMesh::concentric(3).unwrap());
        for q in m.pullback_forms().unwrap() {
            assert!((q.q[0] - 1.0).abs() < 1e-12 && q.q[1].abs() < 1e-12 && (q.q[2] - 1.0).abs() < 1e-12);
        }
        let a = m.mesh.area();
        assert!((m.ks_energy().unwrap() - 2.0 * a).abs() < 1e-12);
        assert!((m.reshetnyak_energy().unwrap() - a).abs() < 1e-12);
        assert!((m.area().unwrap() - a).abs() < 1e-12);
    }

    #[test]
    fn collapsed_triangle() {
        // (x, y) -> 3x collapses onto a segment
        let q = PullbackForm::from_edges([[1.0, 0.0], [-1.0, 1.0], [0.0, -1.0]], [9.0, 9.0, 0.0]).unwrap();
        assert!(q.det().abs() < 1e-12);
        assert!((q.lambda_max() - 9.0).abs() < 1e-12);
        assert_eq!(q.jacobian(), 0.0);
    }
}
