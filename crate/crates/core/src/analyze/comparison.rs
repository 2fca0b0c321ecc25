use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curve::PolygonalCurve;
use crate::error::{Error, Result};
use crate::analyze::{grid_barycentrics, SampledCell};
use crate::mesh::{DomainPoint, MeshMap, PullbackField, PullbackMetric};
use crate::report::{AngleDefect, BgSample, ComparisonReport};
use crate::space::cn_defect;

/// `(r²/2)·(angle sum at p) - area(B_r(p))` in the pull-back metric.
pub fn check_bishop_gromov(pb: &PullbackMetric, p: usize, r: f64) -> Result<f64> {
    let field = pb.field(pb.vertex_domain_point(p));
    bishop_gromov_with(pb, &field, p, r)
}

fn bishop_gromov_with(pb: &PullbackMetric, field: &PullbackField, p: usize, r: f64) -> Result<f64> {
    let limit = pb.distance_to_boundary(field);
    if r >= limit {
        return Err(Error::RadiusTooLarge { radius: r, limit });
    }
    let area = ball_area(pb, field, r, 8);
    Ok(0.5 * r * r * pb.angle_sum(p) - area)
}

/// Area of `B_r` around the field's source: exact sublevel areas of the
/// linear interpolant of the distance on an `n × n` grid per triangle, refined
/// when `r` is below the longest edge.
fn ball_area(pb: &PullbackMetric, f: &PullbackField, r: f64, n: usize) -> f64 {
    let mesh = pb.mesh();
    // balls smaller than a triangle need a finer grid
    let longest = pb.lengths().iter().flatten().cloned().fold(0.0, f64::max);
    let n = n.max(((4.0 * longest / r).ceil() as usize).min(32));
    let grid = grid_barycentrics(n);
    let cells: Vec<f64> = (0..mesh.triangle_count())
        .into_par_iter()
        .map(|t| {
            let corner_min = mesh.triangles()[t].iter().map(|&v| f.vertex[v]).fold(f64::INFINITY, f64::min);
            let diam = pb.lengths()[t].iter().cloned().fold(0.0, f64::max);
            if corner_min > r + diam {
                return 0.0;
            }
            let dists = grid
                .iter()
                .map(|&bary| {
                    let p = DomainPoint { tri: t, bary };
                    // the node extension is an upper bound; settle close calls with taut paths
                    let d = pb.field_distance(f, p);
                    if (d - r).abs() < diam {
                        pb.exact_field_distance(f, p)
                    } else {
                        d
                    }
                })
                .collect();
            SampledCell { area: pb.triangle_area(t), n, dists }.covered_area(r)
        })
        .collect();
    cells.iter().sum()
}

/// Bishop-Gromov defects at `fractions` of the boundary distance of each
/// vertex in `centers`.
pub fn bishop_gromov_samples(pb: &PullbackMetric, centers: &[usize], fractions: &[f64]) -> Result<Vec<BgSample>> {
    let mut out = Vec::new();
    for &v in centers {
        let field = pb.field(pb.vertex_domain_point(v));
        let limit = pb.distance_to_boundary(&field);
        for &f in fractions {
            let r = f * limit;
            out.push(BgSample { vertex: v, radius: r, defect: bishop_gromov_with(pb, &field, v, r)? });
        }
    }
    Ok(out)
}

fn random_point<R: Rng>(rng: &mut R, tri: usize) -> DomainPoint {
    let (mut s, mut t): (f64, f64) = (rng.gen(), rng.gen());
    if s + t > 1.0 {
        s = 1.0 - s;
        t = 1.0 - t;
    }
    DomainPoint { tri, bary: [1.0 - s - t, s, t] }
}

/// CN midpoint test on sampled triples of the pull-back metric: half of them
/// spread over the whole disc, half inside the star of a random interior vertex.
pub fn check_cn(pb: &PullbackMetric, samples: usize, seed: u64) -> Result<ComparisonReport> {
    let mesh = pb.mesh();
    let interior = mesh.interior_vertices();
    let nt = mesh.triangle_count();
    let defects: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64));
            let [x, y, z] = if i % 2 == 0 || interior.is_empty() {
                [0; 3].map(|_| {
                    let t = rng.gen_range(0..nt);
                    random_point(&mut rng, t)
                })
            } else {
                let v = interior[rng.gen_range(0..interior.len())];
                let star = mesh.vertex_triangles(v);
                [0; 3].map(|_| {
                    let t = star[rng.gen_range(0..star.len())];
                    random_point(&mut rng, t)
                })
            };
            let m = pb.geodesic_point(y, z, 0.5)?;
            Ok(cn_defect(pb.distance(x, m)?, pb.distance(x, y)?, pb.distance(x, z)?, pb.distance(y, z)?))
        })
        .collect::<Result<_>>()?;
    let mut report = ComparisonReport::default();
    for d in defects {
        report.record_cn(d);
    }
    Ok(report)
}

/// Angle defect of every interior vertex. The rigid-cone verdict holds when
/// all defects are within `tol` of zero except at most `max_cones` vertices
/// whose defects sum to `-2π` within `cone_tol`.
pub fn flatness_report(pb: &PullbackMetric, tol: f64, max_cones: usize, cone_tol: f64) -> ComparisonReport {
    let mut report = ComparisonReport::default();
    for v in pb.mesh().interior_vertices() {
        let defect = pb.angle_defect(v);
        report.angle_defects.push(AngleDefect { vertex: v, defect });
        if defect > tol {
            report.positive_curvature.push(v);
        }
    }
    let outliers: Vec<f64> = report.angle_defects.iter().map(|a| a.defect).filter(|d| d.abs() > tol).collect();
    let sum: f64 = outliers.iter().sum();
    report.rigid_cone = Some(!outliers.is_empty() && outliers.len() <= max_cones && (sum + 2.0 * PI).abs() <= cone_tol);
    report
}

/// Copy of `pb` whose edges opposite to vertex `v` (the link of `v`) are
/// scaled by `factor`; `factor < 1` plants a positively curved cone point.
pub fn corrupted_metric(pb: &PullbackMetric, v: usize, factor: f64, subdivision: usize) -> Result<PullbackMetric> {
    let mesh = pb.mesh();
    let mut lengths = pb.lengths().to_vec();
    for &t in mesh.vertex_triangles(v) {
        let k = mesh.triangles()[t].iter().position(|&u| u == v).unwrap();
        // side from corner k+1 to k+2 is opposite to v
        lengths[t][(k + 1) % 3] *= factor;
    }
    // the same edges seen from the neighboring triangles
    let link: Vec<[usize; 2]> = mesh
        .vertex_triangles(v)
        .iter()
        .map(|&t| {
            let tri = mesh.triangles()[t];
            let k = tri.iter().position(|&u| u == v).unwrap();
            [tri[(k + 1) % 3], tri[(k + 2) % 3]]
        })
        .collect();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if tri.contains(&v) {
            continue;
        }
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if link.iter().any(|e| (e[0] == b && e[1] == a) || (e[0] == a && e[1] == b)) {
                lengths[t][k] *= factor;
            }
        }
    }
    PullbackMetric::from_lengths(mesh, lengths, subdivision)
}

/// `area / (length² / 4π)`.
pub fn isoperimetric_ratio(map: &MeshMap, curve: &PolygonalCurve) -> Result<f64> {
    let l = curve.length();
    Ok(map.area()? / (l * l / (4.0 * PI)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DiscMesh;

    #[test]
    fn flat_disc_is_flat_and_satisfies_cn() {
        let map = MeshMap::identity(DiscMesh::concentric(4).unwrap());
        let pb = PullbackMetric::new(&map, 3).unwrap();
        let f = flatness_report(&pb, 1e-6, 1, 0.1);
        assert!(f.angle_defects.iter().all(|a| a.defect.abs() < 1e-12));
        assert_eq!(f.rigid_cone, Some(false));
        let cn = check_cn(&pb, 60, 1).unwrap();
        assert!(cn.cn_defect_max < 1e-12, "{}", cn.cn_defect_max);
    }

    #[test]
    fn shrunk_link_is_detected() {
        let map = MeshMap::identity(DiscMesh::concentric(4).unwrap());
        let pb = PullbackMetric::new(&map, 3).unwrap();
        let bad = corrupted_metric(&pb, 0, 0.6, 3).unwrap();
        assert!(bad.angle_defect(0) > 1.0);
        let cn = check_cn(&bad, 200, 1).unwrap();
        assert!(cn.cn_defect_max > 1e-4, "{}", cn.cn_defect_max);
    }

    #[test]
    fn flat_bishop_gromov_is_near_equality() {
        let map = MeshMap::identity(DiscMesh::concentric(8).unwrap());
        let pb = PullbackMetric::new(&map, 3).unwrap();
        for r in [0.3, 0.6, 0.9] {
            let d = check_bishop_gromov(&pb, 0, r).unwrap();
            assert!(d.abs() < 0.05 * r * r, "r {r}: {d}");
        }
    }
}
