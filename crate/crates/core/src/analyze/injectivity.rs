use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mesh::{sub_triangle_centroids, DomainPoint, MeshMap, PullbackMetric};
use crate::space::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: DomainPoint,
    pub y: DomainPoint,
    pub image_distance: f64,
    pub pullback_distance: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub delta: f64,
    pub epsilon: f64,
    /// `min d_X(f(x), f(y)) / d_Z(x, y)` over scanned pairs with `d_Z >= delta`.
    pub min_ratio: f64,
    /// Worst pairs, best first.
    pub witnesses: Vec<Witness>,
    pub pairs_scanned: usize,
    pub embedded: bool,
}

/// Number of preimage clusters of `p`: domain samples whose image is within
/// `image_tol` of `p`, grouped greedily by pull-back distance `cluster_tol`.
pub fn count_preimages(map: &MeshMap, pb: &PullbackMetric, p: &Point, image_tol: f64, cluster_tol: f64) -> Result<usize> {
    Ok(preimage_clusters(map, pb, p, image_tol, cluster_tol)?.len())
}

/// Cluster seeds (the sample closest to `p` in each cluster).
pub fn preimage_clusters(
    map: &MeshMap,
    pb: &PullbackMetric,
    p: &Point,
    image_tol: f64,
    cluster_tol: f64,
) -> Result<Vec<DomainPoint>> {
    let grid = sub_triangle_centroids(4);
    let space = &*map.space;
    let mut hits: Vec<(f64, DomainPoint)> = map
        .mesh
        .triangles()
        .par_iter()
        .enumerate()
        .map(|(t, tri)| {
            let mut out = Vec::new();
            let near = tri.iter().map(|&v| space.distance(p, &map.images[v])).collect::<Result<Vec<f64>>>()?;
            let mut diam: f64 = 0.0;
            for k in 0..3 {
                diam = diam.max(space.distance(&map.images[tri[k]], &map.images[tri[(k + 1) % 3]])?);
            }
            if near.iter().cloned().fold(f64::INFINITY, f64::min) > image_tol + diam {
                return Ok(out);
            }
            for k in 0..3 {
                if near[k] <= image_tol {
                    let mut bary = [0.0; 3];
                    bary[k] = 1.0;
                    out.push((near[k], DomainPoint { tri: t, bary }));
                }
            }
            for &bary in &grid {
                let d = space.distance(p, &map.eval(t, bary)?)?;
                if d <= image_tol {
                    out.push((d, DomainPoint { tri: t, bary }));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.tri.cmp(&b.1.tri)));
    let mut assigned = vec![false; hits.len()];
    let mut seeds = Vec::new();
    for i in 0..hits.len() {
        if assigned[i] {
            continue;
        }
        let seed = hits[i].1;
        let field = pb.graph_field(seed);
        for j in i..hits.len() {
            if !assigned[j] && pb.graph_distance(&field, hits[j].1) <= cluster_tol {
                assigned[j] = true;
            }
        }
        assigned[i] = true;
        seeds.push(seed);
    }
    Ok(seeds)
}

/// Scans vertex pairs (sources every `stride`-th vertex, all targets) for the
/// smallest ratio of image to pull-back distance, then refines the worst pairs
/// on sub-triangle samples around them.
pub fn injectivity_report(map: &MeshMap, pb: &PullbackMetric, delta: f64, epsilon: f64, stride: usize) -> Result<InjectivityReport> {
    let nv = map.mesh.vertex_count();
    let stride = stride.max(1);
    let space = &*map.space;
    let sources: Vec<usize> = (0..nv).step_by(stride).collect();
    let per_source: Vec<(usize, Vec<Witness>)> = sources
        .par_iter()
        .map(|&a| {
            let src = pb.vertex_domain_point(a);
            let field = pb.graph_field(src);
            let mut scanned = 0;
            let mut best: Vec<Witness> = Vec::new();
            for b in 0..nv {
                if b == a {
                    continue;
                }
                let dz = pb.graph_distance(&field, pb.vertex_domain_point(b));
                if !(dz >= delta) {
                    continue;
                }
                scanned += 1;
                let dx = space.distance(&map.images[a], &map.images[b])?;
                let w = Witness { x: src, y: pb.vertex_domain_point(b), image_distance: dx, pullback_distance: dz, ratio: dx / dz };
                keep_worst(&mut best, w, 8);
            }
            // graph distances overestimate; settle the candidates with taut paths
            let best = best
                .into_iter()
                .map(|mut w| {
                    w.pullback_distance = pb.taut_distance(&field, w.y);
                    w.ratio = w.image_distance / w.pullback_distance;
                    w
                })
                .fold(Vec::new(), |mut acc, w| {
                    keep_worst(&mut acc, w, 4);
                    acc
                });
            Ok((scanned, best))
        })
        .collect::<Result<_>>()?;
    let pairs_scanned = per_source.iter().map(|(s, _)| s).sum();
    let mut witnesses = Vec::new();
    for (_, ws) in per_source {
        for w in ws {
            keep_worst(&mut witnesses, w, 8);
        }
    }
    // local refinement: try sub-triangle samples in the stars of the worst pairs
    let grid = sub_triangle_centroids(3);
    let star_samples = |p: DomainPoint| -> Vec<DomainPoint> {
        let v = map.mesh.triangles()[p.tri][p.bary.iter().position(|&b| b == 1.0).unwrap_or(0)];
        let mut out = vec![p];
        for &t in map.mesh.vertex_triangles(v) {
            out.extend(grid.iter().map(|&bary| DomainPoint { tri: t, bary }));
        }
        out
    };
    let mut refined = witnesses.clone();
    for w in &witnesses {
        let xs = star_samples(w.x);
        let ys = star_samples(w.y);
        let fx: Vec<Point> = xs.iter().map(|x| map.eval(x.tri, x.bary)).collect::<Result<_>>()?;
        let fy: Vec<Point> = ys.iter().map(|y| map.eval(y.tri, y.bary)).collect::<Result<_>>()?;
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, a) in fx.iter().enumerate() {
            for (j, b) in fy.iter().enumerate() {
                let d = space.distance(a, b)?;
                if best.map_or(true, |(_, _, bd)| d < bd) {
                    best = Some((i, j, d));
                }
            }
        }
        if let Some((i, j, dx)) = best {
            let dz = pb.distance(xs[i], ys[j])?;
            if dz >= delta {
                keep_worst(&mut refined, Witness { x: xs[i], y: ys[j], image_distance: dx, pullback_distance: dz, ratio: dx / dz }, 8);
            }
        }
    }
    let min_ratio = refined.first().map_or(f64::INFINITY, |w| w.ratio);
    Ok(InjectivityReport {
        delta,
        epsilon,
        min_ratio,
        embedded: min_ratio >= epsilon / delta,
        witnesses: refined,
        pairs_scanned,
    })
}

fn keep_worst(list: &mut Vec<Witness>, w: Witness, cap: usize) {
    let pos = list.iter().position(|x| w.ratio < x.ratio).unwrap_or(list.len());
    if pos < cap {
        list.insert(pos, w);
        list.truncate(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DiscMesh;

    #[test]
    fn identity_is_isometric() {
        let map = MeshMap::identity(DiscMesh::concentric(4).unwrap());
        let pb = PullbackMetric::new(&map, 3).unwrap();
        let r = injectivity_report(&map, &pb, 0.2, 0.1, 1).unwrap();
        assert!(r.embedded);
        assert!(r.min_ratio > 0.97 && r.min_ratio <= 1.0 + 1e-12, "{}", r.min_ratio);
        assert_eq!(count_preimages(&map, &pb, &Point::euclidean(&[0.1, 0.1]), 0.05, 0.2).unwrap(), 1);
    }
}
