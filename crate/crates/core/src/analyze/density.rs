use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::MeshMap;
use crate::space::{MetricSpace, Point};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub center: Point,
    pub radii: Vec<f64>,
    pub theta: Vec<f64>,
    /// Estimator error of each `theta` value (full against half grid resolution).
    pub stderr: Vec<f64>,
    /// `max_i max(0, θ(r_i) - θ(r_{i+1}))`.
    pub monotonicity_defect: f64,
    /// Median of `θ` on the three smallest radii.
    pub theta_zero: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityVerdict {
    pub passed: bool,
    pub defect: f64,
    pub slack: f64,
    pub estimator_error: f64,
}

/// Area carried by a cell together with the distances from the center at the
/// vertices of a regular `n × n` sub-triangle grid (see [`grid_barycentrics`]).
/// A cell with `n == 0` lies entirely outside every ball of interest.
#[derive(Clone, Debug, Default)]
pub struct SampledCell {
    pub area: f64,
    pub n: usize,
    pub dists: Vec<f64>,
}

impl SampledCell {
    pub fn outside(area: f64) -> Self {
        SampledCell { area, n: 0, dists: Vec::new() }
    }

    /// Area of the part of the cell within distance `r`.
    pub fn covered_area(&self, r: f64) -> f64 {
        self.area * self.fraction(r, 1)
    }

    /// Fraction of the cell where the piecewise-linear interpolant of the
    /// distance is below `r`, on the grid coarsened by `step`.
    fn fraction(&self, r: f64, step: usize) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let m = self.n / step;
        let at = |i: usize, j: usize| self.dists[grid_index(self.n, i * step, j * step)];
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m - i {
                acc += linear_fraction([at(i, j), at(i + 1, j), at(i, j + 1)], r);
                if i + j + 2 <= m {
                    acc += linear_fraction([at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)], r);
                }
            }
        }
        acc / (m * m) as f64
    }
}

fn grid_index(n: usize, i: usize, j: usize) -> usize {
    // rows of decreasing length n + 1, n, ..., 1
    i * (n + 1) - i * i.saturating_sub(1) / 2 + j
}

/// Barycentric coordinates of the grid vertices `(i, j)`, `i + j <= n`, in
/// the order used by [`SampledCell::dists`].
pub fn grid_barycentrics(n: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for i in 0..=n {
        for j in 0..=n - i {
            let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
            out.push([1.0 - s - t, s, t]);
        }
    }
    out
}

/// Area fraction of a triangle where the linear function with vertex values
/// `d` is below `r`.
fn linear_fraction(mut d: [f64; 3], r: f64) -> f64 {
    d.sort_by(f64::total_cmp);
    if r <= d[0] {
        0.0
    } else if r >= d[2] {
        1.0
    } else if r <= d[1] {
        (r - d[0]).powi(2) / ((d[1] - d[0]) * (d[2] - d[0]))
    } else {
        1.0 - (d[2] - r).powi(2) / ((d[2] - d[0]) * (d[2] - d[1]))
    }
}

/// `θ(r)` and an error estimate from sampled cells. The estimate compares
/// the full grid with the grid of half resolution.
pub fn theta_from_cells(cells: &[SampledCell], radii: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut theta = Vec::with_capacity(radii.len());
    let mut stderr = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut fine = 0.0;
        let mut coarse = 0.0;
        for c in cells {
            if c.n == 0 || c.area == 0.0 {
                continue;
            }
            let f = c.fraction(r, 1);
            fine += c.area * f;
            coarse += c.area * if c.n % 2 == 0 { c.fraction(r, 2) } else { f };
        }
        let disc = PI * r * r;
        theta.push(fine / disc);
        stderr.push((fine - coarse).abs() / disc);
    }
    (theta, stderr)
}

pub(crate) fn profile_from(center: Point, radii: Vec<f64>, theta: Vec<f64>, stderr: Vec<f64>) -> DensityProfile {
    let monotonicity_defect = theta.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max);
    let mut first: Vec<f64> = theta.iter().take(3).cloned().collect();
    first.sort_by(f64::total_cmp);
    let theta_zero = first.get(first.len() / 2).cloned().unwrap_or(0.0);
    DensityProfile { center, radii, theta, stderr, monotonicity_defect, theta_zero }
}

/// `n` radii evenly spaced on `[r_min, r_max]`.
pub fn radius_grid(r_min: f64, r_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![r_max];
    }
    (0..n).map(|i| r_min + (r_max - r_min) * i as f64 / (n - 1) as f64).collect()
}

/// Distance from `p` to the image of the boundary loop (geodesic edges between
/// consecutive boundary images, sampled).
pub fn boundary_distance<S: MetricSpace + ?Sized>(space: &S, boundary: &[Point], p: &Point) -> Result<f64> {
    let n = boundary.len();
    let per_edge = 16;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let (a, b) = (&boundary[i], &boundary[(i + 1) % n]);
        best = best.min(space.distance(p, a)?);
        for k in 1..per_edge {
            let q = space.geodesic_point(a, b, k as f64 / per_edge as f64)?;
            best = best.min(space.distance(p, &q)?);
        }
    }
    Ok(best)
}

/// Samples every triangle of `map` on a sub-triangle grid with about
/// `samples_per_triangle` cells; triangles that cannot reach distance `reach`
/// from `p` are summarized without sampling.
pub fn sample_map_cells(map: &MeshMap, p: &Point, samples_per_triangle: usize, reach: f64) -> Result<Vec<SampledCell>> {
    let n = (samples_per_triangle as f64).sqrt().ceil().max(1.0) as usize;
    let grid = grid_barycentrics(n);
    let stats = map.triangle_stats()?;
    let space = &*map.space;
    map.mesh
        .triangles()
        .par_iter()
        .enumerate()
        .map(|(t, tri)| {
            let area = stats[t].area;
            let mut near = f64::INFINITY;
            let mut diam: f64 = 0.0;
            for k in 0..3 {
                near = near.min(space.distance(p, &map.images[tri[k]])?);
                diam = diam.max(space.distance(&map.images[tri[k]], &map.images[tri[(k + 1) % 3]])?);
            }
            if area == 0.0 || near > reach + diam {
                return Ok(SampledCell::outside(area));
            }
            let dists = grid
                .iter()
                .map(|&bary| space.distance(p, &map.eval(t, bary)?))
                .collect::<Result<Vec<f64>>>()?;
            Ok(SampledCell { area, n, dists })
        })
        .collect()
}

/// Area density `θ(r) = area(f⁻¹ B_r(p)) / πr²` on a radius grid.
pub fn density_profile(map: &MeshMap, p: &Point, radii: &[f64], samples_per_triangle: usize) -> Result<DensityProfile> {
    check_grid(radii)?;
    let boundary: Vec<Point> = map.mesh.boundary().iter().map(|&b| map.images[b].clone()).collect();
    let limit = boundary_distance(&*map.space, &boundary, p)?;
    let r_max = *radii.last().unwrap();
    if r_max >= limit - 1e-9 {
        return Err(Error::RadiusTooLarge { radius: r_max, limit });
    }
    let cells = sample_map_cells(map, p, samples_per_triangle, r_max)?;
    let (theta, stderr) = theta_from_cells(&cells, radii);
    Ok(profile_from(p.clone(), radii.to_vec(), theta, stderr))
}

pub(crate) fn check_grid(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("radii must be positive and strictly increasing".into()));
    }
    Ok(())
}

pub fn check_monotonicity(profile: &DensityProfile, slack: f64) -> MonotonicityVerdict {
    let estimator_error = profile.stderr.iter().cloned().fold(0.0, f64::max);
    MonotonicityVerdict {
        passed: profile.monotonicity_defect <= slack,
        defect: profile.monotonicity_defect,
        slack,
        estimator_error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DiscMesh;

    #[test]
    fn flat_disc_has_unit_density() {
        let map = MeshMap::identity(DiscMesh::concentric(12).unwrap());
        let radii = radius_grid(0.2, 0.9, 8);
        let prof = density_profile(&map, &Point::euclidean(&[0.0, 0.0]), &radii, 64).unwrap();
        for t in &prof.theta {
            assert!((t - 1.0).abs() < 0.02, "{t}");
        }
        assert!(matches!(
            density_profile(&map, &Point::euclidean(&[0.0, 0.0]), &[0.5, 1.0], 4),
            Err(Error::RadiusTooLarge { .. })
        ));
    }

    #[test]
    fn linear_fraction_matches_half_plane() {
        // d = x on the triangle (0,0),(1,0),(0,1): area of {x < r} is r - r²/2
        for r in [0.1, 0.5, 0.9] {
            assert!((linear_fraction([0.0, 1.0, 0.0], r) - 2.0 * (r - r * r / 2.0)).abs() < 1e-12);
        }
        let grid = grid_barycentrics(4);
        assert_eq!(grid.len(), 15);
        assert_eq!(grid[grid_index(4, 2, 1)], [0.25, 0.5, 0.25]);
    }
}
