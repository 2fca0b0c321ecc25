use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FunnelExtension;
use crate::analyze::{check_grid, count_preimages, grid_barycentrics, profile_from, sample_map_cells, theta_from_cells, SampledCell};
use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::mesh::{MeshMap, PullbackMetric};
use crate::solve::SolveResult;
use crate::space::Point;

/// Funnel cell: a triangle in strip coordinates `(s, t)` or in sector polar
/// coordinates `(ρ, φ)`, mapped by the identity of the funnel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunnelCell {
    pub chart: usize,
    pub corners: [Vec2; 3],
    pub area: f64,
}

/// A solved disc with the funnel attached along its boundary curve.
#[derive(Clone, Debug)]
pub struct ExtendedPlane {
    pub disc: MeshMap,
    pub cells: Vec<FunnelCell>,
    /// Largest distance between a disc boundary image and its curve point.
    pub boundary_gap: f64,
}

impl ExtendedPlane {
    pub fn funnel_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    pub fn area(&self) -> Result<f64> {
        Ok(self.disc.area()? + self.funnel_area())
    }

    /// Chart coordinates of the point with barycentric coordinates `bary` in `cell`.
    pub fn cell_point(cell: &FunnelCell, bary: [f64; 3]) -> Vec2 {
        let c = cell.corners;
        let q = [0, 1].map(|k| bary[0] * c[0][k] + bary[1] * c[1][k] + bary[2] * c[2][k]);
        if cell.chart % 2 == 0 {
            q
        } else {
            [q[0] * q[1].sin(), q[0] * q[1].cos()]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub center: Point,
    pub radii: Vec<f64>,
    pub theta: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `θ` at the largest radius.
    pub theta_infinity_estimate: f64,
    /// `κ / 2π`.
    pub predicted: f64,
    pub error: f64,
    pub monotonicity_defect: f64,
    /// Largest admissible radius, `0.8 R`.
    pub radius_cap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyEstimate {
    /// `⌊κ/2π + 0.1⌋`.
    pub bound: usize,
    pub counts: Vec<usize>,
    pub worst: usize,
    pub worst_probe: Option<Point>,
    pub passed: bool,
}

/// Geometric rows `t_k = R (k/n)²`.
fn rows(radius: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| radius * (k as f64 / n as f64).powi(2)).collect()
}

fn push_quad(cells: &mut Vec<FunnelCell>, chart: usize, a: Vec2, b: Vec2, c: Vec2, d: Vec2, polar: bool) {
    // quad a b c d counter-clockwise in parameter space
    for tri in [[a, b, c], [a, c, d]] {
        let param_area = 0.5 * geom::orient(tri[0], tri[1], tri[2]).abs();
        let area = if polar { param_area * (tri[0][0] + tri[1][0] + tri[2][0]) / 3.0 } else { param_area };
        cells.push(FunnelCell { chart, corners: tri, area });
    }
}

/// Attaches the truncated funnel to a solved disc. Strips are cut into
/// columns and rows `t_k = R (k/n)²`, sectors into polar cells on the same
/// rows; cell areas are exact, so the funnel area is `L R + κ R²/2`.
pub fn extend_plateau(result: &SolveResult, ext: &FunnelExtension, funnel_rings: usize) -> Result<ExtendedPlane> {
    let space = ext.base();
    let curve = ext.curve();
    if result.curve.len() != curve.len()
        || result.curve.vertices().iter().zip(curve.vertices()).any(|(a, b)| !space.same_point(a, b))
    {
        return Err(Error::BoundaryMismatch("solved curve differs from the funnel curve".into()));
    }
    let map = &result.map;
    let scale = 1.0 + curve.length();
    let mut gap: f64 = 0.0;
    for (&b, &u) in map.mesh.boundary().iter().zip(&result.boundary_params) {
        let on_curve = curve.arc_length_param(space, u.rem_euclid(1.0))?;
        gap = gap.max(space.distance(&map.images[b], &on_curve)?);
    }
    if gap > 1e-6 * scale {
        return Err(Error::BoundaryMismatch(format!("boundary images leave the curve by {gap:e}")));
    }
    let n = funnel_rings.max(1);
    let t = rows(ext.radius(), n);
    let h = curve.length() / (4 * n) as f64;
    let mut cells = Vec::new();
    for (j, &l) in curve.edge_lengths().iter().enumerate() {
        let cols = ((l / h).ceil() as usize).max(2);
        let s: Vec<f64> = (0..=cols).map(|c| l * c as f64 / cols as f64).collect();
        for k in 0..n {
            for c in 0..cols {
                push_quad(&mut cells, 2 * j, [s[c], t[k]], [s[c + 1], t[k]], [s[c + 1], t[k + 1]], [s[c], t[k + 1]], false);
            }
        }
    }
    let nv = curve.len();
    for (v, &alpha) in ext.sector_angles().iter().enumerate() {
        if alpha <= 0.0 {
            continue;
        }
        let chart = 2 * ((v + nv - 1) % nv) + 1;
        let div = ((alpha / (PI / 12.0)).ceil() as usize).max(1);
        let phi: Vec<f64> = (0..=div).map(|d| alpha * d as f64 / div as f64).collect();
        for k in 0..n {
            for d in 0..div {
                push_quad(&mut cells, chart, [t[k], phi[d]], [t[k + 1], phi[d]], [t[k + 1], phi[d + 1]], [t[k], phi[d + 1]], true);
            }
        }
    }
    Ok(ExtendedPlane { disc: map.clone(), cells, boundary_gap: gap })
}

/// Area density of the extended plane around the base point `p`.
pub fn area_growth(
    plane: &ExtendedPlane,
    ext: &FunnelExtension,
    p: &Point,
    radii: &[f64],
    samples_per_triangle: usize,
) -> Result<GrowthReport> {
    check_grid(radii)?;
    let cap = 0.8 * ext.radius();
    let r_max = *radii.last().unwrap();
    if r_max > cap {
        return Err(Error::RadiusTooLarge { radius: r_max, limit: cap });
    }
    let mut cells = sample_map_cells(&plane.disc, p, samples_per_triangle, r_max)?;
    let src = ext.base_source(p)?;
    let to_curve = src.portal.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let spacing = ext.curve().edge_lengths().iter().cloned().fold(0.0, f64::max) / ext.portals_per_edge as f64;
    let n = (samples_per_triangle as f64).sqrt().ceil().max(1.0) as usize;
    let grid = grid_barycentrics(n);
    let funnel: Vec<SampledCell> = plane
        .cells
        .par_iter()
        .map(|cell| {
            let depth = cell.corners.iter().map(|c| c[if cell.chart % 2 == 0 { 1 } else { 0 }]).fold(f64::INFINITY, f64::min);
            if depth + to_curve - spacing > r_max {
                return Ok(SampledCell::outside(cell.area));
            }
            let dists = grid
                .iter()
                .map(|&bary| ext.source_to_funnel(&src, cell.chart, ExtendedPlane::cell_point(cell, bary), false))
                .collect::<Result<Vec<f64>>>()?;
            Ok(SampledCell { area: cell.area, n, dists })
        })
        .collect::<Result<_>>()?;
    cells.extend(funnel);
    let (theta, stderr) = theta_from_cells(&cells, radii);
    let profile = profile_from(p.clone(), radii.to_vec(), theta, stderr);
    let estimate = *profile.theta.last().unwrap();
    let predicted = ext.curvature().kappa / (2.0 * PI);
    Ok(GrowthReport {
        center: p.clone(),
        radii: profile.radii,
        theta: profile.theta,
        stderr: profile.stderr,
        theta_infinity_estimate: estimate,
        predicted,
        error: (estimate - predicted).abs(),
        monotonicity_defect: profile.monotonicity_defect,
        radius_cap: cap,
    })
}

/// Preimage counts of `probes` against the bound `⌊κ/2π + 0.1⌋`.
pub fn key_estimate_check(
    plane: &ExtendedPlane,
    pb: &PullbackMetric,
    kappa: f64,
    probes: &[Point],
    image_tol: f64,
    cluster_tol: f64,
) -> Result<KeyEstimate> {
    let bound = (kappa / (2.0 * PI) + 0.1).floor() as usize;
    let counts = probes
        .iter()
        .map(|p| count_preimages(&plane.disc, pb, p, image_tol, cluster_tol))
        .collect::<Result<Vec<usize>>>()?;
    let worst_i = (0..counts.len()).max_by_key(|&i| (counts[i], std::cmp::Reverse(i)));
    let worst = worst_i.map_or(0, |i| counts[i]);
    Ok(KeyEstimate {
        bound,
        worst,
        worst_probe: worst_i.map(|i| probes[i].clone()),
        passed: worst <= bound,
        counts,
    })
}
