//! Discrete Plateau solver and the radial cone filler.
//!
//! Interior vertices are relaxed to weighted Fréchet means of their neighbors,
//! sweeping color class by color class, and boundary vertices slide along the
//! curve by one-dimensional line searches. The weights are the cotangent
//! weights of the domain mesh, for which `Σ_e w_e |f(a) f(b)|^2` is exactly the
//! trace energy; every update therefore minimizes the energy locally.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::PolygonalCurve;
use crate::error::{Error, Result};
use crate::geom;
use crate::mesh::{DiscMesh, MeshMap, MeshMapFile};
use crate::space::{frechet_mean_with, FrechetOptions, Point, TargetSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Fixed,
    Sliding,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub rings: usize,
    pub max_sweeps: usize,
    /// Relative energy decrease per sweep below which the solver stops.
    pub tol_energy: f64,
    pub boundary_mode: BoundaryMode,
    /// Curve parameters of boundary vertices `0`, `N/3` and `2N/3`.
    pub pinned: [f64; 3],
    pub seed: u64,
    pub refinement_levels: usize,
    /// Boundary line searches run every `slide_every` sweeps.
    pub slide_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rings: 16,
            max_sweeps: 4000,
            tol_energy: 1e-8,
            boundary_mode: BoundaryMode::Sliding,
            pinned: [0.0, 1.0 / 3.0, 2.0 / 3.0],
            seed: 0,
            refinement_levels: 0,
            slide_every: 4,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let p = self.pinned;
        if !(0.0 <= p[0] && p[0] < p[1] && p[1] < p[2] && p[2] < 1.0) {
            return Err(Error::InvalidConfig(format!("pinned parameters {p:?} must increase inside [0, 1)")));
        }
        if !(self.tol_energy > 0.0) {
            return Err(Error::InvalidConfig("tol_energy must be positive".into()));
        }
        if self.rings == 0 || self.max_sweeps == 0 || self.slide_every == 0 {
            return Err(Error::InvalidConfig("rings, max_sweeps and slide_every must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub map: MeshMap,
    /// Trace energy after each sweep at the final resolution.
    pub energy_trace: Vec<f64>,
    pub area: f64,
    pub converged: bool,
    /// Curve parameter of every boundary vertex (boundary loop order), unwrapped
    /// so that the sequence increases by less than 1 around the loop.
    pub boundary_params: Vec<f64>,
    pub sweeps: usize,
    pub curve: PolygonalCurve,
    pub config: SolverConfig,
}

/// Serializable summary of a [`SolveResult`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveSummary {
    pub rings: usize,
    pub sweeps: usize,
    pub converged: bool,
    pub area: f64,
    pub ks_energy: f64,
    pub reshetnyak_energy: f64,
    pub energy_trace_tail: Vec<f64>,
    pub boundary_params: Vec<f64>,
}

impl SolveResult {
    pub fn summary(&self) -> Result<SolveSummary> {
        let tail = self.energy_trace.len().saturating_sub(5);
        Ok(SolveSummary {
            rings: self.config.rings,
            sweeps: self.sweeps,
            converged: self.converged,
            area: self.area,
            ks_energy: self.map.ks_energy()?,
            reshetnyak_energy: self.map.reshetnyak_energy()?,
            energy_trace_tail: self.energy_trace[tail..].to_vec(),
            boundary_params: self.boundary_params.iter().map(|t| t.rem_euclid(1.0)).collect(),
        })
    }

    pub fn map_file(&self) -> MeshMapFile {
        self.map.to_file()
    }

    /// Wraps a previously solved map whose boundary lies on `curve`. The
    /// energy trace is empty and `converged` is false, since neither is known.
    pub fn from_map(map: MeshMap, curve: &PolygonalCurve, config: SolverConfig) -> Result<Self> {
        let space = map.space.clone();
        let mut boundary_params = Vec::with_capacity(map.mesh.boundary().len());
        let mut prev: Option<f64> = None;
        for &b in map.mesh.boundary() {
            let mut t = curve.project(&space, &map.images[b])?;
            if let Some(p) = prev {
                // unwrap so that consecutive parameters differ by less than 1/2
                t += (p - t + 0.5).floor();
            }
            boundary_params.push(t);
            prev = Some(t);
        }
        Ok(SolveResult {
            area: map.area()?,
            map,
            energy_trace: Vec::new(),
            converged: false,
            boundary_params,
            sweeps: 0,
            curve: curve.clone(),
            config,
        })
    }
}

/// Solves the discrete Plateau problem for `curve`, coarse to fine.
pub fn solve_plateau(space: Arc<TargetSpace>, curve: &PolygonalCurve, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    if !(curve.length() > 0.0) {
        return Err(Error::InvalidCurve("curve has zero length".into()));
    }
    let mut rings = cfg.rings;
    let mut levels = 0;
    while rings > 4 && rings % 2 == 0 {
        rings /= 2;
        levels += 1;
    }
    let mesh = DiscMesh::concentric(rings)?;
    let params = initial_params(mesh.boundary().len(), cfg.pinned);
    let center = boundary_center(&space, curve, &params)?;
    let map = radial_fill_with(space.clone(), &center, curve, mesh, &params)?;
    let level_cfg = SolverConfig { rings, ..cfg.clone() };
    let mut result = relax(map, curve, params, &level_cfg)?;
    for _ in 0..levels {
        result = refine_once(&result)?;
    }
    for _ in 0..cfg.refinement_levels {
        result = refine_once(&result)?;
    }
    Ok(result)
}

/// Doubles the ring count `levels` times, interpolating along target
/// geodesics and relaxing again.
pub fn refine_and_resolve(result: &SolveResult, levels: usize) -> Result<SolveResult> {
    if levels == 0 {
        return Err(Error::InvalidConfig("refinement needs at least one level".into()));
    }
    let mut r = refine_once(result)?;
    for _ in 1..levels {
        r = refine_once(&r)?;
    }
    Ok(r)
}

fn refine_once(result: &SolveResult) -> Result<SolveResult> {
    let rings = result.config.rings * 2;
    let old = &result.map;
    let mesh = DiscMesh::concentric(rings)?;
    let n_old = old.mesh.boundary().len();
    let n = mesh.boundary().len();
    let params: Vec<f64> = (0..n)
        .map(|j| {
            if j % 2 == 0 {
                result.boundary_params[j / 2]
            } else {
                let a = result.boundary_params[j / 2];
                let b = if j / 2 + 1 < n_old { result.boundary_params[j / 2 + 1] } else { result.boundary_params[0] + 1.0 };
                0.5 * (a + b)
            }
        })
        .collect();
    let space = old.space.clone();
    let curve = &result.curve;
    let mut boundary_slot = vec![usize::MAX; mesh.vertex_count()];
    for (j, &b) in mesh.boundary().iter().enumerate() {
        boundary_slot[b] = j;
    }
    let images: Vec<Point> = mesh
        .vertices()
        .par_iter()
        .enumerate()
        .map(|(v, &z)| {
            if boundary_slot[v] != usize::MAX {
                return curve.arc_length_param(&space, params[boundary_slot[v]]);
            }
            let (t, bary) = old
                .mesh
                .locate(z)
                .ok_or_else(|| Error::InvalidMesh(format!("refined vertex {v} outside the coarse mesh")))?;
            old.eval(t, bary)
        })
        .collect::<Result<_>>()?;
    let map = MeshMap::new(mesh, images, space)?;
    let cfg = SolverConfig { rings, ..result.config.clone() };
    relax(map, curve, params, &cfg)
}

/// Boundary parameters interpolating linearly between the pinned ones.
fn initial_params(n: usize, pinned: [f64; 3]) -> Vec<f64> {
    let third = n / 3;
    let knots = [pinned[0], pinned[1], pinned[2], pinned[0] + 1.0];
    (0..n)
        .map(|j| {
            let seg = (j / third).min(2);
            let u = (j - seg * third) as f64 / third as f64;
            knots[seg] + u * (knots[seg + 1] - knots[seg])
        })
        .collect()
}

fn boundary_center(space: &TargetSpace, curve: &PolygonalCurve, params: &[f64]) -> Result<Point> {
    let pts: Vec<Point> = params.iter().map(|&t| curve.arc_length_param(space, t)).collect::<Result<_>>()?;
    match frechet_mean_with(space, &pts, &vec![1.0; pts.len()], &FrechetOptions::default()) {
        Ok(p) => Ok(p),
        Err(Error::NoConvergence { best, .. }) => Ok(best),
        Err(e) => Err(e),
    }
}

/// Maps every radial segment of the disc to the constant-speed geodesic from
/// `p` to the curve point at the segment's angle.
pub fn radial_cone_fill(space: Arc<TargetSpace>, p: &Point, curve: &PolygonalCurve, rings: usize) -> Result<MeshMap> {
    let mesh = DiscMesh::concentric(rings)?;
    let n = mesh.boundary().len();
    let params: Vec<f64> = (0..n).map(|j| j as f64 / n as f64).collect();
    radial_fill_with(space, p, curve, mesh, &params)
}

fn radial_fill_with(space: Arc<TargetSpace>, p: &Point, curve: &PolygonalCurve, mesh: DiscMesh, params: &[f64]) -> Result<MeshMap> {
    space.validate(p)?;
    let n = params.len();
    // boundary parameter as a function of the domain angle, interpolated
    let unwrapped: Vec<f64> = params.to_vec();
    let param_at = |phi: f64| {
        let s = phi.rem_euclid(2.0 * PI) / (2.0 * PI) * n as f64;
        let j = (s.floor() as usize).min(n - 1);
        let u = s - j as f64;
        let a = unwrapped[j];
        let b = if j + 1 < n { unwrapped[j + 1] } else { unwrapped[0] + 1.0 };
        a + u * (b - a)
    };
    let images: Vec<Point> = mesh
        .vertices()
        .par_iter()
        .map(|&z| {
            let rho = geom::norm(z);
            if rho == 0.0 {
                return Ok(p.clone());
            }
            let target = curve.arc_length_param(&space, param_at(z[1].atan2(z[0])))?;
            space.geodesic_point(p, &target, rho.min(1.0))
        })
        .collect::<Result<_>>()?;
    MeshMap::new(mesh, images, space)
}

/// Relaxation at a fixed resolution.
fn relax(mut map: MeshMap, curve: &PolygonalCurve, mut params: Vec<f64>, cfg: &SolverConfig) -> Result<SolveResult> {
    let space = map.space.clone();
    let mesh = map.mesh.clone();
    let weights = mesh.cotangent_weights();
    let classes = mesh.interior_color_classes();
    let n = mesh.boundary().len();
    let pinned_slots = [0, n / 3, 2 * n / 3];
    for (j, &b) in mesh.boundary().iter().enumerate() {
        map.images[b] = curve.arc_length_param(&space, params[j])?;
    }
    let opts = FrechetOptions::default();
    let local = |images: &[Point], v: usize, x: &Point| -> Result<f64> {
        let mut f = 0.0;
        for (&u, &e) in mesh.neighbors(v).iter().zip(mesh.neighbor_edges(v)) {
            let d = space.distance(x, &images[u])?;
            f += weights[e] * d * d;
        }
        Ok(f)
    };
    let energy = |images: &[Point]| -> Result<f64> {
        let terms: Vec<f64> = mesh
            .edges()
            .par_iter()
            .enumerate()
            .map(|(e, ab)| space.distance(&images[ab[0]], &images[ab[1]]).map(|d| weights[e] * d * d))
            .collect::<Result<_>>()?;
        Ok(terms.iter().sum())
    };
    let mut energy_trace = Vec::new();
    let mut prev = energy(&map.images)?;
    let mut converged = false;
    let mut sweeps = 0;
    let mut slide_due = false;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        for class in &classes {
            let updates: Vec<Option<Point>> = class
                .par_iter()
                .map(|&v| {
                    let nbrs: Vec<Point> = mesh.neighbors(v).iter().map(|&u| map.images[u].clone()).collect();
                    let w: Vec<f64> = mesh.neighbor_edges(v).iter().map(|&e| weights[e]).collect();
                    let cand = match frechet_mean_with(&space, &nbrs, &w, &opts) {
                        Ok(p) => p,
                        Err(Error::NoConvergence { best, .. }) => best,
                        Err(e) => return Err(e),
                    };
                    // keep the previous iterate unless the candidate is strictly better
                    let old = local(&map.images, v, &map.images[v])?;
                    let new = local(&map.images, v, &cand)?;
                    Ok((new < old).then_some(cand))
                })
                .collect::<Result<_>>()?;
            for (&v, u) in class.iter().zip(updates) {
                if let Some(p) = u {
                    map.images[v] = p;
                }
            }
        }
        let sliding = cfg.boundary_mode == BoundaryMode::Sliding;
        let slid = sliding && (slide_due || sweeps % cfg.slide_every == 0);
        if slid {
            slide_boundary(&mut map, curve, &mut params, &pinned_slots, &weights)?;
            slide_due = false;
        }
        let e = energy(&map.images)?;
        energy_trace.push(e);
        let rel = if prev > 0.0 { (prev - e) / prev } else { 0.0 };
        prev = e;
        if rel < cfg.tol_energy {
            if !sliding || slid {
                converged = true;
                break;
            }
            slide_due = true;
        }
    }
    let area = map.area()?;
    Ok(SolveResult { map, energy_trace, area, converged, boundary_params: params, sweeps, curve: curve.clone(), config: cfg.clone() })
}

/// One pass of line searches over the free boundary vertices, each constrained
/// between its neighbors' parameters.
fn slide_boundary(
    map: &mut MeshMap,
    curve: &PolygonalCurve,
    params: &mut [f64],
    pinned: &[usize; 3],
    weights: &[f64],
) -> Result<()> {
    let space = map.space.clone();
    let mesh = map.mesh.clone();
    let n = params.len();
    let boundary = mesh.boundary().to_vec();
    for j in 0..n {
        if pinned.contains(&j) {
            continue;
        }
        let v = boundary[j];
        let lo = if j == 0 { params[n - 1] - 1.0 } else { params[j - 1] };
        let hi = if j + 1 == n { params[0] + 1.0 } else { params[j + 1] };
        let margin = 1e-3 * (hi - lo);
        let (lo, hi) = (lo + margin, hi - margin);
        let mut failed = None;
        let mut objective = |t: f64| -> f64 {
            let x = match curve.arc_length_param(&space, t) {
                Ok(x) => x,
                Err(e) => {
                    failed = Some(e);
                    return f64::INFINITY;
                }
            };
            let mut f = 0.0;
            for (&u, &e) in mesh.neighbors(v).iter().zip(mesh.neighbor_edges(v)) {
                match space.distance(&x, &map.images[u]) {
                    Ok(d) => f += weights[e] * d * d,
                    Err(err) => {
                        failed = Some(err);
                        return f64::INFINITY;
                    }
                }
            }
            f
        };
        let current = objective(params[j]);
        let (t, f) = geom::golden_min(&mut objective, lo, hi, 40);
        if let Some(e) = failed {
            return Err(e);
        }
        if f < current {
            params[j] = t;
            map.images[v] = curve.arc_length_param(&space, t)?;
        }
    }
    Ok(())
}
