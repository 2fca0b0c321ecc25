//! Weighted Fréchet means (barycenters).
//!
//! Flat cases use the weighted centroid. Elsewhere the mean is found by the
//! gradient iteration `x <- exp_x(Σ w_i log_x(p_i) / W)` with backtracking,
//! which is exact in one step whenever the inputs lie in a common flat piece.

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use crate::space::glued::xy;
use crate::space::{Point, TargetSpace};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrechetOptions {
    /// Residual tolerance relative to the spread of the inputs.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for FrechetOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, max_iter: 500 }
    }
}

pub fn frechet_mean(space: &TargetSpace, points: &[Point], weights: &[f64]) -> Result<Point> {
    frechet_mean_with(space, points, weights, &FrechetOptions::default())
}

/// Minimizer of `Σ w_i d(x, p_i)^2`. Never returns a point whose objective is
/// worse than that of the best input point.
pub fn frechet_mean_with(space: &TargetSpace, points: &[Point], weights: &[f64], opts: &FrechetOptions) -> Result<Point> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::InvalidConfig("Fréchet mean needs one weight per point".into()));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) || !weights.iter().any(|w| *w > 0.0) {
        return Err(Error::InvalidConfig("Fréchet weights must be nonnegative with one positive".into()));
    }
    for p in points {
        space.validate(p)?;
    }
    let active: Vec<(&Point, f64)> = points.iter().zip(weights.iter().copied()).filter(|(_, w)| *w > 0.0).collect();
    if active.iter().all(|(p, _)| *p == active[0].0) {
        return Ok(active[0].0.clone());
    }
    let total: f64 = active.iter().map(|(_, w)| w).sum();
    let objective = |x: &Point| -> Result<f64> {
        let mut f = 0.0;
        for (p, w) in &active {
            let d = space.distance(x, p)?;
            f += w * d * d;
        }
        Ok(f)
    };
    if let TargetSpace::Euclidean { dim } = space {
        let mut c = vec![0.0; *dim];
        for (p, w) in &active {
            for (ci, pi) in c.iter_mut().zip(&p.coords) {
                *ci += w * pi;
            }
        }
        for ci in &mut c {
            *ci /= total;
        }
        return Ok(Point::new(0, c));
    }
    // scale for the residual tolerance
    let mut spread: f64 = 0.0;
    for (p, _) in &active {
        spread = spread.max(space.distance(active[0].0, p)?);
    }
    let tol = opts.rel_tol * spread.max(1e-300);

    let mut best_input = active[0].0.clone();
    let mut best_input_f = f64::INFINITY;
    for (p, _) in &active {
        let f = objective(p)?;
        if f < best_input_f {
            best_input_f = f;
            best_input = (*p).clone();
        }
    }

    let result = match space {
        TargetSpace::Glued(g) => {
            let it = glued_mean(g, &active, total, tol, opts.max_iter)?;
            // the apex attracts spread configurations just like a cone tip
            let apex = g.point(0, 0.0, 0.0);
            let f_apex = objective(&apex)?;
            match it {
                Ok((_, f)) | Err((_, f, _, _)) if f > f_apex => Ok((apex, f_apex)),
                other => other,
            }
        }
        TargetSpace::Cone(c) => {
            let tip = c.tip();
            let start = if best_input.coords[0] > 0.0 { best_input.clone() } else { active.iter().find(|(p, _)| p.coords[0] > 0.0).unwrap().0.clone() };
            let it = gradient_iteration(
                start,
                |x| {
                    // Newton-scaled step: targets reached through the tip curve
                    // the objective by (r_x + r_p)/r_x across the radial direction
                    let rx = x.coords[0];
                    let mut v = [0.0, 0.0];
                    let mut h = 0.0;
                    for (p, w) in &active {
                        v = geom::add(v, geom::scale(c.log(x, p), *w / total));
                        let through_tip = p.coords[0] == 0.0 || c.separation(x.coords[1], p.coords[1]) >= std::f64::consts::PI;
                        h += if through_tip { *w * (rx + p.coords[0]) / rx } else { *w };
                    }
                    Ok([v[0], v[1] * total / h])
                },
                |x, v| c.exp(x, v),
                &objective,
                tol,
                opts.max_iter,
            )?;
            // the tip is a critical candidate the chart iteration cannot step onto
            let f_tip = objective(&tip)?;
            match it {
                Ok((_, f)) | Err((_, f, _, _)) if f > f_tip => Ok((tip, f_tip)),
                other => other,
            }
        }
        TargetSpace::Complex(cx) => gradient_iteration(
            best_input.clone(),
            |x| {
                let mut v = [0.0, 0.0];
                for (p, w) in &active {
                    v = geom::add(v, geom::scale(cx.log(x, p)?, *w / total));
                }
                Ok(v)
            },
            |x, v| cx.exp(x, v),
            &objective,
            tol,
            opts.max_iter,
        )?,
        TargetSpace::Euclidean { .. } => unreachable!(),
    };
    match result {
        Ok((x, f)) => {
            if f <= best_input_f {
                Ok(space.canonical(&x))
            } else {
                Ok(best_input)
            }
        }
        Err((x, f, residual, iterations)) => {
            let best = if f <= best_input_f { space.canonical(&x) } else { best_input };
            Err(Error::NoConvergence { best, residual, iterations })
        }
    }
}

type IterOutcome = std::result::Result<(Point, f64), (Point, f64, f64, usize)>;

/// Gradient iteration with backtracking. The outer `Result` carries oracle
/// errors; the inner one distinguishes convergence from running out of
/// iterations (best point, objective, residual, iterations).
fn gradient_iteration<G, E, F>(start: Point, mut grad: G, exp: E, objective: &F, tol: f64, max_iter: usize) -> Result<IterOutcome>
where
    G: FnMut(&Point) -> Result<Vec2>,
    E: Fn(&Point, Vec2) -> Point,
    F: Fn(&Point) -> Result<f64>,
{
    let mut x = start;
    let mut fx = objective(&x)?;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let v = grad(&x)?;
        residual = geom::norm(v);
        if residual <= tol {
            return Ok(Ok((x, fx)));
        }
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let y = exp(&x, geom::scale(v, step));
            let fy = objective(&y)?;
            if fy < fx {
                x = y;
                fx = fy;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            // flat direction at the current iterate: keep it
            return Ok(Ok((x, fx)));
        }
    }
    Ok(Err((x, fx, residual, max_iter)))
}

/// Mean in two planes glued along a sector: the global minimizer lies in one of
/// the planes, and the objective restricted to each plane is convex.
fn glued_mean(
    g: &crate::space::GluedPlanes,
    active: &[(&Point, f64)],
    total: f64,
    tol: f64,
    max_iter: usize,
) -> Result<IterOutcome> {
    for k in 0..2 {
        if active.iter().all(|(p, _)| g.in_plane(p, k)) {
            let mut c = [0.0, 0.0];
            for (p, w) in active {
                c = geom::add(c, geom::scale(xy(p), *w / total));
            }
            let x = g.point(k, c[0], c[1]);
            let f = plane_objective(g, k, c, active);
            return Ok(Ok((x, f)));
        }
    }
    let mut best: Option<IterOutcome> = None;
    for k in 0..2 {
        let mut c = [0.0, 0.0];
        for (p, w) in active {
            c = geom::add(c, geom::scale(xy(p), *w / total));
        }
        let mut x = c;
        let mut fx = plane_objective(g, k, x, active);
        let mut done = false;
        let mut residual = f64::INFINITY;
        for _ in 0..max_iter {
            // ∇(d²/2) = d · (x - s)/|x - s| with s the first waypoint
            let mut grad = [0.0, 0.0];
            for (p, w) in active {
                let (d, s) = g.plane_distance(k, x, p);
                let dir = geom::sub(x, s);
                let n = geom::norm(dir);
                if n > 0.0 {
                    grad = geom::add(grad, geom::scale(dir, *w * d / (n * total)));
                }
            }
            residual = geom::norm(grad);
            if residual <= tol {
                done = true;
                break;
            }
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..50 {
                let y = geom::sub(x, geom::scale(grad, step));
                let fy = plane_objective(g, k, y, active);
                if fy < fx {
                    x = y;
                    fx = fy;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                done = true;
                break;
            }
        }
        let pt = g.point(k, x[0], x[1]);
        let outcome = if done { Ok((pt, fx)) } else { Err((pt, fx, residual, max_iter)) };
        let f_of = |o: &IterOutcome| match o {
            Ok((_, f)) => *f,
            Err((_, f, _, _)) => *f,
        };
        if best.as_ref().map_or(true, |b| fx < f_of(b)) {
            best = Some(outcome);
        }
    }
    Ok(best.unwrap())
}

fn plane_objective(g: &crate::space::GluedPlanes, k: usize, x: Vec2, active: &[(&Point, f64)]) -> f64 {
    active
        .iter()
        .map(|(p, w)| {
            let d = g.plane_distance(k, x, p).0;
            w * d * d
        })
        .sum()
}
