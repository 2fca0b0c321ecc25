use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{build_funnel, curve_diameter, extend_plateau, area_growth, GrowthReport};
use crate::analyze::{flatness_report, injectivity_report, radius_grid, InjectivityReport};
use crate::curve::{total_curvature, PolygonalCurve};
use crate::error::Result;
use crate::mesh::PullbackMetric;
use crate::report::ComparisonReport;
use crate::solve::{solve_plateau, SolveResult, SolveSummary, SolverConfig};
use crate::space::TargetSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaryMilnorVerdict {
    Embedded,
    RigidConeCandidate,
    AboveThreshold,
    Inconclusive,
}

impl FaryMilnorVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Embedded => "embedded",
            Self::RigidConeCandidate => "rigid_cone_candidate",
            Self::AboveThreshold => "above_threshold",
            Self::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaryMilnorOptions {
    /// Tolerance for `κ = 4π`.
    pub tol_kappa: f64,
    /// Skip flatness and area growth.
    pub skip_funnel: bool,
    /// Injectivity scale `δ` as a fraction of the curve diameter.
    pub delta_fraction: f64,
    /// Embedded iff `min d_X/d_Z >= epsilon_ratio`, i.e. `ε = epsilon_ratio · δ`.
    pub epsilon_ratio: f64,
    pub injectivity_stride: usize,
    pub pullback_subdivision: usize,
    pub flat_tol: f64,
    pub cone_tol: f64,
    /// Funnel truncation in curve diameters.
    pub radius_factor: f64,
    pub portals_per_edge: usize,
    pub funnel_rings: usize,
    pub growth_radii: usize,
    pub growth_samples: usize,
}

impl Default for FaryMilnorOptions {
    fn default() -> Self {
        Self {
            tol_kappa: 1e-6,
            skip_funnel: false,
            delta_fraction: 0.1,
            epsilon_ratio: 0.1,
            injectivity_stride: 1,
            pullback_subdivision: 3,
            flat_tol: 1e-3,
            cone_tol: 0.1,
            radius_factor: 8.0,
            portals_per_edge: 16,
            funnel_rings: 24,
            growth_radii: 12,
            growth_samples: 16,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaryMilnorReport {
    pub kappa: f64,
    pub kappa_over_pi: f64,
    pub verdict: FaryMilnorVerdict,
    pub solve: Option<SolveSummary>,
    pub injectivity: Option<InjectivityReport>,
    pub flatness: Option<ComparisonReport>,
    pub growth: Option<GrowthReport>,
    /// Why the verdict is inconclusive, when it is.
    pub note: Option<String>,
}

/// Total curvature, Plateau solution and injectivity; in the borderline case
/// `κ = 4π` with a non-injective solution also flatness of the pull-back
/// metric and area growth of the extended plane.
pub fn fary_milnor(space: Arc<TargetSpace>, curve: &PolygonalCurve, cfg: &SolverConfig, opts: &FaryMilnorOptions) -> Result<FaryMilnorReport> {
    let kappa = total_curvature(&space, curve)?.kappa;
    let four_pi = 4.0 * PI;
    let mut report = FaryMilnorReport {
        kappa,
        kappa_over_pi: kappa / PI,
        verdict: FaryMilnorVerdict::Inconclusive,
        solve: None,
        injectivity: None,
        flatness: None,
        growth: None,
        note: None,
    };
    let result = match solve_plateau(space.clone(), curve, cfg) {
        Ok(r) => r,
        Err(e) => {
            report.note = Some(format!("solver failed: {e}"));
            if kappa > four_pi + opts.tol_kappa {
                report.verdict = FaryMilnorVerdict::AboveThreshold;
            }
            return Ok(report);
        }
    };
    fary_milnor_from(space, curve, &result, opts)
}

/// [`fary_milnor`] on an existing Plateau solution for `curve`.
pub fn fary_milnor_from(
    space: Arc<TargetSpace>,
    curve: &PolygonalCurve,
    result: &SolveResult,
    opts: &FaryMilnorOptions,
) -> Result<FaryMilnorReport> {
    let kappa = total_curvature(&space, curve)?.kappa;
    let four_pi = 4.0 * PI;
    let mut report = FaryMilnorReport {
        kappa,
        kappa_over_pi: kappa / PI,
        verdict: FaryMilnorVerdict::Inconclusive,
        solve: None,
        injectivity: None,
        flatness: None,
        growth: None,
        note: None,
    };
    let above = kappa > four_pi + opts.tol_kappa;
    let borderline = (kappa - four_pi).abs() <= opts.tol_kappa;
    report.solve = Some(result.summary()?);
    let pb = PullbackMetric::new(&result.map, opts.pullback_subdivision)?;
    let delta = opts.delta_fraction * curve_diameter(&space, curve)?;
    let inj = injectivity_report(&result.map, &pb, delta, opts.epsilon_ratio * delta, opts.injectivity_stride)?;
    let embedded = inj.embedded;
    report.injectivity = Some(inj);
    if above {
        report.verdict = FaryMilnorVerdict::AboveThreshold;
        return Ok(report);
    }
    if embedded {
        report.verdict = FaryMilnorVerdict::Embedded;
        return Ok(report);
    }
    if !borderline {
        report.note = Some("curvature below 4π but the solution is not injective at the mesh scale".into());
        return Ok(report);
    }
    if opts.skip_funnel {
        report.note = Some("flatness and growth skipped".into());
        return Ok(report);
    }
    let flat = flatness_report(&pb, opts.flat_tol, 1, opts.cone_tol);
    let rigid = flat.rigid_cone == Some(true);
    // center the growth profile on the cone point when there is one
    let center = flat
        .angle_defects
        .iter()
        .min_by(|a, b| a.defect.total_cmp(&b.defect))
        .map_or(0, |a| a.vertex);
    report.flatness = Some(flat);
    let ext = build_funnel(space.clone(), curve, opts.radius_factor * curve_diameter(&space, curve)?, opts.portals_per_edge)?;
    let plane = extend_plateau(result, &ext, opts.funnel_rings)?;
    let cap = 0.8 * ext.radius();
    let radii = radius_grid(cap / opts.growth_radii as f64, cap, opts.growth_radii);
    report.growth = Some(area_growth(&plane, &ext, &result.map.images[center], &radii, opts.growth_samples)?);
    if rigid {
        report.verdict = FaryMilnorVerdict::RigidConeCandidate;
    } else {
        report.note = Some("κ = 4π and not injective, but the pull-back metric is not a flat cone".into());
    }
    Ok(report)
}
