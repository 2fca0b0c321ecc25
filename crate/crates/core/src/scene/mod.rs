//! Scene files and the batch runner: a space, a curve, solver settings and
//! an ordered list of checks, producing a machine report, CSV profiles and
//! SVG plots.
//!
//! ```json
//! {
//!   "name": "flat_circle",
//!   "seed": 1,
//!   "space": {"file": "../data/spaces/euclidean2.json"},
//!   "curve": {"file": "../data/curves/circle64.json"},
//!   "solver": {"rings": 16},
//!   "analyses": [{"check": "isoperimetric", "max": 1.005}, {"check": "density"}]
//! }
//! ```

pub mod format;
pub mod svg;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analyze::{
    bishop_gromov_samples, boundary_distance, check_cn, check_monotonicity, corrupted_metric, density_profile,
    flatness_report, injectivity_report, isoperimetric_ratio, preimage_clusters, radius_grid,
};
use crate::curve::{total_curvature, CurveDesc, PolygonalCurve};
use crate::error::{Error, Result};
use crate::funnel::{
    area_growth, build_funnel, curve_diameter, extend_plateau, fary_milnor_from, key_estimate_check,
    FaryMilnorOptions, FaryMilnorVerdict,
};
use crate::mesh::{DomainPoint, MeshMap, PullbackMetric};
use crate::solve::{solve_plateau, SolveResult, SolveSummary, SolverConfig};
use crate::space::{Point, SpaceDesc, TargetSpace};

pub use format::{human, machine, machine_json};

pub const SCHEMA_VERSION: u32 = 1;

/// CN slack constant `c` in `cn_defect <= c · h`, frozen from the flat circle scene.
pub const CN_SLACK_C: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileRef {
    pub file: PathBuf,
}

/// Inline description or a file holding one, relative to the scene file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    File(FileRef),
    Inline(T),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub space: Source<SpaceDesc>,
    pub curve: Source<CurveDesc>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Where to center a density or growth profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Center {
    /// Image of the center of the domain disc.
    #[default]
    DomainCenter,
    /// Image of the interior vertex with the most negative pull-back angle defect.
    ConePoint,
    Vertex(usize),
    Point(Point),
}

fn d_true() -> bool {
    true
}
fn d_samples() -> usize {
    16
}
fn d_count() -> usize {
    12
}
fn d_r_min() -> f64 {
    0.1
}
fn d_r_max() -> f64 {
    0.9
}
fn d_mono_slack() -> f64 {
    0.03
}
fn d_theta_tol() -> f64 {
    0.02
}
fn d_iso_max() -> f64 {
    1.02
}
fn d_kappa_tol() -> f64 {
    1e-9
}
fn d_fraction() -> f64 {
    0.1
}
fn d_one() -> usize {
    1
}
fn d_subdivision() -> usize {
    3
}
fn d_cn_samples() -> usize {
    200
}
fn d_bg_centers() -> usize {
    5
}
fn d_bg_fractions() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}
fn d_bg_tol() -> f64 {
    0.05
}
fn d_flat_tol() -> f64 {
    1e-3
}
fn d_cone_tol() -> f64 {
    0.1
}
fn d_radius_factor() -> f64 {
    8.0
}
fn d_portals() -> usize {
    16
}
fn d_funnel_rings() -> usize {
    24
}
fn d_growth_tol() -> f64 {
    0.1
}
fn d_image_tol() -> f64 {
    0.02
}
fn d_cluster_tol() -> f64 {
    0.2
}

/// One requested check. Radii of density profiles are fractions of the
/// distance from the center to the boundary curve; growth radii are
/// fractions of the admissible cap `0.8 R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    Curvature {
        #[serde(default)]
        expect_over_pi: Option<f64>,
        #[serde(default = "d_kappa_tol")]
        tol: f64,
    },
    Area {
        expected: f64,
        rel_tol: f64,
    },
    Isoperimetric {
        #[serde(default)]
        min: Option<f64>,
        #[serde(default = "d_iso_max")]
        max: f64,
    },
    Density {
        #[serde(default)]
        center: Center,
        #[serde(default = "d_r_min")]
        r_min: f64,
        #[serde(default = "d_r_max")]
        r_max: f64,
        #[serde(default = "d_count")]
        count: usize,
        #[serde(default = "d_samples")]
        samples: usize,
        #[serde(default = "d_mono_slack")]
        slack: f64,
        #[serde(default)]
        expect_theta: Option<f64>,
        #[serde(default = "d_theta_tol")]
        theta_tol: f64,
    },
    Multiplicity {
        probe: Point,
        #[serde(default)]
        expect_count: Option<usize>,
        #[serde(default)]
        theta_min: Option<f64>,
        #[serde(default = "d_r_min")]
        r_min: f64,
        #[serde(default = "d_r_max")]
        r_max: f64,
        #[serde(default = "d_count")]
        count: usize,
        #[serde(default = "d_samples")]
        samples: usize,
        #[serde(default = "d_image_tol")]
        image_tol: f64,
        #[serde(default = "d_cluster_tol")]
        cluster_tol: f64,
    },
    Injectivity {
        #[serde(default = "d_fraction")]
        delta_fraction: f64,
        #[serde(default = "d_fraction")]
        epsilon_ratio: f64,
        #[serde(default = "d_one")]
        stride: usize,
        #[serde(default)]
        expect_embedded: Option<bool>,
        #[serde(default)]
        min_ratio: Option<f64>,
        #[serde(default)]
        max_ratio: Option<f64>,
    },
    Comparison {
        #[serde(default = "d_cn_samples")]
        cn_samples: usize,
        #[serde(default)]
        cn_slack_c: Option<f64>,
        #[serde(default = "d_bg_centers")]
        bg_centers: usize,
        #[serde(default = "d_bg_fractions")]
        bg_fractions: Vec<f64>,
        #[serde(default = "d_bg_tol")]
        bg_tol: f64,
        /// Also shrink the link of an interior vertex by this factor and
        /// require the CN test to flag it.
        #[serde(default)]
        corrupt: Option<f64>,
    },
    Flatness {
        #[serde(default = "d_flat_tol")]
        tol: f64,
        #[serde(default = "d_cone_tol")]
        cone_tol: f64,
        #[serde(default = "d_one")]
        max_cones: usize,
        #[serde(default)]
        expect_rigid: Option<bool>,
    },
    Growth {
        #[serde(default)]
        center: Center,
        #[serde(default = "d_radius_factor")]
        radius_factor: f64,
        #[serde(default = "d_portals")]
        portals_per_edge: usize,
        #[serde(default = "d_funnel_rings")]
        funnel_rings: usize,
        #[serde(default = "d_count")]
        count: usize,
        #[serde(default = "d_samples")]
        samples: usize,
        /// Defaults to `κ / 2π`.
        #[serde(default)]
        expect: Option<f64>,
        #[serde(default = "d_growth_tol")]
        tol: f64,
        #[serde(default = "d_mono_slack")]
        slack: f64,
        /// Random image points checked against the key estimate.
        #[serde(default)]
        key_probes: usize,
        #[serde(default = "d_image_tol")]
        image_tol: f64,
        #[serde(default = "d_cluster_tol")]
        cluster_tol: f64,
        #[serde(default = "d_subdivision")]
        pullback_subdivision: usize,
    },
    FaryMilnor {
        #[serde(default)]
        expect: Option<FaryMilnorVerdict>,
        #[serde(default)]
        options: FaryMilnorOptions,
        #[serde(default = "d_true")]
        write_details: bool,
    },
}

impl Analysis {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Curvature { .. } => "curvature",
            Self::Area { .. } => "area",
            Self::Isoperimetric { .. } => "isoperimetric",
            Self::Density { .. } => "density",
            Self::Multiplicity { .. } => "multiplicity",
            Self::Injectivity { .. } => "injectivity",
            Self::Comparison { .. } => "comparison",
            Self::Flatness { .. } => "flatness",
            Self::Growth { .. } => "growth",
            Self::FaryMilnor { .. } => "fary_milnor",
        }
    }

    fn needs_solution(&self) -> bool {
        !matches!(self, Self::Curvature { .. })
    }
}

/// Command-line overrides of scene settings.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub rings: Option<usize>,
    pub tol: Option<f64>,
    pub skip_funnel: bool,
}

/// A scene with its space and curve resolved.
#[derive(Clone, Debug)]
pub struct LoadedScene {
    pub scene: Scene,
    pub space_desc: SpaceDesc,
    pub curve_desc: CurveDesc,
    pub space: Arc<TargetSpace>,
    pub curve: PolygonalCurve,
    /// SHA-256 of the resolved scene, in hex.
    pub hash: String,
}

fn scene_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Scene(format!("{}: {e}", path.display()))
}

fn resolve<T: for<'de> Deserialize<'de> + Clone>(src: &Source<T>, base: &Path) -> Result<T> {
    match src {
        Source::Inline(t) => Ok(t.clone()),
        Source::File(f) => {
            let path = base.join(&f.file);
            let text = std::fs::read_to_string(&path).map_err(|e| scene_err(&path, e))?;
            serde_json::from_str(&text).map_err(|e| scene_err(&path, e))
        }
    }
}

impl Scene {
    pub fn parse(text: &str) -> Result<Self> {
        let scene: Scene = serde_json::from_str(text).map_err(|e| Error::Scene(e.to_string()))?;
        scene.solver.validate().map_err(|e| Error::Scene(e.to_string()))?;
        Ok(scene)
    }

    /// Reads a scene file and resolves its space and curve (relative paths
    /// are taken from the scene file's directory).
    pub fn load(path: &Path, overrides: &Overrides) -> Result<LoadedScene> {
        let text = std::fs::read_to_string(path).map_err(|e| scene_err(path, e))?;
        let scene = Self::parse(&text).map_err(|e| scene_err(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        scene.resolve(base, overrides)
    }

    pub fn resolve(mut self, base: &Path, overrides: &Overrides) -> Result<LoadedScene> {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        self.solver.seed = self.seed;
        if let Some(rings) = overrides.rings {
            self.solver.rings = rings;
        }
        if let Some(tol) = overrides.tol {
            self.solver.tol_energy = tol;
        }
        if overrides.skip_funnel {
            for a in &mut self.analyses {
                if let Analysis::FaryMilnor { options, .. } = a {
                    options.skip_funnel = true;
                }
            }
            self.analyses.retain(|a| !matches!(a, Analysis::Growth { .. }));
        }
        self.solver.validate().map_err(|e| Error::Scene(e.to_string()))?;
        let space_desc = resolve(&self.space, base)?;
        let curve_desc = resolve(&self.curve, base)?;
        let space = Arc::new(space_desc.build().map_err(|e| Error::Scene(e.to_string()))?);
        let curve = curve_desc.build(&space).map_err(|e| Error::Scene(e.to_string()))?;
        let resolved = json!({"scene": &self, "space": &space_desc, "curve": &curve_desc});
        let digest = Sha256::digest(machine_json(&resolved)?.as_bytes());
        let hash = digest.iter().map(|b| format!("{b:02x}")).collect();
        Ok(LoadedScene { scene: self, space_desc, curve_desc, space, curve, hash })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisEntry {
    pub check: String,
    pub passed: bool,
    /// One-line human summary.
    pub summary: String,
    /// File names relative to the output directory.
    pub artifacts: Vec<String>,
    pub details: Value,
}

/// Machine report of a run. Wall-clock timings are kept out of it (see
/// [`RunOutcome::timings`]) so that reports are byte-identical across runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub scene: String,
    pub scene_hash: String,
    pub seed: u64,
    pub solver: Option<SolveSummary>,
    pub solver_error: Option<String>,
    pub analyses: Vec<AnalysisEntry>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<Timing>,
}

impl RunOutcome {
    pub fn solver_failed(&self) -> bool {
        self.report.solver_error.is_some()
    }

    /// Writes `report.json`, `timings.json` and all artifacts into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, contents: &str| -> Result<()> {
            let p = dir.join(name);
            std::fs::write(&p, contents)?;
            written.push(p);
            Ok(())
        };
        put("report.json", &machine_json(&self.report)?)?;
        put("timings.json", &machine_json(&self.timings)?)?;
        for a in &self.artifacts {
            put(&a.name, &a.contents)?;
        }
        Ok(written)
    }
}

struct Ctx<'a> {
    loaded: &'a LoadedScene,
    result: &'a SolveResult,
    pb: Option<PullbackMetric>,
    artifacts: Vec<Artifact>,
}

impl Ctx<'_> {
    fn pullback(&mut self) -> Result<&PullbackMetric> {
        if self.pb.is_none() {
            self.pb = Some(PullbackMetric::new(&self.result.map, 3)?);
        }
        Ok(self.pb.as_ref().unwrap())
    }

    fn center(&mut self, c: &Center) -> Result<Point> {
        let map = &self.result.map;
        match c {
            Center::DomainCenter => Ok(map.images[0].clone()),
            Center::Vertex(v) => map
                .images
                .get(*v)
                .cloned()
                .ok_or_else(|| Error::InvalidConfig(format!("vertex {v} out of range"))),
            Center::Point(p) => {
                self.loaded.space.validate(p)?;
                Ok(p.clone())
            }
            Center::ConePoint => {
                let pb = self.pullback()?;
                let v = pb
                    .mesh()
                    .interior_vertices()
                    .into_iter()
                    .min_by(|&a, &b| pb.angle_defect(a).total_cmp(&pb.angle_defect(b)))
                    .unwrap_or(0);
                Ok(self.result.map.images[v].clone())
            }
        }
    }

    fn artifact(&mut self, name: String, contents: String) -> String {
        self.artifacts.push(Artifact { name: name.clone(), contents });
        name
    }
}

fn entry(check: &str, passed: bool, summary: String, artifacts: Vec<String>, details: Value) -> AnalysisEntry {
    AnalysisEntry { check: check.to_string(), passed, summary, artifacts, details }
}

fn within(x: f64, lo: Option<f64>, hi: Option<f64>) -> bool {
    lo.map_or(true, |l| x >= l) && hi.map_or(true, |h| x <= h)
}

/// Runs a loaded scene: solve, then the analyses in declared order.
pub fn run_scene(loaded: &LoadedScene) -> Result<RunOutcome> {
    let t0 = Instant::now();
    let solved = solve_plateau(loaded.space.clone(), &loaded.curve, &loaded.scene.solver);
    run_analyses(loaded, solved, t0)
}

/// Runs the analyses of a scene on a map solved earlier (for example by the
/// `solve` command) instead of solving again.
pub fn run_scene_on_map(loaded: &LoadedScene, map: MeshMap) -> Result<RunOutcome> {
    let t0 = Instant::now();
    if map.space.describe() != loaded.space_desc {
        return Err(Error::Scene("map was solved in a different space".into()));
    }
    let solved = SolveResult::from_map(map, &loaded.curve, loaded.scene.solver.clone());
    run_analyses(loaded, solved, t0)
}

fn run_analyses(loaded: &LoadedScene, solved: Result<SolveResult>, t0: Instant) -> Result<RunOutcome> {
    let mut timings = Vec::new();
    let scene = &loaded.scene;
    timings.push(Timing { stage: "solve".into(), seconds: t0.elapsed().as_secs_f64() });
    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        scene: scene.name.clone(),
        scene_hash: loaded.hash.clone(),
        seed: scene.seed,
        solver: None,
        solver_error: None,
        analyses: Vec::new(),
        passed: false,
    };
    let mut artifacts = Vec::new();
    match &solved {
        Ok(r) => {
            report.solver = Some(r.summary()?);
            artifacts.push(Artifact { name: "map.json".into(), contents: machine_json(&r.map_file())? });
            report.analyses.push(entry(
                "solve",
                true,
                format!("area {} after {} sweeps, converged {}", human(r.area), r.sweeps, r.converged),
                vec!["map.json".into()],
                Value::Null,
            ));
        }
        Err(e) => report.solver_error = Some(e.to_string()),
    }
    let mut ctx = solved.as_ref().ok().map(|r| Ctx { loaded, result: r, pb: None, artifacts: Vec::new() });
    for (i, a) in scene.analyses.iter().enumerate() {
        let t = Instant::now();
        let e = match (&mut ctx, a) {
            (_, Analysis::Curvature { expect_over_pi, tol }) => curvature_entry(loaded, *expect_over_pi, *tol),
            (None, a) if a.needs_solution() => {
                Ok(entry(a.name(), false, "not run: solver failed".into(), Vec::new(), Value::Null))
            }
            (Some(c), a) => run_analysis(c, i, a, scene.seed),
            (None, _) => unreachable!(),
        };
        // a failing analysis is a verdict, not a crash
        let e = e.unwrap_or_else(|err| entry(a.name(), false, format!("error: {err}"), Vec::new(), Value::Null));
        timings.push(Timing { stage: format!("{}#{i}", a.name()), seconds: t.elapsed().as_secs_f64() });
        report.analyses.push(e);
    }
    if let Some(c) = ctx {
        artifacts.extend(c.artifacts);
    }
    report.passed = report.solver_error.is_none() && report.analyses.iter().all(|a| a.passed);
    timings.push(Timing { stage: "total".into(), seconds: t0.elapsed().as_secs_f64() });
    Ok(RunOutcome { report, artifacts, timings })
}

/// Total curvature verdict of a curve, as printed by the command line.
pub fn curvature_line(kappa: f64) -> String {
    let over = kappa / PI;
    let four = 4.0 * PI;
    let flag = if (kappa - four).abs() <= 1e-6 {
        "= 4π"
    } else if kappa > four {
        "> 4π"
    } else {
        "< 4π"
    };
    let rounded = over.round();
    let pretty = if (over - rounded).abs() <= 1e-9 { format!("{}π", rounded as i64) } else { format!("{}π", human(over)) };
    format!("κ = {} rad = {pretty} ({flag})", human(kappa))
}

fn curvature_entry(loaded: &LoadedScene, expect: Option<f64>, tol: f64) -> Result<AnalysisEntry> {
    let rep = total_curvature(&loaded.space, &loaded.curve)?;
    let passed = expect.map_or(true, |e| (rep.kappa - e * PI).abs() <= tol);
    Ok(entry("curvature", passed, curvature_line(rep.kappa), Vec::new(), serde_json::to_value(&rep)?))
}

fn run_analysis(ctx: &mut Ctx, index: usize, a: &Analysis, seed: u64) -> Result<AnalysisEntry> {
    let result = ctx.result;
    let space = ctx.loaded.space.clone();
    let curve = &ctx.loaded.curve;
    let name = a.name();
    match a {
        Analysis::Curvature { .. } => unreachable!("handled by the caller"),
        Analysis::Area { expected, rel_tol } => {
            let err = (result.area - expected).abs() / expected.abs();
            Ok(entry(
                name,
                err <= *rel_tol,
                format!("area {} vs {} (relative error {})", human(result.area), human(*expected), human(err)),
                Vec::new(),
                json!({"area": result.area, "expected": expected, "relative_error": err, "rel_tol": rel_tol}),
            ))
        }
        Analysis::Isoperimetric { min, max } => {
            let ratio = isoperimetric_ratio(&result.map, curve)?;
            Ok(entry(
                name,
                within(ratio, *min, Some(*max)),
                format!("area / (L²/4π) = {}", human(ratio)),
                Vec::new(),
                json!({"ratio": ratio, "min": min, "max": max}),
            ))
        }
        Analysis::Density { center, r_min, r_max, count, samples, slack, expect_theta, theta_tol } => {
            let p = ctx.center(center)?;
            let boundary: Vec<Point> = result.map.mesh.boundary().iter().map(|&b| result.map.images[b].clone()).collect();
            let limit = boundary_distance(&*space, &boundary, &p)?;
            let radii = radius_grid(r_min * limit, r_max * limit, *count);
            let prof = density_profile(&result.map, &p, &radii, *samples)?;
            let mono = check_monotonicity(&prof, *slack);
            let worst = expect_theta.map(|e| prof.theta.iter().map(|t| (t - e).abs()).fold(0.0, f64::max));
            let passed = mono.passed && worst.map_or(true, |w| w <= *theta_tol);
            let rows: Vec<Vec<f64>> = (0..radii.len()).map(|k| vec![prof.radii[k], prof.theta[k], prof.stderr[k]]).collect();
            let csv = ctx.artifact(format!("density_{index}.csv"), format::csv_table(&["r", "theta", "stderr"], &rows)?);
            let plot = ctx.artifact(
                format!("density_{index}.svg"),
                svg::profile_plot(&format!("{}: θ(r)", ctx.loaded.scene.name), &prof.radii, &prof.theta, *expect_theta),
            );
            let mut summary = format!("monotonicity defect {} (slack {})", human(prof.monotonicity_defect), human(*slack));
            if let Some(w) = worst {
                summary.push_str(&format!(", max |θ - {}| = {}", human(expect_theta.unwrap()), human(w)));
            }
            Ok(entry(name, passed, summary, vec![csv, plot], json!({"profile": prof, "monotonicity": mono, "max_theta_error": worst})))
        }
        Analysis::Multiplicity { probe, expect_count, theta_min, r_min, r_max, count, samples, image_tol, cluster_tol } => {
            space.validate(probe)?;
            let pb = ctx.pullback()?;
            let clusters = preimage_clusters(&result.map, pb, probe, *image_tol, *cluster_tol)?;
            let boundary: Vec<Point> = result.map.mesh.boundary().iter().map(|&b| result.map.images[b].clone()).collect();
            let limit = boundary_distance(&*space, &boundary, probe)?;
            let radii = radius_grid(r_min * limit, r_max * limit, *count);
            let prof = density_profile(&result.map, probe, &radii, *samples)?;
            let n = clusters.len();
            let passed = expect_count.map_or(true, |c| c == n) && theta_min.map_or(true, |t| prof.theta_zero >= t);
            Ok(entry(
                name,
                passed,
                format!("{n} preimages, θ₀ = {}", human(prof.theta_zero)),
                Vec::new(),
                json!({"count": n, "preimages": clusters, "theta_zero": prof.theta_zero, "profile": prof}),
            ))
        }
        Analysis::Injectivity { delta_fraction, epsilon_ratio, stride, expect_embedded, min_ratio, max_ratio } => {
            let delta = delta_fraction * curve_diameter(&space, curve)?;
            let pb = ctx.pullback()?;
            let rep = injectivity_report(&result.map, pb, delta, epsilon_ratio * delta, *stride)?;
            let passed =
                expect_embedded.map_or(true, |e| e == rep.embedded) && within(rep.min_ratio, *min_ratio, *max_ratio);
            Ok(entry(
                name,
                passed,
                format!("min ratio {}, embedded {}", human(rep.min_ratio), rep.embedded),
                Vec::new(),
                serde_json::to_value(&rep)?,
            ))
        }
        Analysis::Comparison { cn_samples, cn_slack_c, bg_centers, bg_fractions, bg_tol, corrupt } => {
            let pb = ctx.pullback()?;
            let h = pb.lengths().iter().flatten().cloned().fold(0.0, f64::max);
            let slack = cn_slack_c.unwrap_or(CN_SLACK_C) * h;
            let mut rep = check_cn(pb, *cn_samples, seed)?;
            let interior = pb.mesh().interior_vertices();
            let k = (*bg_centers).min(interior.len()).max(1);
            let centers: Vec<usize> = (0..k).map(|i| interior[i * interior.len() / k]).collect();
            rep.bg_defects = bishop_gromov_samples(pb, &centers, bg_fractions)?;
            let bg = rep.bg_relative_max();
            let mut passed = rep.cn_defect_max <= slack && bg <= *bg_tol;
            let mut summary = format!(
                "CN defect {} (slack {}), Bishop-Gromov defect/r² {} (tol {})",
                human(rep.cn_defect_max),
                human(slack),
                human(bg),
                human(*bg_tol)
            );
            let mut detector = Value::Null;
            if let Some(f) = corrupt {
                let bad = corrupted_metric(pb, interior[0], *f, 3)?;
                let cn = check_cn(&bad, *cn_samples, seed)?;
                let caught = cn.cn_defect_max > slack;
                passed &= caught;
                summary.push_str(&format!(", corrupted metric CN defect {}", human(cn.cn_defect_max)));
                detector = json!({"factor": f, "cn_defect_max": cn.cn_defect_max, "detected": caught});
            }
            Ok(entry(
                name,
                passed,
                summary,
                Vec::new(),
                json!({"report": rep, "mesh_size": h, "cn_slack": slack, "bg_relative_max": bg, "corrupted": detector}),
            ))
        }
        Analysis::Flatness { tol, cone_tol, max_cones, expect_rigid } => {
            let pb = ctx.pullback()?;
            let rep = flatness_report(pb, *tol, *max_cones, *cone_tol);
            let mut values = vec![0.0; pb.mesh().vertex_count()];
            for d in &rep.angle_defects {
                values[d.vertex] = d.defect;
            }
            let rigid = rep.rigid_cone == Some(true);
            let passed = expect_rigid.map_or(true, |e| e == rigid);
            let outliers = rep.angle_defects.iter().filter(|d| d.defect.abs() > *tol).count();
            let min = rep.angle_defects.iter().map(|d| d.defect).fold(0.0, f64::min);
            let plot = svg::mesh_plot(
                &format!("{}: angle defects", ctx.loaded.scene.name),
                result.map.mesh.vertices(),
                result.map.mesh.triangles(),
                &values,
            );
            let plot = ctx.artifact(format!("defects_{index}.svg"), plot);
            Ok(entry(
                name,
                passed,
                format!("{outliers} vertices with |defect| > {}, most negative {}, rigid cone {rigid}", human(*tol), human(min)),
                vec![plot],
                serde_json::to_value(&rep)?,
            ))
        }
        Analysis::Growth {
            center,
            radius_factor,
            portals_per_edge,
            funnel_rings,
            count,
            samples,
            expect,
            tol,
            slack,
            key_probes,
            image_tol,
            cluster_tol,
            pullback_subdivision,
        } => {
            let p = ctx.center(center)?;
            let ext = build_funnel(space.clone(), curve, radius_factor * curve_diameter(&space, curve)?, *portals_per_edge)?;
            let plane = extend_plateau(result, &ext, *funnel_rings)?;
            let cap = 0.8 * ext.radius();
            let radii = radius_grid(cap / *count as f64, cap, *count);
            let g = area_growth(&plane, &ext, &p, &radii, *samples)?;
            let target = expect.unwrap_or(g.predicted);
            let err = (g.theta_infinity_estimate - target).abs();
            let mut passed = err <= *tol && g.monotonicity_defect <= *slack;
            let mut summary = format!(
                "θ∞ ≈ {} (expected {}), monotonicity defect {}",
                human(g.theta_infinity_estimate),
                human(target),
                human(g.monotonicity_defect)
            );
            let mut key = Value::Null;
            if *key_probes > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b65_795f_7072_6f62);
                let nt = result.map.mesh.triangle_count();
                let probes = (0..*key_probes)
                    .map(|_| {
                        let z = random_domain_point(&mut rng, nt);
                        result.map.eval(z.tri, z.bary)
                    })
                    .collect::<Result<Vec<Point>>>()?;
                let pb = PullbackMetric::new(&result.map, *pullback_subdivision)?;
                let k = key_estimate_check(&plane, &pb, ext.curvature().kappa, &probes, *image_tol, *cluster_tol)?;
                passed &= k.passed;
                summary.push_str(&format!(", key estimate: worst {} of bound {}", k.worst, k.bound));
                key = serde_json::to_value(&k)?;
            }
            let rows: Vec<Vec<f64>> = (0..g.radii.len()).map(|k| vec![g.radii[k], g.theta[k], g.stderr[k]]).collect();
            let csv = ctx.artifact(format!("growth_{index}.csv"), format::csv_table(&["r", "theta", "stderr"], &rows)?);
            let plot = ctx.artifact(
                format!("growth_{index}.svg"),
                svg::profile_plot(&format!("{}: extended θ(r)", ctx.loaded.scene.name), &g.radii, &g.theta, Some(target)),
            );
            Ok(entry(
                name,
                passed,
                summary,
                vec![csv, plot],
                json!({"growth": g, "funnel": ext.summary(), "extended_area": plane.area()?, "key_estimate": key}),
            ))
        }
        Analysis::FaryMilnor { expect, options, write_details } => {
            let rep = fary_milnor_from(space.clone(), curve, result, options)?;
            let passed = expect.map_or(true, |e| e == rep.verdict);
            let mut line = rep.verdict.as_str().to_string();
            if rep.verdict == FaryMilnorVerdict::AboveThreshold {
                line.push_str(&format!(" (κ/π = {})", human(rep.kappa_over_pi)));
            }
            let mut artifacts = Vec::new();
            if *write_details {
                artifacts.push(ctx.artifact(format!("fary_milnor_{index}.json"), machine_json(&rep)?));
            }
            let details = json!({"verdict": rep.verdict, "kappa": rep.kappa, "kappa_over_pi": rep.kappa_over_pi, "note": rep.note});
            Ok(entry(name, passed, line, artifacts, details))
        }
    }
}

/// Uniform random domain point, for probes.
pub fn random_domain_point<R: Rng>(rng: &mut R, triangles: usize) -> DomainPoint {
    let t = rng.gen_range(0..triangles);
    let (mut s, mut u): (f64, f64) = (rng.gen(), rng.gen());
    if s + u > 1.0 {
        (s, u) = (1.0 - s, 1.0 - u);
    }
    DomainPoint { tri: t, bary: [1.0 - s - u, s, u] }
}
