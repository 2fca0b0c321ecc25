use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use plateau::analyze::{boundary_distance, density_profile, radius_grid};
use plateau::curve::{total_curvature, CurveDesc, PolygonalCurve};
use plateau::funnel::{
    area_growth, build_funnel, curve_diameter, extend_plateau, fary_milnor, FaryMilnorOptions, FaryMilnorVerdict,
};
use plateau::mesh::MeshMap;
use plateau::scene::{self, curvature_line, human, machine_json, Overrides, RunOutcome, Scene};
use plateau::solve::{solve_plateau, SolverConfig};
use plateau::space::{SpaceDesc, TargetSpace};

/// Discrete Plateau solver with density, comparison and Fáry-Milnor checks.
#[derive(Parser)]
#[command(name = "plateau", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Random seed for the solver and sampled checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 reproduces parallel results exactly.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Rings of the domain mesh.
    #[arg(long, global = true)]
    rings: Option<usize>,
    /// Relative energy tolerance of the solver.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scene and run its checks.
    Run {
        scene: PathBuf,
        /// Drop funnel growth checks and stop Fáry-Milnor after injectivity.
        #[arg(long)]
        skip_funnel: bool,
    },
    /// Total curvature of a closed polygon.
    Curvature {
        curve: PathBuf,
        /// Target space description; Euclidean of the coordinate dimension by default.
        #[arg(long)]
        space: Option<PathBuf>,
    },
    /// Solve the Plateau problem and write the map.
    Solve {
        curve: PathBuf,
        #[arg(long)]
        space: Option<PathBuf>,
    },
    /// Run the checks of a scene, optionally on a map written by `solve`.
    Analyze {
        scene: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        skip_funnel: bool,
    },
    /// Attach the flat funnel and measure area growth of the extended plane.
    Funnel {
        curve: PathBuf,
        #[arg(long)]
        space: Option<PathBuf>,
        /// Funnel truncation radius in curve diameters.
        #[arg(long, default_value_t = 8.0)]
        radius_factor: f64,
    },
    /// Fáry-Milnor verdict for a closed polygon.
    FaryMilnor {
        curve: PathBuf,
        #[arg(long)]
        space: Option<PathBuf>,
        /// Run only the solver and the injectivity check.
        #[arg(long)]
        skip_funnel: bool,
        /// Tolerance for total curvature equal to 4π.
        #[arg(long, default_value_t = 1e-6)]
        tol_kappa: f64,
    },
}

/// Failures that map to dedicated exit codes.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Solver(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Run { scene, skip_funnel } => {
            let loaded = load_scene(scene, g, *skip_funnel)?;
            let outcome = scene::run_scene(&loaded).map_err(|e| Failure::Input(e.into()))?;
            finish_run(&loaded.scene, scene, g, outcome)
        }
        Command::Analyze { scene, map, skip_funnel } => {
            let loaded = load_scene(scene, g, *skip_funnel)?;
            let outcome = match map {
                Some(m) => {
                    let map = MeshMap::load(m).with_context(|| format!("reading map {}", m.display()))?;
                    scene::run_scene_on_map(&loaded, map)
                }
                None => scene::run_scene(&loaded),
            }
            .map_err(|e| Failure::Input(e.into()))?;
            finish_run(&loaded.scene, scene, g, outcome)
        }
        Command::Curvature { curve, space } => {
            let (space, curve) = load_curve(curve, space.as_deref())?;
            let rep = total_curvature(&space, &curve).map_err(anyhow::Error::from)?;
            println!("{}", curvature_line(rep.kappa));
            if let Some(dir) = &g.out {
                write(dir, "curvature.json", &machine_json(&rep).map_err(anyhow::Error::from)?)?;
            }
            Ok(true)
        }
        Command::Solve { curve, space } => {
            let (space, curve) = load_curve(curve, space.as_deref())?;
            let r = solve_plateau(space, &curve, &solver_config(g)?).map_err(|e| Failure::Solver(e.into()))?;
            let summary = r.summary().map_err(|e| Failure::Solver(e.into()))?;
            println!("area {} after {} sweeps, converged {}", human(r.area), r.sweeps, r.converged);
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("out/solve"));
            write(&dir, "map.json", &machine_json(&r.map_file()).map_err(anyhow::Error::from)?)?;
            write(&dir, "solve.json", &machine_json(&summary).map_err(anyhow::Error::from)?)?;
            println!("map: {}", dir.join("map.json").display());
            Ok(true)
        }
        Command::Funnel { curve, space, radius_factor } => {
            let (space, curve) = load_curve(curve, space.as_deref())?;
            funnel(g, space, &curve, *radius_factor)
        }
        Command::FaryMilnor { curve, space, skip_funnel, tol_kappa } => {
            let (space, curve) = load_curve(curve, space.as_deref())?;
            let opts = FaryMilnorOptions { skip_funnel: *skip_funnel, tol_kappa: *tol_kappa, ..Default::default() };
            let rep = fary_milnor(space, &curve, &solver_config(g)?, &opts).map_err(|e| Failure::Solver(e.into()))?;
            let mut line = rep.verdict.as_str().to_string();
            if rep.verdict == FaryMilnorVerdict::AboveThreshold {
                line.push_str(&format!(" (κ/π = {})", human(rep.kappa_over_pi)));
            }
            if let Some(note) = &rep.note {
                line.push_str(&format!(": {note}"));
            }
            println!("{line}");
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("out/fary_milnor"));
            write(&dir, "fary_milnor.json", &machine_json(&rep).map_err(anyhow::Error::from)?)?;
            println!("report: {}", dir.join("fary_milnor.json").display());
            Ok(true)
        }
    }
}

fn load_scene(path: &Path, g: &Global, skip_funnel: bool) -> Result<scene::LoadedScene, Failure> {
    let overrides = Overrides { seed: g.seed, rings: g.rings, tol: g.tol, skip_funnel };
    Ok(Scene::load(path, &overrides).map_err(anyhow::Error::from)?)
}

fn finish_run(scene: &Scene, path: &Path, g: &Global, outcome: RunOutcome) -> Result<bool, Failure> {
    let dir = match (&g.out, &scene.output_dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => path.parent().unwrap_or(Path::new(".")).join(d),
        (None, None) => PathBuf::from("out").join(&scene.name),
    };
    outcome.write(&dir).map_err(|e| Failure::Input(e.into()))?;
    let rep = &outcome.report;
    for a in &rep.analyses {
        println!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.check, a.summary);
    }
    println!("report: {}", dir.join("report.json").display());
    if let Some(e) = &rep.solver_error {
        return Err(Failure::Solver(anyhow!("{e} (partial report written)")));
    }
    Ok(rep.passed)
}

fn solver_config(g: &Global) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::default();
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(r) = g.rings {
        cfg.rings = r;
    }
    if let Some(t) = g.tol {
        cfg.tol_energy = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn load_curve(curve: &Path, space: Option<&Path>) -> Result<(Arc<TargetSpace>, PolygonalCurve)> {
    let desc = CurveDesc::load(curve).with_context(|| format!("reading curve {}", curve.display()))?;
    let space = match space {
        Some(p) => SpaceDesc::load(p).with_context(|| format!("reading space {}", p.display()))?.build()?,
        None => {
            let coords = desc.coords.as_ref().ok_or_else(|| anyhow!("chart-addressed curves need --space"))?;
            let dim = coords.first().map_or(0, |c| c.len());
            TargetSpace::euclidean(dim)?
        }
    };
    let curve = desc.build(&space).with_context(|| format!("building curve {}", curve.display()))?;
    Ok((Arc::new(space), curve))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = dir.join(name);
    std::fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))?;
    Ok(())
}

fn funnel(g: &Global, space: Arc<TargetSpace>, curve: &PolygonalCurve, radius_factor: f64) -> Result<bool, Failure> {
    let r = solve_plateau(space.clone(), curve, &solver_config(g)?).map_err(|e| Failure::Solver(e.into()))?;
    let run = || -> plateau::Result<_> {
        let ext = build_funnel(space.clone(), curve, radius_factor * curve_diameter(&space, curve)?, 16)?;
        let plane = extend_plateau(&r, &ext, 24)?;
        let cap = 0.8 * ext.radius();
        let growth = area_growth(&plane, &ext, &r.map.images[0], &radius_grid(cap / 12.0, cap, 12), 16)?;
        // the disc profile around the same center, for comparison
        let boundary: Vec<_> = r.map.mesh.boundary().iter().map(|&b| r.map.images[b].clone()).collect();
        let limit = boundary_distance(&*space, &boundary, &r.map.images[0])?;
        let disc = density_profile(&r.map, &r.map.images[0], &radius_grid(0.1 * limit, 0.9 * limit, 12), 16)?;
        Ok((ext, plane, growth, disc))
    };
    let (ext, plane, growth, disc) = run().map_err(anyhow::Error::from)?;
    println!(
        "funnel: κ/2π = {}, θ∞ ≈ {} (error {}), extended area {}",
        human(growth.predicted),
        human(growth.theta_infinity_estimate),
        human(growth.error),
        human(plane.area().map_err(anyhow::Error::from)?)
    );
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("out/funnel"));
    let report = serde_json::json!({"funnel": ext.summary(), "growth": growth, "disc_profile": disc});
    write(&dir, "funnel.json", &machine_json(&report).map_err(anyhow::Error::from)?)?;
    let rows: Vec<Vec<f64>> = (0..growth.radii.len()).map(|k| vec![growth.radii[k], growth.theta[k], growth.stderr[k]]).collect();
    let csv = scene::format::csv_table(&["r", "theta", "stderr"], &rows).map_err(anyhow::Error::from)?;
    write(&dir, "growth.csv", &csv)?;
    write(&dir, "growth.svg", &scene::svg::profile_plot("extended θ(r)", &growth.radii, &growth.theta, Some(growth.predicted)))?;
    println!("report: {}", dir.join("funnel.json").display());
    Ok(true)
}
