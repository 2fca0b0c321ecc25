//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use plateau::curve::{regular_polygon, total_curvature, CurveDesc, PolygonalCurve};
use plateau::funnel::{build_funnel, curve_diameter, fary_milnor, ExtPoint, FaryMilnorOptions, FaryMilnorVerdict};
use plateau::geom::Vec2;
use plateau::scene::{machine_json, run_scene, Overrides, RunOutcome, Scene};
use plateau::solve::SolverConfig;
use plateau::{Point, TargetSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const CANONICAL: [&str; 5] = ["flat_circle", "cone3pi", "example52", "nonplanar_a", "nonplanar_b"];

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

struct Run {
    name: &'static str,
    outcome: RunOutcome,
    json: String,
    /// Machine report of the same scene on a 4-thread pool.
    json_4: String,
}

impl Run {
    fn entry(&self, check: &str) -> Option<&Value> {
        self.outcome.report.analyses.iter().find(|a| a.check == check).map(|a| &a.details)
    }

    fn seconds(&self, stage: &str) -> f64 {
        self.outcome.timings.iter().filter(|t| t.stage == stage || t.stage.starts_with(&format!("{stage}#"))).map(|t| t.seconds).sum()
    }
}

fn run_on(threads: usize, name: &str) -> RunOutcome {
    let loaded = Scene::load(&root().join(format!("scenes/{name}.json")), &Overrides::default()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| run_scene(&loaded)).unwrap()
}

fn curve_file(name: &str, space: &TargetSpace) -> PolygonalCurve {
    CurveDesc::load(&root().join(format!("data/curves/{name}.json"))).unwrap().build(space).unwrap()
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn flat_equality(runs: &[Run]) -> Outcome {
    let r = &runs[0];
    let scene = Scene::load(&root().join("scenes/flat_circle.json"), &Overrides::default()).unwrap();
    let setup = scene.scene.solver.rings == 16 && scene.scene.solver.refinement_levels == 1 && scene.curve.len() == 64;
    let area = r.outcome.report.solver.as_ref().map_or(f64::NAN, |s| s.area);
    let err = (area - PI).abs() / PI;
    let iso = r.entry("isoperimetric").map_or(f64::NAN, |d| f(&d["ratio"]));
    let t = r.seconds("solve");
    check(
        setup && err <= 0.015 && (0.97..=1.005).contains(&iso) && t < 30.0,
        format!("area {area:.6} (rel. error {err:.2e}), iso ratio {iso:.5}, solve {t:.1} s single-threaded"),
    )
}

fn curvature_exactness() -> Outcome {
    let t = Instant::now();
    let e2 = TargetSpace::euclidean(2).unwrap();
    let square = total_curvature(&e2, &curve_file("square", &e2)).unwrap().kappa;
    let tri = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.75f64.sqrt()]].map(|c| Point::euclidean(&c)).to_vec();
    let tri = total_curvature(&e2, &PolygonalCurve::new(&e2, tri).unwrap()).unwrap().kappa;
    let gon = total_curvature(&e2, &PolygonalCurve::new(&e2, regular_polygon(64, 1.0)).unwrap()).unwrap().kappa;
    let e3 = TargetSpace::euclidean(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut fenchel_min = f64::INFINITY;
    for _ in 0..100 {
        let n = rng.gen_range(4..16);
        let pts = (0..n).map(|_| Point::euclidean(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])).collect();
        let k = total_curvature(&e3, &PolygonalCurve::new(&e3, pts).unwrap()).unwrap().kappa;
        fenchel_min = fenchel_min.min(k);
    }
    let secs = t.elapsed().as_secs_f64();
    let errs = [(square - 2.0 * PI).abs(), (tri - 2.0 * PI).abs(), (gon - 2.0 * PI).abs()];
    check(
        errs[0] <= 1e-12 && errs[1] <= 1e-12 && errs[2] <= 1e-9 && fenchel_min >= 2.0 * PI - 1e-9 && secs < 5.0,
        format!(
            "errors square {:.1e}, triangle {:.1e}, 64-gon {:.1e}; min κ/2π over 100 random 3-D polygons {:.4}; {secs:.2} s",
            errs[0],
            errs[1],
            errs[2],
            fenchel_min / (2.0 * PI)
        ),
    )
}

fn monotonicity(runs: &[Run]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut secs = 0.0;
    for r in runs {
        let (defect, count) = r.entry("density").map_or((f64::NAN, 0), |d| {
            (f(&d["profile"]["monotonicity_defect"]), d["profile"]["radii"].as_array().map_or(0, |a| a.len()))
        });
        ok &= defect <= 0.03 && count == 12;
        secs += r.seconds("solve") + r.seconds("density");
        parts.push(format!("{} {defect:.1e}", r.name));
    }
    ok &= secs < 120.0;
    check(ok, format!("defects: {}; {secs:.1} s", parts.join(", ")))
}

fn multiplicity(runs: &[Run]) -> Outcome {
    let d = runs[2].entry("multiplicity").cloned().unwrap_or(Value::Null);
    let count = d["count"].as_u64().unwrap_or(0);
    let theta0 = f(&d["theta_zero"]);
    check(count == 2 && theta0 >= 1.9, format!("{count} preimages, θ₀ = {theta0:.4}"))
}

fn key_estimate(runs: &[Run]) -> Outcome {
    let g52 = runs[2].entry("growth").cloned().unwrap_or(Value::Null);
    let gflat = runs[0].entry("growth").cloned().unwrap_or(Value::Null);
    let theta52 = f(&g52["growth"]["theta_infinity_estimate"]);
    let kappa = f(&g52["funnel"]["kappa"]);
    let probes = g52["key_estimate"]["counts"].as_array().map_or(0, |a| a.len());
    let worst = g52["key_estimate"]["worst"].as_u64().unwrap_or(u64::MAX);
    let theta_flat = f(&gflat["growth"]["theta_infinity_estimate"]);
    let secs = runs[2].seconds("growth") + runs[0].seconds("growth");
    check(
        (theta52 - 2.0).abs() <= 0.1
            && (kappa / (2.0 * PI) - 2.0).abs() <= 1e-9
            && probes == 50
            && worst <= 2
            && (theta_flat - 1.0).abs() <= 0.05
            && secs < 180.0,
        format!(
            "Example 5.2 θ∞ ≈ {theta52:.4} (κ/2π = {:.4}), worst of {probes} probes {worst}; flat θ∞ ≈ {theta_flat:.4}; {secs:.1} s",
            kappa / (2.0 * PI)
        ),
    )
}

fn verdicts(runs: &[Run]) -> Outcome {
    let t = Instant::now();
    let opts = FaryMilnorOptions::default();
    let e2 = Arc::new(TargetSpace::euclidean(2).unwrap());
    let convex = fary_milnor(e2.clone(), &curve_file("hexagon", &e2), &SolverConfig::default(), &opts).unwrap().verdict;
    let e3 = Arc::new(TargetSpace::euclidean(3).unwrap());
    let trefoil = fary_milnor(e3.clone(), &curve_file("trefoil6", &e3), &SolverConfig::default(), &opts).unwrap().verdict;
    let ex52 = runs[2].entry("fary_milnor").map(|d| d["verdict"].clone()).unwrap_or(Value::Null);
    let defects: Vec<f64> = runs[2]
        .entry("flatness")
        .and_then(|d| d["angle_defects"].as_array().cloned())
        .unwrap_or_default()
        .iter()
        .map(|d| f(&d["defect"]))
        .collect();
    let cones = defects.iter().filter(|d| (**d + 2.0 * PI).abs() <= 0.1).count();
    let others = defects.iter().filter(|d| (**d + 2.0 * PI).abs() > 0.1).map(|d| d.abs()).fold(0.0, f64::max);
    let secs = t.elapsed().as_secs_f64() + runs[2].seconds("fary_milnor") + runs[2].seconds("flatness");
    check(
        convex == FaryMilnorVerdict::Embedded
            && ex52 == "rigid_cone_candidate"
            && cones == 1
            && others <= 1e-3
            && trefoil == FaryMilnorVerdict::AboveThreshold
            && secs < 180.0,
        format!(
            "hexagon {}, Example 5.2 {} ({cones} defect near -2π, others ≤ {others:.1e}), trefoil {}; {secs:.1} s",
            convex.as_str(),
            ex52.as_str().unwrap_or("missing"),
            trefoil.as_str()
        ),
    )
}

fn comparison(runs: &[Run]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut detected = false;
    for r in runs {
        let d = r.entry("comparison").cloned().unwrap_or(Value::Null);
        let cn = f(&d["report"]["cn_defect_max"]);
        let slack = f(&d["cn_slack"]);
        let bg = f(&d["bg_relative_max"]);
        ok &= cn <= slack && bg <= 0.05;
        if d["corrupted"]["detected"].as_bool() == Some(true) && f(&d["corrupted"]["cn_defect_max"]) > 0.0 {
            detected = true;
        }
        parts.push(format!("{} CN {cn:.1e}/{slack:.1e} BG {bg:.1e}", r.name));
    }
    check(ok && detected, format!("{}; corrupted metric detected {detected}", parts.join(", ")))
}

/// Planar position of a funnel point of the counter-clockwise unit square.
fn square_development(p: &ExtPoint) -> Vec2 {
    let v = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let ExtPoint::Funnel { chart, pos } = p else { unreachable!() };
    let outward = |e: usize| {
        let (a, b) = (v[e], v[(e + 1) % 4]);
        [b[1] - a[1], a[0] - b[0]]
    };
    let e = chart / 2;
    if chart % 2 == 0 {
        let (a, b) = (v[e], v[(e + 1) % 4]);
        let n = outward(e);
        [a[0] + pos[0] * (b[0] - a[0]) + pos[1] * n[0], a[1] + pos[0] * (b[1] - a[1]) + pos[1] * n[1]]
    } else {
        // sector at the end vertex of edge e, measured from that edge's normal
        let (rho, phi) = (pos[0].hypot(pos[1]), pos[0].atan2(pos[1]));
        let n = outward(e);
        let (c, s) = (phi.cos(), phi.sin());
        let d = [c * n[0] - s * n[1], s * n[0] + c * n[1]];
        let w = v[(e + 1) % 4];
        [w[0] + rho * d[0], w[1] + rho * d[1]]
    }
}

fn oracles() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut cone_err: f64 = 0.0;
    for alpha in [2.0 * PI, 3.0 * PI, 4.0 * PI] {
        let s = TargetSpace::cone(alpha).unwrap();
        let TargetSpace::Cone(c) = &s else { unreachable!() };
        for _ in 0..1000 {
            let (r1, r2): (f64, f64) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
            let (t1, t2): (f64, f64) = (rng.gen_range(0.0..alpha), rng.gen_range(0.0..alpha));
            let mut gap = (t1 - t2).abs();
            gap = gap.min(alpha - gap);
            let want = if gap >= PI { r1 + r2 } else { (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * gap.cos()).max(0.0).sqrt() };
            let got = s.distance(&c.point(r1, t1), &c.point(r2, t2)).unwrap();
            cone_err = cone_err.max((got - want).abs());
        }
    }
    let e2 = Arc::new(TargetSpace::euclidean(2).unwrap());
    let square = curve_file("square", &e2);
    let radius = 8.0 * curve_diameter(&e2, &square).unwrap();
    let ext = build_funnel(e2, &square, radius, 16).unwrap();
    let sample = |rng: &mut ChaCha8Rng| {
        let k = rng.gen_range(0..4);
        if rng.gen_bool(0.5) {
            ext.strip_point(k, rng.gen_range(0.0..1.0), rng.gen_range(0.0..0.4 * radius))
        } else {
            ext.sector_point(k, rng.gen_range(0.0..0.4 * radius), rng.gen_range(0.0..0.5 * PI))
        }
    };
    let mut funnel_err: f64 = 0.0;
    for _ in 0..100 {
        let (p, q) = (sample(&mut rng), sample(&mut rng));
        let (a, b) = (square_development(&p), square_development(&q));
        let want = (a[0] - b[0]).hypot(a[1] - b[1]);
        funnel_err = funnel_err.max((ext.extended_distance(&p, &q).unwrap() - want).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    check(
        cone_err <= 1e-9 && funnel_err <= 1e-6 && secs < 30.0,
        format!("cone max error {cone_err:.1e} over 3000 queries, square funnel max error {funnel_err:.1e} over 100; {secs:.2} s"),
    )
}

fn determinism(runs: &[Run]) -> Outcome {
    let differing: Vec<&str> = runs.iter().filter(|r| r.json != r.json_4).map(|r| r.name).collect();
    check(differing.is_empty(), format!("1 vs 4 threads, {} scenes; differing: {differing:?}", runs.len()))
}

#[test]
fn acceptance() {
    let t = Instant::now();
    let runs: Vec<Run> = CANONICAL
        .iter()
        .map(|&name| {
            let outcome = run_on(1, name);
            let json = machine_json(&outcome.report).unwrap();
            let json_4 = machine_json(&run_on(4, name).report).unwrap();
            Run { name, outcome, json, json_4 }
        })
        .collect();
    let results = [
        ("flat Plateau equality", flat_equality(&runs)),
        ("total curvature exactness", curvature_exactness()),
        ("density monotonicity", monotonicity(&runs)),
        ("density at least multiplicity", multiplicity(&runs)),
        ("key estimate and area growth", key_estimate(&runs)),
        ("Fary-Milnor verdicts", verdicts(&runs)),
        ("comparison geometry", comparison(&runs)),
        ("oracle equivalence", oracles()),
        ("determinism", determinism(&runs)),
    ];
    println!();
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {} {name}: {}  {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance run took {:?}", Duration::from_secs(t.elapsed().as_secs()));
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, (_, o))| !o.passed).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
