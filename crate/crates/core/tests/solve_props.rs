use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use plateau::curve::{regular_polygon, CurveDesc, PolygonalCurve};
use plateau::solve::{radial_cone_fill, solve_plateau, SolverConfig};
use plateau::space::SpaceDesc;
use plateau::{Point, TargetSpace};

fn data(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn cfg(rings: usize) -> SolverConfig {
    SolverConfig { rings, seed: 3, ..SolverConfig::default() }
}

#[test]
fn planar_polygon_solution_is_its_interior() {
    let s = Arc::new(TargetSpace::euclidean(2).unwrap());
    let c = CurveDesc::load(&data("curves/hexagon.json")).unwrap().build(&s).unwrap();
    let v: Vec<[f64; 2]> = c.vertices().iter().map(|p| [p.coords[0], p.coords[1]]).collect();
    let shoelace = 0.5 * (0..v.len()).map(|i| v[i][0] * v[(i + 1) % v.len()][1] - v[(i + 1) % v.len()][0] * v[i][1]).sum::<f64>().abs();
    let r = solve_plateau(s.clone(), &c, &cfg(8)).unwrap();
    assert!(r.converged);
    assert!(r.area <= shoelace + 1e-9 && r.area >= 0.97 * shoelace, "{} vs {shoelace}", r.area);
    // every image stays in the closed polygon (convex, so the hull is the polygon)
    for p in &r.map.images {
        for i in 0..v.len() {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            let side = (b[0] - a[0]) * (p.coords[1] - a[1]) - (b[1] - a[1]) * (p.coords[0] - a[0]);
            assert!(side >= -1e-9);
        }
    }
}

#[test]
fn energy_never_increases_and_beats_the_cone_fill() {
    let s = Arc::new(TargetSpace::euclidean(3).unwrap());
    let c = CurveDesc::load(&data("curves/nonplanar_a.json")).unwrap().build(&s).unwrap();
    let r = solve_plateau(s.clone(), &c, &cfg(8)).unwrap();
    for w in r.energy_trace.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
    }
    let centroid: Vec<f64> = (0..3).map(|k| c.vertices().iter().map(|p| p.coords[k]).sum::<f64>() / c.len() as f64).collect();
    let fill = radial_cone_fill(s, &Point::euclidean(&centroid), &c, 8).unwrap();
    assert!(r.area <= fill.area().unwrap() + 1e-9);
}

#[test]
fn solving_is_reproducible() {
    let s = Arc::new(TargetSpace::euclidean(2).unwrap());
    let c = PolygonalCurve::new(&s, regular_polygon(20, 1.0)).unwrap();
    let a = solve_plateau(s.clone(), &c, &cfg(8)).unwrap();
    let b = solve_plateau(s, &c, &cfg(8)).unwrap();
    assert_eq!(a.map.images, b.map.images);
    assert_eq!(a.energy_trace, b.energy_trace);
}

#[test]
fn disc_around_a_cone_tip_is_the_coned_polygon() {
    let s = Arc::new(SpaceDesc::load(&data("spaces/cone3pi.json")).unwrap().build().unwrap());
    let c = CurveDesc::load(&data("curves/cone3pi_48.json")).unwrap().build(&s).unwrap();
    // 48 isoceles triangles with apex angle 3π/48 at the tip
    let coned = 24.0 * (3.0 * PI / 48.0).sin();
    let r = solve_plateau(s, &c, &cfg(16)).unwrap();
    assert!(r.area <= coned + 1e-9 && r.area >= 0.97 * coned, "{} vs {coned}", r.area);
}

#[test]
fn invalid_configurations_are_rejected() {
    let s = Arc::new(TargetSpace::euclidean(2).unwrap());
    let c = PolygonalCurve::new(&s, regular_polygon(6, 1.0)).unwrap();
    let bad = SolverConfig { pinned: [0.5, 0.2, 0.9], ..SolverConfig::default() };
    assert!(solve_plateau(s.clone(), &c, &bad).is_err());
    let bad = SolverConfig { rings: 0, ..SolverConfig::default() };
    assert!(solve_plateau(s, &c, &bad).is_err());
}
