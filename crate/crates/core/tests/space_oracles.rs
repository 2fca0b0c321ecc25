use std::f64::consts::PI;

use plateau::space::{frechet_mean, upper_angle, AngleQuery, ChartPolygon, EuclideanCone, Gluing};
use plateau::{Point, TargetSpace};
use proptest::prelude::*;

/// `EuclideanCone(alpha)` assembled from `n` isoceles wedges of leg length 2.
fn wedge_cone(alpha: f64, n: usize) -> TargetSpace {
    let beta = alpha / n as f64;
    let charts = (0..n)
        .map(|_| ChartPolygon { vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0 * beta.cos(), 2.0 * beta.sin()]] })
        .collect();
    let gluings = (0..n).map(|i| Gluing { a: (i, 2), b: ((i + 1) % n, 0) }).collect();
    TargetSpace::complex(charts, gluings, 3).unwrap()
}

fn wedge_point(alpha: f64, n: usize, r: f64, theta: f64) -> Point {
    let beta = alpha / n as f64;
    let theta = theta.rem_euclid(alpha);
    let i = ((theta / beta) as usize).min(n - 1);
    let local = theta - i as f64 * beta;
    Point::new(i, vec![r * local.cos(), r * local.sin()])
}

/// Brute force over developments: the cone distance is the minimum over all
/// planar placements of the two points at angular offsets `delta + k*alpha`
/// with `|delta + k*alpha| < π`, or `r1 + r2`.
fn brute_cone(alpha: f64, r1: f64, t1: f64, r2: f64, t2: f64) -> f64 {
    let mut best = r1 + r2;
    for k in -4i32..=4 {
        let d = t2 - t1 + k as f64 * alpha;
        if d.abs() < PI {
            let a = [r1, 0.0];
            let b = [r2 * d.cos(), r2 * d.sin()];
            best = best.min(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cone_closed_form_matches_developments(
        alpha in prop_oneof![Just(2.0 * PI), Just(3.0 * PI), Just(4.0 * PI)],
        r1 in 0.0f64..2.0, t1 in 0.0f64..13.0, r2 in 0.0f64..2.0, t2 in 0.0f64..13.0,
    ) {
        let s = TargetSpace::cone(alpha).unwrap();
        let TargetSpace::Cone(c) = &s else { unreachable!() };
        let d = s.distance(&c.point(r1, t1), &c.point(r2, t2)).unwrap();
        let want = brute_cone(alpha, r1, c.wrap(t1), r2, c.wrap(t2));
        prop_assert!((d - want).abs() <= 1e-12 * (1.0 + want), "{} vs {}", d, want);
    }

    #[test]
    fn wedge_complex_matches_cone(
        alpha in prop_oneof![Just(2.0 * PI), Just(3.0 * PI), Just(4.0 * PI)],
        r1 in 0.05f64..1.2, t1 in 0.0f64..13.0, r2 in 0.05f64..1.2, t2 in 0.0f64..13.0,
    ) {
        let n = 12;
        let cx = wedge_cone(alpha, n);
        let cone = EuclideanCone::new(alpha).unwrap();
        let d = cx.distance(&wedge_point(alpha, n, r1, t1), &wedge_point(alpha, n, r2, t2)).unwrap();
        let want = cone.distance(&cone.point(r1, t1), &cone.point(r2, t2));
        prop_assert!((d - want).abs() <= 1e-9 * (1.0 + want), "{} vs {}", d, want);
    }

    #[test]
    fn metric_axioms_on_glued_planes(
        c in proptest::collection::vec((0usize..2, -1.0f64..1.0, -1.0f64..1.0), 3),
    ) {
        let s = TargetSpace::glued_planes(PI / 2.0).unwrap();
        let TargetSpace::Glued(g) = &s else { unreachable!() };
        let p: Vec<Point> = c.iter().map(|&(k, x, y)| g.point(k, x, y)).collect();
        let d01 = s.distance(&p[0], &p[1]).unwrap();
        prop_assert_eq!(d01, s.distance(&p[1], &p[0]).unwrap());
        let d12 = s.distance(&p[1], &p[2]).unwrap();
        let d02 = s.distance(&p[0], &p[2]).unwrap();
        prop_assert!(d02 <= d01 + d12 + 1e-12);
        let m = s.geodesic_point(&p[0], &p[1], 0.5).unwrap();
        let a = s.distance(&p[0], &m).unwrap();
        let b = s.distance(&m, &p[1]).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 && a + b <= d01 + 1e-12);
    }

    #[test]
    fn angle_is_symmetric_on_the_cone(r1 in 0.2f64..1.0, t1 in 0.0f64..9.0, r2 in 0.2f64..1.0, t2 in 0.0f64..9.0) {
        let s = TargetSpace::cone(3.0 * PI).unwrap();
        let TargetSpace::Cone(c) = &s else { unreachable!() };
        let q = c.point(0.5, 1.0);
        let x = c.point(r1, t1);
        let y = c.point(r2, t2);
        prop_assume!(s.distance(&q, &x).unwrap() > 1e-3 && s.distance(&q, &y).unwrap() > 1e-3);
        let a = upper_angle(&s, &AngleQuery::new(&s, q.clone(), x.clone(), y.clone()).unwrap()).unwrap();
        let b = upper_angle(&s, &AngleQuery::new(&s, q, y, x).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn frechet_objective_never_exceeds_inputs(
        pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..9.42), 2..6),
        w in proptest::collection::vec(0.1f64..2.0, 6),
    ) {
        let s = TargetSpace::cone(3.0 * PI).unwrap();
        let TargetSpace::Cone(c) = &s else { unreachable!() };
        let p: Vec<Point> = pts.iter().map(|&(r, t)| c.point(r, t)).collect();
        let w = &w[..p.len()];
        let m = frechet_mean(&s, &p, w).unwrap();
        let f = |x: &Point| p.iter().zip(w).map(|(q, wi)| wi * s.distance(x, q).unwrap().powi(2)).sum::<f64>();
        let fm = f(&m);
        for q in &p {
            prop_assert!(fm <= f(q) + 1e-12);
        }
    }
}

#[test]
fn cone_tip_is_the_mean_of_well_spread_points() {
    // brute force over a polar grid: nothing beats the tip
    let s = TargetSpace::cone(4.0 * PI).unwrap();
    let TargetSpace::Cone(c) = &s else { unreachable!() };
    let pts: Vec<Point> = (0..3).map(|i| c.point(1.0, i as f64 * 4.0 * PI / 3.0)).collect();
    let f = |x: &Point| pts.iter().map(|q| s.distance(x, q).unwrap().powi(2)).sum::<f64>();
    let tip = f(&c.tip());
    assert!((tip - 3.0).abs() < 1e-15);
    for i in 1..40 {
        for j in 0..200 {
            let x = c.point(i as f64 * 0.05, j as f64 * 4.0 * PI / 200.0);
            assert!(f(&x) >= tip);
        }
    }
    let m = frechet_mean(&s, &pts, &[1.0; 3]).unwrap();
    assert_eq!(m, c.tip());
}

#[test]
fn glued_mirror_points_match_unfolding_enumeration() {
    let s = TargetSpace::glued_planes(PI).unwrap();
    let TargetSpace::Glued(g) = &s else { unreachable!() };
    let p = g.point(0, 0.3, -0.8);
    let q = g.point(1, 0.5, -0.4);
    // both boundary rays together form the x-axis, so the unfolding reflects
    // q across it and any crossing point is admissible
    let best = ((0.3f64 - 0.5).powi(2) + (-0.8f64 - 0.4).powi(2)).sqrt();
    assert!((s.distance(&p, &q).unwrap() - best).abs() < 1e-14);
    assert!((s.link_length(&g.point(0, 2.0, 0.0)).unwrap() - 3.0 * PI).abs() < 1e-15);
}

#[test]
fn flat_l_shape_midpoint_across_the_fold() {
    let sq = |x: f64, y: f64| ChartPolygon { vertices: vec![[x, y], [x + 1.0, y], [x + 1.0, y + 1.0], [x, y + 1.0]] };
    let s = TargetSpace::complex(
        vec![sq(0.0, 0.0), sq(1.0, 0.0), sq(0.0, 1.0)],
        vec![Gluing { a: (0, 1), b: (1, 3) }, Gluing { a: (0, 2), b: (2, 0) }],
        4,
    )
    .unwrap();
    let p = Point::new(1, vec![1.8, 0.2]);
    let q = Point::new(2, vec![0.3, 1.6]);
    // the straight segment runs through chart 0; its midpoint lies in chart 1
    let m = s.geodesic_point(&p, &q, 0.5).unwrap();
    assert_eq!(m.chart, 1);
    assert!((m.coords[0] - 1.05).abs() < 1e-12 && (m.coords[1] - 0.9).abs() < 1e-12);
    let cat0 = s.verify_cat0(300, 7).unwrap();
    assert!(cat0.cn_defect_max < 1e-9, "{}", cat0.cn_defect_max);
}

#[test]
fn euclidean_space_has_no_cn_defect() {
    let s = TargetSpace::euclidean(3).unwrap();
    let r = s.verify_cat0(1000, 3).unwrap();
    assert!(r.cn_defect_max <= 1e-12);
}
