use std::f64::consts::PI;
use std::sync::Arc;

use plateau::curve::{regular_polygon, PolygonalCurve};
use plateau::funnel::{build_funnel, ExtPoint, FunnelExtension};
use plateau::{Point, TargetSpace};
use proptest::prelude::*;

const SQUARE: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

fn square_funnel() -> FunnelExtension {
    let s = Arc::new(TargetSpace::euclidean(2).unwrap());
    let c = PolygonalCurve::new(&s, SQUARE.map(|p| Point::euclidean(&p)).to_vec()).unwrap();
    build_funnel(s, &c, 8.0, 16).unwrap()
}

fn outward(e: usize) -> [f64; 2] {
    let (a, b) = (SQUARE[e], SQUARE[(e + 1) % 4]);
    [b[1] - a[1], a[0] - b[0]]
}

/// The square with its funnel develops isometrically onto the plane.
fn develop(p: &ExtPoint) -> [f64; 2] {
    let ExtPoint::Funnel { chart, pos } = p else { panic!("funnel point expected") };
    let e = chart / 2;
    let n = outward(e);
    if chart % 2 == 0 {
        let (a, b) = (SQUARE[e], SQUARE[(e + 1) % 4]);
        [a[0] + pos[0] * (b[0] - a[0]) + pos[1] * n[0], a[1] + pos[0] * (b[1] - a[1]) + pos[1] * n[1]]
    } else {
        let (rho, phi) = (pos[0].hypot(pos[1]), pos[0].atan2(pos[1]));
        let d = [phi.cos() * n[0] - phi.sin() * n[1], phi.sin() * n[0] + phi.cos() * n[1]];
        let w = SQUARE[(e + 1) % 4];
        [w[0] + rho * d[0], w[1] + rho * d[1]]
    }
}

fn funnel_point() -> impl Strategy<Value = (bool, usize, f64, f64)> {
    (any::<bool>(), 0usize..4, 0.0f64..1.0, 0.0f64..3.0)
}

fn make(f: &FunnelExtension, (strip, k, u, v): (bool, usize, f64, f64)) -> ExtPoint {
    if strip {
        f.strip_point(k, u, v)
    } else {
        f.sector_point(k, v, u * 0.5 * PI)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn square_funnel_matches_the_plane(a in funnel_point(), b in funnel_point()) {
        let f = square_funnel();
        let (p, q) = (make(&f, a), make(&f, b));
        let (x, y) = (develop(&p), develop(&q));
        let want = (x[0] - y[0]).hypot(x[1] - y[1]);
        let got = f.extended_distance(&p, &q).unwrap();
        prop_assert!((got - want).abs() <= 1e-6, "{} vs {}", got, want);
        prop_assert!((f.extended_distance(&q, &p).unwrap() - got).abs() <= 1e-9);
    }

    #[test]
    fn sectors_add_up_to_total_curvature(n in 3usize..40, r in 0.2f64..3.0) {
        let s = Arc::new(TargetSpace::euclidean(2).unwrap());
        let c = PolygonalCurve::new(&s, regular_polygon(n, r)).unwrap();
        let f = build_funnel(s, &c, 2.0, 4).unwrap();
        prop_assert!((f.sector_sum() - 2.0 * PI).abs() <= 1e-9);
        prop_assert!((f.funnel_area() - (c.length() * 2.0 + PI * 4.0)).abs() <= 1e-9);
    }
}

#[test]
fn base_points_inside_the_square_see_the_plane() {
    let f = square_funnel();
    let base = ExtPoint::Base { point: Point::euclidean(&[0.25, 0.5]) };
    for q in [f.strip_point(1, 0.5, 1.0), f.sector_point(2, 0.7, 0.3), f.strip_point(3, 0.1, 2.5)] {
        let y = develop(&q);
        let want = (y[0] - 0.25).hypot(y[1] - 0.5);
        assert!((f.extended_distance(&base, &q).unwrap() - want).abs() < 1e-6);
    }
}
