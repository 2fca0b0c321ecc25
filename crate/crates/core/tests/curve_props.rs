use std::f64::consts::PI;

use plateau::curve::{regular_polygon, total_curvature, CurveDesc, PolygonalCurve};
use plateau::{Point, TargetSpace};
use proptest::prelude::*;

fn kappa(coords: &[[f64; 3]]) -> f64 {
    let s = TargetSpace::euclidean(3).unwrap();
    let pts = coords.iter().map(|c| Point::euclidean(c)).collect();
    total_curvature(&s, &PolygonalCurve::new(&s, pts).unwrap()).unwrap().kappa
}

fn polygon() -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 4..14).prop_filter("distinct consecutive vertices", |v| {
        (0..v.len()).all(|i| {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            (0..3).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>() > 1e-6
        })
    })
}

/// Rotation about a unit axis (Rodrigues), then scaling and translation.
fn similarity(p: [f64; 3], axis: [f64; 3], angle: f64, scale: f64, shift: [f64; 3]) -> [f64; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let k = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (c, s) = (angle.cos(), angle.sin());
    let dot = k[0] * p[0] + k[1] * p[1] + k[2] * p[2];
    let cross = [k[1] * p[2] - k[2] * p[1], k[2] * p[0] - k[0] * p[2], k[0] * p[1] - k[1] * p[0]];
    let r: Vec<f64> = (0..3).map(|i| p[i] * c + cross[i] * s + k[i] * dot * (1.0 - c)).collect();
    [scale * r[0] + shift[0], scale * r[1] + shift[1], scale * r[2] + shift[2]]
}

proptest! {
    #[test]
    fn fenchel_holds(v in polygon()) {
        prop_assert!(kappa(&v) >= 2.0 * PI - 1e-9);
    }

    #[test]
    fn curvature_is_invariant_under_similarities_and_relabeling(
        v in polygon(),
        axis in prop::array::uniform3(0.1f64..1.0),
        angle in 0.0f64..6.3,
        scale in 0.1f64..10.0,
        shift in prop::array::uniform3(-5.0f64..5.0),
        rot in 0usize..14,
    ) {
        let k = kappa(&v);
        let moved: Vec<[f64; 3]> = v.iter().map(|&p| similarity(p, axis, angle, scale, shift)).collect();
        prop_assert!((kappa(&moved) - k).abs() <= 1e-9);
        let mut shifted = v.clone();
        shifted.rotate_left(rot % v.len());
        prop_assert!((kappa(&shifted) - k).abs() <= 1e-9);
        let mut reversed = v.clone();
        reversed.reverse();
        prop_assert!((kappa(&reversed) - k).abs() <= 1e-9);
    }

    #[test]
    fn dropping_a_vertex_never_adds_curvature(v in polygon().prop_filter("room to drop", |v| v.len() > 4), i in 0usize..14) {
        let mut w = v.clone();
        w.remove(i % v.len());
        let ok = (0..w.len()).all(|j| w[j] != w[(j + 1) % w.len()]);
        prop_assume!(ok);
        prop_assert!(kappa(&w) <= kappa(&v) + 1e-9);
    }

    #[test]
    fn convex_planar_polygons_turn_once(n in 3usize..100, r in 0.1f64..10.0) {
        let s = TargetSpace::euclidean(2).unwrap();
        let k = total_curvature(&s, &PolygonalCurve::new(&s, regular_polygon(n, r)).unwrap()).unwrap().kappa;
        prop_assert!((k - 2.0 * PI).abs() <= 1e-9);
    }
}

#[test]
fn curve_files_need_exactly_one_vertex_list_and_a_closed_flag() {
    let s = TargetSpace::euclidean(2).unwrap();
    let parse = |text: &str| serde_json::from_str::<CurveDesc>(text).map_err(|e| e.to_string()).and_then(|d| d.build(&s).map_err(|e| e.to_string()));
    assert!(parse(r#"{"coords": [[0,0],[1,0],[0,1]]}"#).is_ok());
    assert!(parse(r#"{"points": [{"chart":0,"coords":[0,0]},{"chart":0,"coords":[1,0]},{"chart":0,"coords":[0,1]}]}"#).is_ok());
    assert!(parse(r#"{}"#).is_err());
    assert!(parse(r#"{"coords": [[0,0],[1,0],[0,1]], "points": []}"#).is_err());
    let open = parse(r#"{"coords": [[0,0],[1,0],[0,1]], "closed": false}"#).unwrap_err();
    assert!(open.contains("closed"), "{open}");
    assert!(parse(r#"{"coords": [[0,0],[1,0]]}"#).is_err());
    assert!(parse(r#"{"coords": [[0,0],[1,0],[0,1]], "extra": 1}"#).is_err());
}
