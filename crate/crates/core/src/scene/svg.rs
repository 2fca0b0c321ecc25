//! Static SVG plots: density profiles and domain meshes colored by a per-vertex value.

use std::fmt::Write;

use crate::geom::Vec2;

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 48.0;

fn header(out: &mut String, w: f64, h: f64) {
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
}

fn label(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Line plot of `theta` against `radii`, with an optional dashed reference level.
pub fn profile_plot(title: &str, radii: &[f64], theta: &[f64], reference: Option<f64>) -> String {
    let mut out = String::new();
    header(&mut out, W, H);
    let (x0, x1) = (0.0, radii.last().cloned().unwrap_or(1.0).max(1e-12));
    let mut lo = theta.iter().cloned().chain(reference).fold(f64::INFINITY, f64::min);
    let mut hi = theta.iter().cloned().chain(reference).fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    let span = (hi - lo).max(0.1);
    let (y0, y1) = (lo - 0.1 * span, hi + 0.1 * span);
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 1.5 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 1.5 * PAD);
    writeln!(out, r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title)).unwrap();
    writeln!(
        out,
        r#"<path d="M{:.2} {:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
        px(x0),
        py(y1),
        py(y0),
        px(x1)
    )
    .unwrap();
    for v in [y0, y1] {
        writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, px(x0) - 4.0, py(v) + 4.0, label(v)).unwrap();
    }
    for x in [x0, x1] {
        writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#, px(x), H - PAD + 16.0, label(x)).unwrap();
    }
    writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">r</text>"#, (px(x0) + px(x1)) / 2.0, H - 8.0).unwrap();
    if let Some(r) = reference {
        writeln!(out, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#, px(x0), py(r), px(x1), py(r)).unwrap();
    }
    let pts: Vec<String> = radii.iter().zip(theta).map(|(&r, &t)| format!("{:.2},{:.2}", px(r), py(t))).collect();
    writeln!(out, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, pts.join(" ")).unwrap();
    for (&r, &t) in radii.iter().zip(theta) {
        writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue"/>"#, px(r), py(t)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Domain mesh with triangles filled by the mean of their vertex values on a
/// blue-white-red scale symmetric around zero.
pub fn mesh_plot(title: &str, vertices: &[Vec2], triangles: &[[usize; 3]], values: &[f64]) -> String {
    let size = 420.0;
    let mut out = String::new();
    header(&mut out, size, size + 30.0);
    writeln!(out, r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#, size / 2.0, escape(title)).unwrap();
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-12);
    let (lo, hi) = vertices.iter().fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), v| {
        ([lo[0].min(v[0]), lo[1].min(v[1])], [hi[0].max(v[0]), hi[1].max(v[1])])
    });
    let ext = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let map = |v: Vec2| (10.0 + (v[0] - lo[0]) / ext * (size - 20.0), 30.0 + (hi[1] - v[1]) / ext * (size - 20.0));
    for tri in triangles {
        let mean = tri.iter().map(|&v| values[v]).sum::<f64>() / 3.0;
        let pts: Vec<String> = tri
            .iter()
            .map(|&v| {
                let (x, y) = map(vertices[v]);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        writeln!(out, r##"<polygon points="{}" fill="{}" stroke="#999" stroke-width="0.3"/>"##, pts.join(" "), color(mean / scale)).unwrap();
    }
    writeln!(out, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">scale ±{}</text>"#, size / 2.0, size + 24.0, label(scale)).unwrap();
    out.push_str("</svg>\n");
    out
}

fn color(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let fade = |x: f64| (255.0 * (1.0 - x)).round() as u8;
    let (r, g, b) = if t < 0.0 { (fade(-t), fade(-t), 255) } else { (255, fade(t), fade(t)) };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plots_are_well_formed() {
        let s = profile_plot("θ(r) <flat>", &[0.1, 0.2, 0.3], &[1.0, 1.0, 1.01], Some(1.0));
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("&lt;flat&gt;"));
        assert_eq!(s.matches("<circle").count(), 3);
        let m = mesh_plot("defects", &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], &[[0, 1, 2]], &[-1.0, 0.0, 0.0]);
        assert_eq!(m.matches("<polygon").count(), 1);
        assert_eq!(color(0.0), "#ffffff");
        assert_eq!(color(-1.0), "#0000ff");
    }
}
