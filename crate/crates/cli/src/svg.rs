//! Static orthographic view of covering-map curves inside the radius-π ball.

use std::f64::consts::PI;
use std::fmt::Write;

const SIZE: f64 = 520.0;
const MARGIN: f64 = 40.0;
const AZIMUTH: f64 = 35.0;
const ELEVATION: f64 = 25.0;
const COLORS: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

/// Screen coordinates of a point, y pointing down.
fn project(p: [f64; 3]) -> (f64, f64) {
    let (sa, ca) = AZIMUTH.to_radians().sin_cos();
    let (se, ce) = ELEVATION.to_radians().sin_cos();
    let right = -sa * p[0] + ca * p[1];
    let up = -se * ca * p[0] - se * sa * p[1] + ce * p[2];
    let scale = (SIZE / 2.0 - MARGIN) / PI;
    (SIZE / 2.0 + scale * right, SIZE / 2.0 - scale * up)
}

pub fn render(curves: &[(String, Vec<[f64; 3]>)]) -> String {
    let mut s = String::new();
    let c = SIZE / 2.0;
    let radius = c - MARGIN;
    writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"##
    )
    .unwrap();
    writeln!(s, r##"<rect width="100%" height="100%" fill="white"/>"##).unwrap();
    writeln!(
        s,
        r##"<circle cx="{c}" cy="{c}" r="{radius}" fill="none" stroke="#888" stroke-width="1"/>"##
    )
    .unwrap();
    for (axis, label) in [([PI, 0.0, 0.0], "x"), ([0.0, PI, 0.0], "y"), ([0.0, 0.0, PI], "z")] {
        let (x0, y0) = project(axis.map(|v| -v));
        let (x1, y1) = project(axis);
        writeln!(
            s,
            r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="#bbb" stroke-dasharray="4 3"/>"##
        )
        .unwrap();
        writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" fill="#555">{label}</text>"##,
            x1 + 4.0,
            y1 - 4.0
        )
        .unwrap();
    }
    for (k, (name, points)) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = points
            .iter()
            .map(|&p| {
                let (x, y) = project(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"##,
            path.join(" ")
        )
        .unwrap();
        let ly = 20.0 + 16.0 * k as f64;
        writeln!(
            s,
            r##"<text x="10" y="{ly}" font-family="sans-serif" font-size="13" fill="{color}">{name}</text>"##
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
