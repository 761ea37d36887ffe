//! Nodal-line plots: zero contours of piecewise-linear interpolants.

use spectra::fem::FemSpace;
use spectra::geometry::Point;
use std::fmt::Write as _;

const PANEL: f64 = 320.0;
const MARGIN: f64 = 16.0;
const CAPTION: f64 = 22.0;

/// Barycentric nodes: vertices then edge midpoints (01, 12, 20).
const NODES: [[f64; 3]; 6] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.5, 0.5, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
];
const SUB: [[usize; 3]; 4] = [[0, 3, 5], [3, 1, 4], [5, 4, 2], [3, 4, 5]];

/// Zero-level segments of a field given by dof values on `space`.
pub fn zero_segments(space: &FemSpace, values: &[f64]) -> Vec<(Point, Point)> {
    let mut segs = Vec::new();
    for t in 0..space.mesh.triangles.len() {
        let c = space.mesh.corners(t);
        let mut pts = [[0.0; 2]; 6];
        let mut f = [0.0; 6];
        for (k, l) in NODES.iter().enumerate() {
            pts[k] = [
                l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0],
                l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1],
            ];
            f[k] = space.eval_local(t, *l).map(|(d, phi)| phi * values[d]).sum();
        }
        for s in SUB {
            if let Some(seg) = linear_zero(&[pts[s[0]], pts[s[1]], pts[s[2]]], &[f[s[0]], f[s[1]], f[s[2]]]) {
                segs.push(seg);
            }
        }
    }
    segs
}

fn linear_zero(p: &[Point; 3], f: &[f64; 3]) -> Option<(Point, Point)> {
    let mut hits = Vec::with_capacity(2);
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        let (a, b) = (f[i], f[j]);
        if (a < 0.0) != (b < 0.0) {
            let t = a / (a - b);
            hits.push([p[i][0] + t * (p[j][0] - p[i][0]), p[i][1] + t * (p[j][1] - p[i][1])]);
        }
    }
    (hits.len() == 2).then(|| (hits[0], hits[1]))
}

/// One panel per mode, side by side.
pub fn render(space: &FemSpace, modes: &[(String, Vec<f64>)]) -> String {
    let v = &space.mesh.vertices;
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for p in v {
        lo = [lo[0].min(p[0]), lo[1].min(p[1])];
        hi = [hi[0].max(p[0]), hi[1].max(p[1])];
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let scale = (PANEL - 2.0 * MARGIN) / span;
    let map = |p: Point, panel: usize| {
        let x = panel as f64 * PANEL + MARGIN + (p[0] - lo[0]) * scale;
        let y = CAPTION + MARGIN + (hi[1] - p[1]) * scale;
        (x, y)
    };
    let width = PANEL * modes.len().max(1) as f64;
    let height = PANEL + CAPTION;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, (caption, values)) in modes.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="16" font-family="sans-serif" font-size="13">{caption}</text>"#,
            k as f64 * PANEL + MARGIN
        );
        let mut path = String::new();
        for e in &space.mesh.boundary_edges {
            let (a, b) = (map(v[e.vertices[0]], k), map(v[e.vertices[1]], k));
            let _ = write!(path, "M{:.2} {:.2}L{:.2} {:.2}", a.0, a.1, b.0, b.1);
        }
        let _ = writeln!(out, r#"<path d="{path}" stroke="black" stroke-width="1.5" fill="none"/>"#);
        path.clear();
        for (p, q) in zero_segments(space, values) {
            let (a, b) = (map(p, k), map(q, k));
            let _ = write!(path, "M{:.2} {:.2}L{:.2} {:.2}", a.0, a.1, b.0, b.1);
        }
        let _ = writeln!(out, r#"<path d="{path}" stroke="crimson" stroke-width="1" fill="none"/>"#);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use spectra::fem::SpaceKind;
    use spectra::geometry::{triangulate, Domain};

    #[test]
    fn linear_field_zero_line() {
        let d = Domain::builtin("unit-square").unwrap().unwrap();
        let space = FemSpace::new(triangulate(&d).unwrap().refined(2), SpaceKind::P1);
        let f: Vec<f64> = space.dof_points.iter().map(|p| p[0] - 0.5).collect();
        let segs = zero_segments(&space, &f);
        assert!(!segs.is_empty());
        for (a, b) in &segs {
            assert!((a[0] - 0.5).abs() < 1e-12 && (b[0] - 0.5).abs() < 1e-12);
        }
        let total: f64 = segs.iter().map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1])).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let svg = render(&space, &[("x".into(), f)]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
