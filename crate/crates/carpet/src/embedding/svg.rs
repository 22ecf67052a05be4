use std::fmt::Write;

use super::Drawing;
use crate::rational::to_f64;

/// SVG with one polyline per edge, in plane units with the y axis up.
/// The view box is the drawing's bounding box padded by one cell, since
/// drawn copies leave the unit square.
pub fn to_svg(d: &Drawing) -> String {
    let l = to_f64(&d.l);
    let (mut lo, mut hi) = ([i64::MAX; 2], [i64::MIN; 2]);
    for p in &d.points {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    if d.points.is_empty() {
        (lo, hi) = ([0, 0], [0, 0]);
    }
    let (x0, y1) = ((lo[0] - 1) as f64 * l, (hi[1] + 1) as f64 * l);
    let (w, h) = ((hi[0] - lo[0] + 2) as f64 * l, (hi[1] - lo[1] + 2) as f64 * l);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0} {} {w} {h}\" width=\"800\" height=\"800\">",
        -y1
    );
    let _ = writeln!(
        out,
        "<g fill=\"none\" stroke=\"black\" stroke-width=\"{}\" stroke-linecap=\"round\">",
        l / 4.0
    );
    for &[a, b] in &d.segments {
        let (p, q) = (d.points[a], d.points[b]);
        let _ = writeln!(
            out,
            "<polyline points=\"{},{} {},{}\"/>",
            p[0] as f64 * l,
            -(p[1] as f64) * l,
            q[0] as f64 * l,
            -(q[1] as f64) * l
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_seed;

    #[test]
    fn seed_svg_has_one_polyline_per_edge() {
        let svg = to_svg(&Drawing::from_graph(&build_seed()));
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("viewBox=\"-1 -2 3 3\""));
    }
}
