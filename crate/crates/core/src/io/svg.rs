//! SVG rendering of a circle pattern.
//!
//! Output is deterministic: elements follow vertex (then edge) index order
//! and every coordinate is printed with nine significant digits. The y axis
//! is flipped so counterclockwise in the plane stays counterclockwise on
//! screen.

use std::fmt::Write;

use crate::center::Point;

#[derive(Debug, Clone, Default)]
pub struct SvgOptions {
    /// Segments between centers, drawn under the circles.
    pub edges: Vec<(usize, usize)>,
}

/// Nine significant digits, trailing zeros removed, no negative zero.
pub fn format_coordinate(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".to_string();
    }
    let s = format!("{:.8e}", x);
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    // digits holds d.dddddddd without the point; place it by the exponent
    let point = exp + 1;
    let mut out = String::new();
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat('0').take((-point) as usize));
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        out.extend(std::iter::repeat('0').take(point as usize - digits.len()));
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    if out.contains('.') {
        let trimmed = out.trim_end_matches('0').trim_end_matches('.');
        out = trimmed.to_string();
    }
    if negative {
        out.insert(0, '-');
    }
    out
}

/// Draws one circle per vertex at its center with its radius.
pub fn render_svg(centers: &[Point], radii: &[f64], opts: &SvgOptions) -> String {
    assert_eq!(centers.len(), radii.len());
    let flipped: Vec<Point> = centers.iter().map(|p| Point::new(p.x, -p.y)).collect();

    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (p, &r) in flipped.iter().zip(radii) {
        min_x = min_x.min(p.x - r);
        min_y = min_y.min(p.y - r);
        max_x = max_x.max(p.x + r);
        max_y = max_y.max(p.y + r);
    }
    if flipped.is_empty() {
        (min_x, min_y, max_x, max_y) = (-1.0, -1.0, 1.0, 1.0);
    }
    let extent = (max_x - min_x).max(max_y - min_y);
    // 5% of the larger extent, split between the two sides
    let margin = 0.025 * extent;
    let (vx, vy) = (min_x - margin, min_y - margin);
    let (vw, vh) = (max_x - min_x + 2.0 * margin, max_y - min_y + 2.0 * margin);
    let stroke = format_coordinate(0.002 * extent);
    let f = format_coordinate;

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">",
        f(vx),
        f(vy),
        f(vw),
        f(vh)
    );
    if !opts.edges.is_empty() {
        let _ = writeln!(s, "<g stroke=\"#999999\" stroke-width=\"{stroke}\">");
        for &(u, v) in &opts.edges {
            let (a, b) = (flipped[u], flipped[v]);
            let _ = writeln!(
                s,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                f(a.x),
                f(a.y),
                f(b.x),
                f(b.y)
            );
        }
        s.push_str("</g>\n");
    }
    let _ = writeln!(
        s,
        "<g fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"{stroke}\">"
    );
    for (p, &r) in flipped.iter().zip(radii) {
        let _ = writeln!(
            s,
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
            f(p.x),
            f(p.y),
            f(r)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_format() {
        assert_eq!(format_coordinate(-1.05), "-1.05");
        assert_eq!(format_coordinate(2.1), "2.1");
        assert_eq!(format_coordinate(0.0), "0");
        assert_eq!(format_coordinate(-0.0), "0");
        assert_eq!(format_coordinate(1.0 / 3.0), "0.333333333");
        assert_eq!(format_coordinate(123456789012.0), "123456789000");
        assert_eq!(format_coordinate(-0.000012345678912), "-0.0000123456789");
        assert_eq!(format_coordinate(2.0), "2");
    }

    #[test]
    fn unit_circle_view_box() {
        let svg = render_svg(&[Point::new(0.0, 0.0)], &[1.0], &SvgOptions::default());
        assert!(svg.contains("viewBox=\"-1.05 -1.05 2.1 2.1\""), "{svg}");
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("<circle cx=\"0\" cy=\"0\" r=\"1\"/>"));
        assert!(!svg.contains("<line"));
    }

    #[test]
    fn edges_and_flip() {
        let z = [Point::new(0.0, 0.0), Point::new(2.0, 1.0)];
        let opts = SvgOptions {
            edges: vec![(0, 1)],
        };
        let svg = render_svg(&z, &[1.0, 1.0], &opts);
        assert!(svg.contains("<line x1=\"0\" y1=\"0\" x2=\"2\" y2=\"-1\"/>"), "{svg}");
        assert_eq!(svg, render_svg(&z, &[1.0, 1.0], &opts));
    }
}
