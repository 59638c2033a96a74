//! SVG projections of secret and nonsecret output sets.

use std::fmt::Write as _;

use opaque_core::{Point, VPolytope};

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;
const SECRET: (&str, &str) = ("#c0392b", "secret");
const NONSECRET: (&str, &str) = ("#2471a3", "nonsecret");

#[derive(Debug, Clone, PartialEq)]
pub struct PlotInput<'a> {
    pub secret: &'a VPolytope,
    pub nonsecret: &'a VPolytope,
    pub proj: (usize, usize),
    /// Radius arrow from a secret output to its nearest nonsecret output.
    pub arrow: Option<(Point, Point, f64)>,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadAxes(pub String);

impl std::fmt::Display for BadAxes {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadAxes {}

pub fn check_axes(dim: usize, proj: (usize, usize)) -> Result<(), BadAxes> {
    let (i, j) = proj;
    if dim == 1 {
        if i != 0 {
            return Err(BadAxes(format!("axis {i} out of range for 1-dimensional outputs")));
        }
        return Ok(());
    }
    if i >= dim || j >= dim {
        return Err(BadAxes(format!("axes ({i}, {j}) out of range for {dim}-dimensional outputs")));
    }
    if i == j {
        return Err(BadAxes("projection axes must differ".into()));
    }
    Ok(())
}

/// Counter-clockwise hull of planar points (monotone chain), without
/// repeated or collinear points.
pub fn hull_2d(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-12 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-12 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

struct Frame {
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Frame {
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        let pad = |l: f64, h: f64| {
            let span = h - l;
            if span <= 1e-12 * (1.0 + l.abs().max(h.abs())) {
                (l - 1.0, h + 1.0)
            } else {
                (l - 0.08 * span, h + 0.08 * span)
            }
        };
        let (x0, x1) = pad(lo.0, hi.0);
        let (y0, y1) = pad(lo.1, hi.1);
        Frame {
            lo: (x0, y0),
            hi: (x1, y1),
        }
    }

    fn map(&self, p: (f64, f64)) -> (f64, f64) {
        let sx = (WIDTH - 2.0 * MARGIN) / (self.hi.0 - self.lo.0);
        let sy = (HEIGHT - 2.0 * MARGIN) / (self.hi.1 - self.lo.1);
        (MARGIN + (p.0 - self.lo.0) * sx, HEIGHT - MARGIN - (p.1 - self.lo.1) * sy)
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" { "0.00".into() } else { s }
}

fn label(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn draw_shape(svg: &mut String, frame: &Frame, pts: &[(f64, f64)], (color, name): (&str, &str), dashed: bool) {
    let hull = hull_2d(pts);
    let dash = if dashed { " stroke-dasharray=\"6 3\"" } else { "" };
    match hull.len() {
        0 => {}
        1 => {
            let (x, y) = frame.map(hull[0]);
            let _ = writeln!(svg, "  <circle class=\"{name}\" cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"{color}\"/>", num(x), num(y));
        }
        2 => {
            let (a, b) = (frame.map(hull[0]), frame.map(hull[1]));
            let _ = writeln!(
                svg,
                "  <line class=\"{name}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"4\"{dash}/>",
                num(a.0),
                num(a.1),
                num(b.0),
                num(b.1)
            );
        }
        _ => {
            let coords: Vec<String> = hull
                .iter()
                .map(|&p| {
                    let (x, y) = frame.map(p);
                    format!("{},{}", num(x), num(y))
                })
                .collect();
            let _ = writeln!(
                svg,
                "  <polygon class=\"{name}\" points=\"{}\" fill=\"{color}\" fill-opacity=\"0.25\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>",
                coords.join(" ")
            );
        }
    }
}

fn draw_arrow(svg: &mut String, frame: &Frame, from: (f64, f64), to: (f64, f64), r: f64) {
    let (a, b) = (frame.map(from), frame.map(to));
    let _ = writeln!(
        svg,
        "  <line class=\"radius\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#222\" stroke-width=\"1.5\" marker-end=\"url(#head)\"/>",
        num(a.0),
        num(a.1),
        num(b.0),
        num(b.1)
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#222\">radius {}</text>",
        num((a.0 + b.0) / 2.0 + 6.0),
        num((a.1 + b.1) / 2.0 - 6.0),
        label(r)
    );
}

/// Deterministic SVG: identical inputs give byte-identical output.
pub fn render_svg(input: &PlotInput) -> Result<String, BadAxes> {
    let dim = input.secret.dim();
    check_axes(dim, input.proj)?;
    let (i, j) = input.proj;
    let bars = dim == 1;
    let project = |p: &Point, row: f64| if bars { (p[0], row) } else { (p[i], p[j]) };
    let s_pts: Vec<(f64, f64)> = input.secret.vertices().iter().map(|p| project(p, 1.0)).collect();
    let ns_pts: Vec<(f64, f64)> = input.nonsecret.vertices().iter().map(|p| project(p, 0.0)).collect();
    let arrow = input.arrow.as_ref().map(|(a, b, r)| (project(a, 1.0), project(b, if bars { 1.0 } else { 0.0 }), *r));
    let mut all: Vec<(f64, f64)> = s_pts.iter().chain(&ns_pts).copied().collect();
    if let Some((a, b, _)) = arrow {
        all.extend([a, b]);
    }
    let mut frame = Frame::fit(all.into_iter());
    if bars {
        frame.lo.1 = -1.0;
        frame.hi.1 = 2.0;
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    svg.push_str("  <defs><marker id=\"head\" markerWidth=\"8\" markerHeight=\"8\" refX=\"7\" refY=\"4\" orient=\"auto\"><path d=\"M0,0 L8,4 L0,8 z\" fill=\"#222\"/></marker></defs>\n");
    let _ = writeln!(svg, "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(svg, "  <text x=\"{MARGIN}\" y=\"24\" font-size=\"14\">{}</text>", escape(&input.title));
    let (x0, y0) = frame.map(frame.lo);
    let (x1, y1) = frame.map(frame.hi);
    let _ = writeln!(
        svg,
        "  <rect class=\"frame\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999\"/>",
        num(x0),
        num(y1),
        num(x1 - x0),
        num(y0 - y1)
    );
    let _ = writeln!(svg, "  <text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>", num(x0), num(y0 + 16.0), label(frame.lo.0));
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
        num(x1),
        num(y0 + 16.0),
        label(frame.hi.0)
    );
    if bars {
        let _ = writeln!(svg, "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">y{i}</text>", num((x0 + x1) / 2.0), num(y0 + 30.0));
    } else {
        let _ = writeln!(svg, "  <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>", num(x0 - 4.0), num(y0), label(frame.lo.1));
        let _ = writeln!(svg, "  <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>", num(x0 - 4.0), num(y1 + 10.0), label(frame.hi.1));
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">y{i} / y{j}</text>",
            num((x0 + x1) / 2.0),
            num(y0 + 30.0)
        );
    }
    draw_shape(&mut svg, &frame, &ns_pts, NONSECRET, false);
    draw_shape(&mut svg, &frame, &s_pts, SECRET, true);
    if let Some((a, b, r)) = arrow {
        draw_arrow(&mut svg, &frame, a, b, r);
    }
    for (n, (color, name)) in [SECRET, NONSECRET].iter().enumerate() {
        let y = 24.0 + 16.0 * n as f64;
        let _ = writeln!(svg, "  <rect x=\"{}\" y=\"{}\" width=\"12\" height=\"10\" fill=\"{color}\"/>", num(WIDTH - 130.0), num(y - 10.0));
        let _ = writeln!(svg, "  <text x=\"{}\" y=\"{}\" font-size=\"12\">{name}</text>", num(WIDTH - 112.0), num(y));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Full-dimensional vertices of both sets.
pub fn vertices_csv(secret: &VPolytope, nonsecret: &VPolytope) -> String {
    let dim = secret.dim();
    let mut out = String::from("set,index");
    for d in 0..dim {
        let _ = write!(out, ",y{d}");
    }
    out.push('\n');
    for (name, set) in [("secret", secret), ("nonsecret", nonsecret)] {
        for (i, v) in set.vertices().iter().enumerate() {
            let _ = write!(out, "{name},{i}");
            for x in v.iter() {
                let _ = write!(out, ",{x:e}");
            }
            out.push('\n');
        }
    }
    out
}
