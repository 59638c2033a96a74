//! Convex hulls in up to three dimensions.
//!
//! Point sets are first reduced to their affine hull (orthonormal frame via
//! Gram-Schmidt). Directions orthogonal to a flat set become pairs of
//! opposing halfspaces widened by `geom_eps`; the remaining 0-, 1-, 2- or
//! 3-dimensional problem is solved in frame coordinates and lifted back.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{HPolytope, Tolerances, VPolytope};
use crate::linalg::{dedupe_indices, scale_of, sqrt, Point};
use crate::{Error, Result};

pub(crate) const MAX_HULL_DIM: usize = 3;

pub(crate) struct HullInfo {
    /// Indices (into the input) of the hull's vertices.
    pub vertices: Vec<usize>,
    pub normals: Vec<Point>,
    pub offsets: Vec<f64>,
}

struct AffineFrame {
    origin: Point,
    basis: Vec<Point>,
    complement: Vec<Point>,
}

fn flat_tolerance(points: &[Point], tol: &Tolerances) -> f64 {
    tol.geom_eps.max(1e-12 * scale_of(points))
}

fn gram_schmidt_residual(v: &Point, basis: &[Point]) -> Point {
    let mut r = v.clone();
    // Two passes keep the frame orthonormal to working precision.
    for _ in 0..2 {
        for b in basis {
            let c = r.dot(b);
            r -= b * c;
        }
    }
    r
}

fn affine_frame(points: &[Point], dim: usize, flat_tol: f64) -> AffineFrame {
    let origin = points[0].clone();
    let mut basis: Vec<Point> = Vec::new();
    while basis.len() < dim {
        let mut best: Option<(f64, Point)> = None;
        for p in points {
            let r = gram_schmidt_residual(&(p - &origin), &basis);
            let n = r.norm();
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                best = Some((n, r));
            }
        }
        match best {
            Some((n, r)) if n > flat_tol => basis.push(r / n),
            _ => break,
        }
    }
    let mut complement: Vec<Point> = Vec::new();
    for i in 0..dim {
        if basis.len() + complement.len() == dim {
            break;
        }
        let mut e = Point::zeros(dim);
        e[i] = 1.0;
        let mut all = basis.clone();
        all.extend(complement.iter().cloned());
        let r = gram_schmidt_residual(&e, &all);
        let n = r.norm();
        if n > 1e-6 {
            complement.push(r / n);
        }
    }
    AffineFrame {
        origin,
        basis,
        complement,
    }
}

#[inline]
fn cross2(o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain. Returns indices of the hull in counterclockwise
/// order; collinear and duplicate points are dropped.
pub(crate) fn monotone_chain(pts: &[[f64; 2]], flat_tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        pts[a][0]
            .partial_cmp(&pts[b][0])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(pts[a][1].partial_cmp(&pts[b][1]).unwrap_or(core::cmp::Ordering::Equal))
    });
    if idx.len() <= 1 {
        return idx;
    }
    let turn_ok = |o: usize, a: usize, b: usize| {
        let d = norm2(pts[b][0] - pts[o][0], pts[b][1] - pts[o][1]);
        cross2(&pts[o], &pts[a], &pts[b]) > flat_tol * d
    };
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && !turn_ok(lower[lower.len() - 2], lower[lower.len() - 1], i) {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && !turn_ok(upper[upper.len() - 2], upper[upper.len() - 1], i) {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    // All points (numerically) coincide.
    if lower.len() == 2 {
        let (a, b) = (lower[0], lower[1]);
        let d = norm2(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1]);
        if d <= flat_tol {
            lower.pop();
        }
    }
    lower
}

#[inline]
fn norm2(dx: f64, dy: f64) -> f64 {
    sqrt(dx * dx + dy * dy)
}

struct Face {
    v: [usize; 3],
    normal: [f64; 3],
    offset: f64,
    alive: bool,
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn make_face(pts: &[[f64; 3]], v: [usize; 3], interior: &[f64; 3]) -> Face {
    let n = cross3(&sub3(&pts[v[1]], &pts[v[0]]), &sub3(&pts[v[2]], &pts[v[0]]));
    let len = sqrt(dot3(&n, &n)).max(f64::MIN_POSITIVE);
    let mut normal = [n[0] / len, n[1] / len, n[2] / len];
    let mut verts = v;
    let mut offset = dot3(&normal, &pts[v[0]]);
    if dot3(&normal, interior) - offset > 0.0 {
        normal = [-normal[0], -normal[1], -normal[2]];
        offset = -offset;
        verts.swap(1, 2);
    }
    Face {
        v: verts,
        normal,
        offset,
        alive: true,
    }
}

/// Incremental (beneath-beyond) hull of full-rank 3-D points.
fn hull3(pts: &[[f64; 3]], flat_tol: f64) -> (Vec<usize>, Vec<([f64; 3], f64)>) {
    let n = pts.len();
    let dist = |a: usize, b: usize| sqrt(dot3(&sub3(&pts[a], &pts[b]), &sub3(&pts[a], &pts[b])));
    let i0 = 0;
    let i1 = (0..n).max_by(|&a, &b| dist(a, i0).total_cmp(&dist(b, i0))).unwrap();
    let line_dist = |p: usize| {
        let d = sub3(&pts[i1], &pts[i0]);
        let c = cross3(&d, &sub3(&pts[p], &pts[i0]));
        sqrt(dot3(&c, &c)) / sqrt(dot3(&d, &d)).max(f64::MIN_POSITIVE)
    };
    let i2 = (0..n).max_by(|&a, &b| line_dist(a).total_cmp(&line_dist(b))).unwrap();
    let pn = cross3(&sub3(&pts[i1], &pts[i0]), &sub3(&pts[i2], &pts[i0]));
    let plane_dist = |p: usize| dot3(&pn, &sub3(&pts[p], &pts[i0])).abs();
    let i3 = (0..n).max_by(|&a, &b| plane_dist(a).total_cmp(&plane_dist(b))).unwrap();

    let interior = {
        let mut c = [0.0; 3];
        for &i in &[i0, i1, i2, i3] {
            for k in 0..3 {
                c[k] += pts[i][k] / 4.0;
            }
        }
        c
    };
    let mut faces = vec![
        make_face(pts, [i0, i1, i2], &interior),
        make_face(pts, [i0, i1, i3], &interior),
        make_face(pts, [i0, i2, i3], &interior),
        make_face(pts, [i1, i2, i3], &interior),
    ];
    let seed = [i0, i1, i2, i3];
    for p in 0..n {
        if seed.contains(&p) {
            continue;
        }
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive && dot3(&f.normal, &pts[p]) - f.offset > flat_tol)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
        for &fi in &visible {
            let v = faces[fi].v;
            edges.insert((v[0], v[1]));
            edges.insert((v[1], v[2]));
            edges.insert((v[2], v[0]));
        }
        let horizon: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(a, b)| !edges.contains(&(*b, *a)))
            .copied()
            .collect();
        for &fi in &visible {
            faces[fi].alive = false;
        }
        for (a, b) in horizon {
            faces.push(make_face(pts, [a, b, p], &interior));
        }
    }
    let mut verts: BTreeSet<usize> = BTreeSet::new();
    let mut planes: Vec<([f64; 3], f64)> = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        verts.extend(f.v.iter().copied());
        let dup = planes.iter().any(|(n, o)| {
            (n[0] - f.normal[0]).abs() < 1e-9
                && (n[1] - f.normal[1]).abs() < 1e-9
                && (n[2] - f.normal[2]).abs() < 1e-9
                && (o - f.offset).abs() <= flat_tol
        });
        if !dup {
            planes.push((f.normal, f.offset));
        }
    }
    (verts.into_iter().collect(), planes)
}

/// Hull of `points` (ambient dimension `dim <= 3`).
pub(crate) fn hull_info(points: &[Point], dim: usize, tol: &Tolerances) -> Result<HullInfo> {
    if dim > MAX_HULL_DIM {
        return Err(Error::UnsupportedDimension {
            dim,
            max: MAX_HULL_DIM,
        });
    }
    if points.is_empty() {
        return Err(Error::EmptySet("hull input"));
    }
    let flat_tol = flat_tolerance(points, tol);
    let frame = affine_frame(points, dim, flat_tol);
    let r = frame.basis.len();
    let coords: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let d = p - &frame.origin;
            frame.basis.iter().map(|b| b.dot(&d)).collect()
        })
        .collect();

    let mut normals: Vec<Point> = Vec::new();
    let mut offsets: Vec<f64> = Vec::new();
    for c in &frame.complement {
        let o = c.dot(&frame.origin);
        normals.push(c.clone());
        offsets.push(o + tol.geom_eps);
        normals.push(-c);
        offsets.push(-o + tol.geom_eps);
    }
    // Lifts a frame-coordinate halfspace `n·t <= o` into the ambient space.
    let mut push_lifted = |n_sub: &[f64], o_sub: f64| {
        let mut n = Point::zeros(dim);
        for (k, b) in frame.basis.iter().enumerate() {
            n += b * n_sub[k];
        }
        let o = o_sub + n.dot(&frame.origin);
        normals.push(n);
        offsets.push(o);
    };

    let vertices = match r {
        0 => vec![0],
        1 => {
            let (mut lo, mut hi) = (0usize, 0usize);
            for (i, c) in coords.iter().enumerate() {
                if c[0] < coords[lo][0] {
                    lo = i;
                }
                if c[0] > coords[hi][0] {
                    hi = i;
                }
            }
            push_lifted(&[1.0], coords[hi][0]);
            push_lifted(&[-1.0], -coords[lo][0]);
            vec![lo, hi]
        }
        2 => {
            let pts: Vec<[f64; 2]> = coords.iter().map(|c| [c[0], c[1]]).collect();
            let ring = monotone_chain(&pts, flat_tol);
            for i in 0..ring.len() {
                let a = pts[ring[i]];
                let b = pts[ring[(i + 1) % ring.len()]];
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len = norm2(dx, dy);
                let n = [dy / len, -dx / len];
                push_lifted(&n, n[0] * a[0] + n[1] * a[1]);
            }
            ring
        }
        _ => {
            let pts: Vec<[f64; 3]> = coords.iter().map(|c| [c[0], c[1], c[2]]).collect();
            let (verts, planes) = hull3(&pts, flat_tol);
            for (n, o) in planes {
                push_lifted(&n, o);
            }
            verts
        }
    };
    Ok(HullInfo {
        vertices,
        normals,
        offsets,
    })
}

/// Minimal halfspace representation of `conv(P)` for `P.dim <= 3`. Flat hulls
/// carry paired opposing halfspaces widened by `geom_eps`.
pub fn convex_hull_h(p: &VPolytope, tol: &Tolerances) -> Result<HPolytope> {
    let info = hull_info(p.vertices(), p.dim(), tol)?;
    HPolytope::new(p.dim(), info.normals, info.offsets)
}

/// Indices of the extreme points of `points`. For dimension above three only
/// near-duplicates are removed.
pub fn extreme_indices(points: &[Point], dim: usize, tol: &Tolerances) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    if dim <= MAX_HULL_DIM {
        let mut v = hull_info(points, dim, tol)
            .map(|h| h.vertices)
            .unwrap_or_else(|_| (0..points.len()).collect());
        v.sort_unstable();
        v
    } else {
        dedupe_indices(points, tol.geom_eps)
    }
}

/// Counterclockwise hull ring of planar points (used for plotting).
pub fn convex_polygon(points: &[[f64; 2]], tol: &Tolerances) -> Vec<usize> {
    monotone_chain(points, tol.geom_eps)
}
