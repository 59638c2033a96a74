//! Gilbert-Johnson-Keerthi distance between convex sets given by support
//! maps. The sub-simplex closest to the origin is found by enumerating
//! vertex subsets and solving the affine minimum-norm problem on each.

use alloc::vec::Vec;

use super::{Tolerances, VPolytope};
use crate::linalg::{Matrix, Point};
use crate::{Error, Result};

/// A convex set described by its support points.
pub trait SupportMap {
    fn dim(&self) -> usize;
    /// A point of the set maximizing `dir · x`.
    fn support(&self, dir: &Point) -> Point;
}

impl SupportMap for Point {
    fn dim(&self) -> usize {
        self.len()
    }
    fn support(&self, _dir: &Point) -> Point {
        self.clone()
    }
}

/// Distance between two sets and a pair of points realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct GjkResult {
    pub distance: f64,
    pub point_a: Point,
    pub point_b: Point,
}

#[derive(Clone)]
struct Vertex {
    w: Point,
    a: Point,
    b: Point,
}

/// Closest point to the origin of `conv(simplex)`; returns barycentric
/// weights over the kept vertices.
fn closest_on_simplex(simplex: &[Vertex]) -> (Point, Vec<usize>, Vec<f64>) {
    let s = simplex.len();
    let mut best: Option<(f64, Point, Vec<usize>, Vec<f64>)> = None;
    for mask in 1usize..(1 << s) {
        let idx: Vec<usize> = (0..s).filter(|i| mask >> i & 1 == 1).collect();
        let lambdas = match affine_min_norm(simplex, &idx) {
            Some(l) => l,
            None => continue,
        };
        if lambdas.iter().any(|&l| l < -1e-12) {
            continue;
        }
        let mut x = Point::zeros(simplex[0].w.len());
        for (&i, &l) in idx.iter().zip(&lambdas) {
            x += &simplex[i].w * l;
        }
        let n = x.norm();
        let better = match &best {
            None => true,
            Some((bn, _, bidx, _)) => n < *bn - 1e-15 || (n <= *bn && idx.len() < bidx.len()),
        };
        if better {
            best = Some((n, x, idx, lambdas));
        }
    }
    let (_, x, idx, lambdas) = best.expect("single vertices are always feasible");
    (x, idx, lambdas)
}

/// Weights `λ` (summing to one) minimizing `|Σ λ_i w_i|` over the affine
/// hull of the selected vertices; `None` when they are affinely dependent.
fn affine_min_norm(simplex: &[Vertex], idx: &[usize]) -> Option<Vec<f64>> {
    if idx.len() == 1 {
        return Some(alloc::vec![1.0]);
    }
    let w0 = &simplex[idx[0]].w;
    let r = idx.len() - 1;
    let mut diffs = Matrix::zeros(w0.len(), r);
    for (k, &i) in idx[1..].iter().enumerate() {
        diffs.set_column(k, &(&simplex[i].w - w0));
    }
    // Least squares on the differences themselves: the normal equations would
    // square the conditioning of thin simplices.
    let svd = diffs.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.len() < r || svd.singular_values.min() <= 1e-12 * smax {
        return None;
    }
    let t = svd.solve(&-w0, 0.0).ok()?;
    let mut lambdas = alloc::vec![1.0 - t.sum()];
    lambdas.extend(t.iter().copied());
    Some(lambdas)
}

/// Distance between `conv(a)` and `conv(b)` to within `eps` (absolute).
pub fn gjk_query<A, B>(a: &A, b: &B, eps: f64) -> GjkResult
where
    A: SupportMap + ?Sized,
    B: SupportMap + ?Sized,
{
    let d = a.dim();
    let seed_dir = Point::from_element(d, 1.0);
    let first = {
        let pa = a.support(&-&seed_dir);
        let pb = b.support(&seed_dir);
        Vertex {
            w: &pa - &pb,
            a: pa,
            b: pb,
        }
    };
    let mut simplex = alloc::vec![first.clone()];
    let mut weights = alloc::vec![1.0];
    let mut v = first.w.clone();
    let scale = 1.0 + first.a.amax().max(first.b.amax());
    let max_iter = 64 + 32 * d;
    for _ in 0..max_iter {
        let vnorm = v.norm();
        if vnorm <= 1e-14 * scale {
            break;
        }
        let pa = a.support(&-&v);
        let pb = b.support(&v);
        let w = &pa - &pb;
        // The set difference lies in {x : v·x >= v·w}.
        let lower = v.dot(&w) / vnorm;
        if vnorm - lower <= eps.max(1e-15 * scale) {
            break;
        }
        if simplex.iter().any(|s| (&s.w - &w).amax() <= 1e-15 * scale) {
            break;
        }
        simplex.push(Vertex { w, a: pa, b: pb });
        let (x, idx, lambdas) = closest_on_simplex(&simplex);
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        weights = lambdas;
        if x.norm() >= vnorm {
            break;
        }
        v = x;
        if simplex.len() > d {
            // Full simplex containing the origin.
            break;
        }
    }
    let mut point_a = Point::zeros(d);
    let mut point_b = Point::zeros(d);
    let mut diff = Point::zeros(d);
    for (s, &l) in simplex.iter().zip(&weights) {
        point_a += &s.a * l;
        point_b += &s.b * l;
        diff += &s.w * l;
    }
    GjkResult {
        distance: diff.norm(),
        point_a,
        point_b,
    }
}

/// Distance from a point to `conv(set)`.
pub fn point_distance<S: SupportMap + ?Sized>(p: &Point, set: &S, eps: f64) -> GjkResult {
    gjk_query(p, set, eps)
}

/// Euclidean distance between `conv(P)` and `conv(Q)`; zero when they meet.
pub fn gjk_distance(p: &VPolytope, q: &VPolytope, tol: &Tolerances) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            context: "distance query",
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(gjk_query(p, q, tol.gjk_eps).distance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;

    #[test]
    fn point_point() {
        let p = VPolytope::from_points(&[&[0.0, 0.0]]).unwrap();
        let q = VPolytope::from_points(&[&[3.0, 4.0]]).unwrap();
        assert!((gjk_distance(&p, &q, &Tolerances::default()).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn point_segment() {
        let p = VPolytope::from_points(&[&[0.0, 0.0]]).unwrap();
        let q = VPolytope::from_points(&[&[1.0, -1.0], &[1.0, 1.0]]).unwrap();
        let r = gjk_query(&p, &q, 1e-12);
        assert!((r.distance - 1.0).abs() < 1e-10);
        assert!((r.point_b - point(&[1.0, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn overlapping_sets_are_at_zero() {
        let a = VPolytope::from_box(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        let b = VPolytope::from_box(&[0.5, 0.5, 0.5], &[2.0, 2.0, 2.0]).unwrap();
        assert!(gjk_distance(&a, &b, &Tolerances::default()).unwrap() <= 1e-9);
        assert!(gjk_distance(&a, &a, &Tolerances::default()).unwrap() <= 1e-9);
    }

    #[test]
    fn cube_to_point() {
        let a = VPolytope::from_box(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        let p = point(&[2.0, 3.0, 0.5]);
        let r = point_distance(&p, &a, 1e-12);
        assert!((r.distance - crate::linalg::sqrt(5.0)).abs() < 1e-9);
    }

    #[test]
    fn one_dimensional() {
        let a = VPolytope::from_points(&[&[0.0], &[1.0]]).unwrap();
        let b = VPolytope::from_points(&[&[4.0], &[3.0]]).unwrap();
        assert!((gjk_distance(&a, &b, &Tolerances::default()).unwrap() - 2.0).abs() < 1e-12);
    }
}
