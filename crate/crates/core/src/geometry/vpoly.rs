use alloc::vec::Vec;

use super::gjk::{gjk_query, point_distance, GjkResult, SupportMap};
use super::lp::{combine, convex_weights};
use super::hull::{extreme_indices, MAX_HULL_DIM};
use super::Tolerances;
use crate::linalg::{all_finite, Matrix, Point};
use crate::{Error, Result};

/// A polytope given as the convex hull of finitely many points.
#[derive(Debug, Clone, PartialEq)]
pub struct VPolytope {
    dim: usize,
    vertices: Vec<Point>,
}

impl VPolytope {
    pub fn new(dim: usize, vertices: Vec<Point>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("polytope dimension must be positive".into()));
        }
        if vertices.is_empty() {
            return Err(Error::EmptySet("vertex list"));
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "polytope vertex",
                    expected: dim,
                    found: v.len(),
                });
            }
            if !all_finite(v) {
                return Err(Error::NonFinite("polytope vertex"));
            }
        }
        Ok(VPolytope { dim, vertices })
    }

    pub fn from_points(points: &[&[f64]]) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        Self::new(dim, points.iter().map(|p| Point::from_column_slice(p)).collect())
    }

    pub fn singleton(p: Point) -> Result<Self> {
        Self::new(p.len(), alloc::vec![p])
    }

    /// The `2^d` corners of the box `[lo, hi]`.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                context: "box bounds",
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidArgument("box lower bound exceeds upper bound".into()));
        }
        let d = lo.len();
        if d >= 24 {
            return Err(Error::SizeLimit {
                needed: 1usize << d.min(63),
                limit: 1 << 23,
            });
        }
        let mut verts = Vec::with_capacity(1 << d);
        for mask in 0..(1usize << d) {
            let mut v = Point::zeros(d);
            for i in 0..d {
                v[i] = if mask >> i & 1 == 1 { hi[i] } else { lo[i] };
            }
            verts.push(v);
        }
        let mut p = Self::new(d, verts)?;
        let keep = super::super::linalg::dedupe_indices(&p.vertices, 0.0);
        if keep.len() < p.vertices.len() {
            p.vertices = keep.into_iter().map(|i| p.vertices[i].clone()).collect();
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Drops interior and duplicate points (hull-based up to three dimensions,
    /// duplicates only above).
    pub fn pruned(&self, tol: &Tolerances) -> VPolytope {
        let keep = extreme_indices(&self.vertices, self.dim, tol);
        if keep.len() == self.vertices.len() {
            return self.clone();
        }
        VPolytope {
            dim: self.dim,
            vertices: keep.into_iter().map(|i| self.vertices[i].clone()).collect(),
        }
    }

    /// Indices of the points kept by [`VPolytope::pruned`].
    pub fn extreme_indices(&self, tol: &Tolerances) -> Vec<usize> {
        extreme_indices(&self.vertices, self.dim, tol)
    }

    pub fn translate(&self, t: &Point) -> VPolytope {
        VPolytope {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v + t).collect(),
        }
    }

    /// Convex hull of the union (vertex-list concatenation).
    pub fn hull_union(&self, other: &VPolytope) -> Result<VPolytope> {
        check_dims("hull union", self, other)?;
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().cloned());
        Ok(VPolytope {
            dim: self.dim,
            vertices,
        })
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = self.vertices[0].clone();
        let mut hi = self.vertices[0].clone();
        for v in &self.vertices[1..] {
            for i in 0..self.dim {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    pub fn centroid(&self) -> Point {
        let mut c = Point::zeros(self.dim);
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    /// A vertex maximizing `dir · v` (first one on ties).
    pub fn support(&self, dir: &Point) -> Point {
        self.vertices[self.support_index(dir)].clone()
    }

    pub fn support_index(&self, dir: &Point) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let val = dir.dot(v);
            if val > best_val {
                best_val = val;
                best = i;
            }
        }
        best
    }
}

impl SupportMap for VPolytope {
    fn dim(&self) -> usize {
        self.dim
    }
    fn support(&self, dir: &Point) -> Point {
        VPolytope::support(self, dir)
    }
}

fn check_dims(context: &'static str, p: &VPolytope, q: &VPolytope) -> Result<()> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch {
            context,
            expected: p.dim,
            found: q.dim,
        });
    }
    Ok(())
}

/// Pairwise vertex sums; the result's hull is `conv(P) ⊕ conv(Q)`.
/// Interior points are pruned up to three dimensions.
pub fn minkowski_sum(p: &VPolytope, q: &VPolytope, tol: &Tolerances) -> Result<VPolytope> {
    check_dims("minkowski sum", p, q)?;
    let mut vertices = Vec::with_capacity(p.len() * q.len());
    for a in &p.vertices {
        for b in &q.vertices {
            vertices.push(a + b);
        }
    }
    let sum = VPolytope {
        dim: p.dim,
        vertices,
    };
    if p.dim <= MAX_HULL_DIM && p.len() > 1 && q.len() > 1 {
        Ok(sum.pruned(tol))
    } else {
        Ok(sum)
    }
}

/// Image of the vertex set under `m`.
pub fn linear_image(m: &Matrix, p: &VPolytope) -> Result<VPolytope> {
    if m.ncols() != p.dim {
        return Err(Error::DimensionMismatch {
            context: "linear image",
            expected: p.dim,
            found: m.ncols(),
        });
    }
    VPolytope::new(m.nrows(), p.vertices.iter().map(|v| m * v).collect())
}

/// Distance from `p` to `conv(outer)`. GJK can stall slightly above zero on
/// nearly degenerate faces; small positive results are refined by an LP
/// projection in the max-norm, keeping whichever point is closer.
pub fn distance_to_hull(p: &Point, outer: &VPolytope, tol: &Tolerances) -> GjkResult {
    let r = point_distance(p, outer, tol.gjk_eps);
    let scale = 1.0 + p.amax();
    if r.distance <= tol.geom_eps || r.distance > 1e-5 * scale {
        return r;
    }
    let Ok((w, _)) = convex_weights(p, &outer.vertices) else {
        return r;
    };
    // The LP support is small, so GJK on it is well conditioned.
    let support: Vec<Point> = outer
        .vertices
        .iter()
        .zip(&w)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(v, _)| v.clone())
        .collect();
    let polished = match VPolytope::new(outer.dim, support) {
        Ok(sub) => point_distance(p, &sub, tol.gjk_eps),
        Err(_) => return r,
    };
    let q = combine(&outer.vertices, &w);
    let d = (p - &q).norm();
    let lp = GjkResult {
        distance: d,
        point_a: p.clone(),
        point_b: q,
    };
    [r, lp, polished]
        .into_iter()
        .min_by(|a, b| a.distance.total_cmp(&b.distance))
        .expect("three candidates")
}

/// Worst vertex of `inner` measured by its distance to `conv(outer)`:
/// `(vertex index, distance, nearest point of outer)`.
pub fn containment_gap(
    inner: &VPolytope,
    outer: &VPolytope,
    tol: &Tolerances,
) -> Result<(usize, f64, Point)> {
    check_dims("containment", inner, outer)?;
    let mut worst = (0usize, f64::NEG_INFINITY, outer.vertices[0].clone());
    for (i, v) in inner.vertices.iter().enumerate() {
        let r = distance_to_hull(v, outer, tol);
        if r.distance > worst.1 {
            worst = (i, r.distance, r.point_b);
        }
    }
    Ok(worst)
}

/// Every vertex of `inner` lies within `geom_eps` of `conv(outer)`.
pub fn hull_contains(inner: &VPolytope, outer: &VPolytope, tol: &Tolerances) -> Result<bool> {
    check_dims("containment", inner, outer)?;
    for v in &inner.vertices {
        if distance_to_hull(v, outer, tol).distance > tol.geom_eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The hulls are within `geom_eps` of each other.
pub fn hulls_intersect(p: &VPolytope, q: &VPolytope, tol: &Tolerances) -> Result<bool> {
    check_dims("intersection", p, q)?;
    Ok(gjk_query(p, q, tol.gjk_eps).distance <= tol.geom_eps)
}
