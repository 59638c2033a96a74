use alloc::vec::Vec;

use super::lp::{lp_feasible_point, support_of_hpolytope};
use super::{Tolerances, VPolytope, MAX_HULL_DIM};
use crate::linalg::{all_finite, solve_square, Matrix, Point};
use crate::{Error, Result};

/// The polyhedron `{x : normals[i]·x <= offsets[i]}`; possibly unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    dim: usize,
    normals: Vec<Point>,
    offsets: Vec<f64>,
}

impl HPolytope {
    pub fn new(dim: usize, normals: Vec<Point>, offsets: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("polyhedron dimension must be positive".into()));
        }
        if normals.len() != offsets.len() {
            return Err(Error::DimensionMismatch {
                context: "halfspace offsets",
                expected: normals.len(),
                found: offsets.len(),
            });
        }
        for n in &normals {
            if n.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "halfspace normal",
                    expected: dim,
                    found: n.len(),
                });
            }
            if !all_finite(n) {
                return Err(Error::NonFinite("halfspace normal"));
            }
            if n.norm() == 0.0 {
                return Err(Error::InvalidArgument("halfspace normal has zero norm".into()));
            }
        }
        if offsets.iter().any(|o| !o.is_finite()) {
            return Err(Error::NonFinite("halfspace offset"));
        }
        Ok(HPolytope {
            dim,
            normals,
            offsets,
        })
    }

    /// `R^dim` (no constraints).
    pub fn whole_space(dim: usize) -> Self {
        HPolytope {
            dim,
            normals: Vec::new(),
            offsets: Vec::new(),
        }
    }

    /// An empty set: `x_1 <= -1` and `-x_1 <= -1`.
    pub fn empty(dim: usize) -> Self {
        let mut e = Point::zeros(dim);
        e[0] = 1.0;
        HPolytope {
            dim,
            normals: alloc::vec![e.clone(), -e],
            offsets: alloc::vec![-1.0, -1.0],
        }
    }

    /// Box `[lo, hi]`.
    pub fn from_bounds(lo: &Point, hi: &Point) -> Result<Self> {
        let d = lo.len();
        let mut normals = Vec::with_capacity(2 * d);
        let mut offsets = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut e = Point::zeros(d);
            e[i] = 1.0;
            normals.push(e.clone());
            offsets.push(hi[i]);
            normals.push(-e);
            offsets.push(-lo[i]);
        }
        Self::new(d, normals, offsets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn normals(&self) -> &[Point] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Largest normalized violation `max_i (n_i·x - h_i)/|n_i|` (negative
    /// inside); `-inf` for the whole space.
    pub fn violation(&self, x: &Point) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, o)| (n.dot(x) - o) / n.norm())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Membership with Euclidean slack `eps` per halfspace.
    pub fn contains(&self, x: &Point, eps: f64) -> bool {
        self.violation(x) <= eps
    }

    pub fn intersect(&self, other: &HPolytope) -> Result<HPolytope> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                context: "halfspace intersection",
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut normals = self.normals.clone();
        normals.extend(other.normals.iter().cloned());
        let mut offsets = self.offsets.clone();
        offsets.extend(other.offsets.iter().copied());
        Ok(HPolytope {
            dim: self.dim,
            normals,
            offsets,
        })
    }

    /// `{x : m x ∈ self}`. Rows whose pulled-back normal vanishes are dropped
    /// when satisfied by every `x` and make the result empty otherwise.
    pub fn preimage(&self, m: &Matrix, eps: f64) -> Result<HPolytope> {
        if m.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "halfspace preimage",
                expected: self.dim,
                found: m.nrows(),
            });
        }
        let n_in = m.ncols();
        let mut normals = Vec::with_capacity(self.len());
        let mut offsets = Vec::with_capacity(self.len());
        for (n, &o) in self.normals.iter().zip(&self.offsets) {
            let scale = n.norm();
            let row = m.tr_mul(n) / scale;
            let off = o / scale;
            if row.norm() <= 1e-12 {
                if off < -eps {
                    return Ok(HPolytope::empty(n_in));
                }
                continue;
            }
            let rn = row.norm();
            normals.push(row / rn);
            offsets.push(off / rn);
        }
        Ok(HPolytope {
            dim: n_in,
            normals,
            offsets,
        })
    }

    /// Rows scaled to unit normals.
    pub fn normalized(&self) -> HPolytope {
        let mut out = self.clone();
        for (n, o) in out.normals.iter_mut().zip(out.offsets.iter_mut()) {
            let s = n.norm();
            *n /= s;
            *o /= s;
        }
        out
    }

    /// Nonempty at LP tolerance.
    pub fn is_feasible(&self, tol: &Tolerances) -> Result<bool> {
        Ok(lp_feasible_point(self, tol)?.is_some())
    }

    /// `sup { c·x : x ∈ self }`: `None` when unbounded, `-inf` when empty.
    pub fn support_value(&self, c: &Point) -> Result<Option<f64>> {
        support_of_hpolytope(self, c)
    }

    /// Vertex enumeration by intersecting every `dim`-tuple of planes
    /// (dimension at most three). Fails on empty or unbounded sets.
    pub fn vertices(&self, tol: &Tolerances) -> Result<VPolytope> {
        let d = self.dim;
        if d > MAX_HULL_DIM {
            return Err(Error::UnsupportedDimension {
                dim: d,
                max: MAX_HULL_DIM,
            });
        }
        for i in 0..d {
            let mut e = Point::zeros(d);
            e[i] = 1.0;
            for dir in [e.clone(), -e] {
                match self.support_value(&dir)? {
                    None => return Err(Error::InvalidArgument("polyhedron is unbounded".into())),
                    Some(v) if v == f64::NEG_INFINITY => {
                        return Err(Error::EmptySet("polyhedron"))
                    }
                    Some(_) => {}
                }
            }
        }
        let h = self.normalized();
        let slack = tol.geom_eps.max(tol.lp_eps);
        let mut pts: Vec<Point> = Vec::new();
        let rows = h.len();
        let mut idx: Vec<usize> = (0..d).collect();
        if rows >= d {
            loop {
                let mut a = Matrix::zeros(d, d);
                let mut b = Point::zeros(d);
                for (r, &i) in idx.iter().enumerate() {
                    a.set_row(r, &h.normals[i].transpose());
                    b[r] = h.offsets[i];
                }
                if let Some(x) = solve_square(&a, &b, 1e-10) {
                    if h.contains(&x, slack) {
                        pts.push(x);
                    }
                }
                // Next combination in lexicographic order.
                let mut k = d;
                while k > 0 && idx[k - 1] == rows - d + k - 1 {
                    k -= 1;
                }
                if k == 0 {
                    break;
                }
                idx[k - 1] += 1;
                for j in k..d {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
        if pts.is_empty() {
            // Bounded and nonempty but within tolerance of lower dimension.
            let x = lp_feasible_point(self, tol)?.ok_or(Error::EmptySet("polyhedron"))?;
            pts.push(x);
        }
        Ok(VPolytope::new(d, pts)?.pruned(tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;

    #[test]
    fn validation() {
        assert!(HPolytope::new(1, alloc::vec![point(&[0.0])], alloc::vec![1.0]).is_err());
        assert!(HPolytope::new(1, alloc::vec![point(&[1.0])], alloc::vec![]).is_err());
        assert!(HPolytope::new(2, alloc::vec![point(&[1.0])], alloc::vec![1.0]).is_err());
    }

    #[test]
    fn membership_and_preimage() {
        let y = HPolytope::new(1, alloc::vec![point(&[1.0])], alloc::vec![0.0]).unwrap();
        let ca = Matrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let pre = y.preimage(&ca, 1e-9).unwrap();
        assert!(pre.contains(&point(&[-1.0, 1.0]), 1e-12));
        assert!(!pre.contains(&point(&[0.5, 0.0]), 1e-12));
        let zero = Matrix::zeros(1, 2);
        assert_eq!(y.preimage(&zero, 1e-9).unwrap().len(), 0);
        let neg = HPolytope::new(1, alloc::vec![point(&[1.0])], alloc::vec![-1.0]).unwrap();
        let e = neg.preimage(&zero, 1e-9).unwrap();
        assert!(!e.is_feasible(&Tolerances::default()).unwrap());
    }

    #[test]
    fn square_vertices() {
        let h = HPolytope::from_bounds(&point(&[0.0, 0.0]), &point(&[1.0, 2.0])).unwrap();
        let v = h.vertices(&Tolerances::default()).unwrap();
        assert_eq!(v.len(), 4);
        let (lo, hi) = v.bounding_box();
        assert_eq!(lo, point(&[0.0, 0.0]));
        assert_eq!(hi, point(&[1.0, 2.0]));
        assert!(HPolytope::whole_space(2).vertices(&Tolerances::default()).is_err());
        assert!(HPolytope::empty(2).vertices(&Tolerances::default()).is_err());
    }
}
