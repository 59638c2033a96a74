//! Convex-set representations and the numeric primitives built on them.

mod gjk;
mod hpoly;
mod hull;
pub(crate) mod lp;
mod vpoly;
mod zonotope;

pub use gjk::{gjk_distance, gjk_query, point_distance, GjkResult, SupportMap};
pub use hpoly::HPolytope;
pub use hull::{convex_hull_h, convex_polygon, extreme_indices};
pub use lp::{lp_feasible_in_hull, lp_feasible_point};
pub use vpoly::{
    containment_gap, distance_to_hull, hull_contains, hulls_intersect, linear_image, minkowski_sum,
    VPolytope,
};
pub use zonotope::{
    zonotope_image, zonotope_reduce_over, zonotope_reduce_under, zonotope_sum,
    zonotope_to_vpolytope, Zonotope,
};

pub(crate) use hull::MAX_HULL_DIM;

use crate::linalg::{Matrix, Point};
use crate::{Error, Result};

/// Numeric slack used by every set query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Membership and containment slack (Euclidean).
    pub geom_eps: f64,
    /// LP feasibility slack.
    pub lp_eps: f64,
    /// GJK convergence gap.
    pub gjk_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            geom_eps: 1e-9,
            lp_eps: 1e-9,
            gjk_eps: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn new(geom_eps: f64, lp_eps: f64, gjk_eps: f64) -> Result<Self> {
        let t = Tolerances {
            geom_eps,
            lp_eps,
            gjk_eps,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("geom_eps", self.geom_eps),
            ("lp_eps", self.lp_eps),
            ("gjk_eps", self.gjk_eps),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(alloc::format!(
                    "tolerance {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Same tolerances with every slack multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Tolerances {
            geom_eps: self.geom_eps * factor,
            lp_eps: self.lp_eps * factor,
            gjk_eps: self.gjk_eps * factor,
        }
    }
}

/// A convex set carried either by vertices or as a zonotope.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Poly(VPolytope),
    Zono(Zonotope),
}

impl ConvexSet {
    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Poly(p) => p.dim(),
            ConvexSet::Zono(z) => z.dim(),
        }
    }

    pub fn image(&self, m: &Matrix) -> Result<ConvexSet> {
        Ok(match self {
            ConvexSet::Poly(p) => ConvexSet::Poly(linear_image(m, p)?),
            ConvexSet::Zono(z) => ConvexSet::Zono(zonotope_image(m, z)?),
        })
    }

    /// Vertex form; zonotopes are enumerated (see [`zonotope_to_vpolytope`]).
    pub fn to_vpolytope(&self, tol: &Tolerances) -> Result<VPolytope> {
        match self {
            ConvexSet::Poly(p) => Ok(p.clone()),
            ConvexSet::Zono(z) => zonotope_to_vpolytope(z, tol),
        }
    }

    /// Zonotope enclosure: zonotopes are returned as is, polytopes are boxed.
    pub fn to_zonotope_over(&self) -> Zonotope {
        match self {
            ConvexSet::Poly(p) => {
                let (lo, hi) = p.bounding_box();
                Zonotope::from_bounds(&lo, &hi)
            }
            ConvexSet::Zono(z) => z.clone(),
        }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            ConvexSet::Poly(p) => p.bounding_box(),
            ConvexSet::Zono(z) => z.bounding_box(),
        }
    }

    pub fn support_point(&self, dir: &Point) -> Point {
        match self {
            ConvexSet::Poly(p) => p.support(dir),
            ConvexSet::Zono(z) => z.support(dir),
        }
    }

    pub fn is_singleton(&self, eps: f64) -> bool {
        let (lo, hi) = self.bounding_box();
        (hi - lo).amax() <= eps
    }
}

impl From<VPolytope> for ConvexSet {
    fn from(p: VPolytope) -> Self {
        ConvexSet::Poly(p)
    }
}

impl From<Zonotope> for ConvexSet {
    fn from(z: Zonotope) -> Self {
        ConvexSet::Zono(z)
    }
}

impl SupportMap for ConvexSet {
    fn dim(&self) -> usize {
        ConvexSet::dim(self)
    }
    fn support(&self, dir: &Point) -> Point {
        self.support_point(dir)
    }
}
