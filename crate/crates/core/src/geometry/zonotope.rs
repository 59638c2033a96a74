use alloc::vec::Vec;

use super::gjk::SupportMap;
use super::{Tolerances, VPolytope, MAX_HULL_DIM};
use crate::linalg::{all_finite, dedupe_indices, Matrix, Point};
use crate::{Error, Result};

/// Generator count above which sign-pattern enumeration is refused.
pub const MAX_ENUM_GENERATORS: usize = 12;

/// `{center + Σ ξ_j g_j : |ξ_j| <= 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope {
    center: Point,
    generators: Vec<Point>,
}

impl Zonotope {
    pub fn new(center: Point, generators: Vec<Point>) -> Result<Self> {
        let d = center.len();
        if d == 0 {
            return Err(Error::InvalidArgument("zonotope dimension must be positive".into()));
        }
        if !all_finite(&center) {
            return Err(Error::NonFinite("zonotope center"));
        }
        for g in &generators {
            if g.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "zonotope generator",
                    expected: d,
                    found: g.len(),
                });
            }
            if !all_finite(g) {
                return Err(Error::NonFinite("zonotope generator"));
            }
        }
        Ok(Zonotope { center, generators })
    }

    pub fn point(center: Point) -> Result<Self> {
        Self::new(center, Vec::new())
    }

    /// Axis-aligned box `[lo, hi]`; degenerate axes get no generator.
    pub fn from_bounds(lo: &Point, hi: &Point) -> Self {
        let d = lo.len();
        let center = (lo + hi) / 2.0;
        let mut generators = Vec::new();
        for i in 0..d {
            let r = (hi[i] - lo[i]) / 2.0;
            if r > 0.0 {
                let mut g = Point::zeros(d);
                g[i] = r;
                generators.push(g);
            }
        }
        Zonotope { center, generators }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn generators(&self) -> &[Point] {
        &self.generators
    }

    /// Generator count divided by dimension.
    pub fn order(&self) -> f64 {
        self.generators.len() as f64 / self.dim() as f64
    }

    /// The point `center + Σ ξ_j g_j` (factors are clamped to `[-1, 1]`).
    pub fn point_at(&self, xi: &[f64]) -> Point {
        let mut p = self.center.clone();
        for (g, &x) in self.generators.iter().zip(xi) {
            p += g * x.clamp(-1.0, 1.0);
        }
        p
    }

    pub fn radius(&self) -> Point {
        let mut r = Point::zeros(self.dim());
        for g in &self.generators {
            r += g.abs();
        }
        r
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let r = self.radius();
        (&self.center - &r, &self.center + &r)
    }

    pub fn support(&self, dir: &Point) -> Point {
        let mut p = self.center.clone();
        for g in &self.generators {
            let s = g.dot(dir);
            if s > 0.0 {
                p += g;
            } else if s < 0.0 {
                p -= g;
            }
        }
        p
    }

    /// Membership by LP over the generator factors; slack is Euclidean per
    /// coordinate (max-norm).
    pub fn contains(&self, x: &Point, eps: f64) -> Result<bool> {
        use super::lp::{LinearProgram, LpOutcome, Relation};
        let d = self.dim();
        let g = self.generators.len();
        if g == 0 {
            return Ok((x - &self.center).amax() <= eps);
        }
        // Variables: xi (free, g), t (>= 0); |G xi - (x - c)|_inf <= t, |xi| <= 1.
        let mut free = alloc::vec![true; g];
        free.push(false);
        let mut lp = LinearProgram::new(free);
        let diff = x - &self.center;
        for i in 0..d {
            let row: Vec<f64> = self.generators.iter().map(|gj| gj[i]).collect();
            let mut plus = row.clone();
            plus.push(-1.0);
            lp.add_row(plus, Relation::Le, diff[i]);
            let mut minus: Vec<f64> = row.iter().map(|v| -v).collect();
            minus.push(-1.0);
            lp.add_row(minus, Relation::Le, -diff[i]);
        }
        for j in 0..g {
            let mut up = alloc::vec![0.0; g + 1];
            up[j] = 1.0;
            lp.add_row(up.clone(), Relation::Le, 1.0);
            up[j] = -1.0;
            lp.add_row(up, Relation::Le, 1.0);
        }
        let mut obj = alloc::vec![0.0; g + 1];
        obj[g] = 1.0;
        lp.set_objective(obj);
        match lp.solve()? {
            LpOutcome::Optimal { value, .. } => Ok(value <= eps),
            _ => Err(Error::LpNoConvergence),
        }
    }
}

impl SupportMap for Zonotope {
    fn dim(&self) -> usize {
        Zonotope::dim(self)
    }
    fn support(&self, dir: &Point) -> Point {
        Zonotope::support(self, dir)
    }
}

/// Center `Mc`, generators `{M g_j}`.
pub fn zonotope_image(m: &Matrix, z: &Zonotope) -> Result<Zonotope> {
    if m.ncols() != z.dim() {
        return Err(Error::DimensionMismatch {
            context: "zonotope image",
            expected: z.dim(),
            found: m.ncols(),
        });
    }
    Zonotope::new(m * &z.center, z.generators.iter().map(|g| m * g).collect())
}

/// Centers add, generator lists concatenate.
pub fn zonotope_sum(a: &Zonotope, b: &Zonotope) -> Result<Zonotope> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "zonotope sum",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut generators = a.generators.clone();
    generators.extend(b.generators.iter().cloned());
    Ok(Zonotope {
        center: &a.center + &b.center,
        generators,
    })
}

fn budget(z: &Zonotope, order: usize) -> Result<usize> {
    if order == 0 {
        return Err(Error::InvalidArgument("reduction order must be at least 1".into()));
    }
    Ok(order * z.dim())
}

/// Indices sorted by decreasing generator norm (stable).
fn by_norm_desc(z: &Zonotope) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.generators.len()).collect();
    idx.sort_by(|&a, &b| z.generators[b].norm().total_cmp(&z.generators[a].norm()));
    idx
}

/// Keeps the largest generators and encloses the rest in their interval
/// hull box, so the result contains `z` and has at most `order·dim`
/// generators.
pub fn zonotope_reduce_over(z: &Zonotope, order: usize) -> Result<Zonotope> {
    let budget = budget(z, order)?;
    if z.generators.len() <= budget {
        return Ok(z.clone());
    }
    let d = z.dim();
    let idx = by_norm_desc(z);
    // The box takes up to `d` generators of the budget.
    let keep = budget.saturating_sub(d);
    let mut generators: Vec<Point> = idx[..keep].iter().map(|&i| z.generators[i].clone()).collect();
    let mut rad = Point::zeros(d);
    for &i in &idx[keep..] {
        rad += z.generators[i].abs();
    }
    for i in 0..d {
        if rad[i] > 0.0 {
            let mut g = Point::zeros(d);
            g[i] = rad[i];
            generators.push(g);
        }
    }
    Ok(Zonotope {
        center: z.center.clone(),
        generators,
    })
}

/// Drops the smallest generators beyond `order·dim`; the result is inside `z`.
pub fn zonotope_reduce_under(z: &Zonotope, order: usize) -> Result<Zonotope> {
    let budget = budget(z, order)?;
    if z.generators.len() <= budget {
        return Ok(z.clone());
    }
    let idx = by_norm_desc(z);
    let mut keep: Vec<usize> = idx[..budget].to_vec();
    keep.sort_unstable();
    Ok(Zonotope {
        center: z.center.clone(),
        generators: keep.into_iter().map(|i| z.generators[i].clone()).collect(),
    })
}

/// Exact vertex form. Up to three dimensions this is an incremental
/// Minkowski sum with hull pruning; above it enumerates the `2^g` sign
/// patterns and refuses more than twelve generators.
pub fn zonotope_to_vpolytope(z: &Zonotope, tol: &Tolerances) -> Result<VPolytope> {
    let d = z.dim();
    let gens: Vec<&Point> = z.generators.iter().filter(|g| g.amax() > 0.0).collect();
    if d <= MAX_HULL_DIM {
        let mut pts: Vec<Point> = alloc::vec![z.center.clone()];
        for g in gens {
            let mut next = Vec::with_capacity(2 * pts.len());
            for p in &pts {
                next.push(p + g);
                next.push(p - g);
            }
            pts = VPolytope::new(d, next)?.pruned(tol).into_vertices();
        }
        return VPolytope::new(d, pts);
    }
    if gens.len() > MAX_ENUM_GENERATORS {
        return Err(Error::SizeLimit {
            needed: 1usize << gens.len().min(63),
            limit: 1 << MAX_ENUM_GENERATORS,
        });
    }
    let mut pts = Vec::with_capacity(1 << gens.len());
    for mask in 0..(1usize << gens.len()) {
        let mut p = z.center.clone();
        for (j, g) in gens.iter().enumerate() {
            if mask >> j & 1 == 1 {
                p += *g;
            } else {
                p -= *g;
            }
        }
        pts.push(p);
    }
    let keep = dedupe_indices(&pts, tol.geom_eps);
    VPolytope::new(d, keep.into_iter().map(|i| pts[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;

    #[test]
    fn conversions() {
        let tol = Tolerances::default();
        let s = Zonotope::point(point(&[1.0, 2.0])).unwrap();
        assert_eq!(zonotope_to_vpolytope(&s, &tol).unwrap().len(), 1);
        let z = Zonotope::new(point(&[1.0]), alloc::vec![point(&[0.5]), point(&[0.5])]).unwrap();
        let v = zonotope_to_vpolytope(&z, &tol).unwrap();
        let (lo, hi) = v.bounding_box();
        assert_eq!(v.len(), 2);
        assert_eq!((lo[0], hi[0]), (0.0, 2.0));
    }

    #[test]
    fn budget_respected() {
        let gens: Vec<Point> = (1..=7).map(|i| point(&[i as f64, 1.0 / i as f64])).collect();
        let z = Zonotope::new(point(&[0.0, 0.0]), gens).unwrap();
        assert_eq!(zonotope_reduce_over(&z, 5).unwrap(), z);
        let over = zonotope_reduce_over(&z, 2).unwrap();
        let under = zonotope_reduce_under(&z, 2).unwrap();
        assert!(over.generators().len() <= 4);
        assert_eq!(under.generators().len(), 4);
        assert!(zonotope_reduce_over(&z, 0).is_err());
        let (lo, hi) = z.bounding_box();
        let (olo, ohi) = over.bounding_box();
        assert!((lo - olo).amax() < 1e-12 && (hi - ohi).amax() < 1e-12);
    }

    #[test]
    fn membership_lp() {
        let z = Zonotope::from_bounds(&point(&[0.0, 0.0]), &point(&[1.0, 1.0]));
        assert!(z.contains(&point(&[0.3, 0.9]), 1e-9).unwrap());
        assert!(!z.contains(&point(&[1.3, 0.9]), 1e-9).unwrap());
    }

    #[test]
    fn large_generator_count_refused_in_high_dim() {
        let gens: Vec<Point> = (0..13).map(|i| point(&[1.0, i as f64, 0.0, 1.0])).collect();
        let z = Zonotope::new(Point::zeros(4), gens).unwrap();
        assert!(matches!(
            zonotope_to_vpolytope(&z, &Tolerances::default()),
            Err(Error::SizeLimit { .. })
        ));
    }
}
