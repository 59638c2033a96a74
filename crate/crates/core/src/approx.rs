//! Sound three-valued verification from zonotope over- and
//! under-approximations of the reach sets.

use alloc::vec::Vec;

use crate::geometry::lp::{LinearProgram, LpOutcome, Relation};
use crate::geometry::{
    convex_hull_h, gjk_query, zonotope_image, zonotope_reduce_over, zonotope_reduce_under,
    zonotope_sum, zonotope_to_vpolytope, ConvexSet, Tolerances, VPolytope, Zonotope,
    MAX_HULL_DIM,
};
use crate::linalg::{lstsq_min_norm, Matrix, Point};
use crate::opacity::{require_k, worst_gap, Mode, Status, Verdict, Witness};
use crate::system::{Fidelity, LtiSystem, ReachSet, Scenario, Space};
use crate::{Error, Result};

/// Which initial set an approximation pair was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Secret,
    Nonsecret,
}

/// An under- and an over-approximation of one reach set.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxPair {
    pub under: ReachSet,
    pub over: ReachSet,
    pub source: Role,
    pub k: usize,
}

/// Largest (by total half-width) axis-aligned box inside `conv(p)`.
/// Above three dimensions the centroid is used instead.
pub fn inscribed_box(p: &VPolytope, tol: &Tolerances) -> Result<Zonotope> {
    let d = p.dim();
    if p.len() == 1 {
        return Zonotope::point(p.vertices()[0].clone());
    }
    if d > MAX_HULL_DIM {
        return Zonotope::point(p.centroid());
    }
    let h = convex_hull_h(p, tol)?.normalized();
    // Variables: center (free, d), half-widths (>= 0, d).
    let mut free = alloc::vec![true; d];
    free.extend(core::iter::repeat_n(false, d));
    let mut lp = LinearProgram::new(free);
    for (n, &o) in h.normals().iter().zip(h.offsets()) {
        let mut row: Vec<f64> = n.iter().copied().collect();
        row.extend(n.iter().map(|v| v.abs()));
        lp.add_row(row, Relation::Le, o);
    }
    let mut obj = alloc::vec![0.0; d];
    obj.extend(core::iter::repeat_n(-1.0, d));
    lp.set_objective(obj);
    match lp.solve()? {
        LpOutcome::Optimal { x, .. } => {
            let c = Point::from_iterator(d, x[..d].iter().copied());
            let r = Point::from_iterator(d, x[d..].iter().copied());
            Ok(Zonotope::from_bounds(&(&c - &r), &(&c + &r)))
        }
        _ => Zonotope::point(p.centroid()),
    }
}

fn over_init(s: &ConvexSet) -> Zonotope {
    s.to_zonotope_over()
}

fn under_init(s: &ConvexSet, tol: &Tolerances) -> Result<Zonotope> {
    match s {
        ConvexSet::Zono(z) => Ok(z.clone()),
        ConvexSet::Poly(p) => inscribed_box(p, tol),
    }
}

fn propagate(
    sys: &LtiSystem,
    x0: Zonotope,
    u: &Zonotope,
    k: usize,
    order: usize,
    reduce: fn(&Zonotope, usize) -> Result<Zonotope>,
) -> Result<Zonotope> {
    let bu = zonotope_image(sys.b(), u)?;
    let mut z = reduce(&x0, order)?;
    for _ in 0..k {
        z = reduce(&zonotope_sum(&zonotope_image(sys.a(), &z)?, &bu)?, order)?;
    }
    Ok(z)
}

/// Over- and under-approximating zonotopes of the state reach set at time
/// `k`, reducing to `order·n` generators after every step.
pub fn approx_reach(
    sys: &LtiSystem,
    x0: &ConvexSet,
    u: &ConvexSet,
    k: usize,
    order: usize,
    source: Role,
    tol: &Tolerances,
) -> Result<ApproxPair> {
    if order == 0 {
        return Err(Error::InvalidArgument("reduction order must be at least 1".into()));
    }
    let over = propagate(sys, over_init(x0), &over_init(u), k, order, zonotope_reduce_over)?;
    let under = propagate(sys, under_init(x0, tol)?, &under_init(u, tol)?, k, order, zonotope_reduce_under)?;
    let wrap = |z: Zonotope, fidelity| ReachSet {
        set: ConvexSet::Zono(z),
        time: k,
        space: Space::State,
        fidelity,
        provenance: None,
    };
    Ok(ApproxPair {
        under: wrap(under, Fidelity::Under),
        over: wrap(over, Fidelity::Over),
        source,
        k,
    })
}

/// Output images of an approximation pair.
pub fn output_pair(sys: &LtiSystem, pair: &ApproxPair) -> Result<(Zonotope, Zonotope)> {
    let img = |r: &ReachSet| match &r.set {
        ConvexSet::Zono(z) => zonotope_image(sys.c(), z),
        ConvexSet::Poly(_) => Err(Error::InvalidArgument("expected a zonotope".into())),
    };
    Ok((img(&pair.under)?, img(&pair.over)?))
}

fn approx_outputs(sc: &Scenario, k: usize, order: usize) -> Result<[(Zonotope, Zonotope); 2]> {
    let s = approx_reach(&sc.sys, &ConvexSet::Poly(sc.secret.clone()), &sc.inputs, k, order, Role::Secret, &sc.tol)?;
    let ns = approx_reach(&sc.sys, &ConvexSet::Poly(sc.nonsecret.clone()), &sc.inputs, k, order, Role::Nonsecret, &sc.tol)?;
    Ok([output_pair(&sc.sys, &s)?, output_pair(&sc.sys, &ns)?])
}

/// HOLDS when `C·over(X_s) ⊆ C·under(X_ns)`, FAILS when
/// `C·under(X_s) ⊄ C·over(X_ns)` (with the violating vertex), UNKNOWN
/// otherwise.
pub fn verify_sound(sc: &Scenario, k: usize, order: usize) -> Result<Verdict> {
    require_k(k)?;
    let tol = &sc.tol;
    let [(under_s, over_s), (under_ns, over_ns)] = approx_outputs(sc, k, order)?;
    let over_s_v = zonotope_to_vpolytope(&over_s, tol)?;
    let (_, d, _) = worst_gap(&over_s_v, &ConvexSet::Zono(under_ns), tol);
    if d <= tol.geom_eps {
        return Ok(Verdict {
            status: Status::Holds,
            witness: None,
            k,
            mode: Mode::Sound,
        });
    }
    let under_s_v = zonotope_to_vpolytope(&under_s, tol)?;
    let (i, d, nearest) = worst_gap(&under_s_v, &ConvexSet::Zono(over_ns), tol);
    if d > tol.geom_eps {
        return Ok(Verdict {
            status: Status::Fails,
            witness: Some(Witness::Violation {
                output: under_s_v.vertices()[i].clone(),
                distance: d,
                nearest,
                trajectory: None,
            }),
            k,
            mode: Mode::Sound,
        });
    }
    Ok(Verdict {
        status: Status::Unknown,
        witness: None,
        k,
        mode: Mode::Sound,
    })
}

/// Advisory quality flags for a candidate secret set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateFlags {
    /// `C·under(X_s) ⊆ C·under(X_ns)` and `C·over(X_s)` meets `C·under(X_ns)`.
    pub good: bool,
    /// `C·over(X_s) ⊆ C·under(X_ns)`.
    pub best: bool,
}

pub fn candidate_flags(sc: &Scenario, k: usize, order: usize) -> Result<CandidateFlags> {
    require_k(k)?;
    let tol = &sc.tol;
    let [(under_s, over_s), (under_ns, _)] = approx_outputs(sc, k, order)?;
    let under_ns = ConvexSet::Zono(under_ns);
    let (_, d_under, _) = worst_gap(&zonotope_to_vpolytope(&under_s, tol)?, &under_ns, tol);
    let (_, d_over, _) = worst_gap(&zonotope_to_vpolytope(&over_s, tol)?, &under_ns, tol);
    let meet = gjk_query(&over_s, &under_ns, tol.gjk_eps).distance <= tol.geom_eps;
    Ok(CandidateFlags {
        good: d_under <= tol.geom_eps && meet,
        best: d_over <= tol.geom_eps,
    })
}

/// Advisory operation-count model `c1·k·L·n³ + c2·p·n + c3` for a sound
/// check with `L` approximations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for CostModel {
    /// Order-of-magnitude constants in microseconds; refit with [`CostModel::fit`].
    fn default() -> Self {
        CostModel {
            c1: 0.35,
            c2: 2.0,
            c3: 40.0,
        }
    }
}

impl CostModel {
    pub fn predict(&self, n: usize, p: usize, k: usize, l_over: usize, l_under: usize) -> f64 {
        let n = n as f64;
        let l = (l_over + l_under) as f64;
        self.c1 * k as f64 * l * n * n * n + self.c2 * p as f64 * n + self.c3
    }

    /// Least-squares fit to `(n, p, k, L_over, L_under, measured)` samples.
    pub fn fit(samples: &[(usize, usize, usize, usize, usize, f64)]) -> Result<CostModel> {
        if samples.len() < 3 {
            return Err(Error::InvalidArgument("cost model fit needs at least three samples".into()));
        }
        let mut m = Matrix::zeros(samples.len(), 3);
        let mut rhs = Point::zeros(samples.len());
        for (i, &(n, p, k, lo, lu, t)) in samples.iter().enumerate() {
            let n = n as f64;
            m[(i, 0)] = k as f64 * (lo + lu) as f64 * n * n * n;
            m[(i, 1)] = p as f64 * n;
            m[(i, 2)] = 1.0;
            rhs[i] = t;
        }
        let c = lstsq_min_norm(&m, &rhs, 1e-12);
        Ok(CostModel {
            c1: c[0],
            c2: c[1],
            c3: c[2],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;
    use crate::opacity::check_strong_k_iso;

    fn scalar(xs: (f64, f64), xns: (f64, f64)) -> Scenario {
        let one = Matrix::identity(1, 1);
        let iv = |(a, b): (f64, f64)| VPolytope::from_points(&[&[a], &[b]]).unwrap();
        Scenario::new(
            LtiSystem::new(one.clone() * 0.5, one.clone(), one).unwrap(),
            iv(xs),
            iv(xns),
            ConvexSet::Poly(iv((0.0, 1.0))),
            alloc::vec![1],
            Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn inscribed_box_of_square_is_itself() {
        let sq = VPolytope::from_box(&[0.0, 0.0], &[1.0, 2.0]).unwrap();
        let b = inscribed_box(&sq, &Tolerances::default()).unwrap();
        let (lo, hi) = b.bounding_box();
        assert!((lo - point(&[0.0, 0.0])).amax() < 1e-9);
        assert!((hi - point(&[1.0, 2.0])).amax() < 1e-9);
    }

    #[test]
    fn no_reduction_gives_equal_pair() {
        let sc = scalar((0.0, 1.0), (0.0, 4.0));
        let p = approx_reach(&sc.sys, &ConvexSet::Poly(sc.secret.clone()), &sc.inputs, 3, 10, Role::Secret, &sc.tol).unwrap();
        let (lo_u, hi_u) = p.under.set.bounding_box();
        let (lo_o, hi_o) = p.over.set.bounding_box();
        assert!((lo_u - lo_o).amax() < 1e-12 && (hi_u - hi_o).amax() < 1e-12);
    }

    #[test]
    fn matches_exact_on_scalar_instances() {
        for (xs, xns) in [((0.0, 1.0), (-1.0, 2.0)), ((0.0, 1.0), (5.0, 6.0))] {
            let sc = scalar(xs, xns);
            let exact = check_strong_k_iso(&sc, 2).unwrap().status;
            assert_eq!(verify_sound(&sc, 2, 4).unwrap().status, exact);
        }
    }

    #[test]
    fn coarse_order_can_be_unknown() {
        // Rotation-like dynamics make the boxed over-approximation loose.
        let a = Matrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let sys = LtiSystem::new(a, Matrix::from_row_slice(2, 1, &[1.0, 0.0]), Matrix::identity(2, 2)).unwrap();
        let sc = Scenario::new(
            sys,
            VPolytope::from_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            VPolytope::from_box(&[-0.1, -0.1], &[1.1, 1.1]).unwrap(),
            ConvexSet::Poly(VPolytope::from_points(&[&[0.0], &[0.2]]).unwrap()),
            alloc::vec![3],
            Tolerances::default(),
        )
        .unwrap();
        assert_eq!(check_strong_k_iso(&sc, 3).unwrap().status, Status::Holds);
        assert_eq!(verify_sound(&sc, 3, 1).unwrap().status, Status::Unknown);
        assert_eq!(verify_sound(&sc, 3, 8).unwrap().status, Status::Holds);
    }

    #[test]
    fn cost_model_shape_and_fit() {
        let m = CostModel { c1: 1.0, c2: 0.0, c3: 0.0 };
        assert_eq!(m.predict(4, 1, 1, 1, 0) / m.predict(2, 1, 1, 1, 0), 8.0);
        let truth = CostModel { c1: 0.5, c2: 3.0, c3: 7.0 };
        let samples: Vec<_> = [(1, 1, 1), (2, 1, 2), (3, 2, 1), (4, 2, 3), (5, 3, 2)]
            .iter()
            .map(|&(n, p, k)| (n, p, k, 1, 1, truth.predict(n, p, k, 1, 1)))
            .collect();
        let fit = CostModel::fit(&samples).unwrap();
        assert!((fit.c1 - 0.5).abs() < 1e-8 && (fit.c2 - 3.0).abs() < 1e-8 && (fit.c3 - 7.0).abs() < 1e-6);
    }
}
