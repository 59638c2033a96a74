//! The discrete-time LTI plant `x(t+1) = A x(t) + B u(t)`, `y(t) = C x(t)`,
//! its forward reach sets and backward pre-images.

use alloc::vec::Vec;

use crate::geometry::lp::support_of_hpolytope;
use crate::geometry::{
    convex_hull_h, hulls_intersect, linear_image, zonotope_image, zonotope_sum,
    zonotope_to_vpolytope, ConvexSet, HPolytope, SupportMap, Tolerances, VPolytope, Zonotope,
    MAX_HULL_DIM,
};
use crate::linalg::{mat_pow, Matrix, Point};
use crate::{Error, Result};

/// Vertex count above which exact propagation switches to a zonotope
/// over-approximation.
pub const DEFAULT_VERTEX_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: Matrix,
    b: Matrix,
    c: Matrix,
}

impl LtiSystem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "A must be square",
                expected: n,
                found: a.ncols(),
            });
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                context: "B row count",
                expected: n,
                found: b.nrows(),
            });
        }
        if c.ncols() != n || c.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                context: "C column count",
                expected: n,
                found: c.ncols(),
            });
        }
        if a.iter().chain(b.iter()).chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("system matrices"));
        }
        Ok(LtiSystem { a, b, c })
    }

    /// The same dynamics observed through another map.
    pub fn with_output(&self, c: Matrix) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), c)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    pub fn p(&self) -> usize {
        self.c.nrows()
    }
    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }

    /// `C A^k`.
    pub fn output_map(&self, k: usize) -> Matrix {
        &self.c * mat_pow(&self.a, k)
    }

    /// `[C A^{k-1} B, …, C A B, C B]`, mapping the stacked controls
    /// `(u(0), …, u(k-1))` to their contribution to `y(k)`.
    pub fn output_controllability_matrix(&self, k: usize) -> Matrix {
        let (p, m) = (self.p(), self.m());
        let mut out = Matrix::zeros(p, m * k);
        let mut ca = self.c.clone();
        for j in (0..k).rev() {
            out.view_mut((0, j * m), (p, m)).copy_from(&(&ca * &self.b));
            ca = &ca * &self.a;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    State,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fidelity {
    Exact,
    Over,
    Under,
}

/// The generator of a reach-set vertex: an initial vertex index and one
/// input vertex index per step (`controls[t]` is applied at time `t`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub x0: usize,
    pub controls: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachSet {
    pub set: ConvexSet,
    pub time: usize,
    pub space: Space,
    pub fidelity: Fidelity,
    /// One entry per vertex when `set` is a vertex polytope built from vertex
    /// inputs.
    pub provenance: Option<Vec<Provenance>>,
}

impl ReachSet {
    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn to_vpolytope(&self, tol: &Tolerances) -> Result<VPolytope> {
        self.set.to_vpolytope(tol)
    }
}

fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

fn prune_with_provenance(
    p: VPolytope,
    prov: Vec<Provenance>,
    tol: &Tolerances,
) -> (VPolytope, Vec<Provenance>) {
    if p.len() <= 1 {
        return (p, prov);
    }
    let keep = p.extreme_indices(tol);
    if keep.len() == p.len() {
        return (p, prov);
    }
    let dim = p.dim();
    let verts = p.into_vertices();
    let pv = VPolytope::new(dim, keep.iter().map(|&i| verts[i].clone()).collect())
        .expect("subset of a valid polytope");
    (pv, keep.into_iter().map(|i| prov[i].clone()).collect())
}

/// The state reach set at time `k`: `A^k X0 ⊕ Σ_j A^{k-1-j} B U`.
pub fn reach_exact(
    sys: &LtiSystem,
    x0: &ConvexSet,
    u: &ConvexSet,
    k: usize,
    tol: &Tolerances,
) -> Result<ReachSet> {
    reach_exact_capped(sys, x0, u, k, tol, DEFAULT_VERTEX_CAP)
}

/// As [`reach_exact`], switching to a zonotope over-approximation (flagged
/// in the fidelity) once a step would exceed `vertex_cap` vertices.
pub fn reach_exact_capped(
    sys: &LtiSystem,
    x0: &ConvexSet,
    u: &ConvexSet,
    k: usize,
    tol: &Tolerances,
    vertex_cap: usize,
) -> Result<ReachSet> {
    check_dim("initial set", sys.n(), x0.dim())?;
    check_dim("input set", sys.m(), u.dim())?;
    if let (ConvexSet::Zono(z0), ConvexSet::Zono(zu)) = (x0, u) {
        let bu = zonotope_image(sys.b(), zu)?;
        let mut z = z0.clone();
        for _ in 0..k {
            z = zonotope_sum(&zonotope_image(sys.a(), &z)?, &bu)?;
        }
        return Ok(ReachSet {
            set: ConvexSet::Zono(z),
            time: k,
            space: Space::State,
            fidelity: Fidelity::Exact,
            provenance: None,
        });
    }
    let p0 = x0.to_vpolytope(tol)?;
    let pu = u.to_vpolytope(tol)?;
    let bu: Vec<Point> = pu.vertices().iter().map(|v| sys.b() * v).collect();
    let mut cur = p0.clone();
    let mut prov: Vec<Provenance> = (0..p0.len())
        .map(|i| Provenance {
            x0: i,
            controls: Vec::new(),
        })
        .collect();
    for t in 0..k {
        if cur.len() * bu.len() > vertex_cap {
            log::warn!(
                "reach set at step {t} would exceed {vertex_cap} vertices; switching to a zonotope over-approximation"
            );
            let zu = ConvexSet::Poly(pu.clone()).to_zonotope_over();
            let bzu = zonotope_image(sys.b(), &zu)?;
            let mut z = ConvexSet::Poly(cur).to_zonotope_over();
            for _ in t..k {
                z = zonotope_sum(&zonotope_image(sys.a(), &z)?, &bzu)?;
            }
            return Ok(ReachSet {
                set: ConvexSet::Zono(z),
                time: k,
                space: Space::State,
                fidelity: Fidelity::Over,
                provenance: None,
            });
        }
        let mut verts = Vec::with_capacity(cur.len() * bu.len());
        let mut next_prov = Vec::with_capacity(cur.len() * bu.len());
        for (v, pr) in cur.vertices().iter().zip(&prov) {
            let av = sys.a() * v;
            for (j, b) in bu.iter().enumerate() {
                verts.push(&av + b);
                let mut c = pr.clone();
                c.controls.push(j);
                next_prov.push(c);
            }
        }
        let next = VPolytope::new(sys.n(), verts)?;
        let (pruned, pr) = prune_with_provenance(next, next_prov, tol);
        cur = pruned;
        prov = pr;
    }
    Ok(ReachSet {
        set: ConvexSet::Poly(cur),
        time: k,
        space: Space::State,
        fidelity: Fidelity::Exact,
        provenance: Some(prov),
    })
}

/// `C · R` with time, fidelity and provenance carried over.
pub fn output_set(sys: &LtiSystem, r: &ReachSet, tol: &Tolerances) -> Result<ReachSet> {
    if r.space != Space::State {
        return Err(Error::InvalidArgument("output_set expects a state-space reach set".into()));
    }
    check_dim("reach set", sys.n(), r.dim())?;
    let (set, provenance) = match &r.set {
        ConvexSet::Poly(p) => {
            let img = linear_image(sys.c(), p)?;
            match &r.provenance {
                Some(pr) => {
                    let (img, pr) = prune_with_provenance(img, pr.clone(), tol);
                    (ConvexSet::Poly(img), Some(pr))
                }
                None => (ConvexSet::Poly(img.pruned(tol)), None),
            }
        }
        ConvexSet::Zono(z) => (ConvexSet::Zono(zonotope_image(sys.c(), z)?), None),
    };
    Ok(ReachSet {
        set,
        time: r.time,
        space: Space::Output,
        fidelity: r.fidelity,
        provenance,
    })
}

/// The input-only reach set `R_u = Σ_j A^{k-1-j} B U` (reach from the origin).
pub fn input_reach(sys: &LtiSystem, u: &ConvexSet, k: usize, tol: &Tolerances) -> Result<ReachSet> {
    let origin = match u {
        ConvexSet::Zono(_) => ConvexSet::Zono(Zonotope::point(Point::zeros(sys.n()))?),
        ConvexSet::Poly(_) => ConvexSet::Poly(VPolytope::singleton(Point::zeros(sys.n()))?),
    };
    reach_exact(sys, &origin, u, k, tol)
}

/// State and output trajectories `x(0..=T)`, `y(0..=T)` for `T` controls.
pub fn simulate(sys: &LtiSystem, x0: &Point, controls: &[Point]) -> Result<(Vec<Point>, Vec<Point>)> {
    check_dim("initial state", sys.n(), x0.len())?;
    let mut xs = Vec::with_capacity(controls.len() + 1);
    let mut ys = Vec::with_capacity(controls.len() + 1);
    let mut x = x0.clone();
    for u in controls {
        check_dim("control", sys.m(), u.len())?;
        ys.push(sys.c() * &x);
        let next = sys.a() * &x + sys.b() * u;
        xs.push(x);
        x = next;
    }
    ys.push(sys.c() * &x);
    xs.push(x);
    Ok((xs, ys))
}

/// The vertex of `u` selected by each index (for replaying provenance).
pub fn controls_from_indices(u: &VPolytope, idx: &[usize]) -> Vec<Point> {
    idx.iter().map(|&i| u.vertices()[i].clone()).collect()
}

fn require_k(k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidTime { k, min: 1 });
    }
    Ok(())
}

/// Vertices of `-C R_u`.
fn neg_output_input_reach(
    sys: &LtiSystem,
    u: &ConvexSet,
    k: usize,
    tol: &Tolerances,
) -> Result<VPolytope> {
    let r = input_reach(sys, u, k, tol)?;
    let ru = r.set.to_vpolytope(tol)?;
    let neg_c = -sys.c();
    Ok(linear_image(&neg_c, &ru)?.pruned(tol))
}

fn check_hull_dim(p: usize) -> Result<()> {
    if p > MAX_HULL_DIM {
        return Err(Error::UnsupportedDimension {
            dim: p,
            max: MAX_HULL_DIM,
        });
    }
    Ok(())
}

/// Initial states from which some admissible control sequence reaches an
/// output in `Y` at time `k`: `{x0 : C A^k x0 ∈ Y ⊕ (−C R_u)}`. The result
/// may be unbounded.
pub fn pre0_output(
    sys: &LtiSystem,
    y: &HPolytope,
    u: &ConvexSet,
    k: usize,
    tol: &Tolerances,
) -> Result<HPolytope> {
    require_k(k)?;
    check_dim("output set", sys.p(), y.dim())?;
    check_hull_dim(sys.p())?;
    let neg_r = neg_output_input_reach(sys, u, k, tol)?;
    let sum = hsum_with_polytope(y, &neg_r, tol)?;
    sum.preimage(&sys.output_map(k), tol.lp_eps)
}

/// [`pre0_output`] for an output set given by its vertices.
pub fn pre0_output_hull(
    sys: &LtiSystem,
    y: &VPolytope,
    u: &ConvexSet,
    k: usize,
    tol: &Tolerances,
) -> Result<HPolytope> {
    require_k(k)?;
    check_dim("output set", sys.p(), y.dim())?;
    check_hull_dim(sys.p())?;
    let neg_r = neg_output_input_reach(sys, u, k, tol)?;
    let sum = crate::geometry::minkowski_sum(y, &neg_r, tol)?;
    convex_hull_h(&sum, tol)?.preimage(&sys.output_map(k), tol.lp_eps)
}

/// Initial states from which every admissible control sequence lands in `Y`
/// at time `k`: `{x0 : C A^k x0 ⊕ C R_u ⊆ Y}` (a Pontryagin difference, exact
/// in any dimension).
pub fn pre0_output_robust(
    sys: &LtiSystem,
    y: &HPolytope,
    u: &ConvexSet,
    k: usize,
    tol: &Tolerances,
) -> Result<HPolytope> {
    require_k(k)?;
    check_dim("output set", sys.p(), y.dim())?;
    let r = input_reach(sys, u, k, tol)?;
    let mut offsets = Vec::with_capacity(y.len());
    for (n, &o) in y.normals().iter().zip(y.offsets()) {
        // max over r in R_u of n·(C r) = support of R_u in direction Cᵀn.
        let dir = sys.c().tr_mul(n);
        let s = r.set.support(&dir);
        offsets.push(o - dir.dot(&s));
    }
    let shrunk = HPolytope::new(sys.p(), y.normals().to_vec(), offsets)?;
    shrunk.preimage(&sys.output_map(k), tol.lp_eps)
}

/// H-representation of `Y ⊕ conv(Q)` for a (possibly unbounded) polyhedron
/// `Y` of dimension at most three.
fn hsum_with_polytope(y: &HPolytope, q: &VPolytope, tol: &Tolerances) -> Result<HPolytope> {
    let d = y.dim();
    if q.len() == 1 {
        let t = &q.vertices()[0];
        let offsets = y.normals().iter().zip(y.offsets()).map(|(n, o)| o + n.dot(t)).collect();
        return HPolytope::new(d, y.normals().to_vec(), offsets);
    }
    if y.is_empty() {
        return Ok(HPolytope::whole_space(d));
    }
    // Bounded Y: go through vertices.
    if let Ok(yv) = y.vertices(tol) {
        let sum = crate::geometry::minkowski_sum(&yv, q, tol)?;
        return convex_hull_h(&sum, tol);
    }
    if !y.is_feasible(tol)? {
        return Ok(HPolytope::empty(d));
    }
    let qh = convex_hull_h(q, tol)?;
    let mut candidates: Vec<Point> = y.normalized().normals().to_vec();
    candidates.extend(qh.normalized().normals().iter().cloned());
    if d == 3 {
        let qv = q.vertices();
        let yn = y.normals();
        for i in 0..yn.len() {
            for j in i + 1..yn.len() {
                let e1 = yn[i].cross(&yn[j]);
                if e1.norm() <= 1e-12 {
                    continue;
                }
                for a in 0..qv.len() {
                    for b in a + 1..qv.len() {
                        let e2 = &qv[b] - &qv[a];
                        let n = e1.cross(&e2);
                        let nn = n.norm();
                        if nn > 1e-12 {
                            candidates.push(&n / nn);
                            candidates.push(-&n / nn);
                        }
                    }
                }
            }
        }
    }
    let mut normals: Vec<Point> = Vec::new();
    let mut offsets: Vec<f64> = Vec::new();
    for n in candidates {
        if normals.iter().any(|m| (m - &n).amax() <= 1e-12) {
            continue;
        }
        match support_of_hpolytope(y, &n)? {
            None => continue,
            Some(s) if s == f64::NEG_INFINITY => return Ok(HPolytope::empty(d)),
            Some(s) => {
                let qs = n.dot(&q.support(&n));
                offsets.push(s + qs);
                normals.push(n);
            }
        }
    }
    HPolytope::new(d, normals, offsets)
}

/// A verification problem: plant, secret and nonsecret initial sets, the
/// shared admissible input set, observation instants and tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub sys: LtiSystem,
    pub secret: VPolytope,
    pub nonsecret: VPolytope,
    pub inputs: ConvexSet,
    pub schedule: Vec<usize>,
    pub tol: Tolerances,
}

impl Scenario {
    pub fn new(
        sys: LtiSystem,
        secret: VPolytope,
        nonsecret: VPolytope,
        inputs: ConvexSet,
        schedule: Vec<usize>,
        tol: Tolerances,
    ) -> Result<Self> {
        tol.validate()?;
        check_dim("secret set", sys.n(), secret.dim())?;
        check_dim("nonsecret set", sys.n(), nonsecret.dim())?;
        check_dim("input set", sys.m(), inputs.dim())?;
        if schedule.is_empty() {
            return Err(Error::EmptySet("schedule"));
        }
        if let Some(&k) = schedule.iter().find(|&&k| k < 1) {
            return Err(Error::InvalidTime { k, min: 1 });
        }
        if hulls_intersect(&secret, &nonsecret, &tol)? {
            log::warn!("secret and nonsecret initial sets overlap");
        }
        Ok(Scenario {
            sys,
            secret,
            nonsecret,
            inputs,
            schedule,
            tol,
        })
    }

    /// Same scenario with another secret set (no overlap warning).
    pub fn with_secret(&self, secret: VPolytope) -> Result<Self> {
        check_dim("secret set", self.sys.n(), secret.dim())?;
        Ok(Scenario {
            secret,
            ..self.clone()
        })
    }

    pub fn with_nonsecret(&self, nonsecret: VPolytope) -> Result<Self> {
        check_dim("nonsecret set", self.sys.n(), nonsecret.dim())?;
        Ok(Scenario {
            nonsecret,
            ..self.clone()
        })
    }

    pub fn with_output(&self, c: Matrix) -> Result<Self> {
        Ok(Scenario {
            sys: self.sys.with_output(c)?,
            ..self.clone()
        })
    }

    pub fn secret_reach(&self, k: usize) -> Result<ReachSet> {
        reach_exact(&self.sys, &ConvexSet::Poly(self.secret.clone()), &self.inputs, k, &self.tol)
    }

    pub fn nonsecret_reach(&self, k: usize) -> Result<ReachSet> {
        reach_exact(&self.sys, &ConvexSet::Poly(self.nonsecret.clone()), &self.inputs, k, &self.tol)
    }

    pub fn secret_output(&self, k: usize) -> Result<ReachSet> {
        output_set(&self.sys, &self.secret_reach(k)?, &self.tol)
    }

    pub fn nonsecret_output(&self, k: usize) -> Result<ReachSet> {
        output_set(&self.sys, &self.nonsecret_reach(k)?, &self.tol)
    }

    /// The input set in vertex form (zonotopes are enumerated).
    pub fn input_vertices(&self) -> Result<VPolytope> {
        self.inputs.to_vpolytope(&self.tol)
    }
}

/// Converts a zonotope input set to vertices when cheap, leaving it as is
/// otherwise.
pub fn normalize_inputs(u: &ConvexSet, tol: &Tolerances) -> ConvexSet {
    match u {
        ConvexSet::Zono(z) => zonotope_to_vpolytope(z, tol)
            .map(ConvexSet::Poly)
            .unwrap_or_else(|_| u.clone()),
        p => p.clone(),
    }
}
