//! Sampled falsification of strong k-ISO for `x⁺ = f(x, u)`, `y = h(x)`.
//!
//! Sampling can exhibit a secret output far from every sampled nonsecret
//! output but can never prove containment, so verdicts are FAILS or UNKNOWN.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::geometry::{distance_to_hull, Tolerances, VPolytope};
use crate::linalg::{floor, Point};
use crate::opacity::{require_k, Mode, Status, Trajectory, Verdict, Witness};
use crate::system::{LtiSystem, Provenance};
use crate::{Error, Result};

/// Scalar expression over state variables `X(i)` and inputs `U(i)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X(usize),
    U(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Tanh(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64], u: &[f64]) -> f64 {
        use Expr::*;
        match self {
            Const(c) => *c,
            X(i) => x[*i],
            U(i) => u[*i],
            Neg(a) => -a.eval(x, u),
            Add(a, b) => a.eval(x, u) + b.eval(x, u),
            Sub(a, b) => a.eval(x, u) - b.eval(x, u),
            Mul(a, b) => a.eval(x, u) * b.eval(x, u),
            Div(a, b) => a.eval(x, u) / b.eval(x, u),
            Pow(a, b) => libm::pow(a.eval(x, u), b.eval(x, u)),
            Sin(a) => libm::sin(a.eval(x, u)),
            Cos(a) => libm::cos(a.eval(x, u)),
            Exp(a) => libm::exp(a.eval(x, u)),
            Tanh(a) => libm::tanh(a.eval(x, u)),
        }
    }

    /// Largest state and input indices referenced, if any.
    fn max_indices(&self) -> (Option<usize>, Option<usize>) {
        use Expr::*;
        let join = |(a, b): (Option<usize>, Option<usize>), (c, d): (Option<usize>, Option<usize>)| (a.max(c), b.max(d));
        match self {
            Const(_) => (None, None),
            X(i) => (Some(*i), None),
            U(i) => (None, Some(*i)),
            Neg(a) | Sin(a) | Cos(a) | Exp(a) | Tanh(a) => a.max_indices(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => join(a.max_indices(), b.max_indices()),
        }
    }

    fn linear(coeffs: impl Iterator<Item = (f64, Expr)>) -> Expr {
        let mut terms = coeffs.filter(|(c, _)| *c != 0.0).map(|(c, v)| {
            if c == 1.0 {
                v
            } else {
                Expr::Mul(Box::new(Expr::Const(c)), Box::new(v))
            }
        });
        match terms.next() {
            None => Expr::Const(0.0),
            Some(first) => terms.fold(first, |acc, t| Expr::Add(Box::new(acc), Box::new(t))),
        }
    }
}

/// Nonlinear system given by one expression per state and output coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct NlSystem {
    n: usize,
    m: usize,
    step: Vec<Expr>,
    output: Vec<Expr>,
}

impl NlSystem {
    pub fn new(n: usize, m: usize, step: Vec<Expr>, output: Vec<Expr>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("state dimension must be positive".into()));
        }
        if step.len() != n {
            return Err(Error::DimensionMismatch {
                context: "step expressions",
                expected: n,
                found: step.len(),
            });
        }
        if output.is_empty() {
            return Err(Error::InvalidArgument("at least one output expression is required".into()));
        }
        for e in &step {
            let (xi, ui) = e.max_indices();
            if xi.is_some_and(|i| i >= n) || ui.is_some_and(|i| i >= m) {
                return Err(Error::InvalidArgument("step expression references an unknown variable".into()));
            }
        }
        for e in &output {
            let (xi, ui) = e.max_indices();
            if xi.is_some_and(|i| i >= n) || ui.is_some() {
                return Err(Error::InvalidArgument("output expression must depend on the state only".into()));
            }
        }
        let sys = NlSystem { n, m, step, output };
        let zero = alloc::vec![0.0; n];
        if sys.output.iter().any(|e| e.eval(&zero, &[]) != 0.0) {
            log::warn!("output map does not send the origin to the origin");
        }
        Ok(sys)
    }

    /// `f(x, u) = A x + B u`, `h(x) = C x`.
    pub fn linear(sys: &LtiSystem) -> Self {
        let (n, m) = (sys.n(), sys.m());
        let row_expr = |x_part: &crate::linalg::Matrix, u_part: Option<&crate::linalg::Matrix>, r: usize| {
            let xs = (0..n).map(|j| (x_part[(r, j)], Expr::X(j)));
            let us = u_part
                .into_iter()
                .flat_map(move |b| (0..m).map(move |j| (b[(r, j)], Expr::U(j))));
            Expr::linear(xs.chain(us))
        };
        let step = (0..n).map(|r| row_expr(sys.a(), Some(sys.b()), r)).collect();
        let output = (0..sys.p()).map(|r| row_expr(sys.c(), None, r)).collect();
        NlSystem { n, m, step, output }
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn p(&self) -> usize {
        self.output.len()
    }

    pub fn step(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let next: Vec<f64> = self.step.iter().map(|e| e.eval(x, u)).collect();
        if next.iter().all(|v| v.is_finite()) {
            Ok(next)
        } else {
            Err(Error::NonFinite("simulated state"))
        }
    }

    pub fn output(&self, x: &[f64]) -> Result<Point> {
        let y = Point::from_iterator(self.p(), self.output.iter().map(|e| e.eval(x, &[])));
        if y.iter().all(|v| v.is_finite()) {
            Ok(y)
        } else {
            Err(Error::NonFinite("simulated output"))
        }
    }

    /// `h(x(k))` after applying `controls` from `x0`.
    pub fn simulate(&self, x0: &Point, controls: &[Point]) -> Result<Point> {
        let mut x: Vec<f64> = x0.iter().copied().collect();
        for u in controls {
            x = self.step(&x, u.as_slice())?;
        }
        self.output(&x)
    }
}

/// Grid resolution per axis and the cap on enumerated trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub per_axis: usize,
    pub cap: usize,
}

impl GridSpec {
    pub const DEFAULT_CAP: usize = 1_000_000;

    pub fn new(per_axis: usize) -> Self {
        GridSpec {
            per_axis,
            cap: Self::DEFAULT_CAP,
        }
    }
}

/// Points of `conv(p)` on a regular grid: the vertices, evenly spaced points
/// along every vertex pair, and bounding-box lattice points inside the hull.
pub fn grid_points(p: &VPolytope, per_axis: usize, tol: &Tolerances) -> Result<Vec<Point>> {
    if per_axis < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2 per axis".into()));
    }
    let mut pts: Vec<Point> = p.vertices().to_vec();
    let vs = p.vertices();
    let steps = per_axis - 1;
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            for s in 1..steps {
                let t = s as f64 / steps as f64;
                pts.push(&vs[i] * (1.0 - t) + &vs[j] * t);
            }
        }
    }
    let (lo, hi) = p.bounding_box();
    let d = p.dim();
    let total = per_axis.checked_pow(d as u32).unwrap_or(usize::MAX);
    if total > GridSpec::DEFAULT_CAP {
        return Err(Error::SizeLimit {
            needed: total,
            limit: GridSpec::DEFAULT_CAP,
        });
    }
    if p.len() > 1 {
        let mut idx = alloc::vec![0usize; d];
        for _ in 0..total {
            let x = Point::from_iterator(
                d,
                (0..d).map(|a| lo[a] + (hi[a] - lo[a]) * idx[a] as f64 / steps as f64),
            );
            if distance_to_hull(&x, p, tol).distance <= tol.geom_eps {
                pts.push(x);
            }
            for a in 0..d {
                idx[a] += 1;
                if idx[a] < per_axis {
                    break;
                }
                idx[a] = 0;
            }
        }
    }
    let keep = crate::linalg::dedupe_indices(&pts, tol.geom_eps);
    Ok(keep.into_iter().map(|i| pts[i].clone()).collect())
}

/// Sampled outputs `h(x(k))` with the grid indices that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud {
    pub points: Vec<Point>,
    pub provenance: Vec<Provenance>,
    pub initial_grid: Vec<Point>,
    pub control_grid: Vec<Point>,
    pub k: usize,
}

impl SampleCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn trajectory(&self, i: usize) -> Trajectory {
        let pr = &self.provenance[i];
        Trajectory {
            x0: self.initial_grid[pr.x0].clone(),
            controls: pr.controls.iter().map(|&j| self.control_grid[j].clone()).collect(),
        }
    }

    /// Re-simulates point `i` from its provenance.
    pub fn replay(&self, sys: &NlSystem, i: usize) -> Result<Point> {
        let t = self.trajectory(i);
        sys.simulate(&t.x0, &t.controls)
    }
}

/// Outputs at time `k` of every gridded initial state under every gridded
/// control sequence, ordered lexicographically by provenance.
pub fn nl_reach_samples(
    sys: &NlSystem,
    x0: &VPolytope,
    u: &VPolytope,
    k: usize,
    grid: &GridSpec,
    tol: &Tolerances,
) -> Result<SampleCloud> {
    if x0.dim() != sys.n || u.dim() != sys.m {
        return Err(Error::DimensionMismatch {
            context: "nonlinear reach sets",
            expected: sys.n,
            found: x0.dim(),
        });
    }
    let initial_grid = grid_points(x0, grid.per_axis, tol)?;
    let control_grid = if k == 0 { Vec::new() } else { grid_points(u, grid.per_axis, tol)? };
    let per_start = control_grid.len().checked_pow(k as u32).unwrap_or(usize::MAX);
    let needed = per_start.saturating_mul(initial_grid.len());
    if needed > grid.cap {
        return Err(Error::SizeLimit {
            needed,
            limit: grid.cap,
        });
    }
    let mut points = Vec::with_capacity(needed);
    let mut provenance = Vec::with_capacity(needed);
    let nc = control_grid.len();
    for (i, x) in initial_grid.iter().enumerate() {
        // Depth-first over control sequences, sharing prefixes.
        let mut states: Vec<Vec<f64>> = alloc::vec![x.iter().copied().collect()];
        let mut idx: Vec<usize> = Vec::with_capacity(k);
        loop {
            if idx.len() == k {
                points.push(sys.output(states.last().expect("root state"))?);
                provenance.push(Provenance {
                    x0: i,
                    controls: idx.clone(),
                });
                // Advance to the next sequence.
                loop {
                    match idx.pop() {
                        None => break,
                        Some(j) => {
                            states.pop();
                            if j + 1 < nc {
                                idx.push(j + 1);
                                let next = sys.step(states.last().expect("root state"), control_grid[j + 1].as_slice())?;
                                states.push(next);
                                break;
                            }
                        }
                    }
                }
                if idx.is_empty() && (k == 0 || states.len() == 1) {
                    break;
                }
            } else {
                idx.push(0);
                let next = sys.step(states.last().expect("root state"), control_grid[0].as_slice())?;
                states.push(next);
            }
        }
    }
    Ok(SampleCloud {
        points,
        provenance,
        initial_grid,
        control_grid,
        k,
    })
}

/// Uniform grid hash over points for nearest-neighbour queries.
struct GridHash<'a> {
    points: &'a [Point],
    cell: f64,
    cells: BTreeMap<Vec<i64>, Vec<usize>>,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl<'a> GridHash<'a> {
    fn new(points: &'a [Point], cell: f64) -> Self {
        let d = points.first().map_or(0, |p| p.len());
        let mut cells: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
        let mut lo = alloc::vec![i64::MAX; d];
        let mut hi = alloc::vec![i64::MIN; d];
        for (i, p) in points.iter().enumerate() {
            let key: Vec<i64> = p.iter().map(|v| floor(v / cell) as i64).collect();
            for a in 0..d {
                lo[a] = lo[a].min(key[a]);
                hi[a] = hi[a].max(key[a]);
            }
            cells.entry(key).or_default().push(i);
        }
        GridHash {
            points,
            cell,
            cells,
            lo,
            hi,
        }
    }

    fn key(&self, q: &Point) -> Vec<i64> {
        q.iter().map(|v| floor(v / self.cell) as i64).collect()
    }

    /// Whether some point lies within `r ≤ cell` of `q`, skipping `skip`.
    fn any_within(&self, q: &Point, r: f64, skip: Option<usize>) -> bool {
        let key = self.key(q);
        let d = key.len();
        let mut off = alloc::vec![-1i64; d];
        loop {
            let cell: Vec<i64> = key.iter().zip(&off).map(|(a, b)| a + b).collect();
            if let Some(ids) = self.cells.get(&cell) {
                if ids
                    .iter()
                    .any(|&i| Some(i) != skip && (&self.points[i] - q).norm() <= r)
                {
                    return true;
                }
            }
            let mut a = 0;
            loop {
                if a == d {
                    return false;
                }
                off[a] += 1;
                if off[a] <= 1 {
                    break;
                }
                off[a] = -1;
                a += 1;
            }
        }
    }

    /// Exact nearest neighbour of `q` by expanding Chebyshev rings of cells.
    fn nearest(&self, q: &Point, skip: Option<usize>) -> Option<(usize, f64)> {
        let key = self.key(q);
        let d = key.len();
        let mut best: Option<(usize, f64)> = None;
        let max_r = (0..d)
            .map(|a| (key[a] - self.lo[a]).abs().max((self.hi[a] - key[a]).abs()))
            .max()
            .unwrap_or(0);
        for r in 0..=max_r {
            if let Some((_, bd)) = best {
                if bd <= (r - 1).max(0) as f64 * self.cell {
                    break;
                }
            }
            let mut off = alloc::vec![-r; d];
            loop {
                if off.iter().any(|o| o.abs() == r) {
                    let cell: Vec<i64> = key.iter().zip(&off).map(|(a, b)| a + b).collect();
                    if let Some(ids) = self.cells.get(&cell) {
                        for &i in ids {
                            if Some(i) == skip {
                                continue;
                            }
                            let dist = (&self.points[i] - q).norm();
                            if best.is_none_or(|(_, bd)| dist < bd) {
                                best = Some((i, dist));
                            }
                        }
                    }
                }
                let mut a = 0;
                loop {
                    if a == d {
                        break;
                    }
                    off[a] += 1;
                    if off[a] <= r {
                        break;
                    }
                    off[a] = -r;
                    a += 1;
                }
                if a == d {
                    break;
                }
            }
        }
        best
    }
}

/// Largest nearest-neighbour gap inside a cloud: an estimate of how finely
/// the samples cover their set.
pub fn dispersion(points: &[Point]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let (lo, hi) = crate::geometry::VPolytope::new(points[0].len(), points.to_vec())
        .map(|p| p.bounding_box())
        .expect("nonempty cloud");
    let extent = (hi - lo).amax();
    let cell = if extent > 0.0 { extent / libm::sqrt(points.len() as f64).max(1.0) } else { 1.0 };
    let hash = GridHash::new(points, cell);
    (0..points.len())
        .filter_map(|i| hash.nearest(&points[i], Some(i)).map(|(_, d)| d))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NlVerdict {
    pub verdict: Verdict,
    /// Dispersion of the nonsecret cloud; `delta` must exceed it for a
    /// FAILS verdict to be meaningful.
    pub dispersion: f64,
    pub secret_samples: usize,
    pub nonsecret_samples: usize,
}

/// FAILS when a sampled secret output is farther than `delta` from every
/// sampled nonsecret output (witness: the farthest such point), UNKNOWN
/// otherwise.
#[allow(clippy::too_many_arguments)]
pub fn nl_falsify(
    sys: &NlSystem,
    xs: &VPolytope,
    xns: &VPolytope,
    u: &VPolytope,
    k: usize,
    delta: f64,
    grid: &GridSpec,
    tol: &Tolerances,
) -> Result<NlVerdict> {
    require_k(k)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument("delta must be positive and finite".into()));
    }
    let cs = nl_reach_samples(sys, xs, u, k, grid, tol)?;
    let cns = nl_reach_samples(sys, xns, u, k, grid, tol)?;
    let hash = GridHash::new(&cns.points, delta);
    let mut worst: Option<(usize, usize, f64)> = None;
    for (i, q) in cs.points.iter().enumerate() {
        if hash.any_within(q, delta, None) {
            continue;
        }
        let (j, d) = hash.nearest(q, None).expect("nonsecret cloud is nonempty");
        if worst.is_none_or(|(_, _, w)| d > w) {
            worst = Some((i, j, d));
        }
    }
    let (status, witness) = match worst {
        Some((i, j, d)) => (
            Status::Fails,
            Some(Witness::Violation {
                output: cs.points[i].clone(),
                distance: d,
                nearest: cns.points[j].clone(),
                trajectory: Some(cs.trajectory(i)),
            }),
        ),
        None => (Status::Unknown, None),
    };
    Ok(NlVerdict {
        verdict: Verdict {
            status,
            witness,
            k,
            mode: Mode::Strong,
        },
        dispersion: dispersion(&cns.points),
        secret_samples: cs.len(),
        nonsecret_samples: cns.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point_distance, ConvexSet};
    use crate::linalg::{matrix_from_row_major, point};
    use crate::system::{output_set, reach_exact};

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    fn atm() -> LtiSystem {
        LtiSystem::new(
            matrix_from_row_major(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap(),
            matrix_from_row_major(2, 1, &[0.5, 1.0]).unwrap(),
            matrix_from_row_major(1, 2, &[1.0, 0.0]).unwrap(),
        )
        .unwrap()
    }

    fn square_output_identity() -> NlSystem {
        NlSystem::new(1, 1, alloc::vec![Expr::X(0)], alloc::vec![Expr::Mul(b(Expr::X(0)), b(Expr::X(0)))]).unwrap()
    }

    #[test]
    fn rejects_bad_variables() {
        assert!(NlSystem::new(1, 1, alloc::vec![Expr::X(1)], alloc::vec![Expr::X(0)]).is_err());
        assert!(NlSystem::new(1, 1, alloc::vec![Expr::X(0)], alloc::vec![Expr::U(0)]).is_err());
    }

    #[test]
    fn linear_cloud_inside_exact_output() {
        let sys = atm();
        let nl = NlSystem::linear(&sys);
        let tol = Tolerances::default();
        let x0 = VPolytope::from_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let u = VPolytope::from_points(&[&[-1.0], &[1.0]]).unwrap();
        let cloud = nl_reach_samples(&nl, &x0, &u, 2, &GridSpec::new(3), &tol).unwrap();
        let r = reach_exact(&sys, &ConvexSet::Poly(x0), &ConvexSet::Poly(u), 2, &tol).unwrap();
        let y = output_set(&sys, &r, &tol).unwrap().set;
        for q in &cloud.points {
            assert!(point_distance(q, &y, tol.gjk_eps).distance <= tol.geom_eps);
        }
        for i in (0..cloud.len()).step_by(7) {
            assert_eq!(cloud.replay(&nl, i).unwrap(), cloud.points[i]);
        }
    }

    #[test]
    fn identity_dynamics_give_gridded_outputs() {
        let nl = NlSystem::new(1, 1, alloc::vec![Expr::X(0)], alloc::vec![Expr::X(0)]).unwrap();
        let tol = Tolerances::default();
        let x0 = VPolytope::from_points(&[&[0.0], &[1.0]]).unwrap();
        let u = VPolytope::from_points(&[&[0.0], &[5.0]]).unwrap();
        let cloud = nl_reach_samples(&nl, &x0, &u, 2, &GridSpec::new(3), &tol).unwrap();
        let grid = grid_points(&x0, 3, &tol).unwrap();
        assert_eq!(cloud.len(), grid.len() * 9);
        for (i, q) in cloud.points.iter().enumerate() {
            assert_eq!(*q, grid[cloud.provenance[i].x0]);
        }
    }

    #[test]
    fn logistic_cloud_is_deterministic() {
        // x⁺ = 3.7 x (1 - x) + u
        let f = Expr::Add(
            b(Expr::Mul(
                b(Expr::Mul(b(Expr::Const(3.7)), b(Expr::X(0)))),
                b(Expr::Sub(b(Expr::Const(1.0)), b(Expr::X(0)))),
            )),
            b(Expr::U(0)),
        );
        let nl = NlSystem::new(1, 1, alloc::vec![f], alloc::vec![Expr::X(0)]).unwrap();
        let tol = Tolerances::default();
        let x0 = VPolytope::from_points(&[&[0.1], &[0.9]]).unwrap();
        let u = VPolytope::from_points(&[&[0.0], &[0.01]]).unwrap();
        let a = nl_reach_samples(&nl, &x0, &u, 3, &GridSpec::new(4), &tol).unwrap();
        let c = nl_reach_samples(&nl, &x0, &u, 3, &GridSpec::new(4), &tol).unwrap();
        assert_eq!(a, c);
        assert_eq!(a.len(), 4 * 64);
    }

    #[test]
    fn cap_is_enforced() {
        let nl = NlSystem::linear(&atm());
        let tol = Tolerances::default();
        let x0 = VPolytope::from_box(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let u = VPolytope::from_points(&[&[-1.0], &[1.0]]).unwrap();
        let grid = GridSpec { per_axis: 10, cap: 1000 };
        assert!(matches!(
            nl_reach_samples(&nl, &x0, &u, 3, &grid, &tol),
            Err(Error::SizeLimit { .. })
        ));
        assert!(grid_points(&x0, 1, &tol).is_err());
    }

    #[test]
    fn same_sets_are_unknown() {
        let nl = square_output_identity();
        let x = VPolytope::from_points(&[&[0.0], &[1.0]]).unwrap();
        let u = VPolytope::from_points(&[&[0.0]]).unwrap();
        let v = nl_falsify(&nl, &x, &x, &u, 1, 0.1, &GridSpec::new(5), &Tolerances::default()).unwrap();
        assert_eq!(v.verdict.status, Status::Unknown);
        assert!(v.dispersion > 0.0);
    }

    #[test]
    fn squares_separate() {
        let nl = square_output_identity();
        let xs = VPolytope::from_points(&[&[2.0], &[3.0]]).unwrap();
        let xns = VPolytope::from_points(&[&[0.0], &[1.0]]).unwrap();
        let u = VPolytope::from_points(&[&[0.0]]).unwrap();
        let v = nl_falsify(&nl, &xs, &xns, &u, 2, 0.5, &GridSpec::new(5), &Tolerances::default()).unwrap();
        assert_eq!(v.verdict.status, Status::Fails);
        let Some(Witness::Violation { output, distance, .. }) = v.verdict.witness else {
            panic!("expected violation")
        };
        assert_eq!(output, point(&[9.0]));
        assert!((distance - 8.0).abs() < 1e-12);
    }

    #[test]
    fn atm_linear_falsified() {
        let nl = NlSystem::linear(&atm());
        let xs = VPolytope::from_points(&[&[0.0, 1.0]]).unwrap();
        let xns = VPolytope::from_points(&[&[10.0, 1.0]]).unwrap();
        let u = VPolytope::from_points(&[&[0.0]]).unwrap();
        let v = nl_falsify(&nl, &xs, &xns, &u, 3, 1.0, &GridSpec::new(2), &Tolerances::default()).unwrap();
        assert_eq!(v.verdict.status, Status::Fails);
        let Some(Witness::Violation { distance, .. }) = v.verdict.witness else {
            panic!("expected violation")
        };
        assert!((distance - 10.0).abs() < 1e-9);
        assert!(nl_falsify(&nl, &xs, &xns, &u, 3, 0.0, &GridSpec::new(2), &Tolerances::default()).is_err());
    }

    #[test]
    fn nearest_matches_brute_force() {
        let pts: Vec<Point> = (0..60)
            .map(|i| {
                let t = i as f64;
                point(&[libm::sin(t * 1.3) * 4.0, libm::cos(t * 0.7) * 2.0])
            })
            .collect();
        let hash = GridHash::new(&pts, 0.3);
        for q in [point(&[0.1, 0.2]), point(&[10.0, -3.0]), point(&[-4.0, 2.0])] {
            let brute = pts.iter().map(|p| (p - &q).norm()).fold(f64::INFINITY, f64::min);
            let (_, d) = hash.nearest(&q, None).unwrap();
            assert!((d - brute).abs() < 1e-12);
        }
    }
}
