//! Dense two-phase simplex with Bland's rule, plus the feasibility queries
//! built on it.
//!
//! Every feasibility query is posed as "minimize the largest violation `t`",
//! which is always feasible; a set is declared empty when the optimal `t`
//! exceeds `lp_eps`.

use alloc::vec;
use alloc::vec::Vec;

use super::{HPolytope, Tolerances, VPolytope};
use crate::linalg::{solve_square, Matrix, Point};
use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-10;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Eq,
}

/// `minimize objective·x` subject to `rows`; each variable is either free or
/// nonnegative.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    free: Vec<bool>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
    objective: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub(crate) fn new(free: Vec<bool>) -> Self {
        let n = free.len();
        Self {
            free,
            rows: Vec::new(),
            objective: vec![0.0; n],
        }
    }

    pub(crate) fn n_vars(&self) -> usize {
        self.free.len()
    }

    pub(crate) fn add_row(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n_vars());
        self.rows.push((coeffs, rel, rhs));
    }

    pub(crate) fn set_objective(&mut self, c: Vec<f64>) {
        debug_assert_eq!(c.len(), self.n_vars());
        self.objective = c;
    }

    pub(crate) fn solve(&self) -> Result<LpOutcome> {
        // Column layout: one column per nonnegative variable, two per free
        // variable, then one slack per inequality row.
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(self.n_vars());
        let mut ncols = 0;
        for &f in &self.free {
            if f {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                col_of.push((ncols, None));
                ncols += 1;
            }
        }
        let n_slack = self.rows.iter().filter(|r| r.1 == Relation::Le).count();
        let n_struct = ncols + n_slack;
        let m = self.rows.len();

        let mut a = vec![0.0; m * n_struct];
        let mut b = vec![0.0; m];
        let mut slack = ncols;
        let mut slack_of = vec![None; m];
        for (i, (coeffs, rel, rhs)) in self.rows.iter().enumerate() {
            let row = &mut a[i * n_struct..(i + 1) * n_struct];
            for (v, &c) in coeffs.iter().enumerate() {
                let (p, q) = col_of[v];
                row[p] = c;
                if let Some(q) = q {
                    row[q] = -c;
                }
            }
            if *rel == Relation::Le {
                row[slack] = 1.0;
                slack_of[i] = Some(slack);
                slack += 1;
            }
            b[i] = *rhs;
        }
        let mut c = vec![0.0; n_struct];
        for (v, &cv) in self.objective.iter().enumerate() {
            let (p, q) = col_of[v];
            c[p] = cv;
            if let Some(q) = q {
                c[q] = -cv;
            }
        }

        match solve_standard(&a, &b, &c, &slack_of, m, n_struct)? {
            StdOutcome::Optimal(z) => {
                let x = col_of
                    .iter()
                    .map(|&(p, q)| z[p] - q.map_or(0.0, |q| z[q]))
                    .collect::<Vec<_>>();
                let value = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
                Ok(LpOutcome::Optimal { x, value })
            }
            StdOutcome::Infeasible => Ok(LpOutcome::Infeasible),
            StdOutcome::Unbounded => Ok(LpOutcome::Unbounded),
        }
    }
}

enum StdOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    m: usize,
    width: usize,
    t: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for j in 0..w {
                    row[j] -= f * prow[j];
                }
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for j in 0..w {
                self.obj[j] -= f * prow[j];
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule over columns `< allowed`. Returns `false` when unbounded.
    fn run(&mut self, allowed: usize) -> Result<bool> {
        let rhs = self.rhs_col();
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::LpNoConvergence);
            }
            let Some(c) = (0..allowed).find(|&j| self.obj[j] < -COST_TOL) else {
                return Ok(true);
            };
            // Rounding can leave a basic value slightly negative; it is read
            // as zero so that no pivot moves further out of the feasible set.
            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > PIVOT_TOL {
                    let ratio = self.at(i, rhs).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr, la)) => {
                            let slack = 1e-12 * (1.0 + lr.abs());
                            ratio < lr - slack
                                || (ratio <= lr + slack
                                    && (a > 10.0 * la || (a * 10.0 >= la && self.basis[i] < self.basis[li])))
                        }
                    };
                    if better {
                        leave = Some((i, ratio, a));
                    }
                }
            }
            match leave {
                Some((r, _, _)) => self.pivot(r, c),
                None => return Ok(false),
            }
        }
    }
}

fn solve_standard(
    a: &[f64],
    b: &[f64],
    c: &[f64],
    slack_of: &[Option<usize>],
    m: usize,
    n: usize,
) -> Result<StdOutcome> {
    // Phase 1: rows with a slack and b >= 0 start on the slack; the rest are
    // flipped so that b >= 0 and start on an artificial.
    let width = n + m + 1;
    let mut t = vec![0.0; m * width];
    let bscale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let mut basis = Vec::with_capacity(m);
    let mut obj = vec![0.0; width];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i * width + j] = sign * a[i * n + j];
        }
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = sign * b[i];
        match slack_of[i] {
            Some(s) if b[i] >= 0.0 => basis.push(s),
            _ => {
                basis.push(n + i);
                for j in 0..n {
                    obj[j] -= t[i * width + j];
                }
                obj[width - 1] -= t[i * width + width - 1];
            }
        }
    }
    let mut tab = Tableau {
        m,
        width,
        t,
        obj,
        basis,
        pivots: 0,
    };
    // Artificials never need to re-enter.
    tab.run(n)?;
    let infeas = -tab.obj[width - 1];
    if infeas > 1e-9 * bscale {
        return Ok(StdOutcome::Infeasible);
    }
    // Drive remaining artificials out of the basis where possible.
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| tab.at(i, j).abs() > 1e-9) {
                tab.pivot(i, j);
            }
        }
    }
    // Phase 2.
    let mut obj = vec![0.0; width];
    obj[..n].copy_from_slice(c);
    for i in 0..m {
        let bi = tab.basis[i];
        let cb = if bi < n { c[bi] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                if j < n || j == width - 1 {
                    obj[j] -= cb * tab.at(i, j);
                }
            }
        }
    }
    tab.obj = obj;
    if !tab.run(n)? {
        return Ok(StdOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        let bi = tab.basis[i];
        if bi < n {
            x[bi] = tab.at(i, width - 1);
        }
    }
    if let Some(fresh) = refactor(a, b, &tab.basis, m, n) {
        x = fresh;
    }
    Ok(StdOutcome::Optimal(x))
}

/// Basic solution recomputed from the original rows, removing the drift the
/// tableau accumulates over many pivots. `None` if the basis is singular.
fn refactor(a: &[f64], b: &[f64], basis: &[usize], m: usize, n: usize) -> Option<Vec<f64>> {
    let mut bm = Matrix::zeros(m, m);
    for (k, &j) in basis.iter().enumerate() {
        for r in 0..m {
            bm[(r, k)] = if j < n {
                a[r * n + j]
            } else if j - n == r {
                // Artificial columns were added after flipping the row.
                if b[r] < 0.0 { -1.0 } else { 1.0 }
            } else {
                0.0
            };
        }
    }
    let rhs = Point::from_column_slice(b);
    let xb = solve_square(&bm, &rhs, 1e-13)?;
    let scale = 1.0 + xb.amax();
    let mut x = vec![0.0; n];
    for (k, &j) in basis.iter().enumerate() {
        if xb[k] < -1e-9 * scale {
            return None;
        }
        if j < n {
            x[j] = xb[k].max(0.0);
        } else if xb[k].abs() > 1e-9 * scale {
            return None;
        }
    }
    Some(x)
}

/// Unit-normalized rows of `h`; rows with a vanishing normal are returned
/// separately as their offsets (they read `0 <= offset`).
fn unit_rows(h: &HPolytope) -> (Vec<(Point, f64)>, Vec<f64>) {
    let mut rows = Vec::with_capacity(h.len());
    let mut degenerate = Vec::new();
    for (n, &o) in h.normals().iter().zip(h.offsets()) {
        let norm = n.norm();
        if norm > 0.0 {
            rows.push((n / norm, o / norm));
        } else {
            degenerate.push(o);
        }
    }
    (rows, degenerate)
}

/// Finds a point with `H_i·x <= h_i + lp_eps` for every row, if one exists.
pub fn lp_feasible_point(h: &HPolytope, tol: &Tolerances) -> Result<Option<Point>> {
    let d = h.dim();
    let (rows, degenerate) = unit_rows(h);
    if degenerate.iter().any(|&o| o < -tol.lp_eps) {
        return Ok(None);
    }
    if rows.is_empty() {
        return Ok(Some(Point::zeros(d)));
    }
    // Variables: x (free, d), t (>= 0).
    let mut free = vec![true; d];
    free.push(false);
    let mut lp = LinearProgram::new(free);
    for (n, o) in &rows {
        let mut coeffs: Vec<f64> = n.iter().copied().collect();
        coeffs.push(-1.0);
        lp.add_row(coeffs, Relation::Le, *o);
    }
    let mut obj = vec![0.0; d + 1];
    obj[d] = 1.0;
    lp.set_objective(obj);
    match lp.solve()? {
        LpOutcome::Optimal { x, value } if value <= tol.lp_eps => {
            Ok(Some(Point::from_iterator(d, x.into_iter().take(d))))
        }
        LpOutcome::Optimal { .. } => Ok(None),
        // The violation objective is bounded below by zero.
        LpOutcome::Unbounded | LpOutcome::Infeasible => Err(Error::LpNoConvergence),
    }
}

/// Barycentric weights over `vertices` minimizing the worst violation of the
/// unit rows; returns `(weights, worst_violation)`.
pub(crate) fn min_violation_weights(
    rows: &[(Point, f64)],
    vertices: &[Point],
) -> Result<(Vec<f64>, f64)> {
    let nv = vertices.len();
    // Variables: lambda (>= 0, nv), t (>= 0).
    let mut lp = LinearProgram::new(vec![false; nv + 1]);
    for (n, o) in rows {
        let mut coeffs: Vec<f64> = vertices.iter().map(|v| n.dot(v)).collect();
        coeffs.push(-1.0);
        lp.add_row(coeffs, Relation::Le, *o);
    }
    let mut sum = vec![1.0; nv];
    sum.push(0.0);
    lp.add_row(sum, Relation::Eq, 1.0);
    let mut obj = vec![0.0; nv + 1];
    obj[nv] = 1.0;
    lp.set_objective(obj);
    match lp.solve()? {
        LpOutcome::Optimal { mut x, value } => {
            x.truncate(nv);
            Ok((x, value))
        }
        LpOutcome::Unbounded | LpOutcome::Infeasible => Err(Error::LpNoConvergence),
    }
}

/// Finds `x ∈ conv(V)` with `Hx <= h + lp_eps`, if one exists.
pub fn lp_feasible_in_hull(
    h: &HPolytope,
    v: &VPolytope,
    tol: &Tolerances,
) -> Result<Option<Point>> {
    if h.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            context: "lp_feasible_in_hull",
            expected: v.dim(),
            found: h.dim(),
        });
    }
    let (rows, degenerate) = unit_rows(h);
    if degenerate.iter().any(|&o| o < -tol.lp_eps) {
        return Ok(None);
    }
    if rows.is_empty() {
        return Ok(Some(v.vertices()[0].clone()));
    }
    let (w, t) = min_violation_weights(&rows, v.vertices())?;
    if t > tol.lp_eps {
        return Ok(None);
    }
    Ok(Some(combine(v.vertices(), &w)))
}

/// Barycentric weights expressing `target` over `vertices` as closely as
/// possible in the max-norm; returns `(weights, max coordinate deviation)`.
pub(crate) fn convex_weights(target: &Point, vertices: &[Point]) -> Result<(Vec<f64>, f64)> {
    let d = target.len();
    let mut rows = Vec::with_capacity(2 * d);
    for i in 0..d {
        let mut e = Point::zeros(d);
        e[i] = 1.0;
        rows.push((e.clone(), target[i]));
        rows.push((-e, -target[i]));
    }
    min_violation_weights(&rows, vertices)
}

pub(crate) fn combine(vertices: &[Point], weights: &[f64]) -> Point {
    let mut x = Point::zeros(vertices[0].len());
    for (v, &w) in vertices.iter().zip(weights) {
        if w != 0.0 {
            x += v * w;
        }
    }
    x
}

/// Support value `sup { c·x : x ∈ H }`; `None` when unbounded, `Err` on an
/// empty polyhedron is reported as `Some(-inf)`.
pub(crate) fn support_of_hpolytope(h: &HPolytope, c: &Point) -> Result<Option<f64>> {
    let d = h.dim();
    let mut lp = LinearProgram::new(vec![true; d]);
    for (n, &o) in h.normals().iter().zip(h.offsets()) {
        lp.add_row(n.iter().copied().collect(), Relation::Le, o);
    }
    lp.set_objective(c.iter().map(|v| -v).collect());
    match lp.solve()? {
        LpOutcome::Optimal { value, .. } => Ok(Some(-value)),
        LpOutcome::Unbounded => Ok(None),
        LpOutcome::Infeasible => Ok(Some(f64::NEG_INFINITY)),
    }
}
