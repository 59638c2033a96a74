//! Shared generators and independent low-dimensional geometry oracles for
//! the integration suites. Nothing here calls the library's geometry.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use opaque_core::{ConvexSet, LtiSystem, Scenario, Tolerances, VPolytope};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// An axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct BoxSet {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSet {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn to_vpoly(&self) -> VPolytope {
        VPolytope::from_box(&self.lo, &self.hi).unwrap()
    }

    /// `per_axis` evenly spaced values per coordinate, endpoints included.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::new();
        let mut idx = vec![0usize; d];
        loop {
            out.push(
                (0..d)
                    .map(|a| {
                        let t = if per_axis == 1 { 0.0 } else { idx[a] as f64 / (per_axis - 1) as f64 };
                        self.lo[a] + (self.hi[a] - self.lo[a]) * t
                    })
                    .collect(),
            );
            let mut a = 0;
            loop {
                if a == d {
                    return out;
                }
                idx[a] += 1;
                if idx[a] < per_axis {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
        }
    }

    pub fn sample(&self, rng: &mut Rng8) -> Vec<f64> {
        (0..self.dim())
            .map(|a| {
                if self.hi[a] > self.lo[a] {
                    rng.gen_range(self.lo[a]..=self.hi[a])
                } else {
                    self.lo[a]
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Case {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub xs: BoxSet,
    pub xns: BoxSet,
    pub u: BoxSet,
    pub k: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct CaseShape {
    pub max_n: usize,
    pub max_m: usize,
    pub max_p: usize,
    pub max_k: usize,
}

impl Default for CaseShape {
    fn default() -> Self {
        CaseShape {
            max_n: 3,
            max_m: 2,
            max_p: 2,
            max_k: 3,
        }
    }
}

fn rand_matrix(rng: &mut Rng8, r: usize, c: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-scale..=scale))
}

fn rand_box(rng: &mut Rng8, center: &[f64], max_half: f64) -> BoxSet {
    let half: Vec<f64> = center.iter().map(|_| rng.gen_range(0.05..=max_half)).collect();
    BoxSet {
        lo: center.iter().zip(&half).map(|(c, h)| c - h).collect(),
        hi: center.iter().zip(&half).map(|(c, h)| c + h).collect(),
    }
}

/// A random small scenario. About half of the nonsecret boxes enlarge the
/// secret box so that both verdicts occur frequently.
pub fn random_case(rng: &mut Rng8, shape: CaseShape) -> Case {
    let n = rng.gen_range(1..=shape.max_n);
    let m = rng.gen_range(1..=shape.max_m);
    let p = rng.gen_range(1..=shape.max_p.min(n));
    let k = rng.gen_range(1..=shape.max_k);
    let a = rand_matrix(rng, n, n, 0.9);
    let b = rand_matrix(rng, n, m, 1.0);
    let c = rand_matrix(rng, p, n, 1.0);
    let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect();
    let xs = rand_box(rng, &center, 1.0);
    let xns = if rng.gen_bool(0.5) {
        let grow: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let shift: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..=0.3)).collect();
        BoxSet {
            lo: (0..n).map(|i| xs.lo[i] - grow[i] + shift[i]).collect(),
            hi: (0..n).map(|i| xs.hi[i] + grow[i] + shift[i]).collect(),
        }
    } else {
        let c2: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.5..=2.5)).collect();
        rand_box(rng, &c2, 1.5)
    };
    let uc: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.5..=0.5)).collect();
    let u = rand_box(rng, &uc, 1.0);
    Case { a, b, c, xs, xns, u, k }
}

impl Case {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn sys(&self) -> LtiSystem {
        LtiSystem::new(self.a.clone(), self.b.clone(), self.c.clone()).unwrap()
    }

    pub fn scenario(&self) -> Scenario {
        Scenario::new(
            self.sys(),
            self.xs.to_vpoly(),
            self.xns.to_vpoly(),
            ConvexSet::Poly(self.u.to_vpoly()),
            vec![self.k],
            Tolerances::default(),
        )
        .unwrap()
    }

    fn a_pow(&self, j: usize) -> DMatrix<f64> {
        let mut out = DMatrix::identity(self.n(), self.n());
        for _ in 0..j {
            out = &self.a * out;
        }
        out
    }

    /// Output `y(k)` for an explicit initial state and control sequence.
    pub fn output(&self, x0: &[f64], controls: &[Vec<f64>]) -> Vec<f64> {
        let mut x = DVector::from_column_slice(x0);
        for u in controls {
            x = &self.a * x + &self.b * DVector::from_column_slice(u);
        }
        (&self.c * x).iter().copied().collect()
    }

    /// Vertices of `C X(k)` for `X0 = which`, from grid images summed one
    /// step at a time and reduced to their hull (outputs of dimension ≤ 2).
    pub fn output_hull(&self, x0: &BoxSet, per_axis: usize) -> Vec<Vec<f64>> {
        let cak = &self.c * self.a_pow(self.k);
        let mut acc: Vec<Vec<f64>> = x0
            .grid(per_axis)
            .iter()
            .map(|x| (&cak * DVector::from_column_slice(x)).iter().copied().collect())
            .collect();
        acc = hull(&acc);
        let ugrid = self.u.grid(per_axis);
        for j in 0..self.k {
            let g = &self.c * self.a_pow(self.k - 1 - j) * &self.b;
            let imgs: Vec<Vec<f64>> = ugrid
                .iter()
                .map(|u| (&g * DVector::from_column_slice(u)).iter().copied().collect())
                .collect();
            let imgs = hull(&imgs);
            let mut sum = Vec::with_capacity(acc.len() * imgs.len());
            for a in &acc {
                for b in &imgs {
                    sum.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
                }
            }
            acc = hull(&sum);
        }
        acc
    }

    pub fn secret_hull(&self) -> Vec<Vec<f64>> {
        self.output_hull(&self.xs, 9)
    }

    pub fn nonsecret_hull(&self) -> Vec<Vec<f64>> {
        self.output_hull(&self.xns, 9)
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull of points in one or two dimensions: `[min, max]` on the line,
/// counter-clockwise vertices without collinear points in the plane.
pub fn hull(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    match points[0].len() {
        1 => {
            let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                vec![vec![lo]]
            } else {
                vec![vec![lo], vec![hi]]
            }
        }
        2 => {
            let mut pts: Vec<Vec<f64>> = points.to_vec();
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            pts.dedup();
            if pts.len() < 3 {
                return pts;
            }
            let scale = pts.iter().flatten().fold(1.0f64, |s, v| s.max(v.abs()));
            let eps = 1e-13 * scale * scale;
            let mut lower: Vec<Vec<f64>> = Vec::new();
            for p in &pts {
                while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= eps {
                    lower.pop();
                }
                lower.push(p.clone());
            }
            let mut upper: Vec<Vec<f64>> = Vec::new();
            for p in pts.iter().rev() {
                while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= eps {
                    upper.pop();
                }
                upper.push(p.clone());
            }
            lower.pop();
            upper.pop();
            lower.extend(upper);
            lower
        }
        d => panic!("oracle hull supports dimensions 1 and 2, got {d}"),
    }
}

pub fn point_segment_distance(q: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let aq = sub(q, a);
    let len2: f64 = ab.iter().map(|x| x * x).sum();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (aq.iter().zip(&ab).map(|(x, y)| x * y).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    let proj: Vec<f64> = a.iter().zip(&ab).map(|(x, y)| x + t * y).collect();
    norm(&sub(q, &proj))
}

/// Signed distance from `q` to the hull `h` (as returned by [`hull`]):
/// positive outside, minus the depth inside. Flat hulls have no interior.
pub fn signed_distance(q: &[f64], h: &[Vec<f64>]) -> f64 {
    match q.len() {
        1 => {
            let lo = h[0][0];
            let hi = h[h.len() - 1][0];
            (lo - q[0]).max(q[0] - hi)
        }
        _ => {
            if h.len() == 1 {
                return norm(&sub(q, &h[0]));
            }
            if h.len() == 2 {
                return point_segment_distance(q, &h[0], &h[1]);
            }
            let nv = h.len();
            let mut inside = true;
            let mut depth = f64::INFINITY;
            let mut dist = f64::INFINITY;
            for i in 0..nv {
                let a = &h[i];
                let b = &h[(i + 1) % nv];
                let e = sub(b, a);
                let len = norm(&e);
                // Distance to the edge line, positive on the interior (left) side.
                let s = cross(a, b, q) / len;
                if s < 0.0 {
                    inside = false;
                }
                depth = depth.min(s);
                dist = dist.min(point_segment_distance(q, a, b));
            }
            if inside {
                -depth
            } else {
                dist
            }
        }
    }
}

fn segments_intersect(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn edges(h: &[Vec<f64>]) -> Vec<(Vec<f64>, Vec<f64>)> {
    match h.len() {
        1 => vec![(h[0].clone(), h[0].clone())],
        2 => vec![(h[0].clone(), h[1].clone())],
        n => (0..n).map(|i| (h[i].clone(), h[(i + 1) % n].clone())).collect(),
    }
}

/// Euclidean distance between two hulls (zero when they meet).
pub fn hull_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a[0].len() == 1 {
        let (alo, ahi) = (a[0][0], a[a.len() - 1][0]);
        let (blo, bhi) = (b[0][0], b[b.len() - 1][0]);
        return (blo - ahi).max(alo - bhi).max(0.0);
    }
    if a.iter().any(|v| signed_distance(v, b) <= 0.0) || b.iter().any(|v| signed_distance(v, a) <= 0.0) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (p, q) in edges(a) {
        for (r, s) in edges(b) {
            if segments_intersect(&p, &q, &r, &s) {
                return 0.0;
            }
            best = best
                .min(point_segment_distance(&p, &r, &s))
                .min(point_segment_distance(&q, &r, &s))
                .min(point_segment_distance(&r, &p, &q))
                .min(point_segment_distance(&s, &p, &q));
        }
    }
    best
}

/// Clips convex polygon `subject` by convex polygon `clip` (both
/// counter-clockwise, at least three vertices).
pub fn clip_polygon(subject: &[Vec<f64>], clip: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let a = &clip[i];
        let b = &clip[(i + 1) % n];
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let p = &input[j];
            let q = &input[(j + 1) % input.len()];
            let sp = cross(a, b, p);
            let sq = cross(a, b, q);
            if sp >= 0.0 {
                out.push(p.clone());
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push(vec![p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
    }
    out
}

/// Largest `r` found such that some point lies at depth `r` inside both
/// hulls (a lower bound on the true value). Zero when either hull is flat.
pub fn common_depth(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a[0].len() == 1 {
        let (alo, ahi) = (a[0][0], a[a.len() - 1][0]);
        let (blo, bhi) = (b[0][0], b[b.len() - 1][0]);
        return ((ahi.min(bhi) - alo.max(blo)) / 2.0).max(0.0);
    }
    if a.len() < 3 || b.len() < 3 {
        return 0.0;
    }
    let inter = clip_polygon(a, b);
    if inter.len() < 3 {
        return 0.0;
    }
    let cx = inter.iter().map(|p| p[0]).sum::<f64>() / inter.len() as f64;
    let cy = inter.iter().map(|p| p[1]).sum::<f64>() / inter.len() as f64;
    let c = vec![cx, cy];
    (-signed_distance(&c, a)).min(-signed_distance(&c, b)).max(0.0)
}

/// Definition-level verdict with its margin: `Some(true)` holds,
/// `Some(false)` fails, `None` when within `margin` of the boundary.
pub fn strong_oracle(case: &Case, margin: f64) -> Option<bool> {
    let ys = case.secret_hull();
    let yns = case.nonsecret_hull();
    let s = ys.iter().map(|v| signed_distance(v, &yns)).fold(f64::NEG_INFINITY, f64::max);
    if s > margin {
        Some(false)
    } else if s < -margin {
        Some(true)
    } else {
        None
    }
}

pub fn weak_oracle(case: &Case, margin: f64) -> Option<bool> {
    let ys = case.secret_hull();
    let yns = case.nonsecret_hull();
    if hull_distance(&ys, &yns) > margin {
        Some(false)
    } else if common_depth(&ys, &yns) > margin {
        Some(true)
    } else {
        None
    }
}

/// Membership of `q` in the zonotope `c + Σ ξ_i g_i` (outputs of dimension
/// ≤ 2) by checking every candidate facet direction.
pub fn in_zonotope(q: &[f64], center: &[f64], gens: &[Vec<f64>], eps: f64) -> bool {
    let dq = sub(q, center);
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    if q.len() == 1 {
        dirs.push(vec![1.0]);
    } else {
        dirs.push(vec![1.0, 0.0]);
        dirs.push(vec![0.0, 1.0]);
        for g in gens {
            let l = norm(g);
            if l > 0.0 {
                dirs.push(vec![-g[1] / l, g[0] / l]);
                dirs.push(vec![g[0] / l, g[1] / l]);
            }
        }
    }
    dirs.iter().all(|d| {
        let proj: f64 = d.iter().zip(&dq).map(|(a, b)| a * b).sum();
        let reach: f64 = gens.iter().map(|g| d.iter().zip(g).map(|(a, b)| a * b).sum::<f64>().abs()).sum();
        proj.abs() <= reach + eps
    })
}

/// A random convex combination of `vertices`.
pub fn random_combination(rng: &mut Rng8, vertices: &[Vec<f64>]) -> Vec<f64> {
    let w: Vec<f64> = vertices.iter().map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    let d = vertices[0].len();
    (0..d)
        .map(|a| vertices.iter().zip(&w).map(|(v, wi)| v[a] * wi / total).sum())
        .collect()
}

pub fn as_vec(p: &DVector<f64>) -> Vec<f64> {
    p.iter().copied().collect()
}
