//! Output controllability and the bridges between it and opacity.

use alloc::vec::Vec;

use crate::geometry::lp::{LinearProgram, LpOutcome, Relation};
use crate::geometry::{minkowski_sum, ConvexSet, Tolerances, VPolytope};
use crate::linalg::{lstsq_min_norm, Point};
use crate::opacity::{require_k, Trajectory};
use crate::system::{normalize_inputs, simulate, LtiSystem};
use crate::{Error, Result};

/// Relative singular-value cutoff for the least-squares solve.
pub const RANK_TOL: f64 = 1e-10;

/// Controls driving `y(k)` to the origin from `x0`; `residual = |y(k)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct OcWitness {
    pub x0: Point,
    pub controls: Vec<Point>,
    pub residual: f64,
}

impl OcWitness {
    pub fn k(&self) -> usize {
        self.controls.len()
    }

    pub fn is_valid(&self, tol: &Tolerances) -> bool {
        self.residual <= tol.geom_eps
    }
}

fn output_residual(sys: &LtiSystem, x0: &Point, controls: &[Point]) -> Result<f64> {
    let (_, ys) = simulate(sys, x0, controls)?;
    Ok(ys.last().expect("simulate returns y(0)").norm())
}

fn split_controls(flat: &Point, m: usize, k: usize) -> Vec<Point> {
    (0..k).map(|i| flat.rows(i * m, m).into_owned()).collect()
}

/// Minimum-norm unconstrained controls with `y(k) = 0`, if any exist.
pub fn is_output_controllable(
    sys: &LtiSystem,
    x0: &Point,
    k: usize,
    tol: &Tolerances,
) -> Result<Option<OcWitness>> {
    require_k(k)?;
    if x0.len() != sys.n() {
        return Err(Error::DimensionMismatch {
            context: "initial state",
            expected: sys.n(),
            found: x0.len(),
        });
    }
    let m = sys.output_controllability_matrix(k);
    let rhs = -(sys.output_map(k) * x0);
    let flat = lstsq_min_norm(&m, &rhs, RANK_TOL);
    let controls = split_controls(&flat, sys.m(), k);
    let residual = output_residual(sys, x0, &controls)?;
    let w = OcWitness {
        x0: x0.clone(),
        controls,
        residual,
    };
    Ok(w.is_valid(tol).then_some(w))
}

/// As [`is_output_controllable`], with every control restricted to the
/// difference set `U ⊕ (−U)`.
pub fn is_output_controllable_within(
    sys: &LtiSystem,
    x0: &Point,
    k: usize,
    inputs: &ConvexSet,
    tol: &Tolerances,
) -> Result<Option<OcWitness>> {
    require_k(k)?;
    let u = normalize_inputs(inputs, tol).to_vpolytope(tol)?;
    let neg = VPolytope::new(u.dim(), u.vertices().iter().map(|v| -v).collect())?;
    let diff = minkowski_sum(&u, &neg, tol)?;
    let d = diff.vertices();
    let nd = d.len();
    let p = sys.p();
    let target = -(sys.output_map(k) * x0);
    // Column block for step i: C A^{k-1-i} B applied to each difference vertex.
    let blocks: Vec<Vec<Point>> = (0..k)
        .map(|i| {
            let g = sys.output_map(k - 1 - i) * sys.b();
            d.iter().map(|v| &g * v).collect()
        })
        .collect();
    let nv = k * nd;
    let mut lp = LinearProgram::new(alloc::vec![false; nv + 1]);
    for r in 0..p {
        let row: Vec<f64> = blocks.iter().flat_map(|b| b.iter().map(move |y| y[r])).collect();
        let mut plus = row.clone();
        plus.push(-1.0);
        lp.add_row(plus, Relation::Le, target[r]);
        let mut minus: Vec<f64> = row.iter().map(|x| -x).collect();
        minus.push(-1.0);
        lp.add_row(minus, Relation::Le, -target[r]);
    }
    for i in 0..k {
        let mut sum = alloc::vec![0.0; nv + 1];
        sum[i * nd..(i + 1) * nd].iter_mut().for_each(|x| *x = 1.0);
        lp.add_row(sum, Relation::Eq, 1.0);
    }
    let mut obj = alloc::vec![0.0; nv];
    obj.push(1.0);
    lp.set_objective(obj);
    let x = match lp.solve()? {
        LpOutcome::Optimal { x, .. } => x,
        _ => return Err(Error::LpNoConvergence),
    };
    let controls: Vec<Point> = (0..k)
        .map(|i| {
            d.iter()
                .enumerate()
                .fold(Point::zeros(sys.m()), |acc, (j, v)| acc + v * x[i * nd + j])
        })
        .collect();
    let residual = output_residual(sys, x0, &controls)?;
    let w = OcWitness {
        x0: x0.clone(),
        controls,
        residual,
    };
    Ok(w.is_valid(tol).then_some(w))
}

/// The difference of two trajectories whose outputs agree at time `k`
/// steers `y(k)` to zero from `x_s(0) − x_ns(0)`.
pub fn oc_witness_from_opacity(
    sys: &LtiSystem,
    secret: &Trajectory,
    nonsecret: &Trajectory,
    tol: &Tolerances,
) -> Result<OcWitness> {
    if secret.controls.len() != nonsecret.controls.len() {
        return Err(Error::InvalidArgument("control sequences differ in length".into()));
    }
    let (_, ys) = simulate(sys, &secret.x0, &secret.controls)?;
    let (_, yns) = simulate(sys, &nonsecret.x0, &nonsecret.controls)?;
    let gap = (ys.last().expect("nonempty") - yns.last().expect("nonempty")).norm();
    if gap > 10.0 * tol.geom_eps {
        return Err(Error::OutputsDoNotMatch { gap });
    }
    let x0 = &secret.x0 - &nonsecret.x0;
    let controls: Vec<Point> = secret
        .controls
        .iter()
        .zip(&nonsecret.controls)
        .map(|(a, b)| a - b)
        .collect();
    let residual = output_residual(sys, &x0, &controls)?;
    Ok(OcWitness { x0, controls, residual })
}

/// Witnesses for every vertex of `x_oc`; fails on the first vertex that is
/// not output controllable at horizon `k`.
pub fn oc_witnesses_for(sys: &LtiSystem, x_oc: &VPolytope, k: usize, tol: &Tolerances) -> Result<Vec<OcWitness>> {
    x_oc.vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| is_output_controllable(sys, v, k, tol)?.ok_or(Error::MissingWitness { index: i }))
        .collect()
}

/// A secret set built from a nonsecret set and output-controllable offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct OpaquePair {
    pub secret: VPolytope,
    pub nonsecret: VPolytope,
}

/// `X1 = X_oc ⊕ X2` from stored witnesses (one per vertex of `x_oc`, in
/// order). Opacity of `(X1, X2)` is guaranteed with unconstrained controls.
pub fn synth_opaque_pair(
    sys: &LtiSystem,
    x_oc: &VPolytope,
    witnesses: &[OcWitness],
    x2: &VPolytope,
    k: usize,
    tol: &Tolerances,
) -> Result<OpaquePair> {
    require_k(k)?;
    for (context, found) in [("offset set", x_oc.dim()), ("nonsecret set", x2.dim())] {
        if found != sys.n() {
            return Err(Error::DimensionMismatch {
                context,
                expected: sys.n(),
                found,
            });
        }
    }
    for (i, v) in x_oc.vertices().iter().enumerate() {
        let ok = witnesses.get(i).is_some_and(|w| {
            w.k() == k && w.is_valid(tol) && (&w.x0 - v).amax() <= tol.geom_eps
        });
        if !ok {
            return Err(Error::MissingWitness { index: i });
        }
    }
    let secret = minkowski_sum(x_oc, x2, tol)?;
    Ok(OpaquePair {
        secret,
        nonsecret: x2.clone(),
    })
}

/// Controls for the secret trajectory `x + x2`: the nonsecret controls plus
/// the witness controls of `x`.
pub fn induced_controls(witness: &OcWitness, nonsecret_controls: &[Point]) -> Vec<Point> {
    witness
        .controls
        .iter()
        .zip(nonsecret_controls)
        .map(|(a, b)| a + b)
        .collect()
}
