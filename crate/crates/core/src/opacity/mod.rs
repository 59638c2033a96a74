//! Strong, weak and scheduled k-initial-state opacity verdicts, the
//! pre-image conditions, secret pruning and the union/intersection laws.

mod algebra;

pub use algebra::{remark_counterexamples, set_algebra_suite, Law, LawCheck, RemarkCheck, SetFamily};

use alloc::vec::Vec;

use crate::geometry::lp::convex_weights;
use crate::geometry::{
    convex_hull_h, distance_to_hull, gjk_query, lp_feasible_in_hull, point_distance, ConvexSet,
    GjkResult, HPolytope,
    SupportMap, Tolerances, VPolytope, MAX_HULL_DIM,
};
use crate::linalg::Point;
use crate::system::{
    input_reach, pre0_output, pre0_output_hull, pre0_output_robust, simulate, Fidelity,
    Provenance, ReachSet, Scenario,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Holds,
    Fails,
    Unknown,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Holds => "HOLDS",
            Status::Fails => "FAILS",
            Status::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Strong,
    Weak,
    Eps,
    Decentralized,
    Co,
    Collusion,
    Sound,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Strong => "strong",
            Mode::Weak => "weak",
            Mode::Eps => "eps",
            Mode::Decentralized => "decentralized",
            Mode::Co => "co",
            Mode::Collusion => "collusion",
            Mode::Sound => "sound",
        }
    }
}

/// An initial state and the control sequence applied from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x0: Point,
    pub controls: Vec<Point>,
}

/// A secret trajectory and a nonsecret trajectory with equal outputs at the
/// observation time.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchCertificate {
    pub output: Point,
    pub secret: Trajectory,
    pub nonsecret: Trajectory,
    /// `|y_s(k) - y_ns(k)|` on re-simulation.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A secret output vertex outside the nonsecret output set.
    Violation {
        output: Point,
        distance: f64,
        nearest: Point,
        trajectory: Option<Trajectory>,
    },
    /// Closest points of two disjoint output sets.
    Separation {
        distance: f64,
        secret_point: Point,
        nonsecret_point: Point,
    },
    /// One match per secret output vertex.
    Certificates(Vec<MatchCertificate>),
    /// A common output of the two sets.
    Meeting { point: Point },
    /// A state that no adversary can explain.
    Uncovered { state: Point },
    /// Per-adversary statuses behind an aggregate verdict.
    PerAdversary(Vec<Status>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub k: usize,
    pub mode: Mode,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }
    pub fn fails(&self) -> bool {
        self.status == Status::Fails
    }
}

pub(crate) fn require_k(k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidTime { k, min: 1 });
    }
    Ok(())
}

fn is_superset(f: Fidelity) -> bool {
    matches!(f, Fidelity::Exact | Fidelity::Over)
}

fn is_subset(f: Fidelity) -> bool {
    matches!(f, Fidelity::Exact | Fidelity::Under)
}

/// Three-valued containment from the fidelities of the two sets.
pub(crate) fn containment_status(secret: Fidelity, nonsecret: Fidelity, contained: bool) -> Status {
    if contained && is_superset(secret) && is_subset(nonsecret) {
        Status::Holds
    } else if !contained && is_subset(secret) && is_superset(nonsecret) {
        Status::Fails
    } else {
        Status::Unknown
    }
}

fn intersection_status(secret: Fidelity, nonsecret: Fidelity, meet: bool) -> Status {
    if meet && is_subset(secret) && is_subset(nonsecret) {
        Status::Holds
    } else if !meet && is_superset(secret) && is_superset(nonsecret) {
        Status::Fails
    } else {
        Status::Unknown
    }
}

pub(crate) fn set_distance(v: &Point, outer: &ConvexSet, tol: &Tolerances) -> GjkResult {
    match outer {
        ConvexSet::Poly(p) => distance_to_hull(v, p, tol),
        ConvexSet::Zono(_) => point_distance(v, outer, tol.gjk_eps),
    }
}

/// Worst vertex of `inner` by distance to `outer`: `(index, distance, nearest)`.
pub(crate) fn worst_gap(inner: &VPolytope, outer: &ConvexSet, tol: &Tolerances) -> (usize, f64, Point) {
    let mut worst = (0usize, f64::NEG_INFINITY, inner.vertices()[0].clone());
    for (i, v) in inner.vertices().iter().enumerate() {
        let r = set_distance(v, outer, tol);
        if r.distance > worst.1 {
            worst = (i, r.distance, r.point_b);
        }
    }
    worst
}

pub(crate) fn trajectory_of(pr: &Provenance, x0: &VPolytope, u: &VPolytope) -> Trajectory {
    Trajectory {
        x0: x0.vertices()[pr.x0].clone(),
        controls: pr.controls.iter().map(|&j| u.vertices()[j].clone()).collect(),
    }
}

fn blend(trajs: &[(f64, Trajectory)]) -> Trajectory {
    let mut x0 = Point::zeros(trajs[0].1.x0.len());
    let steps = trajs[0].1.controls.len();
    let m = trajs[0].1.controls.first().map_or(0, |c| c.len());
    let mut controls = alloc::vec![Point::zeros(m); steps];
    for (w, t) in trajs {
        x0 += &t.x0 * *w;
        for (c, u) in controls.iter_mut().zip(&t.controls) {
            *c += u * *w;
        }
    }
    Trajectory { x0, controls }
}

fn certificates(
    sc: &Scenario,
    k: usize,
    ys: &ReachSet,
    yns: &ReachSet,
) -> Result<Option<Vec<MatchCertificate>>> {
    let (ConvexSet::Poly(ps), ConvexSet::Poly(pns), Some(prs), Some(prns)) =
        (&ys.set, &yns.set, &ys.provenance, &yns.provenance)
    else {
        return Ok(None);
    };
    let u = sc.input_vertices()?;
    let mut out = Vec::with_capacity(ps.len());
    for (v, pr) in ps.vertices().iter().zip(prs) {
        let secret = trajectory_of(pr, &sc.secret, &u);
        let (w, _) = convex_weights(v, pns.vertices())?;
        let parts: Vec<(f64, Trajectory)> = w
            .iter()
            .zip(prns)
            .filter(|(wi, _)| **wi > 0.0)
            .map(|(wi, p)| (*wi, trajectory_of(p, &sc.nonsecret, &u)))
            .collect();
        let nonsecret = blend(&parts);
        let (_, ys_traj) = simulate(&sc.sys, &secret.x0, &secret.controls)?;
        let (_, yns_traj) = simulate(&sc.sys, &nonsecret.x0, &nonsecret.controls)?;
        let residual = (&ys_traj[k] - &yns_traj[k]).norm();
        out.push(MatchCertificate {
            output: v.clone(),
            secret,
            nonsecret,
            residual,
        });
    }
    Ok(Some(out))
}

/// Strong verdict from precomputed output sets of the secret and nonsecret
/// initial sets.
pub(crate) fn strong_from_outputs(
    sc: &Scenario,
    k: usize,
    ys: &ReachSet,
    yns: &ReachSet,
    mode: Mode,
) -> Result<Verdict> {
    let inner = ys.to_vpolytope(&sc.tol)?;
    let (idx, dist, nearest) = worst_gap(&inner, &yns.set, &sc.tol);
    let contained = dist <= sc.tol.geom_eps;
    let status = containment_status(ys.fidelity, yns.fidelity, contained);
    let witness = if contained {
        if status == Status::Holds {
            certificates(sc, k, ys, yns)?.map(Witness::Certificates)
        } else {
            None
        }
    } else {
        let trajectory = match (&ys.set, &ys.provenance) {
            (ConvexSet::Poly(_), Some(pr)) => {
                Some(trajectory_of(&pr[idx], &sc.secret, &sc.input_vertices()?))
            }
            _ => None,
        };
        Some(Witness::Violation {
            output: inner.vertices()[idx].clone(),
            distance: dist,
            nearest,
            trajectory,
        })
    };
    Ok(Verdict {
        status,
        witness,
        k,
        mode,
    })
}

/// Strong k-ISO: every secret output at time `k` is also a nonsecret output
/// (`C X_s(k) ⊆ C X_ns(k)`).
pub fn check_strong_k_iso(sc: &Scenario, k: usize) -> Result<Verdict> {
    require_k(k)?;
    let ys = sc.secret_output(k)?;
    let yns = sc.nonsecret_output(k)?;
    strong_from_outputs(sc, k, &ys, &yns, Mode::Strong)
}

/// Weak k-ISO: some secret output at time `k` is also a nonsecret output.
pub fn check_weak_k_iso(sc: &Scenario, k: usize) -> Result<Verdict> {
    require_k(k)?;
    let ys = sc.secret_output(k)?;
    let yns = sc.nonsecret_output(k)?;
    let r = gjk_query(&ys.set, &yns.set, sc.tol.gjk_eps);
    let meet = r.distance <= sc.tol.geom_eps;
    let status = intersection_status(ys.fidelity, yns.fidelity, meet);
    let witness = if meet {
        Some(Witness::Meeting { point: r.point_a })
    } else {
        Some(Witness::Separation {
            distance: r.distance,
            secret_point: r.point_a,
            nonsecret_point: r.point_b,
        })
    };
    Ok(Verdict {
        status,
        witness,
        k,
        mode: Mode::Weak,
    })
}

/// Per-instant verdicts over a schedule and their conjunction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleVerdict {
    pub per_k: Vec<Verdict>,
    pub aggregate: Verdict,
}

/// Conjunction of verdicts: HOLDS iff all hold; otherwise the earliest
/// failing instant (with its witness), or UNKNOWN.
pub fn aggregate(per_k: &[Verdict], mode: Mode) -> Verdict {
    let mut sorted: Vec<&Verdict> = per_k.iter().collect();
    sorted.sort_by_key(|v| v.k);
    if let Some(f) = sorted.iter().find(|v| v.fails()) {
        return Verdict {
            mode,
            ..(*f).clone()
        };
    }
    let k = sorted.last().map_or(0, |v| v.k);
    let status = if sorted.iter().all(|v| v.holds()) {
        Status::Holds
    } else {
        Status::Unknown
    };
    Verdict {
        status,
        witness: None,
        k,
        mode,
    }
}

/// Strong or weak verdicts at every instant of the schedule.
#[allow(non_snake_case)]
pub fn check_K_iso(sc: &Scenario, mode: Mode) -> Result<ScheduleVerdict> {
    check_schedule(sc, &sc.schedule, mode)
}

/// As [`check_K_iso`] over an explicit schedule.
pub fn check_schedule(sc: &Scenario, schedule: &[usize], mode: Mode) -> Result<ScheduleVerdict> {
    if schedule.is_empty() {
        return Err(Error::EmptySet("schedule"));
    }
    let mut ks: Vec<usize> = schedule.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let per_k = ks
        .iter()
        .map(|&k| match mode {
            Mode::Strong => check_strong_k_iso(sc, k),
            Mode::Weak => check_weak_k_iso(sc, k),
            _ => Err(Error::InvalidArgument(alloc::format!(
                "schedule checks support strong and weak modes, not {}",
                mode.as_str()
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate(&per_k, mode);
    Ok(ScheduleVerdict { per_k, aggregate })
}

/// The schedule `{m - k + 1, …, m}` under which scheduled opacity reads as
/// k-step opacity at the current instant `m`.
pub fn k_step_schedule(m: usize, k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(alloc::format!(
            "k-step schedule needs 1 <= k <= m, got k = {k}, m = {m}"
        )));
    }
    Ok((m + 1 - k..=m).collect())
}

/// The two pre-image conditions whose conjunction characterizes strong
/// k-ISO.
#[derive(Debug, Clone, PartialEq)]
pub struct Pre0Conditions {
    /// Some nonsecret initial state can produce a secret output.
    pub cond1: bool,
    pub cond1_witness: Option<Point>,
    /// Every secret initial state produces only nonsecret outputs.
    pub cond2: bool,
    /// Index of the secret vertex with the largest violation and that
    /// violation (output space).
    pub cond2_violation: Option<(usize, f64)>,
}

impl Pre0Conditions {
    pub fn both(&self) -> bool {
        self.cond1 && self.cond2
    }
}

fn require_hull_output(sc: &Scenario) -> Result<()> {
    if sc.sys.p() > MAX_HULL_DIM {
        return Err(Error::UnsupportedDimension {
            dim: sc.sys.p(),
            max: MAX_HULL_DIM,
        });
    }
    Ok(())
}

/// Evaluates both pre-image conditions at time `k`. Condition 1 intersects
/// the (existential) pre-image of the secret outputs with the nonsecret set;
/// condition 2 asks every secret vertex to lie in the set of states all of
/// whose time-`k` outputs are nonsecret outputs.
pub fn check_pre0_conditions(sc: &Scenario, k: usize) -> Result<Pre0Conditions> {
    require_k(k)?;
    require_hull_output(sc)?;
    let tol = &sc.tol;
    let ys = sc.secret_output(k)?.to_vpolytope(tol)?;
    let yns = sc.nonsecret_output(k)?.to_vpolytope(tol)?;

    let pre_s = pre0_output_hull(&sc.sys, &ys, &sc.inputs, k, tol)?;
    let cond1_witness = lp_feasible_in_hull(&pre_s, &sc.nonsecret, tol)?;

    let hns = convex_hull_h(&yns, tol)?.normalized();
    let ru = input_reach(&sc.sys, &sc.inputs, k, tol)?;
    let cak = sc.sys.output_map(k);
    let sigma: Vec<f64> = hns
        .normals()
        .iter()
        .map(|n| {
            let dir = sc.sys.c().tr_mul(n);
            dir.dot(&ru.set.support(&dir))
        })
        .collect();
    let mut worst: Option<(usize, f64)> = None;
    for (i, x) in sc.secret.vertices().iter().enumerate() {
        let y = &cak * x;
        let viol = hns
            .normals()
            .iter()
            .zip(hns.offsets())
            .zip(&sigma)
            .map(|((n, h), s)| n.dot(&y) + s - h)
            .fold(f64::NEG_INFINITY, f64::max);
        if worst.is_none_or(|(_, w)| viol > w) {
            worst = Some((i, viol));
        }
    }
    let cond2 = worst.is_none_or(|(_, w)| w <= tol.geom_eps);
    Ok(Pre0Conditions {
        cond1: cond1_witness.is_some(),
        cond1_witness,
        cond2,
        cond2_violation: if cond2 { None } else { worst },
    })
}

fn require_hull_state(sc: &Scenario) -> Result<()> {
    if sc.sys.n() > MAX_HULL_DIM {
        return Err(Error::UnsupportedDimension {
            dim: sc.sys.n(),
            max: MAX_HULL_DIM,
        });
    }
    Ok(())
}

fn output_intersection(sc: &Scenario, k: usize) -> Result<(VPolytope, VPolytope, HPolytope)> {
    let tol = &sc.tol;
    let ys = sc.secret_output(k)?.to_vpolytope(tol)?;
    let yns = sc.nonsecret_output(k)?.to_vpolytope(tol)?;
    let meet = convex_hull_h(&ys, tol)?.intersect(&convex_hull_h(&yns, tol)?)?;
    if !meet.is_feasible(tol)? {
        let distance = gjk_query(&ys, &yns, tol.gjk_eps).distance;
        return Err(Error::Unsalvageable { distance });
    }
    Ok((ys, yns, meet))
}

/// Shrinks the secret set to the states whose every time-`k` output is a
/// nonsecret output: `conv(X_s) ∩ {x : C A^k x ⊕ C R_u ⊆ C X_ns(k)}`.
/// Fed back as the secret set, the result is strongly k-ISO.
pub fn prune_secret(sc: &Scenario, k: usize) -> Result<HPolytope> {
    require_k(k)?;
    require_hull_output(sc)?;
    require_hull_state(sc)?;
    let tol = &sc.tol;
    let (_, yns, _) = output_intersection(sc, k)?;
    let keep = pre0_output_robust(&sc.sys, &convex_hull_h(&yns, tol)?, &sc.inputs, k, tol)?;
    let pruned = convex_hull_h(&sc.secret, tol)?.intersect(&keep)?;
    if !pruned.is_feasible(tol)? {
        return Err(Error::PrunedSecretEmpty);
    }
    Ok(pruned)
}

/// The secret states from which *some* admissible control sequence produces
/// an output shared by both sets: `conv(X_s) ∩ Pre₀(C X_s(k) ∩ C X_ns(k))`.
pub fn prune_secret_existential(sc: &Scenario, k: usize) -> Result<HPolytope> {
    require_k(k)?;
    require_hull_output(sc)?;
    require_hull_state(sc)?;
    let tol = &sc.tol;
    let (_, _, meet) = output_intersection(sc, k)?;
    let keep = pre0_output(&sc.sys, &meet, &sc.inputs, k, tol)?;
    let pruned = convex_hull_h(&sc.secret, tol)?.intersect(&keep)?;
    if !pruned.is_feasible(tol)? {
        return Err(Error::PrunedSecretEmpty);
    }
    Ok(pruned)
}

/// Strong k-ISO when controls are unrestricted: every secret vertex `v`
/// satisfies `C A^k v ∈ C A^k conv(X_ns) + range(M)`, with `M` the output
/// controllability matrix of horizon `k`.
pub fn check_strong_unconstrained(sc: &Scenario, k: usize) -> Result<Verdict> {
    use crate::geometry::lp::{LinearProgram, LpOutcome, Relation};
    require_k(k)?;
    let cak = sc.sys.output_map(k);
    let mmat = sc.sys.output_controllability_matrix(k);
    let ns: Vec<Point> = sc.nonsecret.vertices().iter().map(|v| &cak * v).collect();
    let p = sc.sys.p();
    let nl = ns.len();
    let nu = mmat.ncols();
    let mut worst: Option<(usize, f64)> = None;
    for (i, v) in sc.secret.vertices().iter().enumerate() {
        let target = &cak * v;
        // Variables: lambda (>= 0), w (free), t (>= 0);
        // |Σ λ_j y_j + M w - target|_inf <= t, Σ λ = 1.
        let mut free = alloc::vec![false; nl];
        free.extend(core::iter::repeat_n(true, nu));
        free.push(false);
        let mut lp = LinearProgram::new(free);
        for r in 0..p {
            let mut row: Vec<f64> = ns.iter().map(|y| y[r]).collect();
            row.extend(mmat.row(r).iter().copied());
            let mut plus = row.clone();
            plus.push(-1.0);
            lp.add_row(plus, Relation::Le, target[r]);
            let mut minus: Vec<f64> = row.iter().map(|x| -x).collect();
            minus.push(-1.0);
            lp.add_row(minus, Relation::Le, -target[r]);
        }
        let mut sum = alloc::vec![1.0; nl];
        sum.extend(core::iter::repeat_n(0.0, nu + 1));
        lp.add_row(sum, Relation::Eq, 1.0);
        let mut obj = alloc::vec![0.0; nl + nu];
        obj.push(1.0);
        lp.set_objective(obj);
        let gap = match lp.solve()? {
            LpOutcome::Optimal { value, .. } => value,
            _ => return Err(Error::LpNoConvergence),
        };
        if worst.is_none_or(|(_, w)| gap > w) {
            worst = Some((i, gap));
        }
    }
    let (idx, gap) = worst.expect("secret set is nonempty");
    let holds = gap <= sc.tol.geom_eps;
    Ok(Verdict {
        status: if holds { Status::Holds } else { Status::Fails },
        witness: if holds {
            None
        } else {
            let output = &cak * &sc.secret.vertices()[idx];
            Some(Witness::Violation {
                nearest: output.clone(),
                output,
                distance: gap,
                trajectory: None,
            })
        },
        k,
        mode: Mode::Strong,
    })
}
