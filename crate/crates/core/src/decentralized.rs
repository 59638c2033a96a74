//! Several adversaries, each observing `y_i = C_i x`: per-adversary and
//! aggregated checks, co-opacity under a coordinator, and collusion over a
//! directed communication graph.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::lp::{LinearProgram, LpOutcome, Relation};
use crate::geometry::{convex_hull_h, linear_image, HPolytope, MAX_HULL_DIM};
use crate::linalg::{vstack, Matrix, Point};
use crate::opacity::{check_strong_k_iso, containment_status, require_k, Mode, Status, Verdict, Witness};
use crate::system::Scenario;
use crate::{Error, Result};

/// Observation maps `C_1, …, C_l`; adversary `i` is addressed by index.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryEnsemble {
    maps: Vec<Matrix>,
}

impl AdversaryEnsemble {
    pub fn new(maps: Vec<Matrix>, n: usize) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::EmptySet("adversary ensemble"));
        }
        for c in &maps {
            if c.ncols() != n {
                return Err(Error::DimensionMismatch {
                    context: "adversary output map columns",
                    expected: n,
                    found: c.ncols(),
                });
            }
            if c.nrows() == 0 {
                return Err(Error::InvalidArgument("adversary output map has no rows".into()));
            }
        }
        Ok(AdversaryEnsemble { maps })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }

    pub fn stacked(&self) -> Matrix {
        vstack(&self.maps).expect("validated on construction")
    }
}

/// Directed graph on adversaries; an edge `(i, j)` lets `j` hear from `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    vertices: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl CommGraph {
    pub fn new(vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(i, j) in edges {
            if i >= vertices || j >= vertices {
                return Err(Error::InvalidGraph(alloc::format!(
                    "edge ({i}, {j}) references a vertex outside 0..{vertices}"
                )));
            }
            if i != j {
                set.insert((i, j));
            }
        }
        Ok(CommGraph { vertices, edges: set })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }
}

/// How the coordinator composes the adversaries' estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoordinatorRule {
    #[default]
    Union,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecentralizedVerdict {
    pub per_adversary: Vec<Verdict>,
    pub aggregate: Verdict,
}

fn conjunction(statuses: &[Status]) -> Status {
    if statuses.iter().all(|s| *s == Status::Holds) {
        Status::Holds
    } else if statuses.contains(&Status::Fails) {
        Status::Fails
    } else {
        Status::Unknown
    }
}

/// Strong k-ISO against every adversary separately; the aggregate holds iff
/// every adversary's check holds.
pub fn check_decentralized(sc: &Scenario, ens: &AdversaryEnsemble, k: usize) -> Result<DecentralizedVerdict> {
    require_k(k)?;
    let per_adversary = ens
        .maps
        .iter()
        .map(|c| check_strong_k_iso(&sc.with_output(c.clone())?, k))
        .collect::<Result<Vec<_>>>()?;
    let statuses: Vec<Status> = per_adversary.iter().map(|v| v.status).collect();
    let aggregate = Verdict {
        status: conjunction(&statuses),
        witness: Some(Witness::PerAdversary(statuses)),
        k,
        mode: Mode::Decentralized,
    };
    Ok(DecentralizedVerdict { per_adversary, aggregate })
}

/// [`check_decentralized`] over every time of the scenario's schedule.
#[allow(non_snake_case)]
pub fn check_decentralized_K(sc: &Scenario, ens: &AdversaryEnsemble) -> Result<Vec<DecentralizedVerdict>> {
    sc.schedule.iter().map(|&k| check_decentralized(sc, ens, k)).collect()
}

/// Strong k-ISO for the stacked map `[C_1; …; C_l]`. Holding here implies
/// the decentralized check holds; the converse is false in general.
pub fn check_aggregated(sc: &Scenario, ens: &AdversaryEnsemble, k: usize) -> Result<Verdict> {
    let mut v = check_strong_k_iso(&sc.with_output(ens.stacked())?, k)?;
    v.mode = Mode::Decentralized;
    Ok(v)
}

/// Limits for the exact co-opacity decision and its sampling fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoOpacityOptions {
    pub clause_cap: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CoOpacityOptions {
    fn default() -> Self {
        CoOpacityOptions {
            clause_cap: 10_000,
            samples: 10_000,
            seed: 0,
        }
    }
}

pub fn check_co_opacity(sc: &Scenario, ens: &AdversaryEnsemble, rule: CoordinatorRule, k: usize) -> Result<Verdict> {
    check_co_opacity_with(sc, ens, rule, k, &CoOpacityOptions::default())
}

/// Co-opacity under the union coordinator: every state of `X_s(k)` is
/// explained by some adversary, i.e. `X_s(k) ⊆ ∪_i S_i` with
/// `S_i = {x ∈ X_s(k) : C_i x ∈ C_i X_ns(k)}`.
pub fn check_co_opacity_with(
    sc: &Scenario,
    ens: &AdversaryEnsemble,
    rule: CoordinatorRule,
    k: usize,
    opts: &CoOpacityOptions,
) -> Result<Verdict> {
    require_k(k)?;
    let CoordinatorRule::Union = rule;
    for c in &ens.maps {
        if c.nrows() > MAX_HULL_DIM {
            return Err(Error::UnsupportedDimension {
                dim: c.nrows(),
                max: MAX_HULL_DIM,
            });
        }
    }
    let tol = &sc.tol;
    let rs = sc.secret_reach(k)?;
    let rns = sc.nonsecret_reach(k)?;
    let xs = rs.to_vpolytope(tol)?;
    let xns = rns.to_vpolytope(tol)?;
    let hulls: Vec<HPolytope> = ens
        .maps
        .iter()
        .map(|c| Ok(convex_hull_h(&linear_image(c, &xns)?, tol)?.normalized()))
        .collect::<Result<_>>()?;
    let clauses = hulls
        .iter()
        .try_fold(1usize, |acc, h| acc.checked_mul(h.len()))
        .filter(|&c| c <= opts.clause_cap);
    let verdict = |uncovered: Option<Point>, decided: bool| {
        let base = containment_status(rs.fidelity, rns.fidelity, uncovered.is_none());
        let status = if base == Status::Holds && !decided {
            Status::Unknown
        } else {
            base
        };
        Verdict {
            status,
            witness: uncovered.map(|state| Witness::Uncovered { state }),
            k,
            mode: Mode::Co,
        }
    };
    if clauses.is_none() {
        log::warn!("co-opacity clause count exceeds {}; sampling instead", opts.clause_cap);
        return Ok(verdict(sample_uncovered(xs.vertices(), ens, &hulls, opts, tol.geom_eps), false));
    }
    // Values of each facet functional a·C_i at each vertex of X_s(k).
    let vals: Vec<Vec<Vec<f64>>> = ens
        .maps
        .iter()
        .zip(&hulls)
        .map(|(c, h)| {
            h.normals()
                .iter()
                .map(|a| xs.vertices().iter().map(|v| a.dot(&(c * v))).collect())
                .collect()
        })
        .collect();
    let nv = xs.len();
    let mut choice = alloc::vec![0usize; hulls.len()];
    loop {
        // Maximize t with a·C_i x - b >= t for the chosen facet of every S_i.
        let mut free = alloc::vec![false; nv];
        free.push(true);
        let mut lp = LinearProgram::new(free);
        for (i, &j) in choice.iter().enumerate() {
            let mut row: Vec<f64> = vals[i][j].iter().map(|x| -x).collect();
            row.push(1.0);
            lp.add_row(row, Relation::Le, -hulls[i].offsets()[j]);
        }
        let mut sum = alloc::vec![1.0; nv];
        sum.push(0.0);
        lp.add_row(sum, Relation::Eq, 1.0);
        let mut obj = alloc::vec![0.0; nv];
        obj.push(-1.0);
        lp.set_objective(obj);
        if let LpOutcome::Optimal { x, value } = lp.solve()? {
            if -value > tol.geom_eps {
                let state = xs
                    .vertices()
                    .iter()
                    .zip(&x)
                    .fold(Point::zeros(xs.dim()), |acc, (v, w)| acc + v * *w);
                return Ok(verdict(Some(state), true));
            }
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(verdict(None, true));
            }
            choice[i] += 1;
            if choice[i] < hulls[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn sample_uncovered(
    vertices: &[Point],
    ens: &AdversaryEnsemble,
    hulls: &[HPolytope],
    opts: &CoOpacityOptions,
    eps: f64,
) -> Option<Point> {
    let uncovered = |x: &Point| {
        ens.maps
            .iter()
            .zip(hulls)
            .all(|(c, h)| h.violation(&(c * x)) > eps)
    };
    if let Some(v) = vertices.iter().find(|v| uncovered(v)) {
        return Some(v.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let dim = vertices[0].len();
    for _ in 0..opts.samples {
        // Dirichlet(1, …, 1) weights via normalized exponentials.
        let w: Vec<f64> = (0..vertices.len())
            .map(|_| -libm::log(1.0 - rng.gen::<f64>()))
            .collect();
        let total: f64 = w.iter().sum();
        let x = vertices
            .iter()
            .zip(&w)
            .fold(Point::zeros(dim), |acc, (v, wi)| acc + v * (wi / total));
        if uncovered(&x) {
            return Some(x);
        }
    }
    None
}

/// Every vertex outside `d` has an incoming edge from a vertex in `d`.
pub fn is_directed_dominating(g: &CommGraph, d: &[usize]) -> bool {
    let inside: BTreeSet<usize> = d.iter().copied().filter(|&v| v < g.vertices).collect();
    (0..g.vertices)
        .filter(|u| !inside.contains(u))
        .all(|u| inside.iter().any(|&v| g.has_edge(v, u)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollusionOutcome {
    /// Statuses after each round; entry 0 is each adversary's own check.
    pub rounds: Vec<Vec<Status>>,
    /// Index of the original map each adversary ends up using.
    pub maps_used: Vec<usize>,
    /// FAILS iff every adversary is non-opaque at the fixpoint.
    pub aggregate: Verdict,
}

impl CollusionOutcome {
    pub fn final_statuses(&self) -> &[Status] {
        self.rounds.last().expect("round 0 is always recorded")
    }
}

/// Synchronous rounds: every non-opaque adversary sends its map to its
/// out-neighbours, and a receiver that is not yet non-opaque adopts the map
/// of its lowest-indexed sender and re-checks. Stops at the fixpoint.
pub fn simulate_collusion(sc: &Scenario, ens: &AdversaryEnsemble, g: &CommGraph, k: usize) -> Result<CollusionOutcome> {
    require_k(k)?;
    let l = ens.len();
    if g.vertices != l {
        return Err(Error::InvalidGraph(alloc::format!(
            "graph has {} vertices but there are {l} adversaries",
            g.vertices
        )));
    }
    let own: Vec<Status> = ens
        .maps
        .iter()
        .map(|c| Ok(check_strong_k_iso(&sc.with_output(c.clone())?, k)?.status))
        .collect::<Result<_>>()?;
    let mut maps_used: Vec<usize> = (0..l).collect();
    let mut status = own.clone();
    let mut rounds = alloc::vec![status.clone()];
    loop {
        let mut next_maps = maps_used.clone();
        let mut next = status.clone();
        for j in 0..l {
            if status[j] == Status::Fails {
                continue;
            }
            if let Some(i) = (0..l).find(|&i| status[i] == Status::Fails && g.has_edge(i, j)) {
                next_maps[j] = maps_used[i];
                next[j] = own[maps_used[i]];
            }
        }
        if next == status {
            break;
        }
        maps_used = next_maps;
        status = next;
        rounds.push(status.clone());
    }
    let agg = if status.iter().all(|s| *s == Status::Fails) {
        Status::Fails
    } else if status.contains(&Status::Unknown) {
        Status::Unknown
    } else {
        Status::Holds
    };
    Ok(CollusionOutcome {
        aggregate: Verdict {
            status: agg,
            witness: Some(Witness::PerAdversary(status)),
            k,
            mode: Mode::Collusion,
        },
        rounds,
        maps_used,
    })
}

/// [`simulate_collusion`] for each time of the schedule, restarting from the
/// original maps every time.
#[allow(non_snake_case)]
pub fn simulate_collusion_K(sc: &Scenario, ens: &AdversaryEnsemble, g: &CommGraph) -> Result<Vec<CollusionOutcome>> {
    sc.schedule.iter().map(|&k| simulate_collusion(sc, ens, g, k)).collect()
}
