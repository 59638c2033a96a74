//! Runtime checks of how reach sets and opacity behave under unions and
//! intersections of initial sets. Unions of vertex polytopes are taken as
//! vertex-list concatenation (their convex hull); intersections go through
//! halfspace form and so need dimension at most three.

use alloc::vec::Vec;

use super::{check_strong_k_iso, check_weak_k_iso};
use crate::geometry::{convex_hull_h, hull_contains, ConvexSet, HPolytope, Tolerances, VPolytope};
use crate::system::{output_set, reach_exact, LtiSystem, Scenario};
use crate::{Error, Result};

/// Several secret and nonsecret initial sets over one plant.
#[derive(Debug, Clone)]
pub struct SetFamily {
    pub sys: LtiSystem,
    pub inputs: ConvexSet,
    pub tol: Tolerances,
    pub secrets: Vec<VPolytope>,
    pub nonsecrets: Vec<VPolytope>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Law {
    /// Reach set of a union equals the union of reach sets.
    ReachOfUnion,
    /// Output set of a union equals the union of output sets.
    OutputOfUnion,
    /// Each secret opaque ⇔ the union of secrets opaque.
    SecretUnion,
    /// Opaque against each nonsecret set ⇔ opaque against their union.
    NonsecretUnion,
    /// Reach set of an intersection lies in the intersection of reach sets.
    ReachOfIntersection,
    /// Output set of an intersection lies in the intersection of output sets.
    OutputOfIntersection,
    /// Each secret opaque ⇒ the intersection of secrets opaque.
    SecretIntersection,
    /// Opaque against each nonsecret set ⇒ secret outputs lie in the
    /// intersection of nonsecret outputs.
    NonsecretIntersection,
    /// Each secret weakly opaque ⇒ the union of secrets weakly opaque.
    WeakSecretUnion,
}

impl Law {
    pub const ALL: [Law; 9] = [
        Law::ReachOfUnion,
        Law::OutputOfUnion,
        Law::SecretUnion,
        Law::NonsecretUnion,
        Law::ReachOfIntersection,
        Law::OutputOfIntersection,
        Law::SecretIntersection,
        Law::NonsecretIntersection,
        Law::WeakSecretUnion,
    ];

    /// Laws stated as equivalences (checked in both directions).
    pub fn is_bidirectional(&self) -> bool {
        matches!(
            self,
            Law::ReachOfUnion
                | Law::OutputOfUnion
                | Law::SecretUnion
                | Law::NonsecretUnion
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Law::ReachOfUnion => "reach-of-union",
            Law::OutputOfUnion => "output-of-union",
            Law::SecretUnion => "secret-union",
            Law::NonsecretUnion => "nonsecret-union",
            Law::ReachOfIntersection => "reach-of-intersection",
            Law::OutputOfIntersection => "output-of-intersection",
            Law::SecretIntersection => "secret-intersection",
            Law::NonsecretIntersection => "nonsecret-intersection",
            Law::WeakSecretUnion => "weak-secret-union",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LawCheck {
    pub law: Law,
    /// The stated direction (or inclusion) holds on this family.
    pub forward: bool,
    /// The converse, for laws stated as equivalences.
    pub backward: Option<bool>,
    /// The intersection involved is empty, so the law holds vacuously.
    pub vacuous: bool,
}

impl LawCheck {
    pub fn passed(&self) -> bool {
        self.forward && self.backward.unwrap_or(true)
    }
}

fn union_of(sets: &[VPolytope]) -> Result<VPolytope> {
    let mut it = sets.iter();
    let mut acc = it.next().ok_or(Error::EmptySet("set family"))?.clone();
    for s in it {
        acc = acc.hull_union(s)?;
    }
    Ok(acc)
}

/// `∩ conv(sets)` in vertex form, or `None` when empty.
fn intersection_of(sets: &[VPolytope], tol: &Tolerances) -> Result<Option<VPolytope>> {
    let mut h: Option<HPolytope> = None;
    for s in sets {
        let hs = convex_hull_h(s, tol)?;
        h = Some(match h {
            None => hs,
            Some(acc) => acc.intersect(&hs)?,
        });
    }
    let h = h.ok_or(Error::EmptySet("set family"))?;
    if !h.is_feasible(tol)? {
        return Ok(None);
    }
    match h.vertices(tol) {
        Ok(v) => Ok(Some(v)),
        Err(Error::EmptySet(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn mutual(a: &VPolytope, b: &VPolytope, tol: &Tolerances) -> Result<(bool, bool)> {
    Ok((hull_contains(a, b, tol)?, hull_contains(b, a, tol)?))
}

struct Ctx<'a> {
    fam: &'a SetFamily,
    k: usize,
}

impl Ctx<'_> {
    fn state(&self, x: &VPolytope) -> Result<VPolytope> {
        let tol = &self.fam.tol;
        reach_exact(&self.fam.sys, &ConvexSet::Poly(x.clone()), &self.fam.inputs, self.k, tol)?
            .to_vpolytope(tol)
    }

    fn output(&self, x: &VPolytope) -> Result<VPolytope> {
        let tol = &self.fam.tol;
        let r = reach_exact(&self.fam.sys, &ConvexSet::Poly(x.clone()), &self.fam.inputs, self.k, tol)?;
        output_set(&self.fam.sys, &r, tol)?.to_vpolytope(tol)
    }

    fn scenario(&self, xs: &VPolytope, xns: &VPolytope) -> Scenario {
        Scenario {
            sys: self.fam.sys.clone(),
            secret: xs.clone(),
            nonsecret: xns.clone(),
            inputs: self.fam.inputs.clone(),
            schedule: alloc::vec![self.k],
            tol: self.fam.tol,
        }
    }

    fn strong(&self, xs: &VPolytope, xns: &VPolytope) -> Result<bool> {
        Ok(check_strong_k_iso(&self.scenario(xs, xns), self.k)?.holds())
    }

    fn weak(&self, xs: &VPolytope, xns: &VPolytope) -> Result<bool> {
        Ok(check_weak_k_iso(&self.scenario(xs, xns), self.k)?.holds())
    }
}

fn equivalence(law: Law, lhs: bool, rhs: bool) -> LawCheck {
    LawCheck {
        law,
        forward: !lhs || rhs,
        backward: Some(!rhs || lhs),
        vacuous: false,
    }
}

/// Evaluates every law on `fam` at time `k`. Union laws use all secret sets
/// (against the first nonsecret set) or all nonsecret sets (against the first
/// secret set).
pub fn set_algebra_suite(fam: &SetFamily, k: usize) -> Result<Vec<LawCheck>> {
    super::require_k(k)?;
    if fam.secrets.is_empty() || fam.nonsecrets.is_empty() {
        return Err(Error::EmptySet("set family"));
    }
    let tol = &fam.tol;
    let cx = Ctx { fam, k };
    let xs0 = &fam.secrets[0];
    let xns0 = &fam.nonsecrets[0];
    let us = union_of(&fam.secrets)?;
    let uns = union_of(&fam.nonsecrets)?;
    let mut out = Vec::with_capacity(Law::ALL.len());

    let reach_parts: Vec<VPolytope> = fam.secrets.iter().map(|x| cx.state(x)).collect::<Result<_>>()?;
    let (f, b) = mutual(&cx.state(&us)?, &union_of(&reach_parts)?, tol)?;
    out.push(LawCheck {
        law: Law::ReachOfUnion,
        forward: f,
        backward: Some(b),
        vacuous: false,
    });

    let out_parts: Vec<VPolytope> = fam.secrets.iter().map(|x| cx.output(x)).collect::<Result<_>>()?;
    let (f, b) = mutual(&cx.output(&us)?, &union_of(&out_parts)?, tol)?;
    out.push(LawCheck {
        law: Law::OutputOfUnion,
        forward: f,
        backward: Some(b),
        vacuous: false,
    });

    let mut each = true;
    for x in &fam.secrets {
        each &= cx.strong(x, xns0)?;
    }
    out.push(equivalence(Law::SecretUnion, each, cx.strong(&us, xns0)?));

    let mut each = true;
    for x in &fam.nonsecrets {
        each &= cx.strong(xs0, x)?;
    }
    out.push(equivalence(Law::NonsecretUnion, each, cx.strong(xs0, &uns)?));

    let meet = intersection_of(&fam.secrets, tol)?;
    let (reach_ok, output_ok) = match &meet {
        None => (true, true),
        Some(m) => {
            let rm = cx.state(m)?;
            let om = cx.output(m)?;
            let mut r_ok = true;
            for p in &reach_parts {
                r_ok &= hull_contains(&rm, p, tol)?;
            }
            let mut o_ok = true;
            for p in &out_parts {
                o_ok &= hull_contains(&om, p, tol)?;
            }
            (r_ok, o_ok)
        }
    };
    for (law, ok) in [(Law::ReachOfIntersection, reach_ok), (Law::OutputOfIntersection, output_ok)] {
        out.push(LawCheck {
            law,
            forward: ok,
            backward: None,
            vacuous: meet.is_none(),
        });
    }

    let mut each = true;
    for x in &fam.secrets {
        each &= cx.strong(x, xns0)?;
    }
    let forward = match &meet {
        None => true,
        Some(m) => !each || cx.strong(m, xns0)?,
    };
    out.push(LawCheck {
        law: Law::SecretIntersection,
        forward,
        backward: None,
        vacuous: meet.is_none(),
    });

    let mut each = true;
    for x in &fam.nonsecrets {
        each &= cx.strong(xs0, x)?;
    }
    let ys = cx.output(xs0)?;
    let ns_outputs: Vec<VPolytope> = fam.nonsecrets.iter().map(|x| cx.output(x)).collect::<Result<_>>()?;
    let mut h: Option<HPolytope> = None;
    for o in &ns_outputs {
        let ho = convex_hull_h(o, tol)?;
        h = Some(match h {
            None => ho,
            Some(acc) => acc.intersect(&ho)?,
        });
    }
    let h = h.expect("nonempty family");
    let inside = ys.vertices().iter().all(|v| h.contains(v, 2.0 * tol.geom_eps));
    out.push(LawCheck {
        law: Law::NonsecretIntersection,
        forward: !each || inside,
        backward: None,
        vacuous: intersection_of(&fam.nonsecrets, tol)?.is_none(),
    });

    let mut each = true;
    for x in &fam.secrets {
        each &= cx.weak(x, xns0)?;
    }
    out.push(LawCheck {
        law: Law::WeakSecretUnion,
        forward: !each || cx.weak(&us, xns0)?,
        backward: None,
        vacuous: false,
    });
    Ok(out)
}

/// A stored construction showing that a law cannot be strengthened.
#[derive(Debug, Clone, PartialEq)]
pub struct RemarkCheck {
    pub name: &'static str,
    pub exhibited: bool,
}

/// Builds the constructions behind the non-reversibility remarks:
/// disjoint initial sets with overlapping reach sets (so the intersection
/// inclusions are strict), and opacity against (or of) several sets whose
/// intersection is empty (so the intersected statement is undefined).
pub fn remark_counterexamples(tol: &Tolerances) -> Result<Vec<RemarkCheck>> {
    use crate::linalg::Matrix;
    let mut out = Vec::new();

    let one = Matrix::identity(1, 1);
    let fam = SetFamily {
        sys: LtiSystem::new(one.clone(), one.clone(), one)?,
        inputs: ConvexSet::Poly(VPolytope::from_points(&[&[0.0], &[1.0]])?),
        tol: *tol,
        secrets: alloc::vec![VPolytope::from_points(&[&[0.0]])?],
        nonsecrets: alloc::vec![VPolytope::from_points(&[&[1.0]])?],
    };
    let cx = Ctx { fam: &fam, k: 1 };
    let sets = [fam.secrets[0].clone(), fam.nonsecrets[0].clone()];
    let initial_empty = intersection_of(&sets, tol)?.is_none();
    let reaches = [cx.state(&sets[0])?, cx.state(&sets[1])?];
    let reach_meet = intersection_of(&reaches, tol)?.is_some();
    out.push(RemarkCheck {
        name: "disjoint initial sets with overlapping reach sets",
        exhibited: initial_empty && reach_meet,
    });

    let sys = LtiSystem::new(Matrix::identity(2, 2), Matrix::identity(2, 2), Matrix::from_row_slice(1, 2, &[1.0, 0.0]))?;
    let inputs = ConvexSet::Poly(VPolytope::from_box(&[0.0, 0.0], &[1.0, 1.0])?);
    let a = VPolytope::from_points(&[&[1.0, 0.0]])?;
    let b = VPolytope::from_points(&[&[1.0, 5.0]])?;
    let mid = VPolytope::from_points(&[&[1.0, 2.0]])?;
    let fam = SetFamily {
        sys,
        inputs,
        tol: *tol,
        secrets: alloc::vec![a.clone(), b.clone()],
        nonsecrets: alloc::vec![a.clone(), b.clone()],
    };
    let cx = Ctx { fam: &fam, k: 1 };
    let disjoint = intersection_of(&[a.clone(), b.clone()], tol)?.is_none();
    out.push(RemarkCheck {
        name: "opaque against each nonsecret set whose intersection is empty",
        exhibited: disjoint && cx.strong(&mid, &a)? && cx.strong(&mid, &b)?,
    });
    out.push(RemarkCheck {
        name: "weakly opaque secrets whose intersection is empty",
        exhibited: disjoint && cx.weak(&a, &mid)? && cx.weak(&b, &mid)?,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn scalar_family(secrets: &[(f64, f64)], nonsecrets: &[(f64, f64)]) -> SetFamily {
        let one = Matrix::identity(1, 1);
        let iv = |(a, b): (f64, f64)| VPolytope::from_points(&[&[a], &[b]]).unwrap();
        SetFamily {
            sys: LtiSystem::new(one.clone(), one.clone(), one).unwrap(),
            inputs: ConvexSet::Poly(iv((0.0, 1.0))),
            tol: Tolerances::default(),
            secrets: secrets.iter().copied().map(iv).collect(),
            nonsecrets: nonsecrets.iter().copied().map(iv).collect(),
        }
    }

    #[test]
    fn union_laws_on_nested_sets() {
        let fam = scalar_family(&[(0.0, 1.0), (0.5, 2.0)], &[(-1.0, 3.0), (0.0, 2.5)]);
        let report = set_algebra_suite(&fam, 1).unwrap();
        assert_eq!(report.len(), Law::ALL.len());
        for r in &report {
            assert!(r.passed(), "{:?}", r);
        }
    }

    #[test]
    fn nonsecret_union_converse_can_fail() {
        // Opaque against [0,1] ∪ [1,2] (hull [0,2]) but not against either part.
        let fam = scalar_family(&[(0.5, 1.5)], &[(0.0, 1.0), (1.0, 2.0)]);
        let report = set_algebra_suite(&fam, 1).unwrap();
        let r = report.iter().find(|r| r.law == Law::NonsecretUnion).unwrap();
        assert!(r.forward);
        assert_eq!(r.backward, Some(false));
    }

    #[test]
    fn weak_union_converse_can_fail() {
        let fam = scalar_family(&[(0.0, 0.0), (10.0, 10.0)], &[(0.5, 0.5)]);
        let report = set_algebra_suite(&fam, 1).unwrap();
        let r = report.iter().find(|r| r.law == Law::WeakSecretUnion).unwrap();
        assert!(r.forward);
        assert_eq!(r.backward, None);
        let cx = Ctx { fam: &fam, k: 1 };
        let us = union_of(&fam.secrets).unwrap();
        assert!(cx.weak(&us, &fam.nonsecrets[0]).unwrap());
        assert!(!cx.weak(&fam.secrets[1], &fam.nonsecrets[0]).unwrap());
    }

    #[test]
    fn remarks_are_exhibited() {
        let r = remark_counterexamples(&Tolerances::default()).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|c| c.exhibited), "{:?}", r);
    }
}
