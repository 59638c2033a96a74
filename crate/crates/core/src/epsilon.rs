//! Quantitative opacity: the largest distance from a secret output to the
//! nonsecret output set.
//!
//! `z ↦ dist(z, Y_ns)` is convex for convex `Y_ns`, so its maximum over the
//! polytope `Y_s` is attained at a vertex. The radius is therefore a maximum
//! of finitely many GJK distance queries.

use alloc::vec::Vec;

use crate::linalg::Point;
use crate::opacity::{require_k, set_distance, Status};
use crate::system::Scenario;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EpsVerdict {
    pub radius: f64,
    pub threshold: f64,
    pub status: Status,
    /// Secret output vertex attaining the radius.
    pub argmax_vertex: Point,
    pub k: usize,
}

/// `(max_{z ∈ CX_s(k)} dist(z, CX_ns(k)), argmax)`.
pub fn opacity_radius(sc: &Scenario, k: usize) -> Result<(f64, Point)> {
    require_k(k)?;
    let ys = sc.secret_output(k)?.to_vpolytope(&sc.tol)?;
    let yns = sc.nonsecret_output(k)?.set;
    let mut best = (f64::NEG_INFINITY, ys.vertices()[0].clone());
    for v in ys.vertices() {
        let d = set_distance(v, &yns, &sc.tol).distance;
        if d > best.0 {
            best = (d, v.clone());
        }
    }
    Ok((best.0.max(0.0), best.1))
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidArgument("eps must be nonnegative".into()));
    }
    Ok(())
}

pub fn check_eps_k_iso(sc: &Scenario, k: usize, eps: f64) -> Result<EpsVerdict> {
    check_eps(eps)?;
    let (radius, argmax_vertex) = opacity_radius(sc, k)?;
    let status = if radius <= eps + sc.tol.geom_eps {
        Status::Holds
    } else {
        Status::Fails
    };
    Ok(EpsVerdict {
        radius,
        threshold: eps,
        status,
        argmax_vertex,
        k,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsScheduleVerdict {
    pub per_k: Vec<EpsVerdict>,
    /// HOLDS iff every time in the schedule holds.
    pub status: Status,
    /// Largest radius over the schedule.
    pub radius: f64,
}

#[allow(non_snake_case)]
pub fn check_eps_K_iso(sc: &Scenario, eps: f64) -> Result<EpsScheduleVerdict> {
    check_eps(eps)?;
    let per_k = sc
        .schedule
        .iter()
        .map(|&k| check_eps_k_iso(sc, k, eps))
        .collect::<Result<Vec<_>>>()?;
    let status = if per_k.iter().all(|v| v.status == Status::Holds) {
        Status::Holds
    } else {
        Status::Fails
    };
    let radius = per_k.iter().fold(0.0f64, |a, v| a.max(v.radius));
    Ok(EpsScheduleVerdict { per_k, status, radius })
}
