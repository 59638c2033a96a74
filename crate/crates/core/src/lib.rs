//! Set-based verification of k-initial-state opacity for discrete-time
//! linear time-invariant systems.
//!
//! The crate is `no_std` (with `alloc`). Sets are carried as vertex
//! polytopes, halfspace polytopes or zonotopes; opacity questions reduce
//! to containment, intersection and distance queries between output sets
//! reached at the observation instants.
//!
//! Module map:
//! - [`geometry`]: set representations, hulls, GJK distance, LP feasibility.
//! - [`system`]: the plant, forward reach sets, simulation, pre-images.
//! - [`opacity`]: strong/weak/scheduled verdicts, pre-image conditions,
//!   secret pruning and the union/intersection law suite.
//! - [`approx`]: three-valued verdicts from over/under approximations.
//! - [`outputctrl`]: output controllability and its bridge to opacity.
//! - [`decentralized`]: several adversaries, coordinator and collusion.
//! - [`epsilon`]: the opacity radius and ε-thresholded verdicts.
//! - [`nonlinear`]: sampled falsification for nonlinear dynamics.

#![no_std]

extern crate alloc;

pub mod approx;
pub mod decentralized;
pub mod epsilon;
mod error;
pub mod geometry;
pub mod linalg;
pub mod nonlinear;
pub mod opacity;
pub mod outputctrl;
pub mod system;

pub use error::{Error, Result};
pub use geometry::{ConvexSet, HPolytope, Tolerances, VPolytope, Zonotope};
pub use linalg::{Matrix, Point};
pub use opacity::{Mode, Status, Verdict, Witness};
pub use system::{Fidelity, LtiSystem, Provenance, ReachSet, Scenario, Space};
