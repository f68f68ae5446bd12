//! Multiplayer reach-avoid pursuit-evasion in a polygonal arena.
//!
//! Faster pursuers defend a convex goal region against evaders. Each
//! pursuer (or pair of pursuers) checks whether it can certify a win against an
//! evader by one of three constructions: an Apollonius-disk "onsite" certificate,
//! a goal-visible safe-distance certificate, or a non-goal-visible certificate that
//! routes the pursuer through an obstacle vertex. Certified pairs are then
//! allocated by an exact integer program and simulated in discrete time.

pub mod allocation;
pub mod convexopt;
pub mod engine;
pub mod error;
pub mod esp;
pub mod evaders;
pub mod geometry;
pub mod goalvis;
pub mod nonvis;
pub mod onsite;
pub mod scenario;

pub use error::{Error, Result};
pub use geometry::{pt, Point2};
