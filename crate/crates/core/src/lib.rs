//! Binary classification of facial-landmark graphs by quantum interference.
//!
//! Mouth landmarks become weighted graphs (complete or Delaunay-meshed), the
//! upper-triangular edge weights are amplitude-encoded, and a small
//! statevector simulation of the interference circuit yields a class
//! probability. A Frobenius nearest-class rule serves as the classical
//! baseline.

pub mod classifier;
pub mod cli;
pub mod encoding;
pub mod graphs;
pub mod landmarks;
pub mod experiments;
pub mod rng;
pub mod simulator;
