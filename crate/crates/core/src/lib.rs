//! Exact-rational simulator for scalar Hegselmann-Krause opinion dynamics.
//!
//! The crate evolves a sorted opinion profile under the bounded-confidence
//! averaging rule, computes the leftmost-cluster Lyapunov function at every
//! step and checks each inequality of the O(n^3) termination argument with
//! exact comparisons. A sweep harness produces CSV rows for scaling studies.
//!
//! Agent indices are 0-based throughout the API.

pub mod dynamics;
pub mod error;
pub mod float;
pub mod generators;
pub mod invariants;
pub mod io;
pub mod lyapunov;
pub mod phases;
pub mod pipeline;
pub mod rational;
pub mod sweep;

pub use dynamics::{
    all_neighbors, is_terminated, neighbors, simulate, step, NeighborInterval, OpinionProfile,
    TerminationResult, Trajectory,
};
pub use error::{Error, Result};
pub use lyapunov::{annotate, AnnotatedTrajectory, StepAnalysis, StepClass};
pub use phases::{decompose, PhaseDecomposition, PhaseRecord};
pub use rational::Rational;
