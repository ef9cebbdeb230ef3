//! Bregman projections onto coherence-constrained model classes.
//!
//! A model is a table of per-prompt score vectors. The coherence set asks
//! that the table be invariant under a permutation Φ of prompts; a convex
//! set Π carries the remaining structural constraints. The crate computes
//! the exact projection of a baseline onto Π ∩ C_coh, its two-step
//! orbit-centroid form, penalized relaxations, finite-sample versions and a
//! verification harness around all of them.

pub mod bregman;
pub mod coherence;
pub mod empirical;
pub mod error;
pub mod generators;
pub mod harness;
pub mod model;
pub mod projection;
pub mod relaxed;
pub mod sets;
pub(crate) mod solver;

pub use coherence::{BlockPartition, InvarianceMap, OrbitPartition};
pub use error::{Error, Result};
pub use generators::{GeneratorKind, GeneratorSpec, NormTag};
pub use model::{Model, PromptDistribution};
pub use projection::{Algorithm, SolveReport, SolveStatus, SolverOptions};
pub use sets::{Base, ConvexModelSet};
