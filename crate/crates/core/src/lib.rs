//! Primal-dual approximation toolkit for hitting-set problems.
//!
//! The crate is organised around the hitting-set formulation: a weighted
//! ground set `E` and a family of subsets that must each be hit.
//!
//! * [`instance`] holds the canonical instance type and the vertex/set cover
//!   reductions.
//! * [`engine`] runs the primal-dual algorithm (optionally with uniform dual
//!   increase and ε-relaxed tightness) and records every timestep.
//! * [`oracle`] computes exact optima by branch-and-bound and brute force.
//! * [`forge`] generates the random graph families used for datasets.
//! * [`neural`] is the bipartite message-passing network, including the
//!   analytic parameterisation that replays the engine exactly.
//! * [`dataset`] builds, serialises and replays training corpora.
//! * [`bench`] scores model solutions and writes MILP warm-start files.

pub mod bench;
pub mod dataset;
pub mod engine;
mod error;
pub mod forge;
pub mod instance;
pub mod neural;
pub mod numfmt;
pub mod oracle;

pub use error::{Error, Result};
pub use instance::{HittingSetInstance, Solution, Task};
