//! Exact score-based structure learning for Bayesian networks and polytrees.
//!
//! Solvers exploit structure of the superstructure graph: kernelization by
//! feedback edges, dynamic programs over spanning trees (local feedback edge
//! number) and tree decompositions, matroid intersection for additive polytree
//! learning, and branching over dependent vertices.

pub mod cli;
pub mod depset;
pub mod error;
pub mod gen;
pub mod graph;
pub mod graph_params;
pub mod instance;
pub mod kernel;
pub mod lfen_dp;
pub mod oracle;
pub mod polytree;
pub mod relation;
pub mod tw_dp;

pub use error::{Error, Result};
pub use instance::{AdditiveInstance, LocalScore, Mode, Network, NonZeroInstance, ParentSet, VarId};
