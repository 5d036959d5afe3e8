//! Tools for certifying and refuting homomorphism-density domination between
//! bipartite graphs.
//!
//! A graph `H` *dominates* a graph `H'` with respect to a kernel `W` when
//! `t_H(W)^(1/e(H)) >= t_H'(W)^(1/e(H'))`, where `t` is the homomorphism
//! density. A graph that dominates every one of its subgraphs for all
//! kernels with values in `[0, 1]` is called dominating; proving that is the
//! job of [`certify`], which searches for a layered percolation structure
//! built from cut involutions plus a relocation witness for every proper
//! union of layers. The [`screening`] module knocks out graphs that fail
//! cheap necessary conditions, [`falsify`] hunts for explicit step-kernel
//! counterexamples with exact rational confirmation, and [`constructions`]
//! builds the graph families the other modules are usually pointed at.

pub mod certify;
pub mod cli;
pub mod constructions;
pub mod error;
pub mod falsify;
pub mod graph;
pub mod graphon;
pub mod involution;
pub mod percolation;
pub mod screening;

pub use error::DomcertError;
pub use graph::{EdgeSubset, Embedding, Graph, VertexPermutation};

/// Crate result alias.
pub type Result<T> = std::result::Result<T, DomcertError>;
