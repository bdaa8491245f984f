//! Marked-graph cochain complexes on 3-regular multigraphs.
//!
//! The crate enumerates the families of connected trivalent multigraphs with
//! a fixed leg count and loop order, builds the edge-, cycle-, vertex- and
//! mixed-marking complexes over them, computes their integral cohomology via
//! Smith normal form, and ships a verification suite that checks the
//! expected algebraic identities (square-zero differentials, the vertex
//! model transport, acyclicity, cocycle generators, commutation, and the
//! degree-zero structure of the total complex) as exact matrix statements.

pub mod canon;
pub mod complex;
pub mod conflict;
pub mod enumerate;
pub mod graph;
pub mod homology;
pub mod marking;
pub mod snf;

pub use canon::{automorphisms, canonical_form, canonical_key};
pub use conflict::{
    cycle_system, edge_system, mixed_system, vertex_system, vertex_system_of_graph,
    ConflictError, ConflictSystem, Sector,
};
pub use graph::{classify, enumerate_cycles, Cycle, Graph, GraphClass, GraphError};
