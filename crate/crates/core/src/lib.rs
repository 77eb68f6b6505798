//! Fair division of graph vertices under cut valuations.
//!
//! Every agent values a bundle `S` by its cut value: the number of edges with
//! exactly one endpoint in `S`. The crate provides exact checkers for the
//! usual fairness and efficiency notions, polynomial-time allocation
//! algorithms, an exhaustive oracle for small instances and generators for
//! named and random instance families.

pub mod algorithms;
pub mod allocation;
pub mod graph;
pub mod instances;
pub mod oracle;
pub mod repro;
pub mod rng;
pub mod valuation;

pub use allocation::{Allocation, FairnessReport};
pub use graph::{Graph, Vertex};
pub use instances::Instance;
pub use valuation::BundleStats;
