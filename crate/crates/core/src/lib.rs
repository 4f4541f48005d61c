//! Exact solvers, fine-grained reductions, and single-attention-unit
//! transformer constructions for document-similarity problems on binary
//! vectors, with a benchmark harness for runtime scaling and
//! exact-vs-heuristic accuracy comparisons.

pub mod attention;
pub mod bench;
pub mod bits;
pub mod error;
pub mod exact;
pub mod heuristics;
pub mod instances;
pub mod oracles;
pub mod reductions;

pub use error::{Error, Result};
