//! Spectral sparsification of weighted graphs by repeated two-way edge
//! partitioning.
//!
//! Edges are split into two halves whose Laplacians each carry roughly half
//! of the original quadratic form; keeping one half and doubling its weights
//! sparsifies. High-leverage edges are first split into parallel copies so
//! that every partition is well balanced, and copies are merged back at the
//! end. Every output comes with a measured spectral certificate.
//!
//! ```
//! use kssparse::{fixtures, leverage_scores};
//!
//! let k4 = fixtures::complete(4);
//! let profile = leverage_scores(&k4).unwrap();
//! assert!(profile.scores.iter().all(|l| (l - 0.5).abs() < 1e-12));
//! ```

pub mod bounded;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod general;
pub mod graph;
pub mod leverage;
pub mod linalg;
pub mod partition;
pub mod report;

pub use bounded::{
    sparsify_bounded, sparsify_to_depth, BoundedOptions, Depth, Mode, SparsifyTrace,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use general::{build_schedule, sparsify_general, split_bad_edges, RunConfig, Schedule};
pub use graph::{read_graph, write_graph, Edge, WeightedGraph};
pub use leverage::{leverage_scores, LeverageProfile};
pub use linalg::{approx_factors, is_epsilon_approx, ApproxCertificate, SymmetricMatrix};
pub use partition::{brute_force_partition, random_partition, PartitionResult, Partitioner};
pub use report::RunReport;
