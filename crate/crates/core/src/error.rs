use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyVertexSet,

    #[error("edge {edge}: vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange {
        edge: usize,
        vertex: usize,
        n: usize,
    },

    #[error("edge {edge}: self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },

    #[error("edge {edge}: weight {weight} is not strictly positive and finite")]
    InvalidWeight { edge: usize, weight: f64 },

    #[error("edges sharing parent {parent} join different endpoint pairs")]
    InconsistentLineage { parent: usize },

    #[error("edge index {index} out of range for m = {m}")]
    EdgeIndexOutOfRange { index: usize, m: usize },

    #[error("edge index {index} selected more than once")]
    DuplicateEdgeIndex { index: usize },

    #[error("split multiplicity must be at least 1")]
    ZeroMultiplicity,

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("matrix is not symmetric: |A[{i}][{j}] - A[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})"
    )]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("graph has no edges")]
    NoEdges,

    #[error("cannot partition a graph with {m} edge(s); at least 2 are required")]
    TooFewEdges { m: usize },

    #[error(
        "brute-force search over {m} edges exceeds the cap of {cap}; use the random partitioner"
    )]
    BruteForceCap { m: usize, cap: usize },

    #[error("partition assignment has {got} entries but the graph has {m} edges")]
    AssignmentLength { got: usize, m: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("strict mode infeasible: {0}")]
    Infeasible(String),

    #[error("step {step}: output has rank {rank_h} but its input has rank {rank_g}; the graph became disconnected")]
    KernelMismatch {
        step: usize,
        rank_g: usize,
        rank_h: usize,
    },
}
