// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("partition sizes must be positive, got m={m}, n={n}")]
    EmptyPartition { m: usize, n: usize },

    #[error("vertex {vertex} is out of range for a graph with {count} vertices")]
    OutOfRange { vertex: usize, count: usize },

    #[error("vertices {u} and {v} are not adjacent")]
    NonAdjacent { u: usize, v: usize },

    #[error("arc index {index} is out of range for {count} arcs")]
    ArcOutOfRange { index: usize, count: usize },

    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),

    #[error("step count {h} has the wrong parity or is too small: {expected}")]
    BadParity { h: usize, expected: &'static str },

    #[error("states belong to different graphs")]
    SpecMismatch,

    #[error("graph is too small for this basis: {0}")]
    DegenerateSize(String),

    #[error("operation not supported for {0} basis")]
    UnsupportedBasis(&'static str),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis is not invariant under the walk: leakage {leakage:e}")]
    NotInvariant { leakage: f64 },

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed state dump at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
