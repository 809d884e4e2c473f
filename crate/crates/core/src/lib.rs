// SPDX-License-Identifier: Apache-2.0

//! Two-stage quantum state transfer on complete bipartite graphs with a
//! generalized Grover walk and fixed-point angle schedules.

pub mod cli;
pub mod error;
pub mod graph;
pub mod schedule;
pub mod subspace;
pub mod transfer;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{ArcId, BipartiteSpec, Side, VertexId};
