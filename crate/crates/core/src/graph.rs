// SPDX-License-Identifier: Apache-2.0

//! The complete bipartite graph `K_{m,n}` and the indexing of its directed arcs.
//!
//! Vertices are labelled canonically: the left partition holds ids `0..m` and
//! the right partition holds ids `m..m+n`. Every arc `(u, v)` (walker at `u`,
//! coin pointing at `v`) gets a dense index in `0..2mn`. Arcs are grouped by
//! source vertex and, inside a group, ordered by ascending target id, so the
//! arcs leaving any vertex form one contiguous block:
//!
//! ```text
//! left  u:  u*n + (v - m)            for v in m..m+n
//! right v:  m*n + (v - m)*m + u      for u in 0..m
//! ```

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Partition sizes of `K_{m,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BipartiteSpec {
    m: usize,
    n: usize,
}

impl BipartiteSpec {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::EmptyPartition { m, n });
        }
        Ok(BipartiteSpec { m, n })
    }

    /// Size of the left partition.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Size of the right partition.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        self.m + self.n
    }

    pub fn num_edges(&self) -> usize {
        self.m * self.n
    }

    /// Dimension of the arc space, `2mn`.
    pub fn num_arcs(&self) -> usize {
        2 * self.m * self.n
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.num_vertices()).map(VertexId)
    }

    pub fn check(&self, u: VertexId) -> Result<()> {
        if u.0 < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                vertex: u.0,
                count: self.num_vertices(),
            })
        }
    }

    pub fn side(&self, u: VertexId) -> Result<Side> {
        self.check(u)?;
        Ok(if u.0 < self.m {
            Side::Left
        } else {
            Side::Right
        })
    }

    /// Size of the partition `side`.
    pub fn side_size(&self, side: Side) -> usize {
        match side {
            Side::Left => self.m,
            Side::Right => self.n,
        }
    }

    /// Ids of all vertices on `side`, ascending.
    pub fn partition(&self, side: Side) -> Range<usize> {
        match side {
            Side::Left => 0..self.m,
            Side::Right => self.m..self.m + self.n,
        }
    }

    pub fn degree(&self, u: VertexId) -> Result<usize> {
        Ok(self.side_size(self.side(u)?.opposite()))
    }

    pub fn neighbors(&self, u: VertexId) -> Result<Vec<VertexId>> {
        let side = self.side(u)?;
        Ok(self.partition(side.opposite()).map(VertexId).collect())
    }

    pub fn are_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        match (self.side(u), self.side(v)) {
            (Ok(a), Ok(b)) => a != b,
            _ => false,
        }
    }

    pub fn arc_index(&self, u: VertexId, v: VertexId) -> Result<ArcId> {
        if !self.are_adjacent(u, v) {
            return Err(Error::NonAdjacent { u: u.0, v: v.0 });
        }
        let (m, n) = (self.m, self.n);
        let index = if u.0 < m {
            u.0 * n + (v.0 - m)
        } else {
            m * n + (u.0 - m) * m + v.0
        };
        Ok(ArcId(index))
    }

    /// Inverse of [`arc_index`](Self::arc_index).
    pub fn arc_endpoints(&self, arc: ArcId) -> Result<(VertexId, VertexId)> {
        let (m, n) = (self.m, self.n);
        let i = arc.0;
        if i >= self.num_arcs() {
            return Err(Error::ArcOutOfRange {
                index: i,
                count: self.num_arcs(),
            });
        }
        if i < m * n {
            Ok((VertexId(i / n), VertexId(m + i % n)))
        } else {
            let j = i - m * n;
            Ok((VertexId(m + j / m), VertexId(j % m)))
        }
    }

    /// Contiguous range of arc indices leaving `u`.
    pub fn arc_block(&self, u: VertexId) -> Result<Range<usize>> {
        self.check(u)?;
        let (m, n) = (self.m, self.n);
        Ok(if u.0 < m {
            u.0 * n..(u.0 + 1) * n
        } else {
            let start = m * n + (u.0 - m) * m;
            start..start + m
        })
    }

    /// All arcs `(u, v)` in index order.
    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.num_arcs())
            .map(move |i| self.arc_endpoints(ArcId(i)).expect("index below num_arcs"))
    }

    /// The graph with its partitions swapped, `K_{n,m}`.
    pub fn mirrored(&self) -> BipartiteSpec {
        BipartiteSpec {
            m: self.n,
            n: self.m,
        }
    }

    /// Image of `u` under the relabelling that maps this graph onto
    /// [`mirrored`](Self::mirrored).
    pub fn mirror_vertex(&self, u: VertexId) -> Result<VertexId> {
        self.check(u)?;
        Ok(if u.0 < self.m {
            VertexId(u.0 + self.n)
        } else {
            VertexId(u.0 - self.m)
        })
    }
}

impl fmt::Display for BipartiteSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K_{{{},{}}}", self.m, self.n)
    }
}
