//! Undirected simple graphs and distance machinery.
//!
//! [`Graph`] stores a compressed adjacency structure with sorted, duplicate
//! free neighbour lists. Distances are unsigned integers with a dedicated
//! infinite sentinel ([`Distance::INFINITE`]) for disconnected pairs.

mod bfs;
mod clique;
mod embed;
pub(crate) mod fixtures;
pub mod io;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bfs::{set_distance, shells, Bfs, Layers, ShellIndex};
pub use clique::{
    brute_force_clique_number, clique_number, clique_number_with_limit, DEFAULT_CLIQUE_LIMIT,
};
pub use embed::{embedding_check, EmbedSpace, EmbeddingDiagnostic, StressOptions};
pub use fixtures::{fixture, Fixture};

/// Graph distance. `Distance::INFINITE` marks nodes in different components.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Distance(u32);

impl Distance {
    pub const INFINITE: Distance = Distance(u32::MAX);
    pub const ZERO: Distance = Distance(0);

    pub fn finite(d: u32) -> Self {
        debug_assert!(d != u32::MAX);
        Distance(d)
    }

    pub fn is_finite(self) -> bool {
        self.0 != u32::MAX
    }

    pub fn get(self) -> Option<u32> {
        self.is_finite().then_some(self.0)
    }
}

impl fmt::Debug for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.get() {
            Some(d) => write!(f, "{d}"),
            None => write!(f, "inf"),
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Immutable undirected simple graph on nodes `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.node_count())
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate edges (in either
    /// orientation) are merged; self-loops and out-of-range endpoints are
    /// rejected.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n > u32::MAX as usize - 1 {
            return Err(Error::SizeLimit {
                what: "node labels",
                n,
                limit: u32::MAX as usize - 1,
            });
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (i, j) in edges {
            for node in [i, j] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            adj[i].push(j as u32);
            adj[j].push(i as u32);
        }
        Ok(Self::from_adjacency(adj))
    }

    fn from_adjacency(mut adj: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        offsets.push(0);
        let mut targets = Vec::new();
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Graph { offsets, targets }
    }

    pub fn edgeless(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Graph::new(n, edges).expect("complete graph edges are valid")
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.node_count() && self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Edges in canonical order: `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|i| self.degree(i)).collect()
    }

    /// Average degree, i.e. `2|E|/n` (the shell statistic `δ^∂(1)`).
    pub fn average_degree(&self) -> f64 {
        let n = self.node_count();
        if n == 0 {
            0.0
        } else {
            self.targets.len() as f64 / n as f64
        }
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count())
            .map(|i| self.degree(i))
            .max()
            .unwrap_or(0)
    }

    /// Subgraph on the same node set keeping the edges for which `keep`
    /// returns true.
    pub fn filter_edges<F>(&self, mut keep: F) -> Graph
    where
        F: FnMut(usize, usize) -> bool,
    {
        let kept: Vec<(usize, usize)> = self.edges().filter(|&(i, j)| keep(i, j)).collect();
        Graph::new(self.node_count(), kept).expect("subgraph of a valid graph")
    }

    /// Same graph with `i` relabelled as `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::InvalidParameter(format!(
                "permutation of length {} for {} nodes",
                perm.len(),
                n
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        Graph::new(n, self.edges().map(|(i, j)| (perm[i], perm[j])))
    }

    /// Graph with one extra edge.
    pub fn with_edge(&self, i: usize, j: usize) -> Result<Graph> {
        Graph::new(
            self.node_count(),
            self.edges().chain(std::iter::once((i, j))),
        )
    }

    /// Whether every pair of nodes is joined by a path. The empty graph and a
    /// single node count as connected.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n <= 1 {
            return true;
        }
        let mut bfs = Bfs::new(n);
        bfs.run(self, 0, None).reached() == n
    }
}
