//! Exact clique number by Bron–Kerbosch with pivoting and a size bound.

use super::Graph;
use crate::error::{Error, Result};

pub const DEFAULT_CLIQUE_LIMIT: usize = 64;

#[derive(Clone)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn empty(n: usize) -> Self {
        BitSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    fn and_count(&self, other: &BitSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + b)
                }
            })
        })
    }
}

struct Search {
    adj: Vec<BitSet>,
    best: usize,
}

impl Search {
    fn expand(&mut self, depth: usize, mut cand: BitSet, mut excl: BitSet) {
        if cand.is_empty() {
            if excl.is_empty() {
                self.best = self.best.max(depth);
            }
            return;
        }
        if depth + cand.len() <= self.best {
            return;
        }
        // pivot maximising |cand ∩ N(u)| over cand ∪ excl
        let pivot = cand
            .iter()
            .chain(excl.iter())
            .max_by_key(|&u| cand.and_count(&self.adj[u]))
            .expect("candidate set is nonempty");
        let branch: Vec<usize> = cand
            .iter()
            .filter(|&v| !self.adj[pivot].contains(v))
            .collect();
        for v in branch {
            let next_cand = cand.and(&self.adj[v]);
            let next_excl = excl.and(&self.adj[v]);
            self.expand(depth + 1, next_cand, next_excl);
            cand.remove(v);
            excl.insert(v);
            if depth + cand.len() <= self.best {
                return;
            }
        }
    }
}

/// Clique number `ω(G)` with the default size limit.
pub fn clique_number(g: &Graph) -> Result<usize> {
    clique_number_with_limit(g, DEFAULT_CLIQUE_LIMIT)
}

/// Exact clique number; refuses graphs with more than `limit` nodes.
pub fn clique_number_with_limit(g: &Graph, limit: usize) -> Result<usize> {
    let n = g.node_count();
    if n > limit {
        return Err(Error::CliqueSearchRefused { n, limit });
    }
    if n == 0 {
        return Ok(0);
    }
    let adj = (0..n)
        .map(|i| {
            let mut s = BitSet::empty(n);
            for &j in g.neighbors(i) {
                s.insert(j as usize);
            }
            s
        })
        .collect::<Vec<_>>();
    let mut search = Search { adj, best: 1 };
    search.expand(0, BitSet::full(n), BitSet::empty(n));
    Ok(search.best)
}

/// Clique number by enumeration of all node subsets (test oracle, `n ≤ 20`).
pub fn brute_force_clique_number(g: &Graph) -> usize {
    let n = g.node_count();
    assert!(n <= 20, "brute force limited to 20 nodes");
    let mut best = usize::from(n > 0);
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let nodes: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let clique = nodes
            .iter()
            .enumerate()
            .all(|(a, &i)| nodes[a + 1..].iter().all(|&j| g.has_edge(i, j)));
        if clique {
            best = size;
        }
    }
    best
}
