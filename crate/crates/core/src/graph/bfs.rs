use super::{Distance, Graph};
use crate::error::{Error, Result};

const UNSEEN: u32 = u32::MAX;

/// Reusable breadth-first search workspace.
///
/// A run from `src` lays the reached nodes out in BFS order together with
/// the end offset of every distance layer, so `layers.shell(s)` is exactly
/// `N^∂(src; s)` and a prefix of the order is the ball `N(src; s)`. Reset
/// cost is proportional to the previous run's reach, which keeps repeated
/// capped searches on large sparse graphs cheap.
#[derive(Debug, Clone)]
pub struct Bfs {
    dist: Vec<u32>,
    order: Vec<u32>,
    ends: Vec<usize>,
}

impl Bfs {
    pub fn new(n: usize) -> Self {
        Bfs {
            dist: vec![UNSEEN; n],
            order: Vec::with_capacity(n),
            ends: Vec::new(),
        }
    }

    fn reset(&mut self, n: usize) {
        if self.dist.len() != n {
            self.dist = vec![UNSEEN; n];
        } else {
            for &v in &self.order {
                self.dist[v as usize] = UNSEEN;
            }
        }
        self.order.clear();
        self.ends.clear();
    }

    /// Runs BFS from `src`, stopping after layer `cap` when given.
    pub fn run(&mut self, g: &Graph, src: usize, cap: Option<u32>) -> Layers<'_> {
        self.run_multi(g, std::slice::from_ref(&src), cap)
    }

    /// Multi-source BFS: layer 0 is the (deduplicated) source set.
    pub fn run_multi(&mut self, g: &Graph, sources: &[usize], cap: Option<u32>) -> Layers<'_> {
        self.reset(g.node_count());
        for &s in sources {
            if self.dist[s] == UNSEEN {
                self.dist[s] = 0;
                self.order.push(s as u32);
            }
        }
        if self.order.is_empty() {
            return Layers {
                order: &self.order,
                ends: &self.ends,
            };
        }
        self.ends.push(self.order.len());
        let cap = cap.unwrap_or(u32::MAX - 1);
        let mut start = 0;
        let mut depth = 0u32;
        while depth < cap {
            let end = self.order.len();
            if start == end {
                break;
            }
            for k in start..end {
                let u = self.order[k] as usize;
                for &w in g.neighbors(u) {
                    if self.dist[w as usize] == UNSEEN {
                        self.dist[w as usize] = depth + 1;
                        self.order.push(w);
                    }
                }
            }
            if self.order.len() == end {
                break;
            }
            depth += 1;
            self.ends.push(self.order.len());
            start = end;
        }
        Layers {
            order: &self.order,
            ends: &self.ends,
        }
    }

    /// Distance to `v` found by the last run (`INFINITE` if not reached,
    /// including nodes beyond the cap).
    #[inline]
    pub fn distance(&self, v: usize) -> Distance {
        match self.dist[v] {
            UNSEEN => Distance::INFINITE,
            d => Distance::finite(d),
        }
    }

    /// Layers of the last run.
    pub fn layers(&self) -> Layers<'_> {
        Layers {
            order: &self.order,
            ends: &self.ends,
        }
    }
}

/// BFS layering from one source (borrowed from a [`Bfs`] workspace).
#[derive(Debug, Clone, Copy)]
pub struct Layers<'a> {
    order: &'a [u32],
    ends: &'a [usize],
}

impl<'a> Layers<'a> {
    /// Number of nonempty layers (eccentricity within the cap, plus one).
    pub fn depth(&self) -> usize {
        self.ends.len()
    }

    /// Nodes at distance exactly `s`; empty beyond the last layer.
    pub fn shell(&self, s: usize) -> &'a [u32] {
        if s >= self.ends.len() {
            return &[];
        }
        let start = if s == 0 { 0 } else { self.ends[s - 1] };
        &self.order[start..self.ends[s]]
    }

    /// `|N(src; s)|`.
    pub fn ball_size(&self, s: usize) -> usize {
        match self.ends.len() {
            0 => 0,
            len => self.ends[s.min(len - 1)],
        }
    }

    pub fn reached(&self) -> usize {
        self.order.len()
    }

    /// All reached nodes in BFS order.
    pub fn order(&self) -> &'a [u32] {
        self.order
    }

    pub fn shells(&self) -> impl Iterator<Item = (usize, &'a [u32])> + '_ {
        (0..self.depth()).map(move |s| (s, self.shell(s)))
    }
}

/// Materialised shell partition for every node.
#[derive(Debug, Clone)]
pub struct ShellIndex {
    n: usize,
    cap: Option<u32>,
    orders: Vec<Vec<u32>>,
    ends: Vec<Vec<usize>>,
}

/// Computes `N^∂(i; s)` for every node `i` and `s ≤ max_s` (all `s` when
/// `max_s` is `None`).
pub fn shells(g: &Graph, max_s: Option<u32>) -> ShellIndex {
    let n = g.node_count();
    let mut bfs = Bfs::new(n);
    let mut orders = Vec::with_capacity(n);
    let mut ends = Vec::with_capacity(n);
    for i in 0..n {
        bfs.run(g, i, max_s);
        orders.push(bfs.order.clone());
        ends.push(bfs.ends.clone());
    }
    ShellIndex {
        n,
        cap: max_s,
        orders,
        ends,
    }
}

impl ShellIndex {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> Option<u32> {
        self.cap
    }

    pub fn layers(&self, i: usize) -> Layers<'_> {
        Layers {
            order: &self.orders[i],
            ends: &self.ends[i],
        }
    }

    pub fn shell(&self, i: usize, s: usize) -> &[u32] {
        self.layers(i).shell(s)
    }

    pub fn ball_size(&self, i: usize, s: usize) -> usize {
        self.layers(i).ball_size(s)
    }

    /// Number of nodes reached from `i` (its component size when uncapped).
    pub fn reach(&self, i: usize) -> usize {
        self.orders[i].len()
    }

    /// Distance between `i` and `j`, `INFINITE` when unreachable within the
    /// cap.
    pub fn distance(&self, i: usize, j: usize) -> Distance {
        let layers = self.layers(i);
        for (s, shell) in layers.shells() {
            if shell.contains(&(j as u32)) {
                return Distance::finite(s as u32);
            }
        }
        Distance::INFINITE
    }

    /// Largest finite distance among all pairs (0 for edgeless graphs).
    pub fn diameter(&self) -> u32 {
        self.ends
            .iter()
            .map(|e| e.len().saturating_sub(1) as u32)
            .max()
            .unwrap_or(0)
    }
}

/// `d(A, B) = min_{a∈A, b∈B} d(a, b)`; zero when the sets intersect.
pub fn set_distance(g: &Graph, a: &[usize], b: &[usize]) -> Result<Distance> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = g.node_count();
    if let Some(&bad) = a.iter().chain(b).find(|&&v| v >= n) {
        return Err(Error::NodeOutOfRange { node: bad, n });
    }
    let mut bfs = Bfs::new(n);
    bfs.run_multi(g, a, None);
    Ok(b.iter()
        .map(|&v| bfs.distance(v))
        .min()
        .unwrap_or(Distance::INFINITE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{path, ring, star};

    fn sorted(s: &[u32]) -> Vec<u32> {
        let mut v = s.to_vec();
        v.sort_unstable();
        v
    }

    #[test]
    fn ring4_shells() {
        let idx = shells(&ring(4), None);
        assert_eq!(sorted(idx.shell(0, 0)), vec![0]);
        assert_eq!(sorted(idx.shell(0, 1)), vec![1, 3]);
        assert_eq!(sorted(idx.shell(0, 2)), vec![2]);
        assert!(idx.shell(0, 3).is_empty());
    }

    #[test]
    fn star_leaf_shells() {
        let idx = shells(&star(4), None);
        assert_eq!(sorted(idx.shell(1, 0)), vec![1]);
        assert_eq!(sorted(idx.shell(1, 1)), vec![0]);
        assert_eq!(sorted(idx.shell(1, 2)), vec![2, 3]);
    }

    #[test]
    fn disconnected_pair_is_infinite() {
        let g = Graph::edgeless(2);
        assert_eq!(shells(&g, None).distance(0, 1), Distance::INFINITE);
        assert_eq!(set_distance(&g, &[0], &[1]).unwrap(), Distance::INFINITE);
    }

    #[test]
    fn set_distance_cases() {
        let p3 = path(3);
        assert_eq!(set_distance(&p3, &[0], &[2]).unwrap(), Distance::finite(2));
        assert_eq!(set_distance(&p3, &[0, 1], &[1, 2]).unwrap(), Distance::ZERO);
        assert_eq!(set_distance(&p3, &[], &[1]).unwrap_err(), Error::EmptySet);
    }

    #[test]
    fn capped_layers_stop_at_cap() {
        let g = path(10);
        let mut bfs = Bfs::new(10);
        let layers = bfs.run(&g, 0, Some(3));
        assert_eq!(layers.depth(), 4);
        assert_eq!(layers.ball_size(100), 4);
        assert_eq!(bfs.distance(5), Distance::INFINITE);
        // zero cap keeps only the source
        let layers = bfs.run(&g, 4, Some(0));
        assert_eq!(layers.order(), &[4]);
    }

    #[test]
    fn ring_shells_have_size_two() {
        for n in 5..20 {
            let idx = shells(&ring(n), None);
            for i in 0..n {
                for s in 1..=(n - 1) / 2 {
                    assert_eq!(idx.shell(i, s).len(), 2, "n={n} i={i} s={s}");
                }
            }
        }
    }
}
