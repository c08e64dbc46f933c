//! Named analytic graphs used throughout the tests and the CLI.

use std::str::FromStr;

use super::Graph;
use crate::error::{Error, Result};

/// A named fixture graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    Ring(usize),
    /// Hub is node 0.
    Star(usize),
    Path(usize),
    Complete(usize),
    Edgeless(usize),
    /// `w × h` grid with 4-neighbourhoods.
    Lattice(usize, usize),
    /// Four-cycle drawn as the path 0–1–2 plus node 3 adjacent to 0 and 2.
    /// Clique number 2, yet not isometrically embeddable in the Euclidean
    /// plane.
    Fig1,
    /// 4-clique {0,1,2,3}, node 4 adjacent to 1, node 5 adjacent to 3, and
    /// 4–5 adjacent. Clique number 4, not embeddable in the L∞ plane.
    Fig2,
    /// Ring of 8 nodes; Bartlett weights with bandwidth 3 are PSD.
    Fig3a,
    /// Ring of 8 nodes plus the chord 0–3; Bartlett weights with bandwidth 3
    /// are indefinite (found by exhaustive chord search).
    Fig3b,
}

impl Fixture {
    pub fn build(self) -> Result<Graph> {
        match self {
            Fixture::Ring(n) if n < 3 => Err(Error::InvalidParameter(format!(
                "ring needs at least 3 nodes, got {n}"
            ))),
            Fixture::Ring(n) => Ok(ring(n)),
            Fixture::Star(n) if n < 2 => Err(Error::InvalidParameter(format!(
                "star needs at least 2 nodes, got {n}"
            ))),
            Fixture::Star(n) => Ok(star(n)),
            Fixture::Path(n) => Ok(path(n)),
            Fixture::Complete(n) => Ok(Graph::complete(n)),
            Fixture::Edgeless(n) => Ok(Graph::edgeless(n)),
            Fixture::Lattice(w, h) => Ok(lattice(w, h)),
            Fixture::Fig1 => Ok(fig1()),
            Fixture::Fig2 => Ok(fig2()),
            Fixture::Fig3a => Ok(ring(8)),
            Fixture::Fig3b => ring(8).with_edge(0, 3),
        }
    }
}

impl FromStr for Fixture {
    type Err = Error;

    /// Parses `ring:8`, `star:5`, `path:4`, `complete:4`, `edgeless:3`,
    /// `lattice:3x4`, `fig1`, `fig2`, `fig3a`, `fig3b`.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownFixture(s.to_string());
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s.trim(), None),
        };
        let count = |arg: Option<&str>| -> Result<usize> {
            arg.and_then(|a| a.parse().ok()).ok_or_else(unknown)
        };
        match name {
            "ring" => Ok(Fixture::Ring(count(arg)?)),
            "star" => Ok(Fixture::Star(count(arg)?)),
            "path" => Ok(Fixture::Path(count(arg)?)),
            "complete" => Ok(Fixture::Complete(count(arg)?)),
            "edgeless" => Ok(Fixture::Edgeless(count(arg)?)),
            "lattice" => {
                let (w, h) = arg.and_then(|a| a.split_once('x')).ok_or_else(unknown)?;
                Ok(Fixture::Lattice(
                    w.parse().map_err(|_| unknown())?,
                    h.parse().map_err(|_| unknown())?,
                ))
            }
            "fig1" if arg.is_none() => Ok(Fixture::Fig1),
            "fig2" if arg.is_none() => Ok(Fixture::Fig2),
            "fig3a" if arg.is_none() => Ok(Fixture::Fig3a),
            "fig3b" if arg.is_none() => Ok(Fixture::Fig3b),
            _ => Err(unknown()),
        }
    }
}

/// Builds a fixture from its textual name.
pub fn fixture(name: &str) -> Result<Graph> {
    name.parse::<Fixture>()?.build()
}

pub(crate) fn ring(n: usize) -> Graph {
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("ring edges")
}

pub(crate) fn star(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (0, i))).expect("star edges")
}

pub(crate) fn path(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path edges")
}

pub(crate) fn lattice(w: usize, h: usize) -> Graph {
    let id = |x: usize, y: usize| y * w + x;
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                edges.push((id(x, y), id(x + 1, y)));
            }
            if y + 1 < h {
                edges.push((id(x, y), id(x, y + 1)));
            }
        }
    }
    Graph::new(w * h, edges).expect("lattice edges")
}

pub(crate) fn fig1() -> Graph {
    Graph::new(4, [(0, 1), (1, 2), (0, 3), (2, 3)]).expect("fig1 edges")
}

pub(crate) fn fig2() -> Graph {
    Graph::new(
        6,
        [
            (0, 1),
            (0, 2),
            (0, 3),
            (1, 2),
            (1, 3),
            (2, 3),
            (4, 1),
            (5, 3),
            (4, 5),
        ],
    )
    .expect("fig2 edges")
}
