//! Necessary-condition check and numeric stress search for isometric
//! embeddings of a graph metric into a normed space or sphere.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{shells, Graph};
use crate::error::{Error, Result};
use crate::rng;

/// Target metric space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EmbedSpace {
    /// `R^k` with the Euclidean norm.
    Euclidean(usize),
    /// `R^k` with the sup norm.
    Linf(usize),
    /// The sphere `S^k ⊂ R^{k+1}` with geodesic distance and free radius.
    Sphere(usize),
}

impl EmbedSpace {
    /// Maximum number of mutually equidistant points. For `L∞` this is the
    /// `2^k` bound that holds for every `k`-dimensional normed space (attained
    /// by the sup norm).
    pub fn equilateral_dimension(self) -> usize {
        match self {
            EmbedSpace::Euclidean(k) => k + 1,
            EmbedSpace::Linf(k) => 1usize.checked_shl(k as u32).unwrap_or(usize::MAX),
            EmbedSpace::Sphere(k) => k + 2,
        }
    }

    fn point_dim(self) -> usize {
        match self {
            EmbedSpace::Euclidean(k) | EmbedSpace::Linf(k) => k,
            EmbedSpace::Sphere(k) => k + 1,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StressOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Distortion below this is reported as an exact embedding.
    pub exact_tol: f64,
    pub max_sweeps: usize,
}

impl Default for StressOptions {
    fn default() -> Self {
        StressOptions {
            restarts: 200,
            seed: 0,
            exact_tol: 1e-9,
            max_sweeps: 4000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingDiagnostic {
    pub clique_number: usize,
    pub equilateral_dim: usize,
    pub necessary_condition_holds: bool,
    /// Best max |d_X(b(i), b(j)) − d(i, j)| found; evidence, not a
    /// certificate.
    pub min_stress: f64,
}

const MAX_EMBED_NODES: usize = 50;

/// Clique-number test plus random-restart stress minimisation.
pub fn embedding_check(
    g: &Graph,
    space: EmbedSpace,
    opts: StressOptions,
) -> Result<EmbeddingDiagnostic> {
    let n = g.node_count();
    if n > MAX_EMBED_NODES {
        return Err(Error::SizeLimit {
            what: "embedding search",
            n,
            limit: MAX_EMBED_NODES,
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if space.point_dim() == 0 {
        return Err(Error::InvalidParameter(
            "target dimension must be positive".into(),
        ));
    }
    let clique_number = super::clique_number(g)?;
    let equilateral_dim = space.equilateral_dimension();
    let idx = shells(g, None);
    let target: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| idx.distance(i, j).get().unwrap_or(0) as f64)
        .collect();
    let diameter = idx.diameter().max(1) as f64;

    let mut best = f64::INFINITY;
    for restart in 0..opts.restarts.max(1) {
        let mut rng = rng::stream(opts.seed, 0xE3BED, restart as u64);
        let mut problem = Stress::random(space, n, &target, diameter, &mut rng);
        problem.descend_squared(opts.max_sweeps);
        problem.descend_max(opts.max_sweeps / 4);
        best = best.min(problem.max_distortion());
        if best < opts.exact_tol {
            break;
        }
    }
    let min_stress = if best < opts.exact_tol { 0.0 } else { best };
    Ok(EmbeddingDiagnostic {
        clique_number,
        equilateral_dim,
        necessary_condition_holds: clique_number <= equilateral_dim,
        min_stress,
    })
}

struct Stress<'a> {
    space: EmbedSpace,
    n: usize,
    dim: usize,
    coords: Vec<f64>,
    log_radius: f64,
    target: &'a [f64],
}

impl<'a> Stress<'a> {
    fn random<R: Rng>(
        space: EmbedSpace,
        n: usize,
        target: &'a [f64],
        diameter: f64,
        rng: &mut R,
    ) -> Self {
        let dim = space.point_dim();
        let coords = match space {
            EmbedSpace::Sphere(_) => (0..n * dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect(),
            _ => (0..n * dim)
                .map(|_| rng.random::<f64>() * diameter)
                .collect(),
        };
        let log_radius = (diameter / 2.0).ln();
        Stress {
            space,
            n,
            dim,
            coords,
            log_radius,
            target,
        }
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn metric(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.point(i), self.point(j));
        match self.space {
            EmbedSpace::Euclidean(_) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt(),
            EmbedSpace::Linf(_) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            EmbedSpace::Sphere(_) => {
                let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                if na == 0.0 || nb == 0.0 {
                    return 0.0;
                }
                let cos = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
                self.log_radius.exp() * cos.clamp(-1.0, 1.0).acos()
            }
        }
    }

    fn err(&self, i: usize, j: usize) -> f64 {
        self.metric(i, j) - self.target[i * self.n + j]
    }

    fn row_squared(&self, i: usize) -> f64 {
        (0..self.n)
            .filter(|&j| j != i)
            .map(|j| self.err(i, j).powi(2))
            .sum()
    }

    fn total_squared(&self) -> f64 {
        (0..self.n).map(|i| self.row_squared(i)).sum::<f64>() / 2.0
    }

    fn max_distortion(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                m = m.max(self.err(i, j).abs());
            }
        }
        m
    }

    fn max_excluding(&self, i: usize) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..self.n {
            if a == i {
                continue;
            }
            for b in a + 1..self.n {
                if b != i {
                    m = m.max(self.err(a, b).abs());
                }
            }
        }
        m
    }

    fn row_max(&self, i: usize) -> f64 {
        (0..self.n)
            .filter(|&j| j != i)
            .map(|j| self.err(i, j).abs())
            .fold(0.0, f64::max)
    }

    fn has_radius(&self) -> bool {
        matches!(self.space, EmbedSpace::Sphere(_))
    }

    /// Coordinate-wise pattern search on the sum of squared distortions.
    fn descend_squared(&mut self, max_sweeps: usize) {
        let params = self.coords.len();
        let mut steps = vec![0.25; params + 1];
        for _ in 0..max_sweeps {
            let mut largest: f64 = 0.0;
            for p in 0..params {
                let i = p / self.dim;
                let before = self.row_squared(i);
                let h = steps[p];
                let x0 = self.coords[p];
                let mut improved = false;
                for cand in [x0 + h, x0 - h] {
                    self.coords[p] = cand;
                    if self.row_squared(i) < before {
                        improved = true;
                        break;
                    }
                }
                if improved {
                    steps[p] = (h * 2.0).min(1.0);
                } else {
                    self.coords[p] = x0;
                    steps[p] = h * 0.5;
                }
                largest = largest.max(steps[p]);
            }
            if self.has_radius() {
                let before = self.total_squared();
                let h = steps[params];
                let r0 = self.log_radius;
                let mut improved = false;
                for cand in [r0 + h, r0 - h] {
                    self.log_radius = cand;
                    if self.total_squared() < before {
                        improved = true;
                        break;
                    }
                }
                if improved {
                    steps[params] = (h * 2.0).min(1.0);
                } else {
                    self.log_radius = r0;
                    steps[params] = h * 0.5;
                }
                largest = largest.max(steps[params]);
            }
            if largest < 1e-13 {
                break;
            }
        }
    }

    /// Pattern search on the max distortion, starting from the current
    /// configuration.
    fn descend_max(&mut self, max_sweeps: usize) {
        let params = self.coords.len();
        let mut steps = vec![1e-2; params + 1];
        for _ in 0..max_sweeps {
            let mut largest: f64 = 0.0;
            for i in 0..self.n {
                let others = self.max_excluding(i);
                for c in 0..self.dim {
                    let p = i * self.dim + c;
                    let before = others.max(self.row_max(i));
                    let h = steps[p];
                    let x0 = self.coords[p];
                    let mut improved = false;
                    for cand in [x0 + h, x0 - h] {
                        self.coords[p] = cand;
                        if others.max(self.row_max(i)) < before {
                            improved = true;
                            break;
                        }
                    }
                    if improved {
                        steps[p] = (h * 2.0).min(1.0);
                    } else {
                        self.coords[p] = x0;
                        steps[p] = h * 0.5;
                    }
                    largest = largest.max(steps[p]);
                }
            }
            if self.has_radius() {
                let before = self.max_distortion();
                let h = steps[params];
                let r0 = self.log_radius;
                let mut improved = false;
                for cand in [r0 + h, r0 - h] {
                    self.log_radius = cand;
                    if self.max_distortion() < before {
                        improved = true;
                        break;
                    }
                }
                if !improved {
                    self.log_radius = r0;
                    steps[params] = h * 0.5;
                }
                largest = largest.max(steps[params]);
            }
            if largest < 1e-12 {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixture;

    fn opts(restarts: usize) -> StressOptions {
        StressOptions {
            restarts,
            ..Default::default()
        }
    }

    #[test]
    fn equilateral_dimensions() {
        assert_eq!(EmbedSpace::Euclidean(2).equilateral_dimension(), 3);
        assert_eq!(EmbedSpace::Linf(2).equilateral_dimension(), 4);
        assert_eq!(EmbedSpace::Sphere(2).equilateral_dimension(), 4);
    }

    #[test]
    fn path_embeds_on_a_line() {
        let d = embedding_check(
            &fixture("path:3").unwrap(),
            EmbedSpace::Euclidean(1),
            opts(20),
        )
        .unwrap();
        assert!(d.necessary_condition_holds);
        assert_eq!(d.min_stress, 0.0);
    }

    #[test]
    fn fig1_needs_distortion_in_the_plane() {
        let d = embedding_check(
            &fixture("fig1").unwrap(),
            EmbedSpace::Euclidean(2),
            opts(200),
        )
        .unwrap();
        assert!(d.necessary_condition_holds);
        assert_eq!(d.clique_number, 2);
        assert!(d.min_stress > 0.1, "min stress {}", d.min_stress);
    }

    #[test]
    fn k4_fails_necessary_condition_in_plane() {
        let d = embedding_check(&Graph::complete(4), EmbedSpace::Euclidean(2), opts(5)).unwrap();
        assert!(!d.necessary_condition_holds);
        assert!(d.min_stress > 0.0);
        // K4 sits on the vertices of a regular tetrahedron
        let d = embedding_check(&Graph::complete(4), EmbedSpace::Euclidean(3), opts(50)).unwrap();
        assert!(d.necessary_condition_holds);
        assert_eq!(d.min_stress, 0.0);
    }

    #[test]
    fn fig2_in_linf_plane_passes_clique_test_but_distorts() {
        let d = embedding_check(&fixture("fig2").unwrap(), EmbedSpace::Linf(2), opts(50)).unwrap();
        assert!(d.necessary_condition_holds);
        assert!(d.min_stress > 1e-3, "min stress {}", d.min_stress);
    }

    #[test]
    fn four_cycle_embeds_in_linf_plane() {
        // the unit square with side 1 has L∞ diagonals 1, so use a diamond
        let d = embedding_check(&fixture("fig1").unwrap(), EmbedSpace::Linf(2), opts(100)).unwrap();
        assert_eq!(d.min_stress, 0.0);
    }

    #[test]
    fn rejects_disconnected() {
        assert_eq!(
            embedding_check(&Graph::edgeless(2), EmbedSpace::Euclidean(2), opts(1)).unwrap_err(),
            Error::Disconnected
        );
    }
}
