//! Random network formation and dependent-process generators.
//!
//! Every process here is a fixed linear map of i.i.d. standard normal
//! shocks, `Y = Wε`, which makes exact second moments available for
//! checking estimators.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Bfs, Graph};
use crate::hac::Sample;
use crate::netstats::{NetworkSummary, SummaryAccumulator, ThetaSequence};

/// Largest graph for dense `θ` evaluation.
pub const DENSE_THETA_LIMIT: usize = 200;

/// Moving-average weights below this are dropped under [`Truncation::Auto`].
pub const AUTO_TRUNCATION: f64 = 1e-12;

/// `E|ε|` for a standard normal shock.
pub fn normal_abs_mean() -> f64 {
    (2.0 / std::f64::consts::PI).sqrt()
}

/// Positions uniform on the unit square; `{i,j}` is an edge with
/// probability `exp(−‖X_i − X_j‖ √(2πn/λ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormationSpec {
    pub n: usize,
    pub lambda: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub graph: Graph,
    pub positions: Vec<[f64; 2]>,
    /// `Σ_{j≠i} p_ij`.
    pub expected_degrees: Vec<f64>,
    /// `max_i Σ_{j≠i} p_ij`.
    pub pi_n: f64,
}

pub fn form_network(spec: &FormationSpec) -> Result<Network> {
    form_network_with(spec.n, spec.lambda, &mut crate::rng::from_seed(spec.seed))
}

/// Draws positions first, then one uniform per pair `i < j` in
/// lexicographic order.
pub fn form_network_with<R: Rng + ?Sized>(n: usize, lambda: f64, rng: &mut R) -> Result<Network> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "formation needs n >= 2, got {n}"
        )));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let positions: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    let scale = (2.0 * std::f64::consts::PI * n as f64 / lambda).sqrt();
    let mut expected = vec![0.0; n];
    let mut edges = Vec::new();
    for i in 0..n {
        let [xi, yi] = positions[i];
        for j in i + 1..n {
            let [xj, yj] = positions[j];
            let p = (-(xi - xj).hypot(yi - yj) * scale).exp();
            expected[i] += p;
            expected[j] += p;
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let pi_n = expected.iter().copied().fold(0.0, f64::max);
    Ok(Network {
        graph: Graph::new(n, edges)?,
        positions,
        expected_degrees: expected,
        pi_n,
    })
}

/// Lag range of the moving-average model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Keep lags with `γ^m ≥ 1e−12`.
    Auto,
    MaxLag(usize),
    /// All lags up to the diameter.
    Exact,
}

/// `Y_i = Σ_m γ^m |N^∂(i;m)|⁻¹ Σ_{j ∈ N^∂(i;m)} ε_j`, empty shells skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModelSpec {
    pub gamma: f64,
    pub truncation: Truncation,
}

impl LinearModelSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        Self::with_truncation(gamma, Truncation::Auto)
    }

    pub fn with_truncation(gamma: f64, truncation: Truncation) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in [0,1), got {gamma}"
            )));
        }
        Ok(LinearModelSpec { gamma, truncation })
    }

    /// Largest lag carrying weight; `None` means unbounded.
    pub fn lag_cap(&self) -> Option<usize> {
        match self.truncation {
            Truncation::Exact => None,
            Truncation::MaxLag(m) => Some(m),
            Truncation::Auto => {
                let mut m = 0;
                while self.gamma.powi(m as i32 + 1) >= AUTO_TRUNCATION {
                    m += 1;
                }
                Some(m)
            }
        }
    }

    /// `γ^s`, with `0^0 = 1`.
    pub fn lag_weight(&self, s: usize) -> f64 {
        self.gamma.powi(s as i32)
    }
}

fn cap32(cap: Option<usize>) -> Option<u32> {
    cap.map(|c| u32::try_from(c).unwrap_or(u32::MAX - 1))
}

/// Observed subnetwork: each edge is lost independently with probability
/// `rho`. One uniform per edge in canonical order.
pub fn drop_edges<R: Rng + ?Sized>(g: &Graph, rho: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!(
            "missing probability must lie in [0, 1], got {rho}"
        )));
    }
    Ok(g.filter_edges(|_, _| rng.random::<f64>() >= rho))
}

/// `n` i.i.d. standard normal draws.
pub fn draw_shocks<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Applies the moving-average map to given shocks.
pub fn linear_map(g: &Graph, spec: &LinearModelSpec, eps: &[f64]) -> Vec<f64> {
    let n = g.node_count();
    let mut bfs = Bfs::new(n);
    (0..n)
        .map(|i| {
            bfs.run(g, i, cap32(spec.lag_cap()))
                .shells()
                .map(|(s, shell)| {
                    spec.lag_weight(s) * shell.iter().map(|&j| eps[j as usize]).sum::<f64>()
                        / shell.len() as f64
                })
                .sum()
        })
        .collect()
}

pub fn simulate_linear<R: Rng + ?Sized>(
    g: &Graph,
    spec: &LinearModelSpec,
    rng: &mut R,
) -> Result<Sample> {
    let eps = draw_shocks(g.node_count(), rng);
    Sample::scalar(linear_map(g, spec, &eps))
}

/// Outputs of one uncapped BFS sweep over a realised network.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPass {
    pub y: Vec<f64>,
    /// `Var(S_n/√n)` given the network.
    pub variance: f64,
    pub summary: NetworkSummary,
}

/// Simulated outcomes, their exact long-run variance and the network
/// summary from a single BFS sweep.
pub fn linear_model_pass(g: &Graph, spec: &LinearModelSpec, eps: &[f64]) -> LinearPass {
    let n = g.node_count();
    let cap = spec.lag_cap().unwrap_or(usize::MAX);
    let mut bfs = Bfs::new(n);
    let mut acc = SummaryAccumulator::new();
    let mut col = vec![0.0; n];
    let mut y = vec![0.0; n];
    for i in 0..n {
        let layers = bfs.run(g, i, None);
        acc.observe(&layers);
        let mut yi = 0.0;
        for (s, shell) in layers.shells().take_while(|&(s, _)| s <= cap) {
            let w = spec.lag_weight(s) / shell.len() as f64;
            let mut sum = 0.0;
            for &j in shell {
                sum += eps[j as usize];
                col[j as usize] += w;
            }
            yi += w * sum;
        }
        y[i] = yi;
    }
    let variance = col.iter().map(|c| c * c).sum::<f64>() / n as f64;
    LinearPass {
        y,
        variance,
        summary: acc.finish(g),
    }
}

/// Outcomes and `Var(S_n/√n)` with searches capped at the model's lag.
pub fn linear_outcomes(g: &Graph, spec: &LinearModelSpec, eps: &[f64]) -> (Vec<f64>, f64) {
    let n = g.node_count();
    let mut bfs = Bfs::new(n);
    let mut col = vec![0.0; n];
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut yi = 0.0;
        for (s, shell) in bfs.run(g, i, cap32(spec.lag_cap())).shells() {
            let w = spec.lag_weight(s) / shell.len() as f64;
            let mut sum = 0.0;
            for &j in shell {
                sum += eps[j as usize];
                col[j as usize] += w;
            }
            yi += w * sum;
        }
        y[i] = yi;
    }
    (y, col.iter().map(|c| c * c).sum::<f64>() / n as f64)
}

/// `max_i |N^∂(i;m)|` for `m = 0..=diameter`.
pub fn max_shell_sizes(g: &Graph) -> Vec<usize> {
    let mut bfs = Bfs::new(g.node_count());
    let mut out: Vec<usize> = Vec::new();
    for i in 0..g.node_count() {
        for (s, shell) in bfs.run(g, i, None).shells() {
            if out.len() <= s {
                out.resize(s + 1, 0);
            }
            out[s] = out[s].max(shell.len());
        }
    }
    out
}

/// `θ` bound of the moving-average model with independent normal shocks.
pub fn theta_linear(g: &Graph, spec: &LinearModelSpec) -> ThetaSequence {
    let mut max_shell = max_shell_sizes(g);
    if let Some(cap) = spec.lag_cap() {
        max_shell.truncate(cap + 1);
    }
    ThetaSequence::LinearModel {
        gamma: spec.gamma,
        max_shell,
        alpha_n: normal_abs_mean(),
    }
}

/// `2 E|ε| Σ_{m>s} γ^m max_i |N^∂(i;m)|` (no `s = 0` convention applied).
pub fn theta_linear_bound(g: &Graph, spec: &LinearModelSpec, s: usize) -> f64 {
    let cap = spec.lag_cap().unwrap_or(usize::MAX);
    2.0 * normal_abs_mean()
        * max_shell_sizes(g)
            .iter()
            .enumerate()
            .skip(s + 1)
            .take_while(|&(m, _)| m <= cap)
            .map(|(m, &c)| spec.lag_weight(m) * c as f64)
            .sum::<f64>()
}

/// Sparse row representation of `Y = Wε`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    n: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

impl LinearMap {
    pub fn new(n: usize, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        if rows.len() != n || rows.iter().flatten().any(|&(j, _)| j as usize >= n) {
            return Err(Error::InvalidParameter(
                "linear map rows do not match the node count".into(),
            ));
        }
        Ok(LinearMap { n, rows })
    }

    /// Moving-average model weights.
    pub fn moving_average(g: &Graph, spec: &LinearModelSpec) -> Self {
        Self::shell_profile(g, |s| {
            (s <= spec.lag_cap().unwrap_or(usize::MAX)).then(|| spec.lag_weight(s))
        })
    }

    /// Row `i` puts `coef(s)/|N^∂(i;s)|` on each node of shell `s`; the
    /// profile ends at the first `None`.
    pub fn shell_profile<F: Fn(usize) -> Option<f64>>(g: &Graph, coef: F) -> Self {
        let n = g.node_count();
        let mut bfs = Bfs::new(n);
        let rows = (0..n)
            .map(|i| {
                let mut row = Vec::new();
                for (s, shell) in bfs.run(g, i, None).shells() {
                    let Some(c) = coef(s) else { break };
                    let w = c / shell.len() as f64;
                    row.extend(shell.iter().map(|&j| (j, w)));
                }
                row
            })
            .collect();
        LinearMap { n, rows }
    }

    /// `Y_i = (ε_i + Σ_{j~i} ε_j) / √(1 + deg i)`.
    pub fn dependency(g: &Graph) -> Self {
        let rows = (0..g.node_count())
            .map(|i| {
                let w = 1.0 / ((1 + g.degree(i)) as f64).sqrt();
                std::iter::once(i as u32)
                    .chain(g.neighbors(i).iter().copied())
                    .map(|j| (j, w))
                    .collect()
            })
            .collect();
        LinearMap {
            n: g.node_count(),
            rows,
        }
    }

    /// `Y_hub = U_hub`, `Y_i = U_hub + U_i` otherwise.
    pub fn hub_shock(n: usize, hub: usize) -> Result<Self> {
        if hub >= n {
            return Err(Error::NodeOutOfRange { node: hub, n });
        }
        let rows = (0..n)
            .map(|i| {
                if i == hub {
                    vec![(hub as u32, 1.0)]
                } else {
                    vec![(hub as u32, 1.0), (i as u32, 1.0)]
                }
            })
            .collect();
        Ok(LinearMap { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn apply(&self, eps: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, w)| w * eps[j as usize]).sum())
            .collect()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, x) in r {
                w[(i, j as usize)] += x;
            }
        }
        w
    }

    /// `Cov(Y) = WWᵀ` for unit shocks.
    pub fn covariance(&self) -> DMatrix<f64> {
        let w = self.dense();
        &w * w.transpose()
    }

    /// `Wᵀ1`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut col = vec![0.0; self.n];
        for r in &self.rows {
            for &(j, w) in r {
                col[j as usize] += w;
            }
        }
        col
    }

    /// `Var(S_n/√n) = n⁻¹ ‖Wᵀ1‖²`.
    pub fn variance_of_mean_sum(&self) -> f64 {
        self.column_sums().iter().map(|c| c * c).sum::<f64>() / self.n as f64
    }
}

pub fn simulate_dependency_graph<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Result<Sample> {
    let eps = draw_shocks(g.node_count(), rng);
    Sample::scalar(LinearMap::dependency(g).apply(&eps))
}

/// Covariance bound for a linear functional of Gaussian shocks:
/// `θ_s = max_{d(k1,k2) ≥ s} Σ_{i,j} |W_{k1 i}| |W_{k2 j}| |Cov(ε_i, ε_j)|`
/// with `Cov(ε_i, ε_j) = cov_by_distance[d(i,j)]` (zero beyond the slice and
/// across components). The table ends with the value for disconnected pairs.
pub fn theta_gaussian_functional(
    g: &Graph,
    map: &LinearMap,
    cov_by_distance: &[f64],
) -> Result<ThetaSequence> {
    let n = g.node_count();
    if n > DENSE_THETA_LIMIT {
        return Err(Error::SizeLimit {
            what: "dense theta evaluation",
            n,
            limit: DENSE_THETA_LIMIT,
        });
    }
    if map.n != n {
        return Err(Error::InvalidParameter("map and graph sizes differ".into()));
    }
    let mut bfs = Bfs::new(n);
    let dist: Vec<Vec<Option<u32>>> = (0..n)
        .map(|i| {
            bfs.run(g, i, None);
            (0..n).map(|j| bfs.distance(j).get()).collect()
        })
        .collect();
    let cov = DMatrix::from_fn(n, n, |i, j| {
        dist[i][j]
            .and_then(|d| cov_by_distance.get(d as usize))
            .map_or(0.0, |c| c.abs())
    });
    let a = map.dense().abs();
    let m = &a * cov * a.transpose();
    let diameter = dist.iter().flatten().flatten().copied().max().unwrap_or(0) as usize;
    // by_dist[d] = max over pairs at exactly d; last slot for disconnected pairs.
    let mut by_dist = vec![0.0f64; diameter + 2];
    for k1 in 0..n {
        for k2 in 0..n {
            let slot = dist[k1][k2].map_or(diameter + 1, |d| d as usize);
            by_dist[slot] = by_dist[slot].max(m[(k1, k2)]);
        }
    }
    let mut values = by_dist.clone();
    for s in (0..values.len() - 1).rev() {
        values[s] = values[s].max(values[s + 1]);
    }
    values[0] = 1.0;
    Ok(ThetaSequence::Table { values })
}

/// `Z_i = c_iᵀ Y_i`; each `‖c_i‖ ≤ 1`.
pub fn project_vector_sample(sample: &Sample, coefficients: &[Vec<f64>]) -> Result<Sample> {
    if coefficients.len() != sample.n() || coefficients.iter().any(|c| c.len() != sample.dim()) {
        return Err(Error::InvalidParameter(
            "coefficients must be n vectors of length v".into(),
        ));
    }
    let mut z = Vec::with_capacity(sample.n());
    for (i, c) in coefficients.iter().enumerate() {
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::CoefficientNorm { node: i, norm });
        }
        z.push(c.iter().zip(sample.row(i)).map(|(a, b)| a * b).sum());
    }
    let out = Sample::scalar(z)?;
    match sample.known_mean() {
        Some(mean) if coefficients.windows(2).all(|w| w[0] == w[1]) => {
            let m = coefficients[0].iter().zip(mean).map(|(a, b)| a * b).sum();
            out.with_known_mean(vec![m])
        }
        _ => Ok(out),
    }
}

/// Data-generating processes with exact second moments and a `θ` bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DgpKind {
    LinearModel(LinearModelSpec),
    /// Normalised closed-neighbourhood sums; dependence radius 2.
    DependencyGraph,
    /// `Y_i = Σ_s coefficients[s] · mean of ε over N^∂(i;s)`.
    GaussianFunctional {
        coefficients: Vec<f64>,
    },
    /// A common shock at `hub` shared by every node.
    HubShock {
        hub: usize,
    },
}

impl DgpKind {
    pub fn map(&self, g: &Graph) -> Result<LinearMap> {
        Ok(match self {
            DgpKind::LinearModel(spec) => LinearMap::moving_average(g, spec),
            DgpKind::DependencyGraph => LinearMap::dependency(g),
            DgpKind::GaussianFunctional { coefficients } => {
                LinearMap::shell_profile(g, |s| coefficients.get(s).copied())
            }
            DgpKind::HubShock { hub } => LinearMap::hub_shock(g.node_count(), *hub)?,
        })
    }

    pub fn simulate<R: Rng + ?Sized>(&self, g: &Graph, rng: &mut R) -> Result<Sample> {
        let eps = draw_shocks(g.node_count(), rng);
        match self {
            DgpKind::LinearModel(spec) => Sample::scalar(linear_map(g, spec, &eps)),
            _ => Sample::scalar(self.map(g)?.apply(&eps)),
        }
    }

    /// `Var(S_n/√n)`.
    pub fn variance(&self, g: &Graph) -> Result<f64> {
        match self {
            DgpKind::LinearModel(spec) => Ok(crate::hac::exact_variance_oracle(g, spec)),
            _ => Ok(self.map(g)?.variance_of_mean_sum()),
        }
    }

    pub fn theta(&self, g: &Graph) -> Result<ThetaSequence> {
        match self {
            DgpKind::LinearModel(spec) => Ok(theta_linear(g, spec)),
            DgpKind::DependencyGraph => Ok(ThetaSequence::ZeroBeyond { s0: 3 }),
            DgpKind::HubShock { .. } => Ok(ThetaSequence::Table {
                values: vec![1.0, 1.0],
            }),
            DgpKind::GaussianFunctional { .. } => {
                theta_gaussian_functional(g, &self.map(g)?, &[1.0])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{path, ring, star};
    use crate::netstats::table1_stats;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn formation_is_deterministic_and_sane() {
        let spec = FormationSpec {
            n: 300,
            lambda: 3.0,
            seed: 5,
        };
        let a = form_network(&spec).unwrap();
        let b = form_network(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.positions.iter().flatten().all(|x| (0.0..1.0).contains(x)));
        assert!(a.pi_n >= a.expected_degrees.iter().sum::<f64>() / 300.0);
        let tiny = form_network(&FormationSpec {
            n: 200,
            lambda: 1e-9,
            seed: 1,
        })
        .unwrap();
        assert_eq!(tiny.graph.edge_count(), 0);
        assert!(form_network(&FormationSpec {
            n: 1,
            lambda: 1.0,
            seed: 1
        })
        .is_err());
        assert!(form_network(&FormationSpec {
            n: 10,
            lambda: 0.0,
            seed: 1
        })
        .is_err());
    }

    #[test]
    fn dropped_edges_form_a_subgraph() {
        let g = form_network(&FormationSpec {
            n: 200,
            lambda: 4.0,
            seed: 3,
        })
        .unwrap()
        .graph;
        let mut rng = crate::rng::from_seed(9);
        assert_eq!(drop_edges(&g, 0.0, &mut rng).unwrap(), g);
        assert_eq!(drop_edges(&g, 1.0, &mut rng).unwrap().edge_count(), 0);
        let h = drop_edges(&g, 0.3, &mut rng).unwrap();
        assert!(h.edges().all(|(i, j)| g.has_edge(i, j)));
        let kept = h.edge_count() as f64 / g.edge_count() as f64;
        assert!((kept - 0.7).abs() < 0.1, "kept fraction {kept}");
        assert!(drop_edges(&g, 1.5, &mut rng).is_err());
    }

    #[test]
    fn formation_average_degree() {
        let mut total = 0.0;
        let reps = 200;
        for r in 0..reps {
            let net = form_network_with(500, 1.0, &mut crate::rng::stream(3, 0, r)).unwrap();
            total += net.graph.average_degree();
        }
        assert!(
            (total / reps as f64 - 0.95).abs() < 0.02,
            "{}",
            total / reps as f64
        );
    }

    #[test]
    fn truncation_rule() {
        assert_eq!(LinearModelSpec::new(0.0).unwrap().lag_cap(), Some(0));
        let cap = LinearModelSpec::new(0.2).unwrap().lag_cap().unwrap();
        assert!(
            0.2f64.powi(cap as i32) >= AUTO_TRUNCATION
                && 0.2f64.powi(cap as i32 + 1) < AUTO_TRUNCATION
        );
        assert!(LinearModelSpec::new(1.0).is_err());
    }

    #[test]
    fn linear_model_examples() {
        let eps: Vec<f64> = vec![0.3, -1.1, 0.8, 2.0, -0.4];
        let iid = LinearModelSpec::new(0.0).unwrap();
        assert_eq!(linear_map(&path(5), &iid, &eps), eps);
        let half = LinearModelSpec::new(0.5).unwrap();
        assert!(linear_map(&ring(4), &half, &[1.0; 4])
            .iter()
            .all(|&y| close(y, 1.75, 1e-15)));
        let cov = LinearMap::moving_average(&ring(4), &half).covariance();
        assert!(close(cov[(0, 0)], 1.1875, 1e-15));
    }

    #[test]
    fn linear_map_matches_dense_product() {
        let g = ring(9).with_edge(0, 4).unwrap();
        let spec = LinearModelSpec::new(0.4).unwrap();
        let eps: Vec<f64> = (0..9).map(|i| (i as f64 * 0.9).cos()).collect();
        let dense =
            LinearMap::moving_average(&g, &spec).dense() * nalgebra::DVector::from_vec(eps.clone());
        for (a, b) in linear_map(&g, &spec, &eps).iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let pass = linear_model_pass(&g, &spec, &eps);
        assert_eq!(pass.y, linear_map(&g, &spec, &eps));
        assert!(close(
            pass.variance,
            crate::hac::exact_variance_oracle(&g, &spec),
            1e-14
        ));
        assert_eq!(pass.summary, table1_stats(&g));
        assert_eq!(
            linear_outcomes(&g, &spec, &eps),
            (pass.y.clone(), pass.variance)
        );
    }

    #[test]
    fn var_of_mean_sum_matches_covariance() {
        let g = star(6);
        let spec = LinearModelSpec::new(0.5).unwrap();
        let map = LinearMap::moving_average(&g, &spec);
        let total = map.covariance().sum() / 6.0;
        assert!(close(map.variance_of_mean_sum(), total, 1e-13));
        assert!(close(
            crate::hac::exact_variance_oracle(&g, &spec),
            total,
            1e-13
        ));
    }

    #[test]
    fn theta_linear_examples() {
        let spec = LinearModelSpec::new(0.5).unwrap();
        assert!((theta_linear_bound(&ring(100), &spec, 3) - 0.3989).abs() < 1e-4);
        assert!((theta_linear_bound(&star(10), &spec, 1) - 3.1915).abs() < 1e-4);
        let zero = LinearModelSpec::new(0.0).unwrap();
        assert_eq!(theta_linear_bound(&ring(10), &zero, 0), 0.0);
        assert_eq!(theta_linear(&ring(10), &zero).eval(0), 1.0);
        let bounds: Vec<f64> = (0..6)
            .map(|s| theta_linear_bound(&ring(10), &spec, s))
            .collect();
        assert!(bounds.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(theta_linear_bound(&ring(10), &spec, 5), 0.0);
    }

    #[test]
    fn theta_monotone_premise_on_rings() {
        // θ_s / s^{p/(p−4)} nonincreasing at p = 8.
        for gamma in [0.1, 0.5, 0.9] {
            let spec = LinearModelSpec::with_truncation(gamma, Truncation::Exact).unwrap();
            let g = ring(60);
            let r: Vec<f64> = (1..29)
                .map(|s| theta_linear_bound(&g, &spec, s) / (s as f64).powi(2))
                .collect();
            assert!(
                r.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)),
                "gamma {gamma}"
            );
        }
    }

    #[test]
    fn dependency_map_covariance() {
        let g = path(5);
        let cov = LinearMap::dependency(&g).covariance();
        assert!((0..5).all(|i| close(cov[(i, i)], 1.0, 1e-14)));
        assert!(cov[(0, 2)] > 0.0);
        assert_eq!(cov[(0, 3)], 0.0);
        assert_eq!(cov[(1, 4)], 0.0);
    }

    #[test]
    fn gaussian_functional_theta() {
        // Support of radius r: coefficients up to shell r.
        let g = ring(8);
        let identity = LinearMap::shell_profile(&g, |s| (s == 0).then_some(1.0));
        let th = theta_gaussian_functional(&g, &identity, &[1.0]).unwrap();
        assert!((1..6).all(|s| th.eval(s) == 0.0));

        let radius_one = LinearMap::moving_average(
            &g,
            &LinearModelSpec::with_truncation(0.5, Truncation::MaxLag(1)).unwrap(),
        );
        let th = theta_gaussian_functional(&g, &radius_one, &[1.0]).unwrap();
        assert!(th.eval(2) > 0.0);
        assert_eq!(th.eval(3), 0.0);

        let two = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let hub = LinearMap::hub_shock(4, 0).unwrap();
        let th = theta_gaussian_functional(&two, &hub, &[1.0]).unwrap();
        assert_eq!(th.eval(10), 1.0);
        assert!(
            theta_gaussian_functional(&ring(201), &LinearMap::dependency(&ring(201)), &[1.0])
                .is_err()
        );
    }

    #[test]
    fn projection() {
        let s = Sample::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let e1 = vec![vec![1.0, 0.0]; 2];
        assert_eq!(project_vector_sample(&s, &e1).unwrap().data(), &[1.0, 3.0]);
        let scalar = Sample::scalar(vec![0.5, 0.7]).unwrap();
        assert_eq!(
            project_vector_sample(&scalar, &[vec![1.0], vec![1.0]]).unwrap(),
            scalar
        );
        assert!(matches!(
            project_vector_sample(&s, &[vec![2.0, 0.0], vec![1.0, 0.0]]),
            Err(Error::CoefficientNorm { node: 0, .. })
        ));
    }

    #[test]
    fn dgp_kinds() {
        let g = star(8);
        let mut rng = crate::rng::from_seed(9);
        let kinds = [
            DgpKind::LinearModel(LinearModelSpec::new(0.3).unwrap()),
            DgpKind::DependencyGraph,
            DgpKind::GaussianFunctional {
                coefficients: vec![1.0, 0.5],
            },
            DgpKind::HubShock { hub: 0 },
        ];
        for kind in &kinds {
            let s = kind.simulate(&g, &mut rng).unwrap();
            assert_eq!(s.n(), 8);
            assert!(kind.variance(&g).unwrap() > 0.0);
            assert_eq!(kind.theta(&g).unwrap().eval(0), 1.0);
            let text = serde_json::to_string(kind).unwrap();
            assert_eq!(&serde_json::from_str::<DgpKind>(&text).unwrap(), kind);
        }
        // Hub shock: S_n/√n has variance ((n)^2 + (n−1)) / n.
        assert!(close(
            kinds[3].variance(&g).unwrap(),
            (64.0 + 7.0) / 8.0,
            1e-14
        ));
    }
}
