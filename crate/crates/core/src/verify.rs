//! Covariance-inequality evaluators and Monte Carlo diagnostics for the
//! law of large numbers and the central limit theorem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dgp::{self, DgpKind, LinearMap, LinearModelSpec};
use crate::error::{Error, Result};
use crate::graph::{self, Graph};
use crate::kernels::{self, KernelFamily, KernelSpec};
use crate::rng;

/// Kolmogorov 95% critical value numerator: `D > 1.358/√N` rejects.
pub const KS_95: f64 = 1.358;

/// Inputs of the general covariance inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovBoundInputs {
    pub mu_xi_p: f64,
    pub mu_zeta_q: f64,
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    pub psi_bar: f64,
    pub a: usize,
    pub b: usize,
    pub v: usize,
}

impl CovBoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.q > 1.0 && 1.0 / self.p + 1.0 / self.q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need p, q > 1 and 1/p + 1/q < 1, got p = {}, q = {}",
                self.p, self.q
            )));
        }
        let norms = [self.mu_xi_p, self.mu_zeta_q, self.theta, self.psi_bar];
        if norms.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidParameter(
                "moment norms, theta and psi must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    fn theta_split(&self) -> (f64, f64) {
        let exponent = 1.0 - 1.0 / self.p - 1.0 / self.q;
        (
            self.theta.max(1.0),
            crate::netstats::pow0(self.theta.min(1.0), exponent),
        )
    }
}

/// `(θ̄ ψ̄ + 16 μ_ξ μ_ζ) θ̲^{1−1/p−1/q}` with `θ̄ = θ ∨ 1`, `θ̲ = θ ∧ 1`.
pub fn cov_bound_a1(inputs: &CovBoundInputs) -> Result<f64> {
    inputs.validate()?;
    let (upper, lower) = inputs.theta_split();
    if lower == 0.0 {
        return Ok(0.0);
    }
    Ok((upper * inputs.psi_bar + 16.0 * inputs.mu_xi_p * inputs.mu_zeta_q) * lower)
}

/// Moment inputs of the product-function bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductBoundInputs {
    pub base: CovBoundInputs,
    pub pi1: f64,
    pub pi2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub c: f64,
}

/// `2 θ̄ (C+16) ab (π₁+γ̃₁)(π₂+γ̃₂) θ̲^{1−1/p−1/q}`.
pub fn cov_bound_product(inputs: &ProductBoundInputs) -> Result<f64> {
    inputs.base.validate()?;
    let terms = [
        inputs.pi1,
        inputs.pi2,
        inputs.gamma1,
        inputs.gamma2,
        inputs.c,
    ];
    if terms.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidParameter(
            "product moments and C must be finite and nonnegative".into(),
        ));
    }
    let (upper, lower) = inputs.base.theta_split();
    if lower == 0.0 {
        return Ok(0.0);
    }
    let ab = (inputs.base.a * inputs.base.b) as f64;
    Ok(2.0
        * upper
        * (inputs.c + 16.0)
        * ab
        * (inputs.pi1 + inputs.gamma1)
        * (inputs.pi2 + inputs.gamma2)
        * lower)
}

/// `(E|Z|^r)^{1/r}` for a standard normal `Z`.
pub fn normal_abs_moment_norm(r: f64) -> f64 {
    let ln = (r / 2.0) * 2f64.ln() + statrs::function::gamma::ln_gamma((r + 1.0) / 2.0)
        - 0.5 * std::f64::consts::PI.ln();
    (ln / r).exp()
}

/// Monte Carlo summaries of sample means and normalised sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitDiagnostics {
    pub n: usize,
    pub reps: usize,
    /// `E|n⁻¹ Σ (Y_i − E Y_i)|`.
    pub l1_deviation: f64,
    pub l1_se: f64,
    /// Same for `tanh(Y_i)`.
    pub l1_tanh: f64,
    pub l1_tanh_se: f64,
    /// `sup_t |F_N(t) − Φ(t)|` of `S_n/σ_n`.
    pub ks_statistic: Option<f64>,
    pub ks_critical: Option<f64>,
    /// Mean of `Var(S_n/√n)` across replications.
    pub sigma_n2: f64,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Exact one-sample Kolmogorov–Smirnov distance to the standard normal.
pub fn ks_normal(values: &[f64]) -> f64 {
    let mut z: Vec<f64> = values.to_vec();
    z.sort_by(f64::total_cmp);
    let phi = Normal::standard();
    let n = z.len() as f64;
    z.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = phi.cdf(x);
            (((i + 1) as f64 / n) - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// `E|Ȳ|` and `E|mean tanh(Y)|` for a mean-zero symmetric process on `g`.
pub fn lln_diagnostic(
    g: &Graph,
    dgp: &DgpKind,
    reps: usize,
    seed: u64,
) -> Result<LimitDiagnostics> {
    if reps < 100 {
        return Err(Error::InvalidParameter(format!(
            "lln diagnostic needs at least 100 reps, got {reps}"
        )));
    }
    let map = dgp.map(g)?;
    let n = g.node_count();
    let rows: Vec<(f64, f64)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut stream = rng::stream(seed, 0, r as u64);
            let y = map.apply(&dgp::draw_shocks(n, &mut stream));
            let mean = y.iter().sum::<f64>() / n as f64;
            let tanh = y.iter().map(|x| x.tanh()).sum::<f64>() / n as f64;
            (mean.abs(), tanh.abs())
        })
        .collect();
    let (l1, l1_se) = mean_se(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let (lt, lt_se) = mean_se(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    Ok(LimitDiagnostics {
        n,
        reps,
        l1_deviation: l1,
        l1_se,
        l1_tanh: lt,
        l1_tanh_se: lt_se,
        ks_statistic: None,
        ks_critical: None,
        sigma_n2: map.variance_of_mean_sum(),
    })
}

/// Where the network of each replication comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSource {
    Fixed(Graph),
    /// A fresh draw from the formation model per replication.
    Formation {
        n: usize,
        lambda: f64,
    },
}

/// KS distance of `S_n/σ_n` to `Φ`, with `σ_n` exact given each network.
pub fn clt_diagnostic(
    source: &NetworkSource,
    dgp: &DgpKind,
    reps: usize,
    seed: u64,
) -> Result<LimitDiagnostics> {
    if reps == 0 {
        return Err(Error::InvalidParameter(
            "clt diagnostic needs at least one replication".into(),
        ));
    }
    let fixed = match source {
        NetworkSource::Fixed(g) => {
            let map = dgp.map(g)?;
            let var = map.variance_of_mean_sum();
            Some((g.node_count(), map, var))
        }
        NetworkSource::Formation { .. } => None,
    };
    let rows: Vec<Result<(f64, f64, f64, f64)>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut stream = rng::stream(seed, 1, r as u64);
            let (n, y, var) = match (&fixed, source) {
                (Some((n, map, var)), _) => {
                    (*n, map.apply(&dgp::draw_shocks(*n, &mut stream)), *var)
                }
                (None, NetworkSource::Formation { n, lambda }) => {
                    let net = dgp::form_network_with(*n, *lambda, &mut stream)?;
                    let eps = dgp::draw_shocks(*n, &mut stream);
                    match dgp {
                        DgpKind::LinearModel(spec) => {
                            let (y, var) = dgp::linear_outcomes(&net.graph, spec, &eps);
                            (*n, y, var)
                        }
                        other => {
                            let map = other.map(&net.graph)?;
                            (*n, map.apply(&eps), map.variance_of_mean_sum())
                        }
                    }
                }
                (None, NetworkSource::Fixed(_)) => unreachable!(),
            };
            if !(var > 0.0) {
                return Err(Error::ZeroVariance);
            }
            let sum: f64 = y.iter().sum();
            let mean = sum / n as f64;
            let tanh = y.iter().map(|x| x.tanh()).sum::<f64>() / n as f64;
            Ok((sum / (n as f64 * var).sqrt(), mean.abs(), tanh.abs(), var))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let z: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (l1, l1_se) = mean_se(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let (lt, lt_se) = mean_se(&rows.iter().map(|r| r.2).collect::<Vec<_>>());
    let n = match source {
        NetworkSource::Fixed(g) => g.node_count(),
        NetworkSource::Formation { n, .. } => *n,
    };
    Ok(LimitDiagnostics {
        n,
        reps,
        l1_deviation: l1,
        l1_se,
        l1_tanh: lt,
        l1_tanh_se: lt_se,
        ks_statistic: Some(ks_normal(&z)),
        ks_critical: Some(KS_95 / (reps as f64).sqrt()),
        sigma_n2: rows.iter().map(|r| r.3).sum::<f64>() / reps as f64,
    })
}

/// Sample covariance of paired draws with a delta-method standard error.
fn cov_with_se(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let (mean, se) = mean_se(&prods);
    (mean * n / (n - 1.0), se)
}

/// Draws `reps` outcome vectors of a linear map.
fn draw_outcomes(map: &LinearMap, reps: usize, seed: u64, cell: u64) -> Vec<Vec<f64>> {
    (0..reps)
        .into_par_iter()
        .map(|r| {
            map.apply(&dgp::draw_shocks(
                map.n(),
                &mut rng::stream(seed, cell, r as u64),
            ))
        })
        .collect()
}

/// One tested pair of node sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub s: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub cov: f64,
    pub se: f64,
    pub bound: f64,
    /// `|cov| − 3·se > bound`.
    pub violated: bool,
}

/// Result of the ψ-dependence check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiBoundReport {
    pub c: f64,
    pub checks: Vec<BoundCheck>,
    /// Smallest `C` for which every point estimate meets its bound.
    pub smallest_c: f64,
    pub passed: bool,
}

/// Checks `|Cov(f(Y_A), g(Y_B))| ≤ C·ab(‖f‖∞+Lip f)(‖g‖∞+Lip g)·θ_s` for the
/// moving-average model on a ring, with `f = tanh` of the set mean and `g`
/// the set mean clipped to `[−1, 1]`, for `|A| = |B| ∈ {1, 2}`.
pub fn psi_bound_check(
    n: usize,
    gamma: f64,
    max_s: usize,
    reps: usize,
    c: f64,
    seed: u64,
) -> Result<PsiBoundReport> {
    let g = graph::fixtures::ring(n);
    let spec = LinearModelSpec::new(gamma)?;
    let map = LinearMap::moving_average(&g, &spec);
    let draws = draw_outcomes(&map, reps, seed, 2);
    let mut checks = Vec::new();
    let mut smallest_c: f64 = 0.0;
    for s in 1..=max_s {
        let theta = dgp::theta_linear_bound(&g, &spec, s);
        for size in [1usize, 2] {
            let a: Vec<usize> = (0..size).collect();
            let b: Vec<usize> = (0..size).map(|k| size - 1 + s + k).collect();
            let set_mean = |y: &[f64], set: &[usize]| {
                set.iter().map(|&i| y[i]).sum::<f64>() / set.len() as f64
            };
            let fx: Vec<f64> = draws.iter().map(|y| set_mean(y, &a).tanh()).collect();
            let gx: Vec<f64> = draws
                .iter()
                .map(|y| set_mean(y, &b).clamp(-1.0, 1.0))
                .collect();
            let (cov, se) = cov_with_se(&fx, &gx);
            // ‖f‖∞ = Lip(f) = 1 for both test functions.
            let psi_unit = (size * size) as f64 * 2.0 * 2.0;
            let bound = c * psi_unit * theta;
            if theta > 0.0 {
                smallest_c = smallest_c.max(cov.abs() / (psi_unit * theta));
            } else if cov.abs() > 0.0 {
                smallest_c = f64::INFINITY;
            }
            checks.push(BoundCheck {
                s,
                a,
                b,
                cov,
                se,
                bound,
                violated: cov.abs() - 3.0 * se > bound,
            });
        }
    }
    let passed = checks.iter().all(|c| !c.violated);
    Ok(PsiBoundReport {
        c,
        checks,
        smallest_c,
        passed,
    })
}

/// Result of the product-function covariance check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductBoundReport {
    pub checks: Vec<BoundCheck>,
    /// Exact Gaussian covariances of the tested pairs.
    pub exact: Vec<f64>,
    pub passed: bool,
}

/// Checks the product bound with `C = c` on `ring(n)` under the
/// moving-average model: `ξ = Y_i`, `ζ = Y_j Y_k` and `ξ = Y_i Y_l`,
/// `ζ = Y_j Y_k`, with `L^8` norms on every factor.
pub fn product_bound_check(
    n: usize,
    gamma: f64,
    reps: usize,
    c: f64,
    seed: u64,
) -> Result<ProductBoundReport> {
    let g = graph::fixtures::ring(n);
    let spec = LinearModelSpec::new(gamma)?;
    let map = LinearMap::moving_average(&g, &spec);
    let cov = map.covariance();
    let draws = draw_outcomes(&map, reps, seed, 3);
    let sd = |i: usize| cov[(i, i)].sqrt();
    let norm = |i: usize, r: f64| sd(i) * normal_abs_moment_norm(r);
    let mut checks = Vec::new();
    let mut exact = Vec::new();
    for s in 1..=4usize {
        let theta = dgp::theta_linear_bound(&g, &spec, s);
        for (a, b) in [
            (vec![0usize], vec![s, s + 1]),
            (vec![0usize, n - 1], vec![s, s + 1]),
        ] {
            let (na, nb) = (a.len(), b.len());
            // Each factor in L^8: p = 8/|A|, q = 8/|B|.
            let p = 8.0 / na as f64;
            let q = 8.0 / nb as f64;
            let pi1: f64 = a.iter().map(|&i| norm(i, 8.0)).product();
            let pi2: f64 = b.iter().map(|&i| norm(i, 8.0)).product();
            let power_norm = |i: usize, k: usize, r: f64| {
                if k == 0 {
                    1.0
                } else {
                    sd(i).powi(k as i32) * normal_abs_moment_norm(r * k as f64).powi(k as i32)
                }
            };
            let gamma1 = a
                .iter()
                .map(|&i| power_norm(i, na - 1, p))
                .fold(0.0, f64::max);
            let gamma2 = b
                .iter()
                .map(|&i| power_norm(i, nb - 1, q))
                .fold(0.0, f64::max);
            let base = CovBoundInputs {
                mu_xi_p: pi1,
                mu_zeta_q: pi2,
                p,
                q,
                theta,
                psi_bar: 0.0,
                a: na,
                b: nb,
                v: 1,
            };
            let bound = cov_bound_product(&ProductBoundInputs {
                base,
                pi1,
                pi2,
                gamma1,
                gamma2,
                c,
            })?;
            let xi: Vec<f64> = draws
                .iter()
                .map(|y| a.iter().map(|&i| y[i]).product())
                .collect();
            let zeta: Vec<f64> = draws
                .iter()
                .map(|y| b.iter().map(|&i| y[i]).product())
                .collect();
            let (est, se) = cov_with_se(&xi, &zeta);
            exact.push(if na == 1 {
                0.0
            } else {
                cov[(a[0], b[0])] * cov[(a[1], b[1])] + cov[(a[0], b[1])] * cov[(a[1], b[0])]
            });
            checks.push(BoundCheck {
                s,
                a,
                b,
                cov: est,
                se,
                bound,
                violated: est.abs() - 3.0 * se > bound,
            });
        }
    }
    let passed = checks.iter().all(|c| !c.violated);
    Ok(ProductBoundReport {
        checks,
        exact,
        passed,
    })
}

/// MC covariances between node pairs at distance at least `min_distance`
/// under the dependency-graph process.
pub fn dependency_far_covariances(
    g: &Graph,
    min_distance: u32,
    reps: usize,
    seed: u64,
) -> Vec<BoundCheck> {
    let map = LinearMap::dependency(g);
    let draws = draw_outcomes(&map, reps, seed, 4);
    let mut bfs = graph::Bfs::new(g.node_count());
    let mut out = Vec::new();
    for i in 0..g.node_count() {
        bfs.run(g, i, None);
        for j in i + 1..g.node_count() {
            let d = bfs.distance(j);
            if d.get().is_some_and(|d| d < min_distance) {
                continue;
            }
            let x: Vec<f64> = draws.iter().map(|y| y[i]).collect();
            let y: Vec<f64> = draws.iter().map(|y| y[j]).collect();
            let (cov, se) = cov_with_se(&x, &y);
            out.push(BoundCheck {
                s: d.get().map_or(usize::MAX, |d| d as usize),
                a: vec![i],
                b: vec![j],
                cov,
                se,
                bound: 0.0,
                violated: cov.abs() > 3.0 * se,
            });
        }
    }
    out
}

/// One line of the verification ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub property: String,
    pub passed: bool,
    pub detail: serde_json::Value,
}

/// Runs the verification suite; `scale` multiplies replication counts.
pub fn run_ledger(seed: u64, scale: f64) -> Result<Vec<LedgerEntry>> {
    let reps = |base: usize| ((base as f64 * scale).round() as usize).max(100);
    let mut out = Vec::new();
    let mut push = |property: &str, passed: bool, detail: serde_json::Value| {
        out.push(LedgerEntry {
            property: property.to_string(),
            passed,
            detail,
        });
    };

    let a1 = cov_bound_a1(&CovBoundInputs {
        mu_xi_p: 1.0,
        mu_zeta_q: 1.0,
        p: 8.0,
        q: 8.0,
        theta: 0.25,
        psi_bar: 1.0,
        a: 1,
        b: 1,
        v: 1,
    })?;
    push(
        "cov_bound_a1_plugin",
        (a1 - 17.0 * 0.25f64.powf(0.75)).abs() < 1e-12,
        serde_json::json!({ "value": a1 }),
    );

    let psi = psi_bound_check(60, 0.5, 6, reps(20_000), 1.0, seed)?;
    push("psi_bound_ring60", psi.passed, to_json(&psi));

    let prod = product_bound_check(30, 0.4, reps(20_000), 1.0, seed)?;
    push("product_bound_ring30", prod.passed, to_json(&prod));

    let far = dependency_far_covariances(&graph::fixtures::ring(12), 3, reps(5_000), seed);
    let bad = far.iter().filter(|c| c.violated).count();
    // About 0.3% of null pairs exceed 3 SE by chance.
    push(
        "dependency_graph_far_pairs_uncorrelated",
        (bad as f64) <= 3.0 + 0.01 * far.len() as f64,
        serde_json::json!({ "pairs": far.len(), "exceeding_3se": bad }),
    );

    let iid = DgpKind::LinearModel(LinearModelSpec::new(0.0)?);
    let clt = clt_diagnostic(
        &NetworkSource::Fixed(graph::fixtures::ring(200)),
        &iid,
        reps(2_000),
        seed,
    )?;
    let ks = clt.ks_statistic.unwrap_or(f64::NAN);
    push(
        "clt_iid_ks",
        ks < clt.ks_critical.unwrap_or(0.0),
        to_json(&clt),
    );

    let hub = lln_diagnostic(
        &graph::fixtures::star(400),
        &DgpKind::HubShock { hub: 0 },
        reps(1_000),
        seed,
    )?;
    push(
        "lln_common_shock_does_not_vanish",
        hub.l1_deviation > 0.5,
        to_json(&hub),
    );

    let parzen = kernels::kernel_regularity(KernelFamily::Parzen, 1.0, 400)?;
    let bartlett = kernels::kernel_regularity(KernelFamily::Bartlett, 0.5, 400)?;
    push(
        "kernel_regularity",
        !parzen.violation && bartlett.violation,
        serde_json::json!({ "parzen": parzen, "bartlett": bartlett }),
    );

    let spec = KernelSpec::new(KernelFamily::Bartlett, 3.0)?;
    let base = kernels::psd_check(
        &kernels::weight_matrix(&graph::fixtures::ring(8), &spec)?,
        None,
    )?;
    let chord = kernels::chord_search(&graph::fixtures::ring(8), &spec)?;
    push(
        "ring8_bartlett_psd_and_chord_indefinite",
        base.psd && chord.is_some_and(|c| !c.psd),
        serde_json::json!({ "ring": base, "chord": chord }),
    );
    Ok(out)
}

fn to_json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).unwrap_or(serde_json::Value::Null)
}
