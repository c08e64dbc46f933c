//! Network HAC variance estimators.
//!
//! For a sample `Y_1..Y_n` in `R^v` laid on a graph, the lag-`s` covariance
//! is `Ω(s) = n⁻¹ Σ_i Σ_{j ∈ N^∂(i;s)} Z_i Z_jᵀ`, where `Z` is `Y` centred
//! either at a known mean (`Ṽ`) or at the sample mean (`V̂`). The estimator
//! is `Σ_s ω_n(s) Ω(s)` over `s = 0..min(⌊b⌋, diameter)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dgp::LinearModelSpec;
use crate::error::{Error, Result};
use crate::graph::{Bfs, Graph};
use crate::kernels::{psd_check, KernelSpec};

/// `n × v` observations, row-major, with an optional known mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    n: usize,
    v: usize,
    data: Vec<f64>,
    known_mean: Option<Vec<f64>>,
}

impl Sample {
    pub fn new(n: usize, v: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "a sample needs at least 2 rows, got {n}"
            )));
        }
        if v == 0 || data.len() != n * v {
            return Err(Error::InvalidParameter(format!(
                "expected {n}x{v} values, got {}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("sample"));
        }
        Ok(Sample {
            n,
            v,
            data,
            known_mean: None,
        })
    }

    /// One-dimensional sample.
    pub fn scalar(y: Vec<f64>) -> Result<Self> {
        Sample::new(y.len(), 1, y)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let v = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != v) {
            return Err(Error::InvalidParameter(
                "rows have different lengths".into(),
            ));
        }
        Sample::new(rows.len(), v, rows.concat())
    }

    pub fn with_known_mean(mut self, mean: Vec<f64>) -> Result<Self> {
        if mean.len() != self.v {
            return Err(Error::InvalidParameter(format!(
                "mean has length {}, expected {}",
                mean.len(),
                self.v
            )));
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("known mean"));
        }
        self.known_mean = Some(mean);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.v
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.v..(i + 1) * self.v]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.v + c]).collect()
    }

    pub fn known_mean(&self) -> Option<&[f64]> {
        self.known_mean.as_deref()
    }

    /// `Ȳ = S_n / n`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.v];
        for row in self.data.chunks_exact(self.v) {
            for (a, x) in m.iter_mut().zip(row) {
                *a += x;
            }
        }
        m.iter_mut().for_each(|a| *a /= self.n as f64);
        m
    }

    /// Rows and columns permuted together: row `i` moves to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Sample> {
        if perm.len() != self.n {
            return Err(Error::InvalidParameter(
                "permutation length differs from sample size".into(),
            ));
        }
        let mut data = vec![0.0; self.data.len()];
        for (i, &p) in perm.iter().enumerate() {
            data[p * self.v..(p + 1) * self.v].copy_from_slice(self.row(i));
        }
        Ok(Sample {
            n: self.n,
            v: self.v,
            data,
            known_mean: self.known_mean.clone(),
        })
    }
}

/// Centring used by the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanMode {
    /// Centre at the known mean (`Ṽ`).
    Known,
    /// Centre at the sample mean (`V̂`).
    Unknown,
}

fn centred(sample: &Sample, mode: MeanMode) -> Result<Vec<f64>> {
    let mean = match mode {
        MeanMode::Known => sample.known_mean.clone().ok_or(Error::MissingKnownMean)?,
        MeanMode::Unknown => sample.mean(),
    };
    let mut z = sample.data.clone();
    for row in z.chunks_exact_mut(sample.v) {
        for (x, m) in row.iter_mut().zip(&mean) {
            *x -= m;
        }
    }
    Ok(z)
}

fn check_sizes(g: &Graph, sample: &Sample) -> Result<()> {
    if g.node_count() != sample.n {
        return Err(Error::InvalidParameter(format!(
            "graph has {} nodes but sample has {} rows",
            g.node_count(),
            sample.n
        )));
    }
    Ok(())
}

/// `Ω(0), …, Ω(L)` for `L = min(max_lag, largest reached distance)`.
pub fn lag_covariances(
    g: &Graph,
    sample: &Sample,
    mode: MeanMode,
    max_lag: usize,
) -> Result<Vec<DMatrix<f64>>> {
    check_sizes(g, sample)?;
    let z = centred(sample, mode)?;
    let (n, v) = (sample.n, sample.v);
    let cap = u32::try_from(max_lag).unwrap_or(u32::MAX - 1);
    let mut bfs = Bfs::new(n);
    let mut omega: Vec<f64> = Vec::new();
    let mut shell_sum = Vec::new();
    for i in 0..n {
        let layers = bfs.run(g, i, Some(cap));
        let depth = layers.depth();
        if omega.len() < depth * v * v {
            omega.resize(depth * v * v, 0.0);
        }
        shell_sum.clear();
        shell_sum.resize(depth * v, 0.0);
        for (s, shell) in layers.shells() {
            let acc = &mut shell_sum[s * v..(s + 1) * v];
            for &j in shell {
                let zj = &z[j as usize * v..(j as usize + 1) * v];
                for (a, x) in acc.iter_mut().zip(zj) {
                    *a += x;
                }
            }
        }
        let zi = &z[i * v..(i + 1) * v];
        for s in 0..depth {
            let acc = &shell_sum[s * v..(s + 1) * v];
            let block = &mut omega[s * v * v..(s + 1) * v * v];
            for a in 0..v {
                for b in 0..v {
                    block[a * v + b] += zi[a] * acc[b];
                }
            }
        }
    }
    let scale = 1.0 / n as f64;
    Ok(omega
        .chunks_exact(v * v)
        .map(|blk| DMatrix::from_row_slice(v, v, blk) * scale)
        .collect())
}

fn omega_at(g: &Graph, sample: &Sample, mode: MeanMode, s: usize) -> Result<DMatrix<f64>> {
    let lags = lag_covariances(g, sample, mode, s)?;
    Ok(lags
        .get(s)
        .cloned()
        .unwrap_or_else(|| DMatrix::zeros(sample.v, sample.v)))
}

/// `Ω̃(s)`, centred at the known mean.
pub fn omega_tilde(g: &Graph, sample: &Sample, s: usize) -> Result<DMatrix<f64>> {
    omega_at(g, sample, MeanMode::Known, s)
}

/// `Ω̂(s)`, centred at the sample mean.
pub fn omega_hat(g: &Graph, sample: &Sample, s: usize) -> Result<DMatrix<f64>> {
    omega_at(g, sample, MeanMode::Unknown, s)
}

/// A HAC estimate with its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct HacResult {
    /// `(V + Vᵀ)/2` of `Σ_s ω_n(s) Ω(s)`.
    pub v: DMatrix<f64>,
    /// `Ω(s)` for `s = 0..=L`.
    pub lag_covariances: Vec<DMatrix<f64>>,
    /// `ω_n(s)` for `s = 0..=L`.
    pub weights: Vec<f64>,
    pub bandwidth: f64,
    pub mode: MeanMode,
    pub min_eigenvalue: f64,
    pub psd: bool,
}

impl HacResult {
    /// `V[0][0]`.
    pub fn scalar(&self) -> f64 {
        self.v[(0, 0)]
    }

    pub fn lag_traces(&self) -> Vec<f64> {
        self.lag_covariances.iter().map(|m| m.trace()).collect()
    }

    pub fn v_rows(&self) -> Vec<Vec<f64>> {
        self.v
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

/// `Σ_s ω_n(s) Ω(s)` on `g` with the given centring.
pub fn hac(g: &Graph, sample: &Sample, spec: &KernelSpec, mode: MeanMode) -> Result<HacResult> {
    let lags = lag_covariances(g, sample, mode, spec.max_lag())?;
    let weights: Vec<f64> = (0..lags.len()).map(|s| spec.weight(s)).collect();
    let mut v = DMatrix::zeros(sample.v, sample.v);
    for (w, omega) in weights.iter().zip(&lags) {
        v += omega * *w;
    }
    let v = (&v + v.transpose()) * 0.5;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("HAC estimate"));
    }
    let check = psd_check(&v, None)?;
    Ok(HacResult {
        v,
        lag_covariances: lags,
        weights,
        bandwidth: spec.bandwidth,
        mode,
        min_eigenvalue: check.min_eigenvalue,
        psd: check.psd,
    })
}

/// `Ṽ_n`.
pub fn hac_known_mean(g: &Graph, sample: &Sample, spec: &KernelSpec) -> Result<HacResult> {
    hac(g, sample, spec, MeanMode::Known)
}

/// `V̂_n`.
pub fn hac_unknown_mean(g: &Graph, sample: &Sample, spec: &KernelSpec) -> Result<HacResult> {
    hac(g, sample, spec, MeanMode::Unknown)
}

/// The estimator computed with distances of an observed subgraph; pairs
/// disconnected in `observed` drop out.
pub fn hac_partial(
    observed: &Graph,
    sample: &Sample,
    spec: &KernelSpec,
    mode: MeanMode,
) -> Result<HacResult> {
    hac(observed, sample, spec, mode)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// `center ± z_{(1+level)/2} √(variance/n)`.
pub fn interval(center: f64, variance: f64, n: usize, level: f64) -> Result<ConfidenceInterval> {
    if !(0.0..1.0).contains(&level) {
        return Err(Error::InvalidParameter(format!(
            "level must lie in [0,1), got {level}"
        )));
    }
    if !variance.is_finite() || !center.is_finite() {
        return Err(Error::NonFinite("interval inputs"));
    }
    if variance < 0.0 {
        return Err(Error::IndefiniteVariance(variance));
    }
    let z = if level == 0.0 {
        0.0
    } else {
        normal_quantile(0.5 + level / 2.0)
    };
    let half_width = z * (variance / n as f64).sqrt();
    Ok(ConfidenceInterval {
        center,
        half_width,
        lower: center - half_width,
        upper: center + half_width,
        level,
    })
}

/// Interval for the mean of a scalar sample with long-run variance `v`.
pub fn confidence_interval(sample: &Sample, v: f64, level: f64) -> Result<ConfidenceInterval> {
    if sample.v != 1 {
        return Err(Error::InvalidParameter(
            "confidence intervals need a scalar sample".into(),
        ));
    }
    interval(sample.mean()[0], v, sample.n, level)
}

/// `(Ȳ − μ₀) / √(V/n)`.
pub fn t_statistic(mean: f64, variance: f64, n: usize, null: f64) -> Result<f64> {
    if variance < 0.0 {
        return Err(Error::IndefiniteVariance(variance));
    }
    if variance == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((mean - null) / (variance / n as f64).sqrt())
}

/// `Var(S_n/√n)` for the moving-average model with independent unit
/// shocks: `n⁻¹ ‖Wᵀ1‖²` with `W_ij = γ^{d(i,j)} / |N^∂(i;d(i,j))|`.
pub fn exact_variance_oracle(g: &Graph, spec: &LinearModelSpec) -> f64 {
    let n = g.node_count();
    let cap = spec
        .lag_cap()
        .map(|l| u32::try_from(l).unwrap_or(u32::MAX - 1));
    let mut col = vec![0.0; n];
    let mut bfs = Bfs::new(n);
    for i in 0..n {
        for (s, shell) in bfs.run(g, i, cap).shells() {
            let w = spec.lag_weight(s) / shell.len() as f64;
            for &j in shell {
                col[j as usize] += w;
            }
        }
    }
    col.iter().map(|c| c * c).sum::<f64>() / n as f64
}
