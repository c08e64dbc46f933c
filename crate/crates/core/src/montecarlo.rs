//! Coverage study harness.
//!
//! Each replication draws a fresh network from the formation model,
//! simulates the moving-average model on it, estimates `V̂` with the
//! logarithmic bandwidth rule and records whether the 95% interval covers
//! the true mean 0.
//!
//! Replication `r` of a cell uses the stream `(seed, key, r)`, where the key
//! depends only on `(λ, n, γ)`. Cells that differ only in kernel or
//! bandwidth constant therefore see the same networks and shocks.
//! Replications may run on any number of workers; outcomes are collected in
//! replication order and aggregated sequentially, so results do not depend
//! on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

use crate::dgp::{self, LinearModelSpec};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hac::{self, normal_quantile, MeanMode, Sample};
use crate::kernels::{BandwidthRule, KernelFamily, KernelSpec};
use crate::netstats::NetworkSummary;
use crate::rng;

/// Desk-scale caps; larger designs need `full`.
pub const DESK_MAX_REPS: usize = 1000;
pub const DESK_MAX_N: usize = 1000;

/// Tag separating edge-deletion streams from draw streams.
const MISSING_STREAM: u64 = 0x6d69_7373;

/// One design point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McCell {
    pub lambda: f64,
    pub n: usize,
    pub gamma: f64,
    #[serde(default = "default_constant")]
    pub bw_constant: f64,
    #[serde(default = "default_epsilon")]
    pub bw_epsilon: f64,
    #[serde(default = "default_kernel")]
    pub kernel: KernelFamily,
    pub reps: usize,
    pub seed: u64,
}

fn default_constant() -> f64 {
    2.0
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_kernel() -> KernelFamily {
    KernelFamily::Parzen
}

impl McCell {
    pub fn new(lambda: f64, n: usize, gamma: f64, reps: usize, seed: u64) -> Self {
        McCell {
            lambda,
            n,
            gamma,
            bw_constant: 2.0,
            bw_epsilon: 0.05,
            kernel: KernelFamily::Parzen,
            reps,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidParameter(
                "a cell needs at least one replication".into(),
            ));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if !(self.bw_constant >= 0.0 && self.bw_epsilon > 0.0) {
            return Err(Error::InvalidParameter(
                "bandwidth constant must be >= 0 and epsilon > 0".into(),
            ));
        }
        LinearModelSpec::new(self.gamma).map(|_| ())
    }

    /// Stream key shared by cells with the same `(λ, n, γ)`.
    pub fn stream_key(&self) -> u64 {
        rng::derive_seed(&[self.lambda.to_bits(), self.n as u64, self.gamma.to_bits()])
    }

    pub fn rule(&self) -> BandwidthRule {
        BandwidthRule {
            constant: self.bw_constant,
            epsilon: self.bw_epsilon,
        }
    }
}

/// Per-replication outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepOutcome {
    pub mean: f64,
    pub v_hat: f64,
    /// `Var(S_n/√n)` given the drawn network.
    pub v_true: f64,
    pub bandwidth: f64,
    /// `None` when `V̂ < 0`.
    pub covered: Option<bool>,
    pub summary: NetworkSummary,
}

/// Network and outcomes of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RepDraw {
    pub network: dgp::Network,
    pub sample: Sample,
    /// `Var(S_n/√n)` given the drawn network.
    pub v_true: f64,
    pub summary: NetworkSummary,
}

/// Draws replication `rep` of `cell`: network first, then shocks, from the
/// replication's own stream.
pub fn draw_rep(cell: &McCell, rep: u64) -> Result<RepDraw> {
    let mut stream = rng::stream(cell.seed, cell.stream_key(), rep);
    let network = dgp::form_network_with(cell.n, cell.lambda, &mut stream)?;
    let eps = dgp::draw_shocks(cell.n, &mut stream);
    let spec = LinearModelSpec::new(cell.gamma)?;
    let pass = dgp::linear_model_pass(&network.graph, &spec, &eps);
    Ok(RepDraw {
        network,
        sample: Sample::scalar(pass.y)?,
        v_true: pass.variance,
        summary: pass.summary,
    })
}

/// Partially observed version of replication `rep`'s network: each edge is
/// lost with probability `rho`, using a stream separate from the draw.
pub fn observed_network(cell: &McCell, rep: u64, graph: &Graph, rho: f64) -> Result<Graph> {
    let key = rng::derive_seed(&[cell.stream_key(), MISSING_STREAM]);
    dgp::drop_edges(graph, rho, &mut rng::stream(cell.seed, key, rep))
}

/// Runs replication `rep` of `cell`.
pub fn run_rep(cell: &McCell, rep: u64) -> Result<RepOutcome> {
    let draw = draw_rep(cell, rep)?;
    let bandwidth = cell.rule().bandwidth(cell.n, draw.summary.avg_degree);
    let kernel = KernelSpec::new(cell.kernel, bandwidth)?;
    let mean = draw.sample.mean()[0];
    let v_hat = hac::hac(
        &draw.network.graph,
        &draw.sample,
        &kernel,
        MeanMode::Unknown,
    )?
    .scalar();
    let z = normal_quantile(0.975);
    let covered = (v_hat >= 0.0).then(|| mean.abs() <= z * (v_hat / cell.n as f64).sqrt());
    Ok(RepOutcome {
        mean,
        v_hat,
        v_true: draw.v_true,
        bandwidth,
        covered,
        summary: draw.summary,
    })
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(xs: impl Iterator<Item = f64> + Clone) -> Self {
        let n = xs.clone().count() as f64;
        if n == 0.0 {
            return MeanSd {
                mean: f64::NAN,
                sd: f64::NAN,
            };
        }
        let mean = xs.clone().sum::<f64>() / n;
        let sd = if n > 1.0 {
            (xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanSd { mean, sd }
    }
}

/// Averages of the network summaries over replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub diameter: MeanSd,
    pub avg_degree: MeanSd,
    pub max_degree: MeanSd,
    pub avg_connected_distance: MeanSd,
}

impl NetworkStats {
    pub fn of(summaries: &[NetworkSummary]) -> Self {
        let it = summaries.iter();
        NetworkStats {
            diameter: MeanSd::of(it.clone().map(|s| s.diameter as f64)),
            avg_degree: MeanSd::of(it.clone().map(|s| s.avg_degree)),
            max_degree: MeanSd::of(it.clone().map(|s| s.max_degree as f64)),
            avg_connected_distance: MeanSd::of(it.map(|s| s.avg_connected_distance)),
        }
    }
}

/// Aggregates of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub cell: McCell,
    /// Coverage of 0 among replications with `V̂ ≥ 0`.
    pub coverage: f64,
    pub coverage_se: f64,
    /// Two-sided 5% rejections of `mean = 0` among the same replications.
    pub rejection: f64,
    pub rejection_se: f64,
    /// Coverage with negative-variance replications counted as misses.
    pub coverage_including_negative: f64,
    pub neg_var_count: usize,
    pub network: NetworkStats,
    pub bandwidth_mean: f64,
    pub v_hat_mean: f64,
    pub v_true_mean: f64,
    /// Median of `|V̂ − V_n| / V_n`.
    pub rel_error_median: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Aggregates outcomes in the given order.
pub fn aggregate(cell: &McCell, outcomes: &[RepOutcome]) -> McReport {
    let valid: Vec<bool> = outcomes.iter().filter_map(|o| o.covered).collect();
    let k = valid.len() as f64;
    let hits = valid.iter().filter(|&&c| c).count() as f64;
    let coverage = if k > 0.0 { hits / k } else { f64::NAN };
    let se = if k > 0.0 {
        (coverage * (1.0 - coverage) / k).sqrt()
    } else {
        f64::NAN
    };
    let summaries: Vec<NetworkSummary> = outcomes.iter().map(|o| o.summary).collect();
    let reps = outcomes.len() as f64;
    McReport {
        cell: *cell,
        coverage,
        coverage_se: se,
        rejection: if k > 0.0 { (k - hits) / k } else { f64::NAN },
        rejection_se: se,
        coverage_including_negative: hits / reps,
        neg_var_count: outcomes.len() - valid.len(),
        network: NetworkStats::of(&summaries),
        bandwidth_mean: outcomes.iter().map(|o| o.bandwidth).sum::<f64>() / reps,
        v_hat_mean: outcomes.iter().map(|o| o.v_hat).sum::<f64>() / reps,
        v_true_mean: outcomes.iter().map(|o| o.v_true).sum::<f64>() / reps,
        rel_error_median: median(
            outcomes
                .iter()
                .map(|o| (o.v_hat - o.v_true).abs() / o.v_true)
                .collect(),
        ),
    }
}

/// All replication outcomes of a cell, in replication order.
pub fn run_outcomes(cell: &McCell) -> Result<Vec<RepOutcome>> {
    cell.validate()?;
    (0..cell.reps as u64)
        .into_par_iter()
        .map(|r| run_rep(cell, r))
        .collect()
}

pub fn run_cell(cell: &McCell) -> Result<McReport> {
    Ok(aggregate(cell, &run_outcomes(cell)?))
}

/// Full-factorial design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lambdas: Vec<f64>,
    pub ns: Vec<usize>,
    pub gammas: Vec<f64>,
    #[serde(default = "default_constants")]
    pub bw_constants: Vec<f64>,
    #[serde(default = "default_epsilon")]
    pub bw_epsilon: f64,
    #[serde(default = "default_kernel")]
    pub kernel: KernelFamily,
    pub reps: usize,
    pub seed: u64,
}

fn default_constants() -> Vec<f64> {
    vec![2.0]
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lambdas: vec![3.0],
            ns: vec![500, 1000],
            gammas: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            bw_constants: default_constants(),
            bw_epsilon: 0.05,
            kernel: KernelFamily::Parzen,
            reps: 1000,
            seed: 20_240_101,
        }
    }
}

impl GridSpec {
    /// Cells in `λ, n, γ, constant` order.
    pub fn cells(&self) -> Vec<McCell> {
        let mut out = Vec::new();
        for &lambda in &self.lambdas {
            for &n in &self.ns {
                for &gamma in &self.gammas {
                    for &bw_constant in &self.bw_constants {
                        out.push(McCell {
                            lambda,
                            n,
                            gamma,
                            bw_constant,
                            bw_epsilon: self.bw_epsilon,
                            kernel: self.kernel,
                            reps: self.reps,
                            seed: self.seed,
                        });
                    }
                }
            }
        }
        out
    }

    /// Rejects designs beyond desk scale unless `full` is set.
    pub fn check_scale(&self, full: bool) -> Result<()> {
        if full {
            return Ok(());
        }
        if self.reps > DESK_MAX_REPS || self.ns.iter().any(|&n| n > DESK_MAX_N) {
            return Err(Error::InvalidParameter(format!(
                "design exceeds desk scale (reps <= {DESK_MAX_REPS}, n <= {DESK_MAX_N}); pass --full to run it"
            )));
        }
        Ok(())
    }
}

/// Runs every cell on a pool of `workers` threads.
pub fn run_grid(cells: &[McCell], workers: usize) -> Result<Vec<McReport>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
    pool.install(|| cells.iter().map(run_cell).collect())
}

/// Column order of `study.csv`.
pub const CSV_HEADER: [&str; 20] = [
    "lambda",
    "n",
    "gamma",
    "kernel",
    "bw_constant",
    "reps",
    "diameter_mean",
    "diameter_sd",
    "avg_degree_mean",
    "avg_degree_sd",
    "max_degree_mean",
    "max_degree_sd",
    "avg_connected_distance_mean",
    "avg_connected_distance_sd",
    "bandwidth_mean",
    "coverage",
    "coverage_se",
    "rejection",
    "neg_var_count",
    "rel_error_median",
];

/// Table-shaped CSV, one row per cell.
pub fn write_csv<W: Write>(reports: &[McReport], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in reports {
        let c = &r.cell;
        let net = &r.network;
        let row = [
            c.lambda.to_string(),
            c.n.to_string(),
            c.gamma.to_string(),
            c.kernel.to_string(),
            c.bw_constant.to_string(),
            c.reps.to_string(),
            net.diameter.mean.to_string(),
            net.diameter.sd.to_string(),
            net.avg_degree.mean.to_string(),
            net.avg_degree.sd.to_string(),
            net.max_degree.mean.to_string(),
            net.max_degree.sd.to_string(),
            net.avg_connected_distance.mean.to_string(),
            net.avg_connected_distance.sd.to_string(),
            r.bandwidth_mean.to_string(),
            r.coverage.to_string(),
            r.coverage_se.to_string(),
            r.rejection.to_string(),
            r.neg_var_count.to_string(),
            r.rel_error_median.to_string(),
        ];
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `study.csv` and `study.json` into `dir`.
pub fn write_study(dir: &Path, reports: &[McReport]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_csv(reports, std::fs::File::create(dir.join("study.csv"))?)?;
    let json = serde_json::to_string_pretty(reports).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("study.json"), json)?;
    Ok(())
}

/// One point of a size curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPoint {
    pub n: usize,
    pub gamma: f64,
    pub rejection: f64,
    pub rejection_se: f64,
}

/// Rejection rates of the two-sided 5% test of `mean = 0` over `ns × gammas`.
pub fn power_curve(
    lambda: f64,
    ns: &[usize],
    gammas: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<PowerPoint>> {
    let mut out = Vec::new();
    for &n in ns {
        for &gamma in gammas {
            let r = run_cell(&McCell::new(lambda, n, gamma, reps, seed))?;
            out.push(PowerPoint {
                n,
                gamma,
                rejection: r.rejection,
                rejection_se: r.rejection_se,
            });
        }
    }
    Ok(out)
}

/// Network summaries of `reps` formation draws.
pub fn formation_stats(n: usize, lambda: f64, reps: usize, seed: u64) -> Result<NetworkStats> {
    let summaries: Vec<NetworkSummary> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let net = dgp::form_network_with(n, lambda, &mut rng::stream(seed, u64::MAX, r))?;
            Ok(crate::netstats::table1_stats(&net.graph))
        })
        .collect::<Result<_>>()?;
    Ok(NetworkStats::of(&summaries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_and_rejection_are_complementary() {
        let cell = McCell::new(2.0, 120, 0.2, 60, 1);
        let r = run_cell(&cell).unwrap();
        assert_eq!(r.neg_var_count, 0);
        assert_eq!(r.coverage + r.rejection, 1.0);
        assert!((0.0..=1.0).contains(&r.coverage));
        assert_eq!(r.coverage, r.coverage_including_negative);
    }

    #[test]
    fn single_rep_rejection_is_binary() {
        let r = run_cell(&McCell::new(2.0, 80, 0.3, 1, 4)).unwrap();
        assert!(r.rejection == 0.0 || r.rejection == 1.0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cells = GridSpec {
            lambdas: vec![2.0],
            ns: vec![100],
            gammas: vec![0.0, 0.4],
            reps: 30,
            ..Default::default()
        }
        .cells();
        let one = run_grid(&cells, 1).unwrap();
        let three = run_grid(&cells, 3).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn shared_streams_across_constants() {
        let mut a = McCell::new(3.0, 100, 0.2, 5, 9);
        let mut b = a;
        b.bw_constant = 1.7;
        a.kernel = KernelFamily::Bartlett;
        let oa = run_outcomes(&a).unwrap();
        let ob = run_outcomes(&b).unwrap();
        for (x, y) in oa.iter().zip(&ob) {
            assert_eq!((x.mean, x.v_true, x.summary), (y.mean, y.v_true, y.summary));
        }
    }

    #[test]
    fn csv_and_json_outputs() {
        let dir = tempfile::tempdir().unwrap();
        write_study(dir.path(), &[]).unwrap();
        let text = std::fs::read_to_string(dir.path().join("study.csv")).unwrap();
        assert_eq!(text.trim_end(), CSV_HEADER.join(","));
        let cells = GridSpec {
            lambdas: vec![1.0],
            ns: vec![60],
            gammas: vec![0.0],
            reps: 10,
            ..Default::default()
        }
        .cells();
        let reports = run_grid(&cells, 1).unwrap();
        write_study(dir.path(), &reports).unwrap();
        let first = std::fs::read(dir.path().join("study.csv")).unwrap();
        write_study(dir.path(), &run_grid(&cells, 1).unwrap()).unwrap();
        assert_eq!(first, std::fs::read(dir.path().join("study.csv")).unwrap());
        let back: Vec<McReport> =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("study.json")).unwrap())
                .unwrap();
        assert_eq!(back.len(), 1);
    }

    #[test]
    fn grid_scale_guard() {
        let g = GridSpec::default();
        assert_eq!(g.cells().len(), 12);
        assert!(g.check_scale(false).is_ok());
        let big = GridSpec {
            reps: 10_000,
            ..GridSpec::default()
        };
        assert!(big.check_scale(false).is_err());
        assert!(big.check_scale(true).is_ok());
        assert!(McCell::new(1.0, 10, 1.0, 5, 0).validate().is_err());
        assert!(McCell::new(1.0, 10, 0.5, 0, 0).validate().is_err());
    }

    #[test]
    fn cell_config_defaults() {
        let cell: McCell =
            serde_json::from_str(r#"{"lambda":3,"n":500,"gamma":0.3,"reps":10,"seed":1}"#).unwrap();
        assert_eq!(
            (cell.bw_constant, cell.bw_epsilon, cell.kernel),
            (2.0, 0.05, KernelFamily::Parzen)
        );
    }
}
