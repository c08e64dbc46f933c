//! Denseness statistics of neighbourhood shells and finite-n condition
//! diagnostics.
//!
//! Every statistic is an average over nodes of some function of the BFS
//! layering rooted at that node. Searches are capped at the largest radius
//! a statistic needs, so the cost on sparse graphs is governed by ball sizes
//! rather than by `n`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Bfs, Graph, Layers};

/// Largest graph for which [`h_set_count`] enumerates tuples.
pub const H_SET_LIMIT: usize = 200;

/// `x^e` with `0^0 = 1` and `0^e = 0` for `e > 0`.
pub(crate) fn pow0(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if x == 0.0 {
        0.0
    } else {
        x.powf(e)
    }
}

fn cap_of(r: usize) -> Option<u32> {
    Some(u32::try_from(r).unwrap_or(u32::MAX - 1))
}

/// `δ^∂(s;k) = n⁻¹ Σ_i |N^∂(i;s)|^k`. Empty shells contribute 0.
pub fn delta_shell(g: &Graph, s: usize, k: f64) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let mut bfs = Bfs::new(n);
    let mut acc = 0.0;
    for i in 0..n {
        let len = bfs.run(g, i, cap_of(s)).shell(s).len();
        if len > 0 {
            acc += (len as f64).powf(k);
        }
    }
    acc / n as f64
}

/// `δ(s;k) = n⁻¹ Σ_i |N(i;s)|^k`.
pub fn delta_ball(g: &Graph, s: usize, k: f64) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let mut bfs = Bfs::new(n);
    let mut acc = 0.0;
    for i in 0..n {
        acc += (bfs.run(g, i, cap_of(s)).ball_size(s) as f64).powf(k);
    }
    acc / n as f64
}

/// Per-node ingredients of `Δ(s,m;·)` and `δ^∂(s;·)`.
///
/// `cap[i] = max_{j ∈ N^∂(i;s)} |N(i;m) \ N(j;s−1)|` (0 on an empty shell)
/// and `shell[i] = |N^∂(i;s)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapProfile {
    pub s: usize,
    pub m: usize,
    pub cap: Vec<u64>,
    pub shell: Vec<u64>,
}

impl CapProfile {
    pub fn new(g: &Graph, s: usize, m: usize) -> Self {
        let n = g.node_count();
        let mut outer = Bfs::new(n);
        let mut inner = Bfs::new(n);
        let mut cap = vec![0u64; n];
        let mut shell = vec![0u64; n];
        let m32 = u32::try_from(m).unwrap_or(u32::MAX - 1);
        for i in 0..n {
            outer.run(g, i, cap_of(s.max(m)));
            let layers = outer.layers();
            let members = layers.shell(s);
            shell[i] = members.len() as u64;
            if members.is_empty() {
                continue;
            }
            let ball = layers.ball_size(m) as u64;
            if s == 0 {
                cap[i] = ball;
                continue;
            }
            let mut best = 0u64;
            for &j in members {
                let overlap = inner
                    .run(g, j as usize, cap_of(s - 1))
                    .order()
                    .iter()
                    .filter(|&&v| outer.distance(v as usize).get().is_some_and(|d| d <= m32))
                    .count() as u64;
                best = best.max(ball - overlap);
            }
            cap[i] = best;
        }
        CapProfile { s, m, cap, shell }
    }

    /// `Δ(s,m;k)`.
    pub fn delta_cap(&self, k: f64) -> f64 {
        mean_pow(&self.cap, k)
    }

    /// `δ^∂(s;k)`.
    pub fn delta_shell(&self, k: f64) -> f64 {
        mean_pow(&self.shell, k)
    }

    /// `inf_{α>1} Δ(s,m;kα)^{1/α} δ^∂(s;α/(α−1))^{1−1/α}`.
    ///
    /// The objective is evaluated in log space on a log grid of `α − 1`,
    /// the best bracket is refined by golden section, and the two boundary
    /// limits `α → 1⁺` and `α → ∞` are admitted as candidates.
    pub fn c_coef(&self, k: f64) -> f64 {
        let n = self.cap.len();
        if n == 0 || self.shell.iter().all(|&x| x == 0) {
            return 0.0;
        }
        if self.s == 0 {
            return self.delta_cap(k);
        }
        let ln_cap: Vec<f64> = self
            .cap
            .iter()
            .filter(|&&x| x > 0)
            .map(|&x| (x as f64).ln())
            .collect();
        let ln_shell: Vec<f64> = self
            .shell
            .iter()
            .filter(|&&x| x > 0)
            .map(|&x| (x as f64).ln())
            .collect();
        let ln_n = (n as f64).ln();
        let objective = |t: f64| -> f64 {
            let a = 1.0 + 10f64.powf(t);
            let conj = a / (a - 1.0);
            log_mean_exp(&ln_cap, k * a, ln_n) / a
                + (1.0 - 1.0 / a) * log_mean_exp(&ln_shell, conj, ln_n)
        };

        const GRID: usize = 40;
        let (lo, hi) = (-3.0, 3.0);
        let step = (hi - lo) / (GRID - 1) as f64;
        let values: Vec<f64> = (0..GRID).map(|i| objective(lo + step * i as f64)).collect();
        let best = (0..GRID)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .unwrap_or(0);
        let mut a = lo + step * best.saturating_sub(1) as f64;
        let mut b = lo + step * (best + 1).min(GRID - 1) as f64;
        let mut ln_best = values[best];

        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = objective(x1);
        let mut f2 = objective(x2);
        for _ in 0..200 {
            if (b - a).abs() <= 1e-9
                || (f1 - f2).abs() <= 1e-12 * f1.abs().max(1.0) && (b - a) < 1e-6
            {
                break;
            }
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = objective(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = objective(x2);
            }
        }
        ln_best = ln_best.min(f1).min(f2);

        // α → 1⁺: Δ(s,m;k)·max_i |N^∂(i;s)|.
        let max_shell = self.shell.iter().copied().max().unwrap_or(0) as f64;
        let at_one = self.delta_cap(k) * max_shell;
        // α → ∞: (max_i cap_i)^k·δ^∂(s;1).
        let max_cap = self.cap.iter().copied().max().unwrap_or(0) as f64;
        let at_inf = max_cap.powf(k) * self.delta_shell(1.0);
        ln_best.exp().min(at_one).min(at_inf)
    }
}

fn mean_pow(xs: &[u64], k: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter()
        .filter(|&&x| x > 0)
        .map(|&x| (x as f64).powf(k))
        .sum::<f64>()
        / xs.len() as f64
}

/// `ln(n⁻¹ Σ exp(e·l))` over the logs `l` of the positive entries.
fn log_mean_exp(logs: &[f64], e: f64, ln_n: f64) -> f64 {
    if logs.is_empty() {
        return f64::NEG_INFINITY;
    }
    let top = logs.iter().fold(f64::NEG_INFINITY, |a, &l| a.max(e * l));
    let sum: f64 = logs.iter().map(|&l| (e * l - top).exp()).sum();
    top + sum.ln() - ln_n
}

/// `Δ(s,m;k) = n⁻¹ Σ_i max_{j ∈ N^∂(i;s)} |N(i;m) \ N(j;s−1)|^k`, `N(j;−1) = ∅`.
pub fn delta_cap(g: &Graph, s: usize, m: usize, k: f64) -> f64 {
    CapProfile::new(g, s, m).delta_cap(k)
}

/// `c_n(s,m;k)`; equals `δ(m;k)` at `s = 0` and 0 when no node has an
/// `s`-shell.
pub fn c_coef(g: &Graph, s: usize, m: usize, k: f64) -> f64 {
    CapProfile::new(g, s, m).c_coef(k)
}

/// All-pairs distance matrix with `u32::MAX` for unreachable pairs.
fn distance_matrix(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.node_count();
    let mut bfs = Bfs::new(n);
    (0..n)
        .map(|i| {
            bfs.run(g, i, None);
            (0..n)
                .map(|j| bfs.distance(j).get().unwrap_or(u32::MAX))
                .collect()
        })
        .collect()
}

/// `|H_n(s,m)|` for every `s`, indexed by distance: the number of tuples
/// `(i,j,k,l)` with `j ∈ N(i;m)`, `l ∈ N(k;m)` and `d({i,j},{k,l}) = s`.
pub fn h_set_counts(g: &Graph, m: usize) -> Result<Vec<u64>> {
    let n = g.node_count();
    if n > H_SET_LIMIT {
        return Err(Error::SizeLimit {
            what: "H-set enumeration",
            n,
            limit: H_SET_LIMIT,
        });
    }
    let d = distance_matrix(g);
    let m32 = u32::try_from(m).unwrap_or(u32::MAX - 1);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| d[i][j] <= m32)
        .collect();
    let mut counts: Vec<u64> = Vec::new();
    for &(i, j) in &pairs {
        for &(k, l) in &pairs {
            let dist = d[i][k].min(d[i][l]).min(d[j][k]).min(d[j][l]);
            if dist == u32::MAX {
                continue;
            }
            let idx = dist as usize;
            if counts.len() <= idx {
                counts.resize(idx + 1, 0);
            }
            counts[idx] += 1;
        }
    }
    Ok(counts)
}

/// `|H_n(s,m)|`; see [`h_set_counts`].
pub fn h_set_count(g: &Graph, s: usize, m: usize) -> Result<u64> {
    Ok(h_set_counts(g, m)?.get(s).copied().unwrap_or(0))
}

/// Descriptive statistics of a network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub nodes: usize,
    pub edges: usize,
    /// Largest finite pairwise distance; 0 for an edgeless graph.
    pub diameter: u32,
    pub avg_degree: f64,
    pub max_degree: usize,
    /// Mean of `d(i,j)` over connected pairs `i ≠ j`; 0 if there are none.
    pub avg_connected_distance: f64,
}

/// Accumulates [`NetworkSummary`] distance statistics from uncapped BFS
/// layerings, one per source node.
#[derive(Debug, Clone, Default)]
pub struct SummaryAccumulator {
    diameter: u32,
    distance_sum: u128,
    pairs: u64,
}

impl SummaryAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, layers: &Layers<'_>) {
        let depth = layers.depth();
        if depth > 1 {
            self.diameter = self.diameter.max((depth - 1) as u32);
        }
        for (s, shell) in layers.shells().skip(1) {
            self.distance_sum += (s as u128) * shell.len() as u128;
            self.pairs += shell.len() as u64;
        }
    }

    pub fn finish(&self, g: &Graph) -> NetworkSummary {
        NetworkSummary {
            nodes: g.node_count(),
            edges: g.edge_count(),
            diameter: self.diameter,
            avg_degree: g.average_degree(),
            max_degree: g.max_degree(),
            avg_connected_distance: if self.pairs == 0 {
                0.0
            } else {
                self.distance_sum as f64 / self.pairs as f64
            },
        }
    }
}

/// Diameter, degree and connected-distance summary of `g`.
pub fn table1_stats(g: &Graph) -> NetworkSummary {
    let mut bfs = Bfs::new(g.node_count());
    let mut acc = SummaryAccumulator::new();
    for i in 0..g.node_count() {
        acc.observe(&bfs.run(g, i, None));
    }
    acc.finish(g)
}

/// Shell, ball, cap and `c_n` statistics for `s = 0..=diameter`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensenessProfile {
    pub k_values: Vec<f64>,
    pub m: usize,
    pub k_cap: f64,
    /// `delta_shell[s][i] = δ^∂(s; k_values[i])`.
    pub delta_shell: Vec<Vec<f64>>,
    /// `δ(s;1)`.
    pub delta_ball: Vec<f64>,
    /// `Δ(s,m;k_cap)`.
    pub delta_cap: Vec<f64>,
    /// `c_n(s,m;k_cap)`.
    pub c_coef: Vec<f64>,
    pub summary: NetworkSummary,
}

impl DensenessProfile {
    pub fn new(g: &Graph, k_values: &[f64], m: usize, k_cap: f64) -> Self {
        let summary = table1_stats(g);
        let smax = summary.diameter as usize;
        let mut out = DensenessProfile {
            k_values: k_values.to_vec(),
            m,
            k_cap,
            delta_shell: Vec::with_capacity(smax + 1),
            delta_ball: Vec::with_capacity(smax + 1),
            delta_cap: Vec::with_capacity(smax + 1),
            c_coef: Vec::with_capacity(smax + 1),
            summary,
        };
        for s in 0..=smax {
            let prof = CapProfile::new(g, s, m);
            out.delta_shell
                .push(k_values.iter().map(|&k| prof.delta_shell(k)).collect());
            out.delta_ball.push(delta_ball(g, s, 1.0));
            out.delta_cap.push(prof.delta_cap(k_cap));
            out.c_coef.push(prof.c_coef(k_cap));
        }
        out
    }
}

/// Upper bounds `θ_{n,s}` on the dependence coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaSequence {
    /// `γ^s`.
    Geometric { gamma: f64 },
    /// `M((π_n ∨ 1) + ε)^{−qs}`.
    NfRate {
        m: f64,
        q: f64,
        epsilon: f64,
        pi_n: f64,
    },
    /// `values[s]`, continued by the last entry.
    Table { values: Vec<f64> },
    /// 1 below `s0`, 0 from `s0` on.
    ZeroBeyond { s0: usize },
    /// `2α_n Σ_{m>s} γ^m max_shell[m]`.
    LinearModel {
        gamma: f64,
        max_shell: Vec<usize>,
        alpha_n: f64,
    },
}

impl ThetaSequence {
    /// `θ_{n,s}`; always 1 at `s = 0`.
    pub fn eval(&self, s: usize) -> f64 {
        if s == 0 {
            return 1.0;
        }
        match self {
            ThetaSequence::Geometric { gamma } => gamma.powi(s as i32),
            ThetaSequence::NfRate {
                m,
                q,
                epsilon,
                pi_n,
            } => m * (pi_n.max(1.0) + epsilon).powf(-q * s as f64),
            ThetaSequence::Table { values } => match values.get(s).or(values.last()) {
                Some(&v) => v,
                None => 0.0,
            },
            ThetaSequence::ZeroBeyond { s0 } => {
                if s < *s0 {
                    1.0
                } else {
                    0.0
                }
            }
            ThetaSequence::LinearModel {
                gamma,
                max_shell,
                alpha_n,
            } => {
                let tail: f64 = max_shell
                    .iter()
                    .enumerate()
                    .skip(s + 1)
                    .map(|(m, &c)| gamma.powi(m as i32) * c as f64)
                    .sum();
                2.0 * alpha_n * tail
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        match self {
            ThetaSequence::Geometric { gamma } if !(0.0..=1.0).contains(gamma) => {
                bad("geometric gamma must lie in [0,1]")
            }
            ThetaSequence::NfRate {
                m,
                q,
                epsilon,
                pi_n,
            } if !(*m >= 0.0 && *q > 0.0 && *epsilon > 0.0 && *pi_n >= 0.0) => {
                bad("nf rate needs M >= 0, q > 0, epsilon > 0, pi_n >= 0")
            }
            ThetaSequence::Table { values }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) =>
            {
                bad("theta table entries must be finite and nonnegative")
            }
            ThetaSequence::LinearModel { gamma, alpha_n, .. }
                if !(*gamma >= 0.0 && *alpha_n >= 0.0) =>
            {
                bad("linear-model theta needs gamma >= 0 and alpha >= 0")
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ThetaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaSequence::Geometric { gamma } => write!(f, "geometric:{gamma}"),
            ThetaSequence::NfRate {
                m,
                q,
                epsilon,
                pi_n,
            } => write!(f, "nf:{m},{q},{epsilon},{pi_n}"),
            ThetaSequence::Table { values } => {
                let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "table:{}", parts.join(","))
            }
            ThetaSequence::ZeroBeyond { s0 } => write!(f, "zero_beyond:{s0}"),
            ThetaSequence::LinearModel { gamma, alpha_n, .. } => {
                write!(f, "linear_model:{gamma},{alpha_n}")
            }
        }
    }
}

impl FromStr for ThetaSequence {
    type Err = Error;

    /// Parses `geometric:γ`, `nf:M,q,ε,π`, `table:v0,v1,...` and
    /// `zero_beyond:s0`.
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse theta sequence `{text}`"));
        let (kind, args) = text.split_once(':').ok_or_else(bad)?;
        let nums = || -> Result<Vec<f64>> {
            args.split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        let theta = match kind.trim() {
            "geometric" => match nums()?.as_slice() {
                [g] => ThetaSequence::Geometric { gamma: *g },
                _ => return Err(bad()),
            },
            "nf" | "nf_rate" => match nums()?.as_slice() {
                [m, q, e, p] => ThetaSequence::NfRate {
                    m: *m,
                    q: *q,
                    epsilon: *e,
                    pi_n: *p,
                },
                _ => return Err(bad()),
            },
            "table" => ThetaSequence::Table { values: nums()? },
            "zero_beyond" => ThetaSequence::ZeroBeyond {
                s0: args.trim().parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        theta.validate()?;
        Ok(theta)
    }
}

/// Finite-n values of the denseness-versus-dependence conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n: usize,
    pub p: f64,
    pub m_n: usize,
    pub b_n: f64,
    pub diameter: u32,
    /// `n^{3/2} θ_{m_n}^{1−1/p}`.
    pub nd_a_value: f64,
    /// `n^{−k/2} Σ_s c_n(s,m_n;k) θ_s^{1−(k+2)/p}` for `k = 1, 2`.
    pub nd_b_value: [f64; 2],
    /// `max{p/(p−4), 3p/(p−1)}`.
    pub nf_q_threshold: f64,
    /// `n⁻¹ Σ_s c_n(s,⌊b_n⌋;2) θ_s^{1−4/p}`.
    pub hac_iii_value: f64,
}

/// Smallest admissible decay exponent `q` for moment order `p`.
pub fn nf_q_threshold(p: f64) -> f64 {
    (p / (p - 4.0)).max(3.0 * p / (p - 1.0))
}

/// Default neighbourhood radius `ln n / (2(1+ε′) ln((π_n∨1)+ε′))` with
/// `ε′ = ε/2`.
pub fn default_m_n(n: usize, pi_n: f64, epsilon: f64) -> f64 {
    let e = epsilon / 2.0;
    (n as f64).ln() / (2.0 * (1.0 + e) * (pi_n.max(1.0) + e).ln())
}

/// Evaluates the finite-n condition diagnostics; sums stop at the diameter.
pub fn condition_report(
    g: &Graph,
    theta: &ThetaSequence,
    p: f64,
    m_n: usize,
    b_n: f64,
) -> Result<ConditionReport> {
    if !(p > 4.0) {
        return Err(Error::InvalidParameter(format!(
            "moment order p must exceed 4, got {p}"
        )));
    }
    if !(b_n >= 0.0 && b_n.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be finite and nonnegative, got {b_n}"
        )));
    }
    theta.validate()?;
    let n = g.node_count();
    let nf = n as f64;
    let diameter = table1_stats(g).diameter;
    let b_floor = b_n.floor() as usize;

    let mut nd_b = [0.0; 2];
    let mut hac = 0.0;
    for s in 0..=diameter as usize {
        let th = theta.eval(s);
        let w1 = pow0(th, 1.0 - 3.0 / p);
        let w2 = pow0(th, 1.0 - 4.0 / p);
        if w1 > 0.0 || w2 > 0.0 {
            let prof = CapProfile::new(g, s, m_n);
            nd_b[0] += prof.c_coef(1.0) * w1;
            nd_b[1] += prof.c_coef(2.0) * w2;
        }
        if w2 > 0.0 {
            hac += CapProfile::new(g, s, b_floor).c_coef(2.0) * w2;
        }
    }
    Ok(ConditionReport {
        n,
        p,
        m_n,
        b_n,
        diameter,
        nd_a_value: nf.powf(1.5) * pow0(theta.eval(m_n), 1.0 - 1.0 / p),
        nd_b_value: [nd_b[0] / nf.sqrt(), nd_b[1] / nf],
        nf_q_threshold: nf_q_threshold(p),
        hac_iii_value: hac / nf,
    })
}

/// `(5.7 s² (π_n ∨ 1)^s ln n)^k`.
pub fn shell_tail_bound(n: usize, s: usize, k: f64, pi_n: f64) -> f64 {
    (5.7 * (s * s) as f64 * pi_n.max(1.0).powi(s as i32) * (n as f64).ln()).powf(k)
}

/// Outcome of [`tail_bound_monitor`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub samples: usize,
    pub violations: usize,
    pub rate: f64,
    /// `n^{−1.3}` at the largest sampled `n`.
    pub target_rate: f64,
    /// Rate within three binomial standard errors of the target.
    pub confirmed: bool,
}

/// Fraction of graphs with `δ^∂(s;k)` above [`shell_tail_bound`].
pub fn tail_bound_monitor(
    samples: &[Graph],
    s: usize,
    k: f64,
    pi_n: f64,
) -> Result<TailBoundReport> {
    if samples.is_empty() {
        return Err(Error::EmptySet);
    }
    if s == 0 {
        return Err(Error::InvalidParameter(
            "the shell tail bound covers s >= 1 only".into(),
        ));
    }
    let violations = samples
        .iter()
        .filter(|g| delta_shell(g, s, k) > shell_tail_bound(g.node_count(), s, k, pi_n))
        .count();
    let reps = samples.len() as f64;
    let n_max = samples
        .iter()
        .map(Graph::node_count)
        .max()
        .unwrap_or(1)
        .max(1);
    let target = (n_max as f64).powf(-1.3);
    let rate = violations as f64 / reps;
    let se = (target * (1.0 - target) / reps).sqrt();
    Ok(TailBoundReport {
        samples: samples.len(),
        violations,
        rate,
        target_rate: target,
        confirmed: rate <= target + 3.0 * se,
    })
}

/// `n⁻¹ Σ_{s≥1} δ^∂(s;1) θ_s`, truncated at the diameter.
pub fn shell_theta_sum(g: &Graph, theta: &ThetaSequence) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let diameter = table1_stats(g).diameter as usize;
    let mut bfs = Bfs::new(n);
    let mut per_s = vec![0.0; diameter + 1];
    for i in 0..n {
        for (s, shell) in bfs.run(g, i, None).shells().skip(1) {
            per_s[s] += shell.len() as f64;
        }
    }
    per_s
        .iter()
        .enumerate()
        .skip(1)
        .map(|(s, &tot)| tot / n as f64 * theta.eval(s))
        .sum::<f64>()
        / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{path, ring, star};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    /// Direct transcription over explicit sets.
    fn oracle_delta_cap(g: &Graph, s: usize, m: usize, k: f64) -> f64 {
        let n = g.node_count();
        let d = distance_matrix(g);
        let mut acc = 0.0;
        for i in 0..n {
            let mut best: Option<usize> = None;
            for j in (0..n).filter(|&j| d[i][j] == s as u32) {
                let size = (0..n)
                    .filter(|&v| d[i][v] <= m as u32 && !(s >= 1 && d[j][v] <= (s - 1) as u32))
                    .count();
                best = Some(best.map_or(size, |b| b.max(size)));
            }
            if let Some(b) = best {
                acc += pow0(b as f64, k);
            }
        }
        acc / n as f64
    }

    fn oracle_delta_shell(g: &Graph, s: usize, k: f64) -> f64 {
        let d = distance_matrix(g);
        let n = g.node_count();
        (0..n)
            .map(|i| pow0(d[i].iter().filter(|&&x| x == s as u32).count() as f64, k))
            .sum::<f64>()
            / n as f64
    }

    fn oracle_c_grid(g: &Graph, s: usize, m: usize, k: f64) -> f64 {
        (1..4000)
            .map(|i| 1.0 + 10f64.powf(-3.0 + 6.0 * i as f64 / 4000.0))
            .map(|a| {
                oracle_delta_cap(g, s, m, k * a).powf(1.0 / a)
                    * oracle_delta_shell(g, s, a / (a - 1.0)).powf(1.0 - 1.0 / a)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn oracle_h_count(g: &Graph, s: usize, m: usize) -> u64 {
        let d = distance_matrix(g);
        let n = g.node_count();
        let mut count = 0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        if d[i][j] <= m as u32 && d[k][l] <= m as u32 {
                            let ds = [d[i][k], d[i][l], d[j][k], d[j][l]]
                                .into_iter()
                                .min()
                                .unwrap();
                            if ds == s as u32 {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        count
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
        use rand::Rng;
        let mut rng = crate::rng::from_seed(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        Graph::new(n, edges).unwrap()
    }

    #[test]
    fn star_shell_averages() {
        for n in [4usize, 7, 12] {
            let g = star(n);
            let nf = n as f64;
            assert!(close(delta_shell(&g, 1, 1.0), 2.0 * (nf - 1.0) / nf, 1e-12));
            assert!(close(
                delta_shell(&g, 2, 1.0),
                (nf - 2.0) * (nf - 1.0) / nf,
                1e-12
            ));
        }
        assert_eq!(delta_shell(&star(4), 1, 1.0), 1.5);
        assert_eq!(delta_shell(&star(4), 2, 1.0), 1.5);
    }

    #[test]
    fn ring_shell_power() {
        assert_eq!(delta_shell(&ring(7), 2, 3.0), 8.0);
    }

    #[test]
    fn cap_examples() {
        assert!(close(delta_cap(&path(3), 1, 1, 1.0), 4.0 / 3.0, 1e-12));
        for g in [ring(5), star(6), path(4)] {
            assert_eq!(delta_cap(&g, 0, 0, 1.0), 1.0);
        }
        for s in 4..7 {
            assert_eq!(delta_cap(&ring(6), s, 1, 1.0), 0.0);
        }
    }

    #[test]
    fn c_coef_zero_lag_is_ball_moment() {
        for g in [ring(9), star(7), path(5)] {
            for m in 0..3 {
                for k in [1.0, 2.0] {
                    assert!(close(c_coef(&g, 0, m, k), delta_ball(&g, m, k), 1e-12));
                }
            }
        }
    }

    #[test]
    fn c_coef_uniform_ring_is_flat() {
        // Every cap is 2 and every 1-shell has size 2.
        let g = ring(8);
        assert!(close(c_coef(&g, 1, 1, 1.0), 4.0, 1e-9));
        assert!(close(oracle_c_grid(&g, 1, 1, 1.0), 4.0, 1e-9));
    }

    #[test]
    fn c_coef_empty_shells() {
        assert_eq!(c_coef(&Graph::edgeless(5), 1, 1, 2.0), 0.0);
        assert_eq!(c_coef(&ring(6), 5, 1, 2.0), 0.0);
    }

    #[test]
    fn c_coef_matches_grid_oracle() {
        for seed in 0..6 {
            let g = random_graph(14, 0.2, seed);
            for s in 1..4 {
                for m in 1..3 {
                    for k in [1.0, 2.0] {
                        let fast = c_coef(&g, s, m, k);
                        let slow = oracle_c_grid(&g, s, m, k);
                        assert!(
                            fast <= slow * (1.0 + 1e-6) + 1e-12,
                            "seed {seed} s {s} m {m}: {fast} > {slow}"
                        );
                        assert!(
                            fast >= slow * (1.0 - 1e-3) - 1e-12,
                            "seed {seed} s {s} m {m}: {fast} << {slow}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn h_set_examples() {
        assert_eq!(h_set_count(&path(3), 2, 1).unwrap(), 2);
        assert_eq!(h_set_count(&ring(6), 4, 1).unwrap(), 0);
        // In K3 every pair lies in the radius-1 ball, so all 3^4 tuples
        // qualify, but (i,i,k,k) with i ≠ k sits at distance 1.
        let k3 = Graph::complete(3);
        assert_eq!(h_set_count(&k3, 0, 1).unwrap(), 63);
        assert_eq!(h_set_count(&k3, 1, 1).unwrap(), 18);
        assert!(h_set_counts(&ring(201), 1).is_err());
    }

    #[test]
    fn h_set_matches_oracle() {
        for seed in 0..3 {
            let g = random_graph(9, 0.3, seed);
            let counts = h_set_counts(&g, 1).unwrap();
            for s in 0..6 {
                assert_eq!(
                    counts.get(s).copied().unwrap_or(0),
                    oracle_h_count(&g, s, 1)
                );
            }
        }
    }

    #[test]
    fn table1_examples() {
        let r = table1_stats(&ring(8));
        assert_eq!((r.diameter, r.max_degree), (4, 2));
        assert_eq!(r.avg_degree, 2.0);
        assert!(close(r.avg_connected_distance, 16.0 / 7.0, 1e-12));
        let s = table1_stats(&star(5));
        assert_eq!((s.diameter, s.max_degree), (2, 4));
        assert!(close(s.avg_degree, 1.6, 1e-12));
        assert!(close(s.avg_connected_distance, 1.6, 1e-12));
        let k = table1_stats(&Graph::complete(4));
        assert_eq!((k.diameter, k.avg_connected_distance), (1, 1.0));
        let e = table1_stats(&Graph::edgeless(3));
        assert_eq!((e.diameter, e.avg_connected_distance), (0, 0.0));
    }

    #[test]
    fn profile_invariants() {
        let g = random_graph(30, 0.1, 11);
        let p = DensenessProfile::new(&g, &[1.0, 2.0], 2, 1.0);
        assert!(close(p.delta_shell[1][0], p.summary.avg_degree, 1e-12));
        assert!(p.delta_ball.windows(2).all(|w| w[0] <= w[1]));
        assert!(close(p.c_coef[0], delta_ball(&g, 2, 1.0), 1e-12));
        assert!(p.delta_cap.iter().chain(&p.c_coef).all(|&v| v >= 0.0));
    }

    #[test]
    fn theta_sequences() {
        let g = ThetaSequence::Geometric { gamma: 0.5 };
        assert_eq!((g.eval(0), g.eval(3)), (1.0, 0.125));
        let z = ThetaSequence::ZeroBeyond { s0: 2 };
        assert_eq!(
            (z.eval(0), z.eval(1), z.eval(2), z.eval(9)),
            (1.0, 1.0, 0.0, 0.0)
        );
        let nf = ThetaSequence::NfRate {
            m: 2.0,
            q: 4.0,
            epsilon: 0.1,
            pi_n: 0.5,
        };
        assert!(close(nf.eval(2), 2.0 * 1.1f64.powf(-8.0), 1e-12));
        let t = ThetaSequence::Table {
            values: vec![1.0, 0.4, 0.1],
        };
        assert_eq!((t.eval(1), t.eval(2), t.eval(7)), (0.4, 0.1, 0.1));
        let l = ThetaSequence::LinearModel {
            gamma: 0.5,
            max_shell: vec![1, 2, 2, 1],
            alpha_n: 1.0,
        };
        assert!(close(l.eval(1), 2.0 * (0.25 * 2.0 + 0.125), 1e-12));
        assert_eq!(l.eval(3), 0.0);
        for text in [
            "geometric:0.5",
            "nf:2,4,0.1,0.5",
            "table:1,0.4,0.1",
            "zero_beyond:2",
        ] {
            let parsed: ThetaSequence = text.parse().unwrap();
            assert_eq!(parsed.to_string().parse::<ThetaSequence>().unwrap(), parsed);
        }
        assert!("geometric:1.5".parse::<ThetaSequence>().is_err());
        assert!("bogus".parse::<ThetaSequence>().is_err());
    }

    #[test]
    fn condition_report_examples() {
        assert!(close(nf_q_threshold(8.0), 24.0 / 7.0, 1e-12));
        let g = ring(12);
        let zero = ThetaSequence::ZeroBeyond { s0: 1 };
        let rep = condition_report(&g, &zero, 8.0, 2, 3.0).unwrap();
        let n = 12.0f64;
        assert!(close(
            rep.nd_b_value[0],
            c_coef(&g, 0, 2, 1.0) / n.sqrt(),
            1e-12
        ));
        assert!(close(rep.nd_b_value[1], c_coef(&g, 0, 2, 2.0) / n, 1e-12));
        assert_eq!(rep.nd_a_value, 0.0);

        let ring100 = ring(100);
        let lo = condition_report(
            &ring100,
            &ThetaSequence::Geometric { gamma: 0.5 },
            8.0,
            5,
            4.0,
        )
        .unwrap();
        let hi = condition_report(
            &ring100,
            &ThetaSequence::Geometric { gamma: 0.9 },
            8.0,
            5,
            4.0,
        )
        .unwrap();
        assert!(lo.nd_b_value[0].is_finite() && lo.nd_b_value[0] > 0.0);
        assert!(hi.nd_b_value[0] >= lo.nd_b_value[0]);
        assert!(hi.hac_iii_value >= lo.hac_iii_value);
        assert!(condition_report(&g, &zero, 4.0, 2, 3.0).is_err());
    }

    #[test]
    fn default_radius_rule() {
        let m = default_m_n(1000, 3.0, 0.1);
        assert!(close(m, 1000f64.ln() / (2.0 * 1.05 * 3.05f64.ln()), 1e-12));
    }

    #[test]
    fn tail_monitor() {
        let rep = tail_bound_monitor(&[ring(100)], 2, 1.0, 2.0).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.confirmed);
        assert!(tail_bound_monitor(&[ring(100)], 0, 1.0, 2.0).is_err());
        assert!(tail_bound_monitor(&[], 1, 1.0, 2.0).is_err());
    }

    #[test]
    fn star_sum_does_not_vanish() {
        let theta = ThetaSequence::Table {
            values: vec![1.0, 0.3, 0.2, 0.0],
        };
        let v = shell_theta_sum(&star(10_000), &theta);
        assert!((v - 0.2).abs() <= 0.01 * 0.2, "{v}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn cap_matches_oracle(n in 2usize..14, p in 0.05f64..0.6, seed in any::<u64>(), s in 0usize..4, m in 0usize..3) {
            let g = random_graph(n, p, seed);
            prop_assert!(close(delta_cap(&g, s, m, 1.5), oracle_delta_cap(&g, s, m, 1.5), 1e-10));
            prop_assert!(close(delta_shell(&g, s.max(1), 1.5), oracle_delta_shell(&g, s.max(1), 1.5), 1e-10));
        }

        #[test]
        fn h_set_bounds(n in 3usize..26, p in 0.05f64..0.4, seed in any::<u64>(), m in 1usize..4) {
            let g = random_graph(n, p, seed);
            let counts = h_set_counts(&g, m).unwrap();
            let nf = n as f64;
            for s in 0..counts.len() {
                let h = counts[s] as f64;
                let c2 = c_coef(&g, s, m, 2.0);
                prop_assert!(h <= 4.0 * nf * c2 * (1.0 + 1e-9) + 1e-9, "s {} h {} c {}", s, h, c2);
                if s >= 1 {
                    let d = delta_shell(&g, s, 1.0);
                    prop_assert!(d <= h / nf + 1e-12);
                    prop_assert!(d <= 4.0 * c2 * (1.0 + 1e-9) + 1e-12);
                }
            }
        }
    }
}
