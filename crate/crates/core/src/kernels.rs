//! HAC kernels, the logarithmic bandwidth rule and kernel weight matrices.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Bfs, Graph};

/// Largest graph for which a dense weight matrix is built.
pub const DENSE_LIMIT: usize = 4000;

/// Ratio above which [`kernel_regularity`] reports a violation.
pub const REGULARITY_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelFamily {
    Parzen,
    Bartlett,
    Truncated,
    #[serde(alias = "tukey_hanning")]
    TukeyHanning,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 4] = [
        KernelFamily::Parzen,
        KernelFamily::Bartlett,
        KernelFamily::Truncated,
        KernelFamily::TukeyHanning,
    ];

    /// `ω(x)`; zero outside `[−1, 1]` and at infinity.
    pub fn eval(self, x: f64) -> f64 {
        let a = x.abs();
        if !(a <= 1.0) {
            return 0.0;
        }
        1.0 - self.deficit(a)
    }

    /// `1 − ω(x)` on `[0, 1]`, evaluated without cancellation.
    fn deficit(self, a: f64) -> f64 {
        match self {
            KernelFamily::Parzen if a <= 0.5 => 6.0 * a * a * (1.0 - a),
            KernelFamily::Parzen => 1.0 - 2.0 * (1.0 - a).powi(3),
            KernelFamily::Bartlett => a,
            KernelFamily::Truncated => 0.0,
            KernelFamily::TukeyHanning => (std::f64::consts::FRAC_PI_2 * a).sin().powi(2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Parzen => "parzen",
            KernelFamily::Bartlett => "bartlett",
            KernelFamily::Truncated => "truncated",
            KernelFamily::TukeyHanning => "tukey-hanning",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "parzen" => Ok(KernelFamily::Parzen),
            "bartlett" => Ok(KernelFamily::Bartlett),
            "truncated" => Ok(KernelFamily::Truncated),
            "tukey-hanning" | "tukey_hanning" | "tukeyhanning" => Ok(KernelFamily::TukeyHanning),
            other => Err(Error::InvalidParameter(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Kernel family with a bandwidth; lag `s` gets weight `ω(s/b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        if !(bandwidth >= 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be finite and nonnegative, got {bandwidth}"
            )));
        }
        Ok(KernelSpec { family, bandwidth })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.family.eval(x)
    }

    /// `ω_n(s) = ω(s/b)`, with `ω_n(0) = 1` for every bandwidth.
    pub fn weight(&self, s: usize) -> f64 {
        if s == 0 {
            1.0
        } else if self.bandwidth == 0.0 {
            0.0
        } else {
            self.family.eval(s as f64 / self.bandwidth)
        }
    }

    /// Largest lag that can carry nonzero weight, `⌊b⌋`.
    pub fn max_lag(&self) -> usize {
        self.bandwidth.floor() as usize
    }

    /// Weights for lags `0..=min(⌊b⌋, limit)`.
    pub fn weights(&self, limit: usize) -> Vec<f64> {
        (0..=self.max_lag().min(limit))
            .map(|s| self.weight(s))
            .collect()
    }
}

/// `b_n = constant · ln n / ln(avg.deg ∨ (1+ε))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthRule {
    pub constant: f64,
    pub epsilon: f64,
}

impl Default for BandwidthRule {
    fn default() -> Self {
        BandwidthRule {
            constant: 2.0,
            epsilon: 0.05,
        }
    }
}

impl BandwidthRule {
    pub fn bandwidth(&self, n: usize, avg_degree: f64) -> f64 {
        self.constant * (n as f64).ln() / avg_degree.max(1.0 + self.epsilon).ln()
    }

    pub fn for_graph(&self, g: &Graph) -> f64 {
        self.bandwidth(g.node_count(), g.average_degree())
    }
}

/// Estimate of `sup_{0<x≤1} |ω(x) − 1| / x^{1+η}` on a log grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularity {
    pub c_estimate: f64,
    pub argmax: f64,
    /// The ratio exceeded [`REGULARITY_THRESHOLD`].
    pub violation: bool,
}

/// Grid check of `|ω(x) − 1| ≤ C|x|^{1+η}` over `x ∈ [1e−16, 1]`.
pub fn kernel_regularity(family: KernelFamily, eta: f64, grid: usize) -> Result<Regularity> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eta must be positive, got {eta}"
        )));
    }
    let grid = grid.max(2);
    let mut best = Regularity {
        c_estimate: 0.0,
        argmax: 1.0,
        violation: false,
    };
    for i in 0..grid {
        let x = 10f64.powf(-16.0 + 16.0 * i as f64 / (grid - 1) as f64);
        let ratio = family.deficit(x).abs() / x.powf(1.0 + eta);
        if ratio > best.c_estimate {
            best.c_estimate = ratio;
            best.argmax = x;
        }
    }
    best.violation = best.c_estimate > REGULARITY_THRESHOLD;
    Ok(best)
}

/// `W[i][j] = ω_n(d(i,j))`, zero across components.
pub fn weight_matrix(g: &Graph, spec: &KernelSpec) -> Result<DMatrix<f64>> {
    let n = g.node_count();
    if n > DENSE_LIMIT {
        return Err(Error::SizeLimit {
            what: "dense weight matrix",
            n,
            limit: DENSE_LIMIT,
        });
    }
    let mut w = DMatrix::zeros(n, n);
    let mut bfs = Bfs::new(n);
    let cap = u32::try_from(spec.max_lag()).unwrap_or(u32::MAX - 1);
    for i in 0..n {
        let layers = bfs.run(g, i, Some(cap));
        for (s, shell) in layers.shells() {
            let v = spec.weight(s);
            for &j in shell {
                let j = j as usize;
                if j >= i {
                    w[(i, j)] = v;
                    w[(j, i)] = v;
                }
            }
        }
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub psd: bool,
}

/// `‖W‖_∞`, the largest absolute row sum.
fn inf_norm(w: &DMatrix<f64>) -> f64 {
    w.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of a symmetric matrix; PSD iff `λ_min ≥ −tol`.
/// The default tolerance is `1e−9·‖W‖_∞`.
pub fn psd_check(w: &DMatrix<f64>, tol: Option<f64>) -> Result<PsdReport> {
    if !w.is_square() {
        return Err(Error::InvalidParameter("matrix is not square".into()));
    }
    let asym = (w - w.transpose()).amax();
    let scale = w.amax().max(1.0);
    if asym > 1e-12 * scale {
        return Err(Error::Asymmetric(asym));
    }
    let tolerance = tol.unwrap_or(1e-9 * inf_norm(w));
    if w.nrows() == 0 {
        return Ok(PsdReport {
            min_eigenvalue: 0.0,
            tolerance,
            psd: true,
        });
    }
    let min_eigenvalue = SymmetricEigen::new(w.clone()).eigenvalues.min();
    Ok(PsdReport {
        min_eigenvalue,
        tolerance,
        psd: min_eigenvalue >= -tolerance,
    })
}

/// Outcome of [`chord_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChordResult {
    pub chord: (usize, usize),
    pub min_eigenvalue: f64,
    pub psd: bool,
}

/// Tries every single-edge addition to `g` and returns the one whose
/// weight matrix has the smallest eigenvalue.
pub fn chord_search(g: &Graph, spec: &KernelSpec) -> Result<Option<ChordResult>> {
    let n = g.node_count();
    let mut best: Option<ChordResult> = None;
    for i in 0..n {
        for j in i + 1..n {
            if g.has_edge(i, j) {
                continue;
            }
            let rep = psd_check(&weight_matrix(&g.with_edge(i, j)?, spec)?, None)?;
            if best.is_none_or(|b| rep.min_eigenvalue < b.min_eigenvalue) {
                best = Some(ChordResult {
                    chord: (i, j),
                    min_eigenvalue: rep.min_eigenvalue,
                    psd: rep.psd,
                });
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::ring;
    use proptest::prelude::*;

    #[test]
    fn kernel_values() {
        use KernelFamily::*;
        assert_eq!(Parzen.eval(0.0), 1.0);
        assert!((Parzen.eval(0.5) - 0.25).abs() < 1e-12);
        let left = 1.0 - 6.0 * 0.25 + 6.0 * 0.125;
        let right = 2.0 * 0.5f64.powi(3);
        assert!((left - right).abs() < 1e-12);
        assert_eq!(Bartlett.eval(1.5), 0.0);
        assert_eq!(Bartlett.eval(0.25), 0.75);
        assert_eq!(Truncated.eval(1.0), 1.0);
        assert_eq!(Truncated.eval(1.0001), 0.0);
        assert!((TukeyHanning.eval(0.5) - 0.5).abs() < 1e-15);
        for f in KernelFamily::ALL {
            assert_eq!(f.eval(f64::INFINITY), 0.0);
            assert_eq!(f.eval(f64::NAN), 0.0);
            assert_eq!(f.to_string().parse::<KernelFamily>().unwrap(), f);
        }
        assert!("gaussian".parse::<KernelFamily>().is_err());
    }

    #[test]
    fn bandwidth_rule() {
        let rule = BandwidthRule::default();
        assert!((rule.bandwidth(1000, 3.0) - 12.575).abs() < 0.005);
        let sparse = rule.bandwidth(500, 0.95);
        assert!((sparse - 2.0 * 500f64.ln() / 1.05f64.ln()).abs() < 1e-12);
        assert!((sparse - 254.7).abs() < 0.05);
        let zero = BandwidthRule {
            constant: 0.0,
            ..rule
        };
        let spec = KernelSpec::new(KernelFamily::Parzen, zero.bandwidth(100, 2.0)).unwrap();
        assert_eq!(spec.weight(0), 1.0);
        assert!((1..5).all(|s| spec.weight(s) == 0.0));
        assert!(KernelSpec::new(KernelFamily::Parzen, -1.0).is_err());
    }

    #[test]
    fn regularity() {
        let t = kernel_regularity(KernelFamily::Truncated, 1.0, 400).unwrap();
        assert_eq!(t.c_estimate, 0.0);
        let p = kernel_regularity(KernelFamily::Parzen, 1.0, 400).unwrap();
        assert!((p.c_estimate - 6.0).abs() < 1e-6 && !p.violation);
        let h = kernel_regularity(KernelFamily::TukeyHanning, 1.0, 400).unwrap();
        assert!((h.c_estimate - std::f64::consts::PI.powi(2) / 4.0).abs() < 1e-6);
        let b = kernel_regularity(KernelFamily::Bartlett, 0.5, 400).unwrap();
        assert!(b.violation);
        assert!(kernel_regularity(KernelFamily::Parzen, 0.0, 10).is_err());
    }

    #[test]
    fn weight_matrix_examples() {
        let spec = KernelSpec::new(KernelFamily::Bartlett, 3.0).unwrap();
        let w = weight_matrix(&ring(4), &spec).unwrap();
        assert_eq!(w[(0, 0)], 1.0);
        assert!((w[(0, 1)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w[(0, 2)] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(w, w.transpose());

        let two = Graph::new(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        let t = weight_matrix(
            &two,
            &KernelSpec::new(KernelFamily::Truncated, 2.0).unwrap(),
        )
        .unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(t[(i, j)], if (i < 3) == (j < 3) { 1.0 } else { 0.0 });
            }
        }
        let e = weight_matrix(&Graph::edgeless(4), &spec).unwrap();
        assert_eq!(e, DMatrix::identity(4, 4));
    }

    #[test]
    fn psd_examples() {
        let spec = KernelSpec::new(KernelFamily::Bartlett, 3.0).unwrap();
        let base = psd_check(&weight_matrix(&ring(8), &spec).unwrap(), None).unwrap();
        assert!(base.psd && base.min_eigenvalue > 0.05);
        let found = chord_search(&ring(8), &spec).unwrap().unwrap();
        assert!(!found.psd);
        assert!(found.min_eigenvalue < -0.1);
        assert!(psd_check(&DMatrix::identity(5, 5), None).unwrap().psd);
        let mut a = DMatrix::identity(2, 2);
        a[(0, 1)] = 0.5;
        assert!(matches!(psd_check(&a, None), Err(Error::Asymmetric(_))));
    }

    proptest! {
        #[test]
        fn kernel_axioms(x in -3.0f64..3.0) {
            for f in KernelFamily::ALL {
                let v = f.eval(x);
                prop_assert!((-1.0..=1.0).contains(&v));
                prop_assert_eq!(v, f.eval(-x));
                if x.abs() > 1.0 {
                    prop_assert_eq!(v, 0.0);
                }
            }
        }
    }
}
