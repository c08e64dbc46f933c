//! `nethac` command-line front end.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use nethac::graph::{fixture, io as graph_io};
use nethac::hac::{self, confidence_interval, MeanMode, Sample};
use nethac::montecarlo::{self, GridSpec, McCell, DESK_MAX_N, DESK_MAX_REPS};
use nethac::netstats::{condition_report, default_m_n, DensenessProfile};
use nethac::{verify, BandwidthRule, Graph, KernelFamily, KernelSpec, ThetaSequence};

#[derive(Parser)]
#[command(name = "nethac", version, about = "Network HAC inference toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denseness statistics and finite-n condition values for a network.
    Stats(StatsArgs),
    /// Network HAC variance estimate for a sample observed on a network.
    Estimate(EstimateArgs),
    /// Draw networks and outcomes from the formation and moving-average models.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo coverage study.
    Mc(McArgs),
    /// Run the verification ledger and print it as JSON.
    Verify(VerifyArgs),
}

/// Kernel and bandwidth selection shared by estimating commands.
#[derive(Args)]
struct KernelArgs {
    /// parzen, bartlett, truncated or tukey-hanning.
    #[arg(long, default_value = "parzen")]
    kernel: KernelFamily,
    #[arg(long, default_value_t = 2.0)]
    bw_constant: f64,
    #[arg(long, default_value_t = 0.05)]
    bw_epsilon: f64,
    /// Explicit bandwidth; overrides the rule.
    #[arg(long)]
    bandwidth: Option<f64>,
}

impl KernelArgs {
    fn bandwidth(&self, g: &Graph) -> f64 {
        self.bandwidth.unwrap_or_else(|| {
            BandwidthRule {
                constant: self.bw_constant,
                epsilon: self.bw_epsilon,
            }
            .for_graph(g)
        })
    }
}

#[derive(Args)]
struct StatsArgs {
    /// Edge-list file, or `fixture:<name>` such as `fixture:ring:8`.
    graph: String,
    /// Dependence coefficients, e.g. `geometric:0.5`; enables the condition report.
    #[arg(long)]
    theta: Option<ThetaSequence>,
    /// Moment order.
    #[arg(long, default_value_t = 8.0)]
    p: f64,
    /// Cap-set radius; defaults to the formation-model rate.
    #[arg(long)]
    m: Option<usize>,
    /// Bandwidth for the HAC condition; defaults to the rule with constant 2.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Exponents for the shell moments.
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    k: Vec<f64>,
    /// Exponent for the cap statistics.
    #[arg(long, default_value_t = 2.0)]
    k_cap: f64,
}

#[derive(Args)]
struct EstimateArgs {
    /// Edge-list file, or `fixture:<name>`.
    graph: String,
    /// CSV with header `y1,...,yv` and one row per node.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Known common mean (comma separated, one entry per column); uses the
    /// uncentred estimator.
    #[arg(long, value_delimiter = ',')]
    known_mean: Option<Vec<f64>>,
    /// Confidence level for the interval reported for scalar samples.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 20240101)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Probability that an edge is missing from the observed network.
    #[arg(long)]
    missing_prob: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct McArgs {
    /// JSON design: a grid (`lambdas`, `ns`, `gammas`, ...), one cell or a list of cells.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Allow designs beyond desk scale.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Directory for `study.csv` and `study.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 20240101)]
    seed: u64,
    /// Multiplier on replication counts.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Design {
    Grid(GridSpec),
    Cells(Vec<McCell>),
    Cell(McCell),
}

fn load_graph(arg: &str) -> Result<Graph> {
    match arg.strip_prefix("fixture:") {
        Some(name) => Ok(fixture(name)?),
        None => graph_io::load_edge_list(Path::new(arg)).with_context(|| format!("reading {arg}")),
    }
}

fn read_sample(path: &Path) -> Result<Sample> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    for (k, h) in headers.iter().enumerate() {
        if h.trim() != format!("y{}", k + 1) {
            bail!("column {} is `{h}`, expected `y{}`", k + 1, k + 1);
        }
    }
    let rows = reader
        .records()
        .enumerate()
        .map(|(r, rec)| {
            rec?.iter()
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .with_context(|| format!("row {}: bad number `{x}`", r + 1))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sample::from_rows(&rows)?)
}

fn write_sample(path: &Path, y: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["y1"])?;
    for x in y {
        w.write_record([format!("{x:e}")])?;
    }
    w.flush()?;
    Ok(())
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn stats(args: StatsArgs) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let m = args.m.unwrap_or_else(|| {
        (default_m_n(g.node_count(), g.average_degree(), 0.05).floor() as usize).max(1)
    });
    let profile = DensenessProfile::new(&g, &args.k, m, args.k_cap);
    let b_n = args
        .bandwidth
        .unwrap_or_else(|| BandwidthRule::default().for_graph(&g));
    let conditions = match &args.theta {
        Some(theta) => Some(condition_report(&g, theta, args.p, m, b_n)?),
        None => None,
    };
    print_json(&json!({ "profile": profile, "conditions": conditions }))
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let mut sample = read_sample(&args.data)?;
    if sample.n() != g.node_count() {
        bail!(
            "sample has {} rows but the network has {} nodes",
            sample.n(),
            g.node_count()
        );
    }
    let mode = match args.known_mean {
        Some(mean) => {
            sample = sample.with_known_mean(mean)?;
            MeanMode::Known
        }
        None => MeanMode::Unknown,
    };
    let spec = KernelSpec::new(args.kernel.kernel, args.kernel.bandwidth(&g))?;
    let result = hac::hac(&g, &sample, &spec, mode)?;
    let (ci, ci_error) = if sample.dim() == 1 {
        match confidence_interval(&sample, result.scalar(), args.level) {
            Ok(ci) => (Some(ci), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    print_json(&json!({
        "n": sample.n(),
        "dim": sample.dim(),
        "kernel": spec.family,
        "bandwidth": spec.bandwidth,
        "mode": mode,
        "mean": sample.mean(),
        "v": result.v_rows(),
        "weights": result.weights,
        "lag_traces": result.lag_traces(),
        "min_eigenvalue": result.min_eigenvalue,
        "psd": result.psd,
        "ci": ci,
        "ci_error": ci_error,
    }))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cell = McCell::new(args.lambda, args.n, args.gamma, args.reps, args.seed);
    cell.validate()?;
    fs::create_dir_all(&args.out)?;
    let mut manifest = Vec::with_capacity(args.reps);
    for rep in 0..args.reps as u64 {
        let draw = montecarlo::draw_rep(&cell, rep)?;
        let network = args.out.join(format!("network_{rep:04}.txt"));
        let sample = args.out.join(format!("sample_{rep:04}.csv"));
        graph_io::save_edge_list(&draw.network.graph, &network)?;
        write_sample(&sample, &draw.sample.column(0))?;
        let observed = match args.missing_prob {
            Some(rho) => {
                let path = args.out.join(format!("observed_{rep:04}.txt"));
                graph_io::save_edge_list(
                    &montecarlo::observed_network(&cell, rep, &draw.network.graph, rho)?,
                    &path,
                )?;
                Some(path)
            }
            None => None,
        };
        manifest.push(json!({
            "rep": rep,
            "network": network,
            "observed": observed,
            "sample": sample,
            "v_true": draw.v_true,
            "summary": draw.summary,
        }));
    }
    let manifest = json!({ "cell": cell, "missing_prob": args.missing_prob, "reps": manifest });
    serde_json::to_writer_pretty(File::create(args.out.join("manifest.json"))?, &manifest)?;
    Ok(())
}

fn mc(args: McArgs) -> Result<()> {
    let design = match &args.config {
        Some(path) => serde_json::from_reader(
            File::open(path).with_context(|| format!("reading {}", path.display()))?,
        )
        .with_context(|| format!("parsing {}", path.display()))?,
        None => Design::Grid(GridSpec::default()),
    };
    let cells = match design {
        Design::Grid(grid) => {
            grid.check_scale(args.full)?;
            grid.cells()
        }
        Design::Cells(cells) => cells,
        Design::Cell(cell) => vec![cell],
    };
    if !args.full
        && cells
            .iter()
            .any(|c| c.reps > DESK_MAX_REPS || c.n > DESK_MAX_N)
    {
        bail!("design exceeds desk scale (reps <= {DESK_MAX_REPS}, n <= {DESK_MAX_N}); pass --full to run it");
    }
    let reports = montecarlo::run_grid(&cells, args.workers)?;
    montecarlo::write_study(&args.out, &reports)?;
    eprintln!("wrote {} cells to {}", reports.len(), args.out.display());
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let ledger = verify::run_ledger(args.seed, args.scale)?;
    let passed = ledger.iter().all(|e| e.passed);
    print_json(&json!({ "passed": passed, "entries": ledger }))?;
    Ok(passed)
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Stats(a) => stats(a)?,
        Command::Estimate(a) => estimate(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Mc(a) => mc(a)?,
        Command::Verify(a) => {
            if !verify(a)? {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
