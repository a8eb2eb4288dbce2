use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fcoupling::coupling::{CouplingConfig, PiPolicy};
use fcoupling::params::{GMode, DEFAULT_DELTA, DEFAULT_EPSILON};
use fcoupling::pattern::PatternSpec;
use fcoupling::Pattern;
use fcoupling_harness::{run_experiment, write_outputs, Experiment, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(name = "fcoupling", version, about = "Coupling experiments for random graph and F-graph processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pattern report and window parameters; with --pi, also the hat-view presence check
    Analyze(Common),
    /// Static coupling of H(n, pi) with G(n, p)
    StaticCouple(Common),
    /// Critical window of the F-graph process via the F-graph / r-uniform coupling
    Window(Common),
    /// Coupled u-graph and F-graph processes and the embedding chain
    ProcessCouple(Common),
    /// Factors at the u-graph hitting time and matchings at the F-graph hitting time
    Factor(Common),
    /// Low-degree vertices of H lying in extra copies
    LemmaLowdeg(Common),
}

#[derive(Args)]
struct Common {
    /// Pattern file: {"u": .., "r": .., "edges": [[..], ..]}
    #[arg(long)]
    pattern: PathBuf,
    /// Vertex counts, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// default, log-log or unit
    #[arg(long, default_value = "default")]
    g_mode: String,
    /// Output prefix; writes <out>.csv and <out>.json
    #[arg(long)]
    out: PathBuf,
    /// Also write <out>.dat for gnuplot
    #[arg(long)]
    gnuplot: bool,
    /// Fixed pi instead of pi+ (static-couple, lemma-lowdeg, analyze)
    #[arg(long)]
    pi: Option<f64>,
    /// Fixed p paired with --pi
    #[arg(long)]
    p: Option<f64>,
    /// exact or hybrid
    #[arg(long, default_value = "exact")]
    policy: String,
    #[arg(long)]
    node_budget: Option<u64>,
    #[arg(long)]
    cluster_cap: Option<usize>,
    /// Gibbs sweeps per hybrid estimate; 0 uses the product estimate
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    b2_budget: Option<u64>,
    #[arg(long)]
    factor_budget: Option<u64>,
}

fn config(experiment: Experiment, c: Common) -> Result<(ExperimentConfig, PathBuf, bool), HarnessError> {
    let text = std::fs::read_to_string(&c.pattern)
        .map_err(|e| HarnessError::Invalid(format!("cannot read {}: {e}", c.pattern.display())))?;
    let spec: PatternSpec =
        serde_json::from_str(&text).map_err(|e| HarnessError::Invalid(format!("bad pattern file: {e}")))?;
    let pattern = Pattern::from_spec(&spec)?;
    let g_mode: GMode = c.g_mode.parse().map_err(|_| HarnessError::Invalid(format!("unknown g mode {}", c.g_mode)))?;
    let mut coupling = CouplingConfig::default();
    coupling.policy = match c.policy.as_str() {
        "exact" => PiPolicy::Exact,
        "hybrid" => PiPolicy::Hybrid,
        other => return Err(HarnessError::Invalid(format!("unknown policy {other}"))),
    };
    coupling.node_budget = c.node_budget.unwrap_or(coupling.node_budget);
    coupling.cluster_cap = c.cluster_cap.unwrap_or(coupling.cluster_cap);
    coupling.sweeps = c.sweeps.unwrap_or(coupling.sweeps);

    let mut cfg = ExperimentConfig::new(experiment, pattern, c.n);
    cfg.replicas = c.replicas;
    cfg.seed = c.seed;
    cfg.delta = c.delta;
    cfg.epsilon = c.epsilon;
    cfg.g_mode = g_mode;
    cfg.coupling = coupling;
    cfg.pi = c.pi;
    cfg.p = c.p;
    cfg.b2_budget = c.b2_budget.unwrap_or(cfg.b2_budget);
    cfg.factor_budget = c.factor_budget.unwrap_or(cfg.factor_budget);
    Ok((cfg, c.out, c.gnuplot))
}

fn run(cli: Cli) -> Result<usize, HarnessError> {
    let (exp, common) = match cli.command {
        Command::Analyze(c) => (Experiment::Analyze, c),
        Command::StaticCouple(c) => (Experiment::StaticCouple, c),
        Command::Window(c) => (Experiment::Window, c),
        Command::ProcessCouple(c) => (Experiment::ProcessCouple, c),
        Command::Factor(c) => (Experiment::Factor, c),
        Command::LemmaLowdeg(c) => (Experiment::LemmaLowdeg, c),
    };
    let (cfg, out, gnuplot) = config(exp, common)?;
    let output = run_experiment(&cfg)?;
    write_outputs(&output, &out, gnuplot)?;
    for w in output.summary["warnings"].as_array().into_iter().flatten() {
        eprintln!("warning: {}", w.as_str().unwrap_or_default());
    }
    Ok(output.inconclusive)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(k) => {
            eprintln!("{k} replicas inconclusive under the search budgets");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
