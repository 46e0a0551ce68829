//! `pswg`: generate graphs, trace single routes, run sweeps and verification
//! suites.
//!
//! Exit status: 0 on success, 1 when a verification check fails, 2 on usage,
//! parameter or I/O errors.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::json;

use pswg::analysis::{self, FitModel, HopBudget, RecordStatus, SweepConfig};
use pswg::genmodel::{self, io as graph_io, DegreeConvention, Graph, ModelParams, NodeId};
use pswg::routing::{self, Algorithm};
use pswg::verify::{self, Suite, VerifyOptions};

const ROUTE_STREAM: u64 = 0x0072_6f75_7465;

#[derive(Parser)]
#[command(name = "pswg", version, about = "Poisson small-world graphs on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one graph and print a JSON summary.
    Generate(GenerateArgs),
    /// Route one message and print the result as JSON.
    Route(RouteArgs),
    /// Route random pairs over a grid of sizes and write one CSV row per trial.
    Sweep(SweepArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Expected number of nodes.
    #[arg(long)]
    n: Option<u64>,
    /// Local radius constant: r_n = sqrt(c ln n).
    #[arg(long, default_value_t = 4.0)]
    c: f64,
    /// Shortcut exponent.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Target mean shortcut degree.
    #[arg(long, default_value_t = 1.0)]
    dbar: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Convention::Incident)]
    degree_convention: Convention,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        let n = self.n.ok_or_else(|| anyhow!("--n is required"))?;
        Ok(ModelParams::with_convention(
            n,
            self.c,
            self.alpha,
            self.dbar,
            self.seed,
            self.degree_convention.into(),
        )?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Incident,
    Generated,
}

impl From<Convention> for DegreeConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Incident => DegreeConvention::Incident,
            Convention::Generated => DegreeConvention::Generated,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    #[value(name = "approx_greedy", alias = "approx-greedy")]
    ApproxGreedy,
    #[value(name = "pure_greedy", alias = "pure-greedy")]
    PureGreedy,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::ApproxGreedy => Algorithm::ApproxGreedy,
            Algo::PureGreedy => Algorithm::PureGreedy,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fit {
    Polylog,
    Powerlaw,
}

impl From<Fit> for FitModel {
    fn from(f: Fit) -> Self {
        match f {
            Fit::Polylog => FitModel::PolyLog,
            Fit::Powerlaw => FitModel::PowerLaw,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Model,
    Routing,
    Scaling,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Model => Suite::Model,
            SuiteArg::Routing => Suite::Routing,
            SuiteArg::Scaling => Suite::Scaling,
            SuiteArg::All => Suite::All,
        }
    }
}

/// A node id or `random`.
#[derive(Clone, Copy, Debug)]
enum NodeArg {
    Random,
    Id(NodeId),
}

impl FromStr for NodeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "random" {
            return Ok(NodeArg::Random);
        }
        s.parse()
            .map(NodeArg::Id)
            .map_err(|_| format!("expected a node id or `random`, got `{s}`"))
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Write the graph in the versioned text format.
    #[arg(long)]
    graph_out: Option<PathBuf>,
    /// Write the summary here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RouteArgs {
    /// Read the graph from a file instead of generating it from the model flags.
    #[arg(long)]
    graph_in: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Algo::ApproxGreedy)]
    algo: Algo,
    #[arg(long, default_value = "random")]
    source: NodeArg,
    #[arg(long, default_value = "random")]
    dest: NodeArg,
    /// Maximum number of hops (default 10 N).
    #[arg(long)]
    hop_budget: Option<usize>,
    /// Emit one line per hop: `hop_index from to kind r_before r_after dist_to_t`.
    #[arg(long)]
    trace: bool,
    /// Write the hop trace here instead of standard error.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated, strictly increasing sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    n_grid: Vec<u64>,
    #[arg(long, default_value_t = 4.0)]
    c: f64,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    dbar: f64,
    /// First graph seed; seeds run from here upwards.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Convention::Incident)]
    degree_convention: Convention,
    /// Graphs per size.
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    /// Routed pairs per graph.
    #[arg(long, default_value_t = 20)]
    pairs: usize,
    #[arg(long, value_enum, default_value_t = Algo::ApproxGreedy)]
    algo: Algo,
    #[arg(long)]
    hop_budget: Option<usize>,
    /// Fit mean hops and print the fit as JSON on standard output.
    #[arg(long, value_enum)]
    fit: Option<Fit>,
    /// Write records here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::Model)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 4096)]
    n: u64,
    #[arg(long, default_value_t = 4.0)]
    c: f64,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    dbar: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Route(args) => cmd_route(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode> {
    let params = args.model.params()?;
    let graph = genmodel::generate(&params);
    if let Some(path) = &args.graph_out {
        let mut w = output(Some(path))?;
        graph_io::write_graph(&graph, &mut w).with_context(|| format!("cannot write {}", path.display()))?;
        w.flush()?;
    }
    let summary = json!({
        "n": params.n(),
        "seed": params.seed(),
        "nodes": graph.len(),
        "local_edges": graph.local_adjacency().edge_count(),
        "shortcuts": graph.shortcut_adjacency().edge_count(),
        "mean_shortcut_degree": graph.mean_shortcut_degree(),
        "local_radius": params.local_radius(),
        "shortcut_range": params.shortcut_range(),
        "a_n": params.a_n(),
    });
    let mut w = output(args.out.as_deref())?;
    writeln!(w, "{summary}")?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn load_graph(path: &Path) -> Result<Graph> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    graph_io::read_graph(BufReader::new(file)).with_context(|| format!("cannot read graph {}", path.display()))
}

fn cmd_route(args: RouteArgs) -> Result<ExitCode> {
    let graph = match &args.graph_in {
        Some(path) => load_graph(path)?,
        None if args.model.n.is_some() => genmodel::generate(&args.model.params()?),
        None => bail!("either --graph-in or --n is required"),
    };
    if graph.is_empty() {
        bail!("graph has no nodes");
    }
    let mut rng = genmodel::derived_rng(args.model.seed, ROUTE_STREAM);
    let mut pick = |arg: NodeArg| -> Result<NodeId> {
        match arg {
            NodeArg::Random => Ok(rng.random_range(0..graph.len()) as NodeId),
            NodeArg::Id(id) if (id as usize) < graph.len() => Ok(id),
            NodeArg::Id(id) => bail!("node {id} out of range (graph has {} nodes)", graph.len()),
        }
    };
    let s = pick(args.source)?;
    let t = pick(args.dest)?;
    let budget = args.hop_budget.unwrap_or_else(|| routing::default_hop_budget(&graph));
    let res = routing::route(&graph, args.algo.into(), s, t, budget)?;
    if args.trace {
        let mut w: Box<dyn Write> = match &args.out {
            Some(_) => output(args.out.as_deref())?,
            None => Box::new(io::stderr().lock()),
        };
        for hop in &res.trace {
            writeln!(w, "{hop}")?;
        }
        w.flush()?;
    }
    println!("{}", serde_json::to_string(&res)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let config = SweepConfig {
        n_grid: args.n_grid.clone(),
        alpha: args.alpha,
        c: args.c,
        dbar: args.dbar,
        convention: args.degree_convention.into(),
        base_seed: args.seed,
        seeds_per_n: args.seeds,
        pairs_per_graph: args.pairs,
        algorithm: args.algo.into(),
        hop_budget: args.hop_budget.map_or(HopBudget::TenTimesNodes, HopBudget::Fixed),
        ..SweepConfig::default()
    };
    let outcome = analysis::run_sweep(&config)?;
    {
        let mut w = output(args.out.as_deref())?;
        match args.format {
            Format::Csv => analysis::write_csv(&outcome.records, &mut w)?,
            Format::Json => writeln!(w, "{}", serde_json::to_string(&outcome.records)?)?,
        }
        w.flush()?;
    }
    for s in analysis::summarize(&outcome.records) {
        log::info!(
            "n={}: {}/{} delivered, mean hops {:.3}, failure rate {:.4}",
            s.n,
            s.delivered,
            s.trials,
            s.mean_hops,
            s.routing_failure_rate()
        );
    }
    if !outcome.violations.is_empty() {
        log::warn!("{} routing invariant violations", outcome.violations.len());
    }
    if let Some(fit) = args.fit {
        let report = analysis::fit_scaling(&outcome.records, fit.into())?;
        let mut value = serde_json::to_value(&report)?;
        if let Some(th) = config.theoretical_threshold() {
            value["threshold"] = json!(th);
        }
        println!("{value}");
    }
    let all_failed = !outcome.records.is_empty()
        && outcome
            .records
            .iter()
            .all(|r| matches!(r.status, RecordStatus::GenerationError | RecordStatus::NoEligiblePair));
    if all_failed {
        bail!("every trial failed before routing (see the status column)");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let opts = VerifyOptions {
        n: args.n,
        c: args.c,
        alpha: args.alpha,
        dbar: args.dbar,
        seed: args.seed,
    };
    let checks = verify::run_suite(args.suite.into(), &opts)?;
    match args.format {
        Format::Json => println!("{}", serde_json::to_string(&checks)?),
        Format::Csv => {
            for c in &checks {
                println!("{c}");
            }
        }
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failed checks: {}", failed.join("; "));
        Ok(ExitCode::from(1))
    }
}
