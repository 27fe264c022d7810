mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "qwalk", version, about = "Quantum-walk similarity, matching and classification for graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Graph-level divergence between two graphs.
    Sim {
        graph_a: PathBuf,
        graph_b: PathBuf,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Node-pair divergence tables and the optimal node assignment.
    Match {
        graph_a: PathBuf,
        graph_b: PathBuf,
        #[command(flatten)]
        walk: WalkArgs,
        /// Comma-separated finite horizons; `inf` selects the infinite one.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["time", "infinite"])]
        times: Option<Vec<String>>,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[arg(long, value_enum, default_value_t = Cost::OneMinusQjsd)]
        cost: Cost,
        #[arg(long, value_enum, default_value_t = Topology::Single)]
        pair_topology: Topology,
        /// Weight multiplier on the scored pair's edge for `--pair-topology full`.
        #[arg(long, default_value_t = 2.0)]
        boost: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Mean divergence between a graph and its edge-noise variants.
    NoiseCurve {
        graph: PathBuf,
        #[arg(long)]
        max_k: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// kNN train/test evaluation over a `path,label` manifest.
    Classify {
        manifest: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        split: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = MetricArg::Xor)]
        metric: MetricArg,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
        /// Also write the confusion matrix as CSV to this file.
        #[arg(long)]
        confusion_csv: Option<PathBuf>,
    },
    /// Random prototypes plus edge-noise variants and a manifest.
    Gen {
        /// Prototype sizes; one class per entry.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        noise: usize,
        #[arg(long, default_value_t = 0)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
struct WalkArgs {
    #[arg(long, value_enum, default_value_t = HamiltonianArg::Laplacian)]
    hamiltonian: HamiltonianArg,
    /// Bandwidth of the attribute kernel on inter-graph edges.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Attribute sidecar for the first (or only) graph.
    #[arg(long)]
    attr_a: Option<PathBuf>,
    /// Attribute sidecar for the second graph.
    #[arg(long)]
    attr_b: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct HorizonArgs {
    /// Finite averaging horizon T.
    #[arg(long, conflicts_with = "infinite")]
    time: Option<f64>,
    /// Average over infinite time (the default).
    #[arg(long)]
    infinite: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum HamiltonianArg {
    Laplacian,
    Adjacency,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Cost {
    OneMinusQjsd,
    Raw,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Topology {
    Single,
    Full,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MetricArg {
    Xor,
    WeightedXor,
    Qjsd,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QWALK_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::domain(format!("QWALK_THREADS must be a positive integer, got '{raw}'")))?;
    if !qwalk_core::par::configure_threads(threads) {
        log::warn!("QWALK_THREADS ignored: no parallel support or pool already running");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<String, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Sim { graph_a, graph_b, walk, horizon, format } => {
            commands::sim(&graph_a, &graph_b, &walk, &horizon, format)
        }
        Command::Match {
            graph_a,
            graph_b,
            walk,
            times,
            horizon,
            cost,
            pair_topology,
            boost,
            format,
        } => commands::matching(commands::MatchArgs {
            graph_a: &graph_a,
            graph_b: &graph_b,
            walk: &walk,
            times: times.as_deref(),
            horizon: &horizon,
            cost,
            topology: pair_topology,
            boost,
            format,
        }),
        Command::NoiseCurve { graph, max_k, trials, seed, walk, horizon, format } => {
            commands::noise_curve(&graph, max_k, trials, seed, &walk, &horizon, format)
        }
        Command::Classify { manifest, k, split, seed, metric, walk, horizon, confusion_csv } => {
            commands::classify(&manifest, k, split, seed, metric, &walk, &horizon, confusion_csv.as_deref())
        }
        Command::Gen { n, p, noise, count, seed, out } => commands::gen(&n, p, noise, count, seed, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qwalk: {e}");
            ExitCode::from(e.code)
        }
    }
}
