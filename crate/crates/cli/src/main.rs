mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lislnet_core::matching::MatchingMode;

#[derive(Parser)]
#[command(
    name = "lislnet",
    version,
    about = "LISL topology, routing and rate allocation for LEO constellations"
)]
struct Cli {
    /// Worker threads for parallel stages (defaults to all cores).
    #[arg(long, env = "LISLNET_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one seeded snapshot and write it as JSON.
    Snapshot(SnapshotArgs),
    /// Run a method on a snapshot and write metrics JSON.
    Solve(SolveArgs),
    /// Write a directory of seeded snapshots plus a manifest.
    ExportDataset(ExportArgs),
    /// Evaluate the dual function and subgradient at given multipliers.
    Subgrad(SubgradArgs),
    /// Estimate coherent time for one or more threshold ratios (CSV).
    Coherence(CoherenceArgs),
    /// Sweep one scenario parameter across methods and seeds (CSV).
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SnapshotArgs {
    #[arg(long)]
    config: PathBuf,
    /// Seconds after the scenario T0.
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides the configured satellite count.
    #[arg(long)]
    satellites: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodName {
    Mrate,
    Grid,
    Rand,
    Sate,
    Ladu,
    Deepladu,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatchingArg {
    Greedy,
    Exact,
    Blossom,
}

impl From<MatchingArg> for MatchingMode {
    fn from(m: MatchingArg) -> Self {
        match m {
            MatchingArg::Greedy => MatchingMode::Greedy,
            MatchingArg::Exact => MatchingMode::Exact,
            MatchingArg::Blossom => MatchingMode::Blossom,
        }
    }
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Scenario config whose solver section supplies defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long)]
    step_decay: Option<f64>,
    #[arg(long)]
    initial_lambda: Option<f64>,
    #[arg(long, value_enum)]
    matching: Option<MatchingArg>,
    /// Seed of the random-matching baseline.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    snapshot: PathBuf,
    #[arg(long, value_enum)]
    method: MethodName,
    /// Multipliers JSON for `deepladu`.
    #[arg(long)]
    lambda: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Re-evaluate the solution on the constellation after the solve time has elapsed.
    #[arg(long)]
    evolve: bool,
    /// Elapsed time for `--evolve` in seconds instead of the measured solve time.
    #[arg(long, requires = "evolve")]
    elapsed: Option<f64>,
    /// Also write the solution JSON here.
    #[arg(long)]
    solution_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SubgradArgs {
    #[arg(long)]
    snapshot: PathBuf,
    #[arg(long)]
    lambda: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    matching: MatchingArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CoherenceArgs {
    #[arg(long)]
    config: PathBuf,
    /// Threshold ratios in (0, 1).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.999, 0.99])]
    tr: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Longest elapsed time examined (s).
    #[arg(long, default_value_t = 100.0)]
    horizon: f64,
    /// Search resolution (s).
    #[arg(long, default_value_t = 0.01)]
    resolution: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepAxis {
    /// Terminals per satellite.
    Lcts,
    /// Field-of-regard half-angle in degrees.
    Theta,
    /// Pointing jitter standard deviation (rad).
    Jitter,
    /// Beam divergence half-angle (rad).
    Divergence,
    /// Satellites per snapshot.
    Satellites,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    axis: SweepAxis,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    values: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![MethodName::Mrate, MethodName::Ladu])]
    methods: Vec<MethodName>,
    /// Snapshots per value.
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    /// Master seed for snapshot draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Snapshot(a) => commands::snapshot(a),
        Command::Solve(a) => commands::solve(a),
        Command::ExportDataset(a) => commands::export_dataset(a),
        Command::Subgrad(a) => commands::subgrad(a),
        Command::Coherence(a) => commands::coherence(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
