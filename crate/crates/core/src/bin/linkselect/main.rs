use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser)]
#[command(name = "linkselect", version, about = "Packet selection on a rechargeable capacitated link")]
struct Cli {
    /// Worker threads for the parallel parts (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate solution with capacity search.
    Solve(SolveArgs),
    /// Fractional lower bound at a fixed capacity.
    Lp(LpArgs),
    /// Exact optimum by enumeration.
    Exact(ExactArgs),
    /// Build an instance from a subset-sum problem.
    ReduceSubsetSum(ReduceArgs),
    /// Ratio experiment on generated instances; CSV on stdout.
    Bench(BenchArgs),
    /// Multi-link network with a few long packets.
    Network(NetworkArgs),
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, env = "LINKSELECT_EPSILON", default_value_t = 0.1)]
    epsilon: f64,
    /// Print a JSON document instead of the summary.
    #[arg(long)]
    json: bool,
    /// Write the step trace of the chosen capacity as CSV.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Also report the exact optimum (small instances only).
    #[arg(long)]
    with_exact: bool,
}

#[derive(Args)]
struct LpArgs {
    instance: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    capacity: f64,
}

#[derive(Args)]
struct ExactArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = linkselect::oracle::DEFAULT_LIMIT)]
    limit: usize,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    target: u64,
    #[arg(required = false)]
    items: Vec<u64>,
    /// Instance destination; printed to stdout when absent.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    UniformInt,
    UniformReal,
    PowerLaw,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML experiment description; inline flags are ignored when given.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// First seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    count: u64,
    #[arg(long, default_value_t = 10)]
    t: usize,
    #[arg(long, value_enum, default_value_t = Dist::UniformInt)]
    dist: Dist,
    #[arg(long, default_value_t = 1.0)]
    lo: f64,
    #[arg(long, default_value_t = 20.0)]
    hi: f64,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    p_right: f64,
    #[arg(long, default_value_t = 1.0)]
    f: f64,
    #[arg(long, default_value_t = 0.0)]
    m: f64,
    #[arg(long, env = "LINKSELECT_EPSILON")]
    epsilon: Option<f64>,
    #[arg(long)]
    oracle_limit: Option<usize>,
    /// Also write a gnuplot script plotting the CSV at `--csv-name`.
    #[arg(long, value_name = "PATH")]
    gnuplot: Option<PathBuf>,
    #[arg(long, default_value = "ratios.csv")]
    csv_name: String,
}

#[derive(Args)]
struct NetworkArgs {
    network: PathBuf,
    #[arg(long, env = "LINKSELECT_EPSILON", default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = linkselect::extensions::network::DEFAULT_LONG_LIMIT)]
    long_limit: usize,
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    }
    let result = match cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Lp(a) => commands::lp(a),
        Command::Exact(a) => commands::exact(a),
        Command::ReduceSubsetSum(a) => commands::reduce(a),
        Command::Bench(a) => commands::bench(a),
        Command::Network(a) => commands::network(a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
