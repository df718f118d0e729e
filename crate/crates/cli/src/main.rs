//! `netreinforce`: reinforce, analyse and simulate networks from the shell.
//!
//! Exit codes: 0 ok, 1 usage, 2 data error, 3 validation failure.

mod commands;
mod input;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use netreinforce::reinforce::FaultKind;
use netreinforce::reliability::DEFAULT_TARGET;
use netreinforce::simulate::Adversary;
use netreinforce::sweep::Partitioner;

use input::{parse_list, Method};

/// A comma separated list parsed as one value; the alias keeps clap from
/// treating it as a repeated flag.
pub type List = Vec<usize>;

#[derive(Parser, Debug)]
#[command(name = "netreinforce", version, about = "Node-replication reinforcement of networks against random faults")]
pub struct Cli {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Size, connectivity and degree summary of a network.
    Info {
        /// GraphML or JSON file, or `path:N`, `hypercube:Q:D[:wrap]`.
        input: String,
    },
    /// Split a network into regions.
    Partition {
        input: String,
        #[command(flatten)]
        regions: RegionArgs,
    },
    /// Build the replicated network.
    Reinforce {
        input: String,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        regions: RegionArgs,
    },
    /// Failure probability and tolerable fault rate of a design.
    Analyze {
        /// Network; omit when giving `--sizes`.
        input: Option<String>,
        /// Region sizes, comma separated.
        #[arg(long, value_parser = parse_list)]
        sizes: Option<List>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        regions: RegionArgs,
        /// Per-node fault probability to evaluate.
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long, default_value_t = DEFAULT_TARGET)]
        target: f64,
    },
    /// Overhead against tolerable fault rate over a grid of region caps.
    Sweep(SweepArgs),
    /// Run a routing program on a reinforced network under injected faults.
    Simulate(SimulateArgs),
    /// Re-derive sweep rows and check them against Monte Carlo runs.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 1)]
    pub f: usize,
    /// `om`/`omission` or `byz`/`byzantine`.
    #[arg(long, default_value = "om")]
    pub model: FaultKind,
}

#[derive(Args, Debug, Clone)]
pub struct RegionArgs {
    /// Partition JSON `{"regions": [[...], ...]}`; overrides `--method`.
    #[arg(long)]
    pub partition: Option<String>,
    /// spectral, brute-force, auto, singleton, whole or hypercube:H.
    #[arg(long, default_value = "auto")]
    pub method: Method,
    #[arg(long)]
    pub max_region: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    pub input: String,
    /// Fault parameters, e.g. `0,1` or `1..3`; 0 adds the unreinforced network.
    #[arg(long, value_parser = parse_list, default_value = "0,1")]
    pub f: List,
    /// Region caps; defaults to powers of two up to the node count, plus the node count.
    #[arg(long, value_parser = parse_list)]
    pub grid: Option<List>,
    #[arg(long, default_value = "om")]
    pub model: FaultKind,
    #[arg(long, default_value_t = DEFAULT_TARGET)]
    pub target: f64,
    #[arg(long, default_value = "auto")]
    pub partitioner: Partitioner,
    /// Copy counts for the disjoint-replication baseline.
    #[arg(long, value_parser = parse_list, default_value = "")]
    pub naive: List,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    pub input: String,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub regions: RegionArgs,
    #[arg(long, default_value_t = 0.01)]
    pub p: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Defaults to the program's own horizon.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// crash-silent, corrupt-all or corrupt-random[:SEED]; defaults to the worst case for the model.
    #[arg(long)]
    pub adversary: Option<Adversary>,
    /// flood, flood:NODE or paths:FILE.
    #[arg(long, default_value = "flood")]
    pub program: String,
    /// Run one fixed scenario from JSON instead of sampling.
    #[arg(long)]
    pub scenario: Option<String>,
    /// JSON-lines trace of a `--scenario` run.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also enumerate every fault set (at most 20 copies).
    #[arg(long)]
    pub exhaustive: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    /// Sweep CSV to check instead of a fresh sweep.
    #[arg(long)]
    pub rows: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Simulate every row at this fault rate instead of its own max_p.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value = "flood")]
    pub program: String,
}

/// An error that carries its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> anyhow::Error {
        anyhow::Error::new(Failure {
            code: 1,
            message: message.into(),
        })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return f.code;
    }
    match err.downcast_ref::<netreinforce::Error>() {
        Some(netreinforce::Error::Argument(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli, &out) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            match &out.failure {
                None => ExitCode::SUCCESS,
                Some(why) => {
                    eprintln!("validation failed: {why}");
                    ExitCode::from(3)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(cli: &Cli, out: &commands::Output) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, &out.bytes)?,
        None => std::io::stdout().write_all(&out.bytes)?,
    }
    Ok(())
}
