//! `precsched`: generate instances, schedule them, and check the results.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use precsched::rational;
use precsched::Rational;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  validation or verification failure
  2  usage error or unreadable input
  3  an internal size or search cap was hit";

#[derive(Parser, Debug)]
#[command(name = "precsched", version, about = "Precedence-constrained scheduling toolkit", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate an instance.
    #[command(subcommand, after_help = EXIT_CODES)]
    Gen(GenCommand),
    /// Run a scheduler and write the schedule plus a run manifest.
    #[command(after_help = EXIT_CODES)]
    Schedule(ScheduleArgs),
    /// Check a schedule against an instance; exits 1 on any violation.
    #[command(after_help = EXIT_CODES)]
    Validate(ValidateArgs),
    /// Exact optimum makespan per model, or exact minimum discard.
    #[command(after_help = EXIT_CODES)]
    Oracle(OracleArgs),
    /// Model-gap table: optimum under each model and their ratios.
    #[command(after_help = EXIT_CODES)]
    Gaps(GapsArgs),
    /// Check the lifted constraints of the closed-form tree solution.
    #[command(name = "verify-sa", after_help = EXIT_CODES)]
    VerifySa(VerifySaArgs),
    /// Write the time-indexed LP, optionally lifted, in LP text format.
    #[command(name = "export-lp", after_help = EXIT_CODES)]
    ExportLp(ExportLpArgs),
    /// Merge run manifests into one comparison table.
    #[command(after_help = EXIT_CODES)]
    Report(ReportArgs),
}

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    /// Model-gap family instance.
    Gap {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Machines for AB, long-job size for BC.
        #[arg(long)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Binary-tree single-machine instance with `L` levels below the root.
    Tree {
        #[arg(long = "L")]
        l: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deadline instance built around a hidden feasible placement.
    Witness {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        intervals: usize,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=8))]
        machines: u64,
        #[arg(long, default_value_t = 4)]
        interval_len: usize,
        /// Also write the hidden placement here. It respects windows and
        /// machine availability but may migrate.
        #[arg(long)]
        witness_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random DAG; edges only go from lower to higher job index.
    Dag {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        jobs: usize,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
        max_size: u32,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        machines: u64,
        #[arg(long, default_value_t = 25, value_parser = clap::value_parser!(u32).range(0..=100))]
        edge_percent: u32,
        /// Uniform communication delay on every edge.
        #[arg(long, default_value_t = 0)]
        delay: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyArg {
    #[value(name = "AB", alias = "ab")]
    Ab,
    #[value(name = "BC", alias = "bc")]
    Bc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Graham,
    EdfEct,
    EdfEctComm,
    Hierarchy,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    NoDelay,
    Delay,
}

impl From<ModeArg> for precsched::Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::NoDelay => precsched::Mode::NoDelay,
            ModeArg::Delay => precsched::Mode::Delay,
        }
    }
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
pub struct HierarchyOpts {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=3))]
    pub k: u32,
    #[arg(long, default_value = "1/4", value_parser = parse_rational)]
    pub delta: Rational,
    #[arg(long, default_value = "1/2", value_parser = parse_rational)]
    pub epsilon: Rational,
    #[arg(long, default_value_t = 256)]
    pub level_budget: usize,
    /// Integral schedules in the mixture.
    #[arg(long, default_value_t = 4)]
    pub samples: usize,
    /// Solve the lifted LP exactly at this level instead of using a mixture.
    #[arg(long, conflicts_with = "samples")]
    pub exact_level: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    /// Instance JSON; a deadline instance for the EDF algorithms.
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub algo: Algorithm,
    #[arg(long, value_enum, default_value = "no-delay")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub hierarchy: HierarchyOpts,
    /// Schedule JSON; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
    #[arg(long, value_enum, default_value = "no-delay")]
    pub mode: ModeArg,
    /// Read the instance as a deadline instance and also check windows.
    #[arg(long)]
    pub deadline: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelArg {
    A,
    B,
    C,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    Slot,
    Sequence,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiscardArg {
    FullJobs,
    PartialAllowed,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Instance JSON for makespan queries.
    #[arg(long, required_unless_present = "smi", conflicts_with = "smi")]
    pub instance: Option<PathBuf>,
    /// Single-machine window instance for the minimum-discard query.
    #[arg(long)]
    pub smi: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    pub model: ModelArg,
    /// Respect communication delays.
    #[arg(long)]
    pub delays: bool,
    #[arg(long, value_enum, default_value = "slot")]
    pub strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "full-jobs")]
    pub discard_mode: DiscardArg,
    #[arg(long, default_value_t = 16)]
    pub max_tasks: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GapsArgs {
    #[arg(long, value_enum, required_unless_present = "instance")]
    pub family: Option<FamilyArg>,
    /// Machines for AB, long-job size for BC.
    #[arg(long, requires = "family")]
    pub m: Option<usize>,
    #[arg(long, conflicts_with = "family")]
    pub instance: Option<PathBuf>,
    /// Also report the first feasible horizon of the LP relaxations.
    #[arg(long)]
    pub lp: bool,
    /// Emit JSON instead of a text table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct VerifySaArgs {
    /// Number of tree levels, L + 1.
    #[arg(long = "L1", value_parser = clap::value_parser!(u32).range(1..))]
    pub l1: u32,
    #[arg(long, value_parser = parse_rational)]
    pub eps_prime: Rational,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub q: u64,
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,
    #[arg(long, required_unless_present = "exhaustive")]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportLpArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub horizon: usize,
    /// Add communication-delay rows.
    #[arg(long)]
    pub comm: bool,
    /// Drop the machine-marginal rows.
    #[arg(long)]
    pub migratory: bool,
    /// Lift to this level first.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub level: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(required = true)]
    pub manifests: Vec<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
