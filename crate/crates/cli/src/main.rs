//! `rnatreedit`: compare RNA secondary structures as trees.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 unreadable input,
//! 3 bad configuration, 4 internal invariant failure.

mod commands;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "rnatreedit",
    version,
    about = "Tree edit distance with node and edge fusion for RNA structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a structure and print one of its tree encodings.
    Parse(ParseArgs),
    /// Distance between two structures, classical (--l 0) or with fusions.
    Compare(CompareArgs),
    /// Coarse comparison with fusions, then a colour-restricted per-base one.
    Multilevel(MultilevelArgs),
    /// Check a cost model against the metric and fusion conditions.
    Validate(ValidateArgs),
    /// Cross-check the DPs against the brute-force oracles.
    Verify(VerifyArgs),
    /// Tree sizes of every encoding and the fusion path bound.
    Stats(StatsArgs),
    /// Re-validate a JSON report by replaying its scripts.
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Auto,
    Dotbracket,
    Ct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rep {
    B,
    C,
    D,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Args, Clone)]
pub struct InputArgs {
    /// Input format; auto uses the extension, then the content.
    #[arg(long, value_enum, default_value = "auto")]
    pub input_format: InputFormat,
    /// Accept only Watson-Crick pairs.
    #[arg(long)]
    pub strict_pairs: bool,
}

#[derive(Args, Clone)]
pub struct ModelArgs {
    /// `unit`, `structural`, or a path to a key = value model file.
    #[arg(long, default_value = "structural")]
    pub model: String,
    /// Fusion premium; overrides the model's value.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
}

#[derive(Args, Clone)]
pub struct FusionArgs {
    /// Maximum consecutive fusions per node (0 disables fusions).
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    /// Keep paths where an edge fusion follows a node fusion.
    #[arg(long)]
    pub no_prune: bool,
}

#[derive(Args, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ParseArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "d")]
    pub rep: Rep,
    #[command(flatten)]
    pub input_args: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args)]
pub struct CompareArgs {
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    /// File with one whitespace-separated pair of input paths per line.
    #[arg(long, conflicts_with_all = ["a", "b"])]
    pub pairs: Option<PathBuf>,
    /// Worker threads for --pairs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value = "d")]
    pub rep: Rep,
    #[command(flatten)]
    pub input_args: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub fusion: FusionArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CoarseRep {
    C,
    D,
}

#[derive(Args)]
pub struct MultilevelArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Encoding used by the coarse pass.
    #[arg(long, value_enum, default_value = "c")]
    pub coarse: CoarseRep,
    #[command(flatten)]
    pub input_args: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub fusion: FusionArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Injection {
    /// Insertions cost more than deletions.
    AsymmetricInsert,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Largest tree in the sampled checks (the oracles stop at 8).
    #[arg(long, default_value_t = 8)]
    pub max_nodes: usize,
    /// Largest tree in the exhaustive checks.
    #[arg(long, default_value_t = 4)]
    pub exhaustive_nodes: usize,
    /// Number of sampled pairs (and triples for the triangle inequality).
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replace the model by a deliberately broken one.
    #[arg(long, value_enum)]
    pub inject: Option<Injection>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub fusion: FusionArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args)]
pub struct StatsArgs {
    pub input: PathBuf,
    /// Fusion bound used for the path-count figure.
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    #[command(flatten)]
    pub input_args: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args)]
pub struct CheckArgs {
    pub report: PathBuf,
}

/// Failure classes, each with its exit code.
#[derive(Debug)]
pub enum Failure {
    Mismatch(String),
    Input(String),
    Config(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Input(_) => 2,
            Failure::Config(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Mismatch(m) | Failure::Input(m) | Failure::Config(m) | Failure::Internal(m) => m,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RNATREEDIT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Parse(a) => commands::parse(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Multilevel(a) => commands::multilevel(&a),
        Command::Validate(a) => commands::validate(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::Check(a) => commands::check(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
