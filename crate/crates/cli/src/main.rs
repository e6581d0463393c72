use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use xbridge::commands::{self, Stage};
use xbridge::config::{exit_code_for, Config};

/// Batch reconstruction of hidden cross-chain transaction pairs: synthetic
/// bridge simulation, ABI decoding, categorization, identifier inference and
/// examination, pairing, and evaluation.
#[derive(Parser)]
#[command(name = "xbridge", version, about)]
struct Cli {
    /// JSON run configuration (params, lexicon path, provider endpoint,
    /// scenario, sweep grid).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory stage artifacts are read from and written to.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic two-chain bridge dataset with ground truth.
    Simulate,
    /// Decode raw transactions and logs into instances using the ABI files.
    Decode {
        /// Reject non-canonical encodings instead of flagging them.
        #[arg(long)]
        strict: bool,
        /// Drop undecodable logs instead of keeping placeholder nodes.
        #[arg(long)]
        drop_unknown: bool,
    },
    /// Group instances into categories by exact field-set equality.
    Categorize,
    /// Propose candidate quintuples per category.
    Infer,
    /// Validate candidates against asset flows and cross-chain evidence.
    Examine,
    /// Match source and destination instances under the pairing rules.
    Pair,
    /// Score pairs against ground truth; optionally run baselines.
    Evaluate,
    /// Re-run pairing across a timewindow × fee_rate grid.
    Sweep,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let stage = Stage::new(&config, cli.out.clone());
    match cli.command {
        Command::Simulate => commands::cmd_simulate(&stage),
        Command::Decode {
            strict,
            drop_unknown,
        } => commands::cmd_decode(&stage, strict, drop_unknown),
        Command::Categorize => commands::cmd_categorize(&stage),
        Command::Infer => commands::cmd_infer(&stage),
        Command::Examine => commands::cmd_examine(&stage),
        Command::Pair => commands::cmd_pair(&stage),
        Command::Evaluate => commands::cmd_evaluate(&stage),
        Command::Sweep => commands::cmd_sweep(&stage),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}
