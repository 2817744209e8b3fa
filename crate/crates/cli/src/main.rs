use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wsdkit_cli::commands;
use wsdkit_cli::config::{Overrides, PipelineConfig, Split};
use wsdkit_cli::error::CliError;

#[derive(Parser)]
#[command(name = "wsdkit", version, about = "Full-inventory word sense disambiguation pipeline")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse WordNet and report its size.
    BuildInventory,
    /// Average annotated contextual vectors into a sense store.
    Bootstrap,
    /// Fill every inventory sense from synset, hypernym and lexname means.
    Propagate,
    /// Write the per-sense gloss token plan for the embedding provider.
    GlossPlan,
    /// Concatenate sense and gloss embeddings.
    GlossMerge,
    /// Nearest-neighbour disambiguation of a corpus.
    Disambiguate,
    /// Similarity features for a WiC split.
    WicFeatures {
        #[arg(long, value_enum, default_value = "train")]
        split: Split,
    },
    /// Fit logistic regression on the training features.
    WicTrain,
    /// Classify a WiC split.
    WicPredict {
        #[arg(long, value_enum, default_value = "dev")]
        split: Split,
    },
    /// Score predictions against gold labels.
    WicEval {
        #[arg(long, value_enum, default_value = "dev")]
        split: Split,
    },
}

fn run(cli: &Cli) -> Result<serde_json::Value, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    cfg.apply(&cli.overrides);
    match cli.command {
        Command::BuildInventory => commands::build_inventory(&cfg),
        Command::Bootstrap => commands::bootstrap(&cfg),
        Command::Propagate => commands::propagate(&cfg),
        Command::GlossPlan => commands::gloss_plan(&cfg),
        Command::GlossMerge => commands::gloss_merge(&cfg),
        Command::Disambiguate => commands::disambiguate(&cfg),
        Command::WicFeatures { split } => commands::wic_features(&cfg, split),
        Command::WicTrain => commands::wic_train(&cfg),
        Command::WicPredict { split } => commands::wic_predict(&cfg, split),
        Command::WicEval { split } => commands::wic_eval(&cfg, split),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
