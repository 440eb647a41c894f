//! `biascorpus`: ingest lyrics, train per-period embeddings, score gender
//! bias, fit trends and emit plot data.

mod cmd;
mod config;
mod manifest;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;

use biascorpus::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::Config;

#[derive(Parser)]
#[command(name = "biascorpus", version, about = "Gender bias in time-bucketed word embeddings")]
struct Cli {
    /// TOML settings file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (also BIASCORPUS_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 is deterministic.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean, de-duplicate and bucket a JSONL song corpus.
    Ingest(cmd::ingest::Args),
    /// Train one embedding model per bucket.
    Train(cmd::train::Args),
    /// Score trait lexicons against the gender lexicons.
    Bias(cmd::bias::Args),
    /// Fit mixed-model trends to bias observations.
    Trend(cmd::trend::Args),
    /// Join bias series and trend fits into plot data.
    Report(cmd::report::Args),
    /// Correlate embeddings with external measurements.
    #[command(subcommand)]
    Validate(cmd::validate::Command),
    /// Count gendered objects of aggressive verbs in CoNLL-U parses.
    Aggression(cmd::aggression::Args),
    /// Score artist gender, fit the female share trend and split the corpus.
    Gender(cmd::gender::Args),
    /// Write the synthetic corpus and stand-in input files.
    Synth(cmd::synth::Args),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<biascorpus::Error>())
        .map(biascorpus::Error::kind);
    match kind {
        Some(ErrorKind::EmptyData) => 2,
        Some(ErrorKind::Numeric) => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    match cli.command {
        Command::Ingest(a) => cmd::ingest::run(a, cfg),
        Command::Train(a) => cmd::train::run(a, cfg),
        Command::Bias(a) => cmd::bias::run(a, cfg),
        Command::Trend(a) => cmd::trend::run(a, cfg),
        Command::Report(a) => cmd::report::run(a, cfg),
        Command::Validate(c) => cmd::validate::run(c, cfg),
        Command::Aggression(a) => cmd::aggression::run(a, cfg),
        Command::Gender(a) => cmd::gender::run(a, cfg),
        Command::Synth(a) => cmd::synth::run(a, cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
