use std::path::PathBuf;

use biascorpus::corpus::{ingest, write_rejects, CorpusConfig};
use biascorpus::Error;
use serde::Serialize;

use crate::config::Config;
use crate::manifest::Run;
use crate::overlay;
use crate::store::write_store;

#[derive(clap::Args)]
pub struct Args {
    /// JSONL corpus, one song object per line.
    #[arg(long)]
    input: PathBuf,
    /// Store directory to create.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    start_year: Option<i32>,
    #[arg(long)]
    end_year: Option<i32>,
    #[arg(long)]
    origin: Option<i32>,
    #[arg(long)]
    bucket_width: Option<i32>,
    /// Buckets with fewer tokens are left out.
    #[arg(long)]
    min_tokens: Option<usize>,
    #[arg(long)]
    english_threshold: Option<f64>,
    /// Keep songs regardless of language.
    #[arg(long)]
    no_english_filter: bool,
}

#[derive(Serialize)]
struct Summary {
    records: usize,
    rejected: usize,
    duplicates_removed: usize,
    tokens: usize,
    buckets_included: Vec<i32>,
}

pub fn run(a: Args, mut cfg: Config) -> anyhow::Result<()> {
    overlay!(cfg, a; start_year, end_year, origin, bucket_width, min_tokens, english_threshold);
    if a.no_english_filter {
        cfg.english_filter = false;
    }
    let mut run = Run::start("ingest", &cfg, &[&a.input], &a.out)?;
    let cc = CorpusConfig {
        start_year: cfg.start_year,
        end_year: cfg.end_year,
        english_filter: cfg.english_filter,
        english_threshold: cfg.english_threshold,
        ..CorpusConfig::default()
    };
    let outcome = run.timed("ingest", || ingest(&a.input, &cc))?;
    run.write_text("rejects.csv", |w| write_rejects(w, &outcome.rejects))?;
    let included = write_store(&run, "", &outcome.records, cfg.bucket_width, cfg.origin, cfg.min_tokens)?;
    run.write_json(
        "ingest.json",
        &Summary {
            records: outcome.records.len(),
            rejected: outcome.rejects.len(),
            duplicates_removed: outcome.duplicates_removed,
            tokens: outcome.records.iter().map(|r| r.tokens.len()).sum(),
            buckets_included: included.clone(),
        },
    )?;
    run.finish()?;
    if included.is_empty() {
        return Err(Error::Empty(format!("no bucket reaches {} tokens", cfg.min_tokens)).into());
    }
    Ok(())
}
