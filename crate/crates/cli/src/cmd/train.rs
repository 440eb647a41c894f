use std::path::PathBuf;

use biascorpus::embedding::{train_documents, write_model};
use biascorpus::EmbeddingModel32;
use serde::Serialize;

use crate::config::Config;
use crate::manifest::Run;
use crate::overlay;
use crate::store::{model_path, store_buckets, RECORDS, STORE};

#[derive(clap::Args)]
pub struct Args {
    /// Store directory written by `ingest`.
    #[arg(long)]
    store: PathBuf,
    /// Model directory to create.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long)]
    min_count: Option<u64>,
}

#[derive(Serialize)]
struct ModelRow {
    bucket_start: i32,
    documents: usize,
    tokens: usize,
    vocab: usize,
    final_loss: f64,
}

pub fn run(a: Args, mut cfg: Config) -> anyhow::Result<()> {
    overlay!(cfg, a; dim, window, epochs, lr, negatives, subsample, min_count);
    let tc = cfg.train_config();
    tc.validate()?;
    let inputs = [a.store.join(RECORDS), a.store.join(STORE)];
    let mut run = Run::start("train", &cfg, &[&inputs[0], &inputs[1]], &a.out)?;
    let (_, buckets) = store_buckets(&a.store)?;
    let header = run.header();
    let mut rows = Vec::new();
    for b in &buckets {
        let docs: Vec<&[String]> = b.documents().collect();
        let (model, report) =
            run.timed(&format!("train_{}", b.bucket_start), || train_documents::<f32>(&docs, &tc))?;
        let model: EmbeddingModel32 = model;
        write_model(&model, &model_path(&a.out, b.bucket_start), Some(header.trim_start_matches("# ")))?;
        rows.push(ModelRow {
            bucket_start: b.bucket_start,
            documents: docs.len(),
            tokens: b.token_count,
            vocab: model.vocab().len(),
            final_loss: report.epoch_losses.last().copied().unwrap_or(f64::NAN),
        });
    }
    run.write_csv("models.csv", &rows)?;
    run.finish()
}
