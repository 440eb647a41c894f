use std::path::PathBuf;

use biascorpus::bias::{group_vector_with, read_aggregate, word_bias_map, Group};
use biascorpus::lexicon::Builtin;
use biascorpus::validation::{embedding_vs_ratings, lead_lag, men_benchmark, read_similarity_pairs, OpinionSeries, RatedWordSet};
use serde::Serialize;

use crate::config::Config;
use crate::manifest::Run;
use crate::overlay;
use crate::store::{lexicon_or, open, read_model_for};

#[derive(clap::Subcommand)]
pub enum Command {
    /// Per-word bias against human gender ratings.
    Ratings(RatingsArgs),
    /// Model similarity against a MEN-format pair file.
    Men(MenArgs),
    /// Bucket means against an opinion series one period earlier, same, later.
    LeadLag(LeadLagArgs),
}

#[derive(clap::Args)]
pub struct RatingsArgs {
    #[arg(long)]
    models: PathBuf,
    /// Bucket start year of the model to use.
    #[arg(long)]
    bucket: i32,
    /// CSV {word,score} with a `# higher_means=... source=...` line.
    #[arg(long)]
    ratings: PathBuf,
    #[arg(long)]
    male: Option<PathBuf>,
    #[arg(long)]
    female: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct MenArgs {
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    bucket: i32,
    /// Lines of `word1 word2 score`.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct LeadLagArgs {
    /// `<trait>.aggregate.csv` written by `bias`.
    #[arg(long)]
    aggregate: PathBuf,
    /// CSV {period_start,share_women}.
    #[arg(long)]
    opinion: PathBuf,
    /// Period length in years.
    #[arg(long)]
    bucket_width: Option<i32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct Tagged<'a, T> {
    bucket_start: i32,
    source: &'a str,
    result: T,
}

pub fn run(c: Command, mut cfg: Config) -> anyhow::Result<()> {
    match c {
        Command::Ratings(a) => {
            overlay!(cfg, a; male, female);
            let mut inputs = vec![a.models.as_path(), a.ratings.as_path()];
            inputs.extend(cfg.male.iter().chain(&cfg.female).map(PathBuf::as_path));
            let run = Run::start("validate ratings", &cfg, &inputs, &a.out)?;
            let rated = RatedWordSet::read(open(&a.ratings)?)?;
            let model = read_model_for(&a.models, a.bucket)?;
            let male = lexicon_or(&cfg.male, Builtin::Male)?;
            let female = lexicon_or(&cfg.female, Builtin::Female)?;
            let mv = group_vector_with(&model, &male, Group::Male, cfg.averaging)?;
            let fv = group_vector_with(&model, &female, Group::Female, cfg.averaging)?;
            let words: Vec<&str> = rated.rows().iter().map(|r| r.0.as_str()).collect();
            let map = word_bias_map(&model, &words, &mv, &fv)?;
            let result = embedding_vs_ratings(&map, &rated)?;
            run.write_json("ratings.json", &Tagged { bucket_start: a.bucket, source: &rated.source, result })?;
            run.finish()
        }
        Command::Men(a) => {
            let run = Run::start("validate men", &cfg, &[&a.models, &a.pairs], &a.out)?;
            let pairs = read_similarity_pairs(open(&a.pairs)?)?;
            let model = read_model_for(&a.models, a.bucket)?;
            let result = men_benchmark(&model, &pairs)?;
            let source = a.pairs.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            run.write_json("men.json", &Tagged { bucket_start: a.bucket, source: &source, result })?;
            run.finish()
        }
        Command::LeadLag(a) => {
            overlay!(cfg, a; bucket_width);
            let run = Run::start("validate lead-lag", &cfg, &[&a.aggregate, &a.opinion], &a.out)?;
            let means: Vec<(i32, f64)> = read_aggregate::<f64, _>(open(&a.aggregate)?)?
                .iter()
                .map(|b| (b.bucket_start, b.mean_bias))
                .collect();
            let opinion = OpinionSeries::read(open(&a.opinion)?)?;
            let report = lead_lag(&means, &opinion, cfg.bucket_width)?;
            run.write_json("lead_lag.json", &report)?;
            run.finish()
        }
    }
}
