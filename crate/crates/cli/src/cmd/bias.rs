use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use biascorpus::bias::{bias_series, complexity_normalize, write_aggregate, write_observations, Averaging, BiasOptions, BiasSeries, WordFilter};
use biascorpus::embedding::{train_documents, TrainConfig};
use biascorpus::lexicon::{Builtin, Lexicon};
use biascorpus::resampling::{repeat_average, write_dispersion, write_run_log, PopularityTable, SampleMode, SamplePlan, SeedPolicy};
use biascorpus::{EmbeddingModel64, Error};
use serde::Serialize;

use crate::config::Config;
use crate::manifest::Run;
use crate::overlay;
use crate::store::{lexicon, lexicon_or, open, read_models, store_buckets, RECORDS, STORE};

#[derive(Clone, Copy, clap::ValueEnum)]
enum FilterArg {
    None,
    MinCount5,
    EveryPeriod,
}

impl From<FilterArg> for WordFilter {
    fn from(f: FilterArg) -> Self {
        match f {
            FilterArg::None => WordFilter::None,
            FilterArg::MinCount5 => WordFilter::MinCount5,
            FilterArg::EveryPeriod => WordFilter::EveryPeriod,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum AveragingArg {
    Raw,
    UnitNormalized,
}

impl From<AveragingArg> for Averaging {
    fn from(a: AveragingArg) -> Self {
        match a {
            AveragingArg::Raw => Averaging::Raw,
            AveragingArg::UnitNormalized => Averaging::UnitNormalized,
        }
    }
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SamplingArg {
    Undersample,
    Popularity,
}

impl From<SamplingArg> for SampleMode {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Undersample => SampleMode::Undersample,
            SamplingArg::Popularity => SampleMode::Popularity,
        }
    }
}

#[derive(clap::Args)]
pub struct Args {
    /// Model directory written by `train`.
    #[arg(long, conflicts_with = "store", required_unless_present = "store")]
    models: Option<PathBuf>,
    /// Store directory; resample and retrain per run instead of reading models.
    #[arg(long)]
    store: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated bundled lexicon names or lexicon files.
    #[arg(long, value_delimiter = ',')]
    traits: Option<Vec<String>>,
    #[arg(long)]
    male: Option<PathBuf>,
    #[arg(long)]
    female: Option<PathBuf>,
    #[arg(long, value_enum)]
    filter: Option<FilterArg>,
    #[arg(long, value_enum)]
    averaging: Option<AveragingArg>,
    /// Also divide bucket means by within-gender lexicon similarity.
    #[arg(long)]
    normalize: bool,
    /// Bootstrap resamples for bucket intervals; 0 disables.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    ci_level: Option<f64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long, value_enum)]
    sampling: Option<SamplingArg>,
    /// CSV {bucket_start,genre,share} for popularity sampling.
    #[arg(long)]
    popularity: Option<PathBuf>,
    /// Reuse run 0's random streams in every run.
    #[arg(long)]
    fixed_seeds: bool,
    #[arg(long)]
    min_tokens: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    min_count: Option<u64>,
}

#[derive(Serialize)]
struct TraitSummary {
    trait_name: String,
    words: usize,
    buckets: usize,
    missing_by_bucket: BTreeMap<i32, Vec<String>>,
    dropped: Vec<(usize, i32)>,
}

#[derive(Serialize)]
struct Summary {
    male_words: Vec<String>,
    female_words: Vec<String>,
    options: BiasOptions,
    repeats: usize,
    traits: Vec<TraitSummary>,
}

fn missing(series: &BiasSeries<f64>, lex: &Lexicon) -> BTreeMap<i32, Vec<String>> {
    series
        .buckets
        .iter()
        .map(|b| {
            let present: Vec<&str> = series
                .observations
                .iter()
                .filter(|o| o.bucket_start == b.bucket_start)
                .map(|o| o.trait_word.as_str())
                .collect();
            let miss = lex.words().iter().filter(|w| !present.contains(&w.as_str())).cloned().collect();
            (b.bucket_start, miss)
        })
        .collect()
}

fn train_all(buckets: &[biascorpus::corpus::BucketCorpus], tc: &TrainConfig) -> biascorpus::Result<Vec<(i32, EmbeddingModel64)>> {
    buckets
        .iter()
        .map(|b| {
            let docs: Vec<&[String]> = b.documents().collect();
            train_documents::<f64>(&docs, tc).map(|(m, _)| (b.bucket_start, m))
        })
        .collect()
}

pub fn run(a: Args, mut cfg: Config) -> anyhow::Result<()> {
    overlay!(cfg, a; traits, male, female, filter, averaging, bootstrap, ci_level, repeats, sampling, popularity, min_tokens, dim, epochs, min_count);
    if a.normalize {
        cfg.normalize = true;
    }
    if a.fixed_seeds {
        cfg.seed_policy = SeedPolicy::Fixed;
    }
    let male = lexicon_or(&cfg.male, Builtin::Male)?;
    let female = lexicon_or(&cfg.female, Builtin::Female)?;
    let traits: Vec<Lexicon> = cfg.traits.iter().map(|t| lexicon(t)).collect::<anyhow::Result<_>>()?;
    if traits.is_empty() {
        return Err(Error::Config("no trait lexicons given".into()).into());
    }
    let options = BiasOptions { filter: cfg.filter, averaging: cfg.averaging };

    let mut input_paths: Vec<PathBuf> = Vec::new();
    match (&a.models, &a.store) {
        (Some(m), _) => input_paths.push(m.clone()),
        (None, Some(s)) => input_paths.extend([s.join(RECORDS), s.join(STORE)]),
        (None, None) => unreachable!("clap requires one of --models/--store"),
    }
    input_paths.extend(cfg.male.iter().chain(&cfg.female).chain(&cfg.popularity).cloned());
    for t in &cfg.traits {
        if Builtin::from_name(t).is_none() {
            input_paths.push(PathBuf::from(t));
        }
    }
    let refs: Vec<&std::path::Path> = input_paths.iter().map(PathBuf::as_path).collect();
    let mut run = Run::start("bias", &cfg, &refs, &a.out)?;

    let mut summaries = Vec::new();
    if let Some(models_dir) = &a.models {
        let models = run.timed("load", || read_models(models_dir))?;
        let view: Vec<(i32, &EmbeddingModel64)> = models.iter().map(|(s, m)| (*s, m)).collect();
        for lex in &traits {
            let mut series = run
                .timed("score", || bias_series(&view, &male, &female, lex, options))
                .with_context(|| format!("trait `{}`", lex.name()))?;
            if cfg.bootstrap > 0 {
                series = series.with_bootstrap_ci(cfg.bootstrap, cfg.ci_level, cfg.seed);
            }
            write_series(&run, lex.name(), &series)?;
            if cfg.normalize {
                let norm = complexity_normalize(&series, &view, &male, &female)?;
                run.write_csv(&format!("{}.normalized.csv", lex.name()), &norm.buckets)?;
            }
            summaries.push(TraitSummary {
                trait_name: lex.name().to_string(),
                words: lex.len(),
                buckets: series.buckets.len(),
                missing_by_bucket: missing(&series, lex),
                dropped: Vec::new(),
            });
        }
    } else if let Some(store) = &a.store {
        let (_, buckets) = store_buckets(store)?;
        let mut plan = match cfg.sampling {
            SampleMode::Undersample => SamplePlan::undersample(cfg.repeats, cfg.seed),
            SampleMode::Popularity => {
                let path = cfg
                    .popularity
                    .clone()
                    .ok_or_else(|| Error::Config("popularity sampling needs --popularity".into()))?;
                let table = PopularityTable::read(open(&path)?)?;
                SamplePlan::popularity(cfg.repeats, cfg.seed, table, cfg.min_tokens)
            }
        };
        plan.seed_policy = cfg.seed_policy;
        plan.threads = cfg.threads;
        let base = TrainConfig { threads: 1, ..cfg.train_config() };
        for lex in &traits {
            let outcome = run
                .timed(&format!("repeats_{}", lex.name()), || {
                    repeat_average(&plan, &buckets, |sampled, ctx| {
                        let tc = TrainConfig { seed: ctx.train_seed, ..base.clone() };
                        let models = train_all(sampled, &tc)?;
                        let view: Vec<(i32, &EmbeddingModel64)> = models.iter().map(|(s, m)| (*s, m)).collect();
                        bias_series(&view, &male, &female, lex, options)
                    })
                })
                .with_context(|| format!("trait `{}`", lex.name()))?;
            let mut series = outcome.series;
            if cfg.bootstrap > 0 {
                series = series.with_bootstrap_ci(cfg.bootstrap, cfg.ci_level, cfg.seed);
            }
            write_series(&run, lex.name(), &series)?;
            run.write_text(&format!("{}.runs.csv", lex.name()), |w| write_run_log(w, &outcome.run_log))?;
            run.write_text(&format!("{}.dispersion.csv", lex.name()), |w| write_dispersion(w, &outcome.dispersion))?;
            summaries.push(TraitSummary {
                trait_name: lex.name().to_string(),
                words: lex.len(),
                buckets: series.buckets.len(),
                missing_by_bucket: missing(&series, lex),
                dropped: outcome.dropped,
            });
        }
    }
    run.write_json(
        "bias.json",
        &Summary {
            male_words: male.words().to_vec(),
            female_words: female.words().to_vec(),
            options,
            repeats: if a.store.is_some() { cfg.repeats } else { 1 },
            traits: summaries,
        },
    )?;
    run.finish()
}

fn write_series(run: &Run, name: &str, series: &BiasSeries<f64>) -> anyhow::Result<()> {
    run.write_text(&format!("{name}.observations.csv"), |w| write_observations(w, &series.observations))?;
    run.write_text(&format!("{name}.aggregate.csv"), |w| write_aggregate(w, &series.buckets))?;
    Ok(())
}
