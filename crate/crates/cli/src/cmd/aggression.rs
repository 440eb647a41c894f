use std::path::{Path, PathBuf};

use anyhow::Context;
use biascorpus::aggression::{
    count_recipients, frequency_trend, overall_share_test, parse_conllu, ratio_trend, write_counts, write_malformed,
    AggressionCounts, BucketCounts, ChiSquare, FrequencyScale, Malformed, RecipientConfig, SeriesTrend,
};
use biascorpus::bias::Group;
use biascorpus::lexicon::Builtin;
use biascorpus::Error;
use serde::Serialize;

use crate::config::{Coding, Config};
use crate::manifest::Run;
use crate::overlay;
use crate::store::{lexicon_or, open};

#[derive(clap::Args)]
pub struct Args {
    /// CoNLL-U files; `# year = N` comments date the sentences that follow.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Aggressive-verb lexicon file (lemmas).
    #[arg(long)]
    verbs: Option<PathBuf>,
    #[arg(long)]
    male: Option<PathBuf>,
    #[arg(long)]
    female: Option<PathBuf>,
    /// Comma-separated base relations counted as objects.
    #[arg(long, value_delimiter = ',')]
    relations: Option<Vec<String>>,
    #[arg(long)]
    origin: Option<i32>,
    #[arg(long)]
    bucket_width: Option<i32>,
    #[arg(long, value_enum)]
    time_coding: Option<Coding>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Outcome<T> {
    Ok(T),
    Failed { error: String },
}

impl<T> From<biascorpus::Result<T>> for Outcome<T> {
    fn from(r: biascorpus::Result<T>) -> Self {
        match r {
            Ok(v) => Outcome::Ok(v),
            Err(e) => Outcome::Failed { error: e.to_string() },
        }
    }
}

#[derive(Serialize)]
struct Summary {
    sentences: usize,
    malformed: usize,
    totals: BucketCounts,
    unbucketed: BucketCounts,
    share_test: Outcome<ChiSquare>,
    female_share: Outcome<SeriesTrend>,
    controlled_difference: Outcome<SeriesTrend>,
    female_raw: Outcome<SeriesTrend>,
    male_raw: Outcome<SeriesTrend>,
    female_per_million: Outcome<SeriesTrend>,
    male_per_million: Outcome<SeriesTrend>,
}

pub fn run(a: Args, mut cfg: Config) -> anyhow::Result<()> {
    overlay!(cfg, a; verbs, male, female, relations, origin, bucket_width, time_coding);
    let mut inputs: Vec<&Path> = a.input.iter().map(PathBuf::as_path).collect();
    inputs.extend(cfg.verbs.iter().chain(&cfg.male).chain(&cfg.female).map(PathBuf::as_path));
    let mut run = Run::start("aggression", &cfg, &inputs, &a.out)?;
    let mut rc = RecipientConfig::new(
        lexicon_or(&cfg.verbs, Builtin::AggressiveVerbs)?,
        lexicon_or(&cfg.male, Builtin::Male)?,
        lexicon_or(&cfg.female, Builtin::Female)?,
    );
    rc.relations = cfg.relations.clone();
    rc.origin = cfg.origin;
    rc.bucket_width = cfg.bucket_width;

    let mut counts = AggressionCounts::default();
    let mut malformed: Vec<Malformed> = Vec::new();
    let mut sentences = 0;
    for path in &a.input {
        let reader = open(path)?;
        let doc = run
            .timed("parse", || parse_conllu(reader))
            .with_context(|| path.display().to_string())?;
        sentences += doc.sentences.len();
        counts.merge(count_recipients(&doc.sentences, &rc)?);
        malformed.extend(doc.malformed);
    }
    if sentences == 0 {
        return Err(Error::Empty("no well-formed sentences in the input".into()).into());
    }
    let coding = cfg.coding();
    let rows = counts.rows();
    run.write_text("counts.csv", |w| write_counts(w, &rows))?;
    run.write_text("malformed.csv", |w| write_malformed(w, &malformed))?;
    run.write_csv("events.csv", &counts.events)?;
    let summary = Summary {
        sentences,
        malformed: malformed.len(),
        totals: counts.totals(),
        unbucketed: counts.unbucketed,
        share_test: overall_share_test(&counts).into(),
        female_share: ratio_trend(&rows, false, coding).into(),
        controlled_difference: ratio_trend(&rows, true, coding).into(),
        female_raw: frequency_trend(&rows, Group::Female, FrequencyScale::Raw, coding).into(),
        male_raw: frequency_trend(&rows, Group::Male, FrequencyScale::Raw, coding).into(),
        female_per_million: frequency_trend(&rows, Group::Female, FrequencyScale::PerMillionTokens, coding).into(),
        male_per_million: frequency_trend(&rows, Group::Male, FrequencyScale::PerMillionTokens, coding).into(),
    };
    run.write_json("aggression.json", &summary)?;
    run.finish()
}
