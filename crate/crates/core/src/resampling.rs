//! Genre-balanced under-sampling, chart-share weighting and the
//! repeat-and-average harness around a per-bucket analysis.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bias::{BiasObservation, BiasSeries, BucketBias};
use crate::corpus::{BucketCorpus, Genre};
use crate::error::{Error, Result};
use crate::scalar::{sample_sd, Real};

/// First bucket year from which each genre takes part in balancing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenreSchedule {
    pub activation: BTreeMap<Genre, i32>,
}

impl Default for GenreSchedule {
    /// All genres from the start, except dance (1980) and rap (1990).
    fn default() -> Self {
        let activation = Genre::ALL
            .iter()
            .map(|&g| {
                let year = match g {
                    Genre::Dance => 1980,
                    Genre::Rap => 1990,
                    _ => i32::MIN,
                };
                (g, year)
            })
            .collect();
        Self { activation }
    }
}

impl GenreSchedule {
    /// Every listed genre active from the start.
    pub fn always(genres: &[Genre]) -> Self {
        Self {
            activation: genres.iter().map(|&g| (g, i32::MIN)).collect(),
        }
    }

    pub fn active_in(&self, bucket_start: i32) -> Vec<Genre> {
        self.activation
            .iter()
            .filter(|&(_, &year)| bucket_start >= year)
            .map(|(&g, _)| g)
            .collect()
    }
}

fn check_present(bucket: &BucketCorpus, active: &[Genre]) -> Result<BTreeMap<Genre, usize>> {
    let counts = bucket.genre_counts();
    let missing: Vec<&str> = active
        .iter()
        .filter(|g| counts.get(g).copied().unwrap_or(0) == 0)
        .map(|g| g.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingGenres {
            bucket_start: bucket.bucket_start,
            genres: missing.join(","),
        });
    }
    Ok(counts)
}

/// Equal per-genre quotas at the smallest active genre's count.
pub fn undersample_quotas(bucket: &BucketCorpus, active: &[Genre]) -> Result<BTreeMap<Genre, usize>> {
    if active.is_empty() {
        return Err(Error::Config("no active genres".into()));
    }
    let counts = check_present(bucket, active)?;
    let min = active.iter().map(|g| counts[g]).min().unwrap_or(0);
    Ok(active.iter().map(|&g| (g, min)).collect())
}

/// Draws `quotas[g]` records of each genre uniformly without replacement.
/// Genres absent from `quotas` are dropped; kept records retain their order.
pub fn sample_with_quotas<R: Rng + ?Sized>(
    bucket: &BucketCorpus,
    quotas: &BTreeMap<Genre, usize>,
    rng: &mut R,
) -> Result<BucketCorpus> {
    let mut keep = vec![false; bucket.records.len()];
    for (&genre, &quota) in quotas {
        let positions: Vec<usize> = bucket
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.genre == genre)
            .map(|(i, _)| i)
            .collect();
        if quota > positions.len() {
            return Err(Error::Insufficient(format!(
                "quota {quota} for {genre} exceeds {} available songs in bucket {}",
                positions.len(),
                bucket.bucket_start
            )));
        }
        for i in index::sample(rng, positions.len(), quota) {
            keep[positions[i]] = true;
        }
    }
    let records = bucket
        .records
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(r, _)| r.clone())
        .collect();
    Ok(BucketCorpus::new(bucket.bucket_start, bucket.bucket_width, records))
}

pub fn undersample<R: Rng + ?Sized>(bucket: &BucketCorpus, active: &[Genre], rng: &mut R) -> Result<BucketCorpus> {
    let quotas = undersample_quotas(bucket, active)?;
    sample_with_quotas(bucket, &quotas, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopularityRow {
    pub bucket_start: i32,
    pub genre: Genre,
    pub share: f64,
}

/// Chart share of each genre per bucket.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PopularityTable {
    shares: BTreeMap<(i32, Genre), f64>,
}

impl PopularityTable {
    pub fn new(rows: impl IntoIterator<Item = PopularityRow>) -> Result<Self> {
        let mut shares = BTreeMap::new();
        for row in rows {
            if !(0.0..=1.0).contains(&row.share) {
                return Err(Error::parse(
                    "popularity table",
                    format!("share {} for {} in {} outside [0, 1]", row.share, row.genre, row.bucket_start),
                ));
            }
            if shares.insert((row.bucket_start, row.genre), row.share).is_some() {
                return Err(Error::parse(
                    "popularity table",
                    format!("duplicate row for {} in {}", row.genre, row.bucket_start),
                ));
            }
        }
        Ok(Self { shares })
    }

    pub fn share(&self, bucket_start: i32, genre: Genre) -> Option<f64> {
        self.shares.get(&(bucket_start, genre)).copied()
    }

    pub fn rows(&self) -> Vec<PopularityRow> {
        self.shares
            .iter()
            .map(|(&(bucket_start, genre), &share)| PopularityRow { bucket_start, genre, share })
            .collect()
    }

    /// Reads `{bucket_start,genre,share}` CSV; `#` lines are comments.
    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::parse("popularity table", e))?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            rows.push(PopularityRow {
                bucket_start: field(0)
                    .parse()
                    .map_err(|e| Error::parse("popularity table bucket_start", e))?,
                genre: field(1).parse()?,
                share: field(2).parse().map_err(|e| Error::parse("popularity table share", e))?,
            });
        }
        Self::new(rows)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for row in self.rows() {
            wtr.serialize(row).map_err(|e| Error::parse("popularity table", e))?;
        }
        wtr.flush().map_err(|e| Error::io("popularity table", e))
    }
}

/// Share-proportional quotas scaled so the most constrained genre uses all
/// of its songs. Quotas are floored and the leftover total is handed out by
/// largest fractional part, never past availability.
pub fn popularity_quotas(
    bucket: &BucketCorpus,
    table: &PopularityTable,
    active: &[Genre],
) -> Result<BTreeMap<Genre, usize>> {
    if active.is_empty() {
        return Err(Error::Config("no active genres".into()));
    }
    let counts = bucket.genre_counts();
    let mut shares = Vec::with_capacity(active.len());
    let mut missing = Vec::new();
    for &g in active {
        match table.share(bucket.bucket_start, g) {
            Some(s) => shares.push((g, s, counts.get(&g).copied().unwrap_or(0))),
            None => missing.push(g.as_str()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Insufficient(format!(
            "popularity table has no share for {} in bucket {}",
            missing.join(","),
            bucket.bucket_start
        )));
    }
    let total: f64 = shares.iter().map(|s| s.1).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "active genre shares in bucket {} sum to {total}, not 1",
            bucket.bucket_start
        )));
    }
    let empty: Vec<&str> = shares
        .iter()
        .filter(|s| s.1 > 0.0 && s.2 == 0)
        .map(|s| s.0.as_str())
        .collect();
    if !empty.is_empty() {
        return Err(Error::MissingGenres {
            bucket_start: bucket.bucket_start,
            genres: empty.join(","),
        });
    }
    let scale = shares
        .iter()
        .filter(|s| s.1 > 0.0)
        .map(|s| s.2 as f64 / s.1)
        .fold(f64::INFINITY, f64::min);
    let ideal: Vec<f64> = shares.iter().map(|s| scale * s.1).collect();
    const SLACK: f64 = 1e-9;
    let mut quota: Vec<usize> = ideal
        .iter()
        .zip(&shares)
        .map(|(&q, s)| ((q + SLACK).floor() as usize).min(s.2))
        .collect();
    let target = (ideal.iter().sum::<f64>() + SLACK).floor() as usize;
    let mut leftover = target.saturating_sub(quota.iter().sum());
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = ideal[a] - ideal[a].floor();
        let fb = ideal[b] - ideal[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for i in order {
        if leftover == 0 {
            break;
        }
        if quota[i] < shares[i].2 && ideal[i] > quota[i] as f64 {
            quota[i] += 1;
            leftover -= 1;
        }
    }
    Ok(shares.iter().zip(quota).map(|(s, q)| (s.0, q)).collect())
}

pub fn popularity_sample<R: Rng + ?Sized>(
    bucket: &BucketCorpus,
    table: &PopularityTable,
    active: &[Genre],
    rng: &mut R,
) -> Result<BucketCorpus> {
    let quotas = popularity_quotas(bucket, table, active)?;
    sample_with_quotas(bucket, &quotas, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Undersample,
    Popularity,
}

/// How per-run seeds are derived from the master seed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPolicy {
    /// Each run gets its own sampling and training streams.
    #[default]
    PerRun,
    /// Every run reuses the streams of run 0.
    Fixed,
}

#[derive(Debug, Clone)]
pub struct SamplePlan {
    pub mode: SampleMode,
    pub repeats: usize,
    pub seed: u64,
    pub seed_policy: SeedPolicy,
    pub schedule: GenreSchedule,
    pub popularity: Option<PopularityTable>,
    /// Popularity mode drops sampled buckets with fewer tokens than this.
    pub min_tokens: usize,
    pub threads: usize,
}

impl SamplePlan {
    pub fn undersample(repeats: usize, seed: u64) -> Self {
        Self {
            mode: SampleMode::Undersample,
            repeats,
            seed,
            seed_policy: SeedPolicy::PerRun,
            schedule: GenreSchedule::default(),
            popularity: None,
            min_tokens: 0,
            threads: 1,
        }
    }

    pub fn popularity(repeats: usize, seed: u64, table: PopularityTable, min_tokens: usize) -> Self {
        Self {
            mode: SampleMode::Popularity,
            popularity: Some(table),
            min_tokens,
            ..Self::undersample(repeats, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats < 1 {
            return Err(Error::Config("repeats must be >= 1".into()));
        }
        if self.threads < 1 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        if self.mode == SampleMode::Popularity && self.popularity.is_none() {
            return Err(Error::Config("popularity mode needs a popularity table".into()));
        }
        Ok(())
    }

    /// Per-genre quotas for one bucket under this plan.
    pub fn quotas(&self, bucket: &BucketCorpus) -> Result<BTreeMap<Genre, usize>> {
        let active = self.schedule.active_in(bucket.bucket_start);
        match (self.mode, &self.popularity) {
            (SampleMode::Undersample, _) => undersample_quotas(bucket, &active),
            (SampleMode::Popularity, Some(table)) => popularity_quotas(bucket, table, &active),
            (SampleMode::Popularity, None) => Err(Error::Config("popularity mode needs a popularity table".into())),
        }
    }

    fn stream(&self, run: usize) -> u64 {
        match self.seed_policy {
            SeedPolicy::PerRun => run as u64,
            SeedPolicy::Fixed => 0,
        }
    }

    /// Sampling generator for a run.
    pub fn run_rng(&self, run: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * self.stream(run));
        rng
    }

    /// Training seed for a run, drawn from a stream disjoint from sampling.
    pub fn train_seed(&self, run: usize) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * self.stream(run) + 1);
        rng.next_u64()
    }

    /// Samples every bucket for one run. Popularity mode drops buckets that
    /// fall under `min_tokens` after sampling.
    pub fn sample_run(&self, buckets: &[BucketCorpus], run: usize) -> Result<(Vec<BucketCorpus>, Vec<i32>)> {
        let mut rng = self.run_rng(run);
        let mut kept = Vec::with_capacity(buckets.len());
        let mut dropped = Vec::new();
        for b in buckets {
            let quotas = self.quotas(b)?;
            let sampled = sample_with_quotas(b, &quotas, &mut rng)?;
            if self.mode == SampleMode::Popularity && sampled.token_count < self.min_tokens {
                dropped.push(b.bucket_start);
            } else {
                kept.push(sampled);
            }
        }
        Ok((kept, dropped))
    }
}

/// Context handed to the analysis for each run.
#[derive(Debug, Clone, Copy)]
pub struct RunContext {
    pub run: usize,
    pub train_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLogRow<F> {
    pub run: usize,
    pub bucket_start: i32,
    pub mean_bias: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dispersion<F> {
    pub bucket_start: i32,
    pub mean_bias: F,
    pub sd: F,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatOutcome<F> {
    /// Per-word biases averaged over the runs in which each word was scored;
    /// bucket means are the across-run means of each run's bucket mean.
    pub series: BiasSeries<F>,
    pub dispersion: Vec<Dispersion<F>>,
    pub run_log: Vec<RunLogRow<F>>,
    /// `(run, bucket_start)` pairs removed by the token threshold.
    pub dropped: Vec<(usize, i32)>,
}

type RunResult<F> = Result<(BiasSeries<F>, Vec<i32>)>;

fn one_run<F, A>(plan: &SamplePlan, buckets: &[BucketCorpus], run: usize, analysis: &A) -> RunResult<F>
where
    F: Real,
    A: Fn(&[BucketCorpus], RunContext) -> Result<BiasSeries<F>>,
{
    let wrap = |e: Error| Error::Run { run, source: Box::new(e) };
    let (sampled, dropped) = plan.sample_run(buckets, run).map_err(wrap)?;
    let ctx = RunContext {
        run,
        train_seed: plan.train_seed(run),
    };
    let series = analysis(&sampled, ctx).map_err(wrap)?;
    Ok((series, dropped))
}

/// Runs sample, analyse, repeat; then averages. Results do not depend on
/// `plan.threads`.
pub fn repeat_average<F, A>(plan: &SamplePlan, buckets: &[BucketCorpus], analysis: A) -> Result<RepeatOutcome<F>>
where
    F: Real,
    A: Fn(&[BucketCorpus], RunContext) -> Result<BiasSeries<F>> + Sync,
{
    plan.validate()?;
    if buckets.is_empty() {
        return Err(Error::Empty("no buckets to resample".into()));
    }
    let runs: Vec<RunResult<F>> = if plan.threads <= 1 || plan.repeats == 1 {
        (0..plan.repeats).map(|r| one_run(plan, buckets, r, &analysis)).collect()
    } else {
        let lanes = plan.threads.min(plan.repeats);
        let mut slots: Vec<Option<RunResult<F>>> = (0..plan.repeats).map(|_| None).collect();
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..lanes)
                .map(|lane| {
                    let analysis = &analysis;
                    s.spawn(move || {
                        (lane..plan.repeats)
                            .step_by(lanes)
                            .map(|r| (r, one_run(plan, buckets, r, analysis)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (r, res) in h.join().expect("resampling worker panicked") {
                    slots[r] = Some(res);
                }
            }
        });
        slots.into_iter().map(|s| s.expect("every run scheduled")).collect()
    };

    let mut trait_name = String::new();
    let mut run_log = Vec::new();
    let mut dropped = Vec::new();
    let mut per_bucket: BTreeMap<i32, Vec<F>> = BTreeMap::new();
    let mut per_word: BTreeMap<(i32, String), (F, F, F, usize)> = BTreeMap::new();
    for (run, res) in runs.into_iter().enumerate() {
        let (series, lost) = res?;
        trait_name = series.trait_name.clone();
        dropped.extend(lost.into_iter().map(|b| (run, b)));
        for b in &series.buckets {
            run_log.push(RunLogRow {
                run,
                bucket_start: b.bucket_start,
                mean_bias: b.mean_bias,
            });
            per_bucket.entry(b.bucket_start).or_default().push(b.mean_bias);
        }
        for o in &series.observations {
            let e = per_word
                .entry((o.bucket_start, o.trait_word.clone()))
                .or_insert((F::zero(), F::zero(), F::zero(), 0));
            e.0 += o.cos_male;
            e.1 += o.cos_female;
            e.2 += o.bias;
            e.3 += 1;
        }
    }

    let observations: Vec<BiasObservation<F>> = per_word
        .into_iter()
        .map(|((bucket_start, trait_word), (m, f, b, n))| {
            let n = F::of_usize(n);
            BiasObservation {
                bucket_start,
                trait_word,
                cos_male: m / n,
                cos_female: f / n,
                bias: b / n,
            }
        })
        .collect();
    let mut word_counts: HashMap<i32, usize> = HashMap::new();
    for o in &observations {
        *word_counts.entry(o.bucket_start).or_insert(0) += 1;
    }
    let dispersion: Vec<Dispersion<F>> = per_bucket
        .iter()
        .map(|(&bucket_start, means)| Dispersion {
            bucket_start,
            mean_bias: means.iter().copied().sum::<F>() / F::of_usize(means.len()),
            sd: sample_sd(means),
            n_runs: means.len(),
        })
        .collect();
    let buckets = dispersion
        .iter()
        .map(|d| BucketBias {
            bucket_start: d.bucket_start,
            mean_bias: d.mean_bias,
            n_words: word_counts.get(&d.bucket_start).copied().unwrap_or(0),
            ci_low: None,
            ci_high: None,
        })
        .collect();
    Ok(RepeatOutcome {
        series: BiasSeries {
            trait_name,
            observations,
            buckets,
        },
        dispersion,
        run_log,
        dropped,
    })
}

pub fn write_run_log<F: Real + Serialize, W: Write>(w: W, rows: &[RunLogRow<F>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row).map_err(|e| Error::parse("run log", e))?;
    }
    wtr.flush().map_err(|e| Error::io("run log", e))
}

pub fn write_dispersion<F: Real + Serialize, W: Write>(w: W, rows: &[Dispersion<F>]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row).map_err(|e| Error::parse("dispersion", e))?;
    }
    wtr.flush().map_err(|e| Error::io("dispersion", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SongRecord;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn bucket(start: i32, counts: &[(Genre, usize)]) -> BucketCorpus {
        let mut records = Vec::new();
        for &(g, n) in counts {
            for i in 0..n {
                records.push(SongRecord {
                    id: format!("{g}-{i}"),
                    artist: "a".into(),
                    title: "t".into(),
                    year: start,
                    genre: g,
                    artist_gender_score: None,
                    tokens: vec!["la".into(); 3],
                });
            }
        }
        BucketCorpus::new(start, 5, records)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn undersample_to_smallest_genre() {
        let b = bucket(1995, &[(Genre::Pop, 1000), (Genre::Rock, 800), (Genre::Rap, 500)]);
        let out = undersample(&b, &[Genre::Pop, Genre::Rock, Genre::Rap], &mut rng(1)).unwrap();
        assert_eq!(out.records.len(), 1500);
        assert!(out.genre_counts().values().all(|&c| c == 500));
        let rap: HashSet<&str> = out.records.iter().filter(|r| r.genre == Genre::Rap).map(|r| r.id.as_str()).collect();
        assert_eq!(rap.len(), 500);
    }

    #[test]
    fn activation_years() {
        let s = GenreSchedule::default();
        let early = s.active_in(1975);
        assert!(!early.contains(&Genre::Rap) && !early.contains(&Genre::Dance));
        assert!(s.active_in(1980).contains(&Genre::Dance));
        assert!(!s.active_in(1985).contains(&Genre::Rap));
        assert!(s.active_in(1990).contains(&Genre::Rap));
    }

    #[test]
    fn missing_active_genre_is_named() {
        let b = bucket(1995, &[(Genre::Pop, 10)]);
        match undersample(&b, &[Genre::Pop, Genre::Country], &mut rng(1)) {
            Err(Error::MissingGenres { genres, .. }) => assert_eq!(genres, "country"),
            other => panic!("{other:?}"),
        }
    }

    fn table(start: i32, shares: &[(Genre, f64)]) -> PopularityTable {
        PopularityTable::new(shares.iter().map(|&(genre, share)| PopularityRow { bucket_start: start, genre, share })).unwrap()
    }

    #[test]
    fn popularity_worked_example() {
        let b = bucket(1970, &[(Genre::Country, 1000), (Genre::Rock, 1000), (Genre::Pop, 1000)]);
        let t = table(1970, &[(Genre::Country, 0.25), (Genre::Rock, 0.25), (Genre::Pop, 0.5)]);
        let active = [Genre::Country, Genre::Rock, Genre::Pop];
        let q = popularity_quotas(&b, &t, &active).unwrap();
        assert_eq!(q[&Genre::Pop], 1000);
        assert_eq!(q[&Genre::Rock], 500);
        assert_eq!(q[&Genre::Country], 500);
        let out = popularity_sample(&b, &t, &active, &mut rng(3)).unwrap();
        assert_eq!(out.genre_counts()[&Genre::Rock], 500);
    }

    #[test]
    fn popularity_equal_shares_match_undersample_and_zero_share_draws_nothing() {
        let b = bucket(1970, &[(Genre::Rock, 40), (Genre::Pop, 70)]);
        let active = [Genre::Rock, Genre::Pop];
        let eq = table(1970, &[(Genre::Rock, 0.5), (Genre::Pop, 0.5)]);
        assert_eq!(popularity_quotas(&b, &eq, &active).unwrap(), undersample_quotas(&b, &active).unwrap());
        let zero = table(1970, &[(Genre::Rock, 0.0), (Genre::Pop, 1.0)]);
        let q = popularity_quotas(&b, &zero, &active).unwrap();
        assert_eq!((q[&Genre::Rock], q[&Genre::Pop]), (0, 70));
    }

    #[test]
    fn popularity_requires_rows_and_unit_sum() {
        let b = bucket(1970, &[(Genre::Rock, 40), (Genre::Pop, 70)]);
        let t = table(1970, &[(Genre::Pop, 1.0)]);
        assert!(popularity_quotas(&b, &t, &[Genre::Rock, Genre::Pop]).is_err());
        let t = table(1970, &[(Genre::Rock, 0.3), (Genre::Pop, 0.6)]);
        assert!(popularity_quotas(&b, &t, &[Genre::Rock, Genre::Pop]).is_err());
    }

    #[test]
    fn popularity_table_csv_round_trip() {
        let t = table(1970, &[(Genre::Rock, 0.3), (Genre::Pop, 0.7)]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(PopularityTable::read(buf.as_slice()).unwrap(), t);
    }

    fn toy_analysis(buckets: &[BucketCorpus], ctx: RunContext) -> Result<BiasSeries<f64>> {
        let obs = buckets
            .iter()
            .flat_map(|b| {
                let rock = b.genre_counts().get(&Genre::Rock).copied().unwrap_or(0) as f64;
                let jitter = (ctx.train_seed % 1000) as f64 / 1e5;
                let first = b.records.first().map(|r| r.id.len()).unwrap_or(0) as f64;
                vec![
                    BiasObservation::new(b.bucket_start, "x", rock / 100.0 + jitter, first / 100.0),
                    BiasObservation::new(b.bucket_start, "y", 0.1, 0.2),
                ]
            })
            .collect();
        Ok(BiasSeries::from_observations("toy", obs))
    }

    fn buckets() -> Vec<BucketCorpus> {
        vec![
            bucket(1970, &[(Genre::Rock, 30), (Genre::Pop, 50), (Genre::Country, 20)]),
            bucket(1975, &[(Genre::Rock, 25), (Genre::Pop, 60), (Genre::Country, 35)]),
        ]
    }

    #[test]
    fn single_repeat_equals_single_run() {
        let mut plan = SamplePlan::undersample(1, 7);
        plan.schedule = GenreSchedule::always(&[Genre::Rock, Genre::Pop, Genre::Country]);
        let out = repeat_average(&plan, &buckets(), toy_analysis).unwrap();
        let (sampled, _) = plan.sample_run(&buckets(), 0).unwrap();
        let direct = toy_analysis(&sampled, RunContext { run: 0, train_seed: plan.train_seed(0) }).unwrap();
        assert_eq!(out.series.means(), direct.means());
        assert_eq!(out.series.observations, direct.observations);
        assert!(out.dispersion.iter().all(|d| d.sd == 0.0 && d.n_runs == 1));
    }

    #[test]
    fn fixed_seeds_give_zero_dispersion_and_threads_do_not_matter() {
        let mut plan = SamplePlan::undersample(2, 7);
        plan.schedule = GenreSchedule::always(&[Genre::Rock, Genre::Pop, Genre::Country]);
        plan.seed_policy = SeedPolicy::Fixed;
        let out = repeat_average(&plan, &buckets(), toy_analysis).unwrap();
        assert!(out.dispersion.iter().all(|d| d.sd == 0.0 && d.n_runs == 2));

        plan.seed_policy = SeedPolicy::PerRun;
        plan.repeats = 6;
        let serial = repeat_average(&plan, &buckets(), toy_analysis).unwrap();
        plan.threads = 3;
        let parallel = repeat_average(&plan, &buckets(), toy_analysis).unwrap();
        assert_eq!(serial, parallel);
        assert!(serial.dispersion.iter().any(|d| d.sd > 0.0));
    }

    #[test]
    fn run_failure_reports_index() {
        let plan = SamplePlan::undersample(3, 1);
        let fail = |_: &[BucketCorpus], ctx: RunContext| -> Result<BiasSeries<f64>> {
            if ctx.run == 2 {
                Err(Error::Empty("boom".into()))
            } else {
                toy_analysis(&[], ctx)
            }
        };
        let mut plan = plan;
        plan.schedule = GenreSchedule::always(&[Genre::Rock]);
        match repeat_average(&plan, &buckets(), fail) {
            Err(Error::Run { run, .. }) => assert_eq!(run, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn popularity_mode_drops_thin_buckets() {
        let t = PopularityTable::new([
            PopularityRow { bucket_start: 1970, genre: Genre::Rock, share: 1.0 },
            PopularityRow { bucket_start: 1975, genre: Genre::Rock, share: 1.0 },
        ])
        .unwrap();
        let mut plan = SamplePlan::popularity(1, 1, t, 80);
        plan.schedule = GenreSchedule::always(&[Genre::Rock]);
        let (kept, dropped) = plan.sample_run(&buckets(), 0).unwrap();
        assert_eq!(dropped, vec![1975]);
        assert_eq!(kept.len(), 1);
    }

    proptest! {
        #[test]
        fn undersample_balances_without_duplicates(
            counts in prop::collection::vec(1usize..60, 1..6),
            seed in any::<u64>(),
        ) {
            let spec: Vec<(Genre, usize)> = Genre::ALL.iter().copied().zip(counts.iter().copied()).collect();
            let b = bucket(2000, &spec);
            let active: Vec<Genre> = spec.iter().map(|s| s.0).collect();
            let out = undersample(&b, &active, &mut rng(seed)).unwrap();
            let min = counts[..spec.len()].iter().copied().min().unwrap();
            let gc = out.genre_counts();
            prop_assert!(active.iter().all(|g| gc[g] == min));
            let ids: HashSet<&str> = out.records.iter().map(|r| r.id.as_str()).collect();
            prop_assert_eq!(ids.len(), out.records.len());
        }

        #[test]
        fn popularity_quotas_respect_availability(
            avail in prop::collection::vec(1usize..500, 3),
            raw in prop::collection::vec(0.0f64..1.0, 3),
        ) {
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 1e-3);
            let gs = [Genre::Pop, Genre::Rock, Genre::Country];
            let shares: Vec<f64> = raw.iter().map(|r| r / total).collect();
            let b = bucket(1990, &gs.iter().copied().zip(avail.iter().copied()).collect::<Vec<_>>());
            let t = PopularityTable::new(gs.iter().zip(&shares).map(|(&genre, &share)| PopularityRow { bucket_start: 1990, genre, share })).unwrap();
            if let Ok(q) = popularity_quotas(&b, &t, &gs) {
                for (i, g) in gs.iter().enumerate() {
                    prop_assert!(q[g] <= avail[i]);
                }
            }
        }
    }
}
