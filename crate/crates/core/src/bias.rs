//! Group vectors and the per-word bias score
//! `cos(w, V_male) - cos(w, V_female)`, assembled into per-bucket series.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{cosine, EmbeddingModel};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::scalar::{norm, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Male,
    Female,
}

/// How member vectors are combined into a group vector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Plain mean of the raw vectors.
    #[default]
    Raw,
    /// Each vector scaled to unit length before averaging.
    UnitNormalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupVector<F> {
    pub group: Group,
    pub vector: Vec<F>,
    pub words_found: Vec<String>,
    pub words_missing: Vec<String>,
}

/// Mean of the raw word vectors of the lexicon words present in the model.
pub fn group_vector<F: Real>(
    model: &EmbeddingModel<F>,
    lexicon: &Lexicon,
    group: Group,
) -> Result<GroupVector<F>> {
    group_vector_with(model, lexicon, group, Averaging::Raw)
}

pub fn group_vector_with<F: Real>(
    model: &EmbeddingModel<F>,
    lexicon: &Lexicon,
    group: Group,
    averaging: Averaging,
) -> Result<GroupVector<F>> {
    let mut vector = vec![F::zero(); model.dim()];
    let mut words_found = Vec::new();
    let mut words_missing = Vec::new();
    for w in lexicon.words() {
        match model.vector(w) {
            Some(v) => {
                let scale = match averaging {
                    Averaging::Raw => F::one(),
                    Averaging::UnitNormalized => {
                        let n = norm(v);
                        if !(n > F::zero()) {
                            return Err(Error::ZeroNorm(format!("vector of `{w}`")));
                        }
                        F::one() / n
                    }
                };
                for (acc, &x) in vector.iter_mut().zip(v) {
                    *acc += x * scale;
                }
                words_found.push(w.clone());
            }
            None => words_missing.push(w.clone()),
        }
    }
    if words_found.is_empty() {
        return Err(Error::LexiconNotFound(lexicon.name().to_string()));
    }
    let inv = F::one() / F::of_usize(words_found.len());
    vector.iter_mut().for_each(|x| *x *= inv);
    Ok(GroupVector {
        group,
        vector,
        words_found,
        words_missing,
    })
}

/// Bias of one trait word in one bucket. Positive means closer to the male
/// group vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasObservation<F> {
    pub bucket_start: i32,
    pub trait_word: String,
    pub cos_male: F,
    pub cos_female: F,
    pub bias: F,
}

impl<F: Real> BiasObservation<F> {
    pub fn new(bucket_start: i32, trait_word: impl Into<String>, cos_male: F, cos_female: F) -> Self {
        Self {
            bucket_start,
            trait_word: trait_word.into(),
            cos_male,
            cos_female,
            bias: cos_male - cos_female,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraitBias<F> {
    pub observations: Vec<BiasObservation<F>>,
    pub missing: Vec<String>,
}

/// Scores every trait word found in the model against the two group vectors.
pub fn trait_bias<F: Real>(
    model: &EmbeddingModel<F>,
    trait_lexicon: &Lexicon,
    male: &GroupVector<F>,
    female: &GroupVector<F>,
    bucket_start: i32,
) -> Result<TraitBias<F>> {
    if !(norm(&male.vector) > F::zero()) || !(norm(&female.vector) > F::zero()) {
        return Err(Error::ZeroNorm("group vector".into()));
    }
    let mut observations = Vec::new();
    let mut missing = Vec::new();
    for w in trait_lexicon.words() {
        match model.vector(w) {
            Some(v) => {
                let cm = cosine(v, &male.vector)?;
                let cf = cosine(v, &female.vector)?;
                observations.push(BiasObservation::new(bucket_start, w.clone(), cm, cf));
            }
            None => missing.push(w.clone()),
        }
    }
    if observations.is_empty() {
        return Err(Error::LexiconNotFound(trait_lexicon.name().to_string()));
    }
    Ok(TraitBias {
        observations,
        missing,
    })
}

/// Per-word bias for every listed word present in the model.
pub fn word_bias_map<F: Real, S: AsRef<str>>(
    model: &EmbeddingModel<F>,
    words: &[S],
    male: &GroupVector<F>,
    female: &GroupVector<F>,
) -> Result<BTreeMap<String, F>> {
    let mut out = BTreeMap::new();
    for w in words {
        let w = w.as_ref();
        if let Some(v) = model.vector(w) {
            out.insert(w.to_string(), cosine(v, &male.vector)? - cosine(v, &female.vector)?);
        }
    }
    Ok(out)
}

/// Which trait words a series keeps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordFilter {
    /// Each bucket scores whatever trait words its vocabulary has.
    #[default]
    None,
    /// Only trait words seen at least five times in the bucket. A no-op for
    /// models trained with `min_count >= 5`.
    MinCount5,
    /// Only trait words present in every bucket's vocabulary.
    EveryPeriod,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BiasOptions {
    pub filter: WordFilter,
    pub averaging: Averaging,
}

/// Aggregate for one bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketBias<F> {
    pub bucket_start: i32,
    pub mean_bias: F,
    pub n_words: usize,
    pub ci_low: Option<F>,
    pub ci_high: Option<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasSeries<F> {
    pub trait_name: String,
    pub observations: Vec<BiasObservation<F>>,
    pub buckets: Vec<BucketBias<F>>,
}

impl<F: Real> BiasSeries<F> {
    /// Builds the per-bucket means from observations. Buckets are ordered by
    /// start year.
    pub fn from_observations(trait_name: impl Into<String>, observations: Vec<BiasObservation<F>>) -> Self {
        let mut grouped: BTreeMap<i32, Vec<F>> = BTreeMap::new();
        for o in &observations {
            grouped.entry(o.bucket_start).or_default().push(o.bias);
        }
        let buckets = grouped
            .into_iter()
            .map(|(bucket_start, v)| BucketBias {
                bucket_start,
                mean_bias: v.iter().copied().sum::<F>() / F::of_usize(v.len()),
                n_words: v.len(),
                ci_low: None,
                ci_high: None,
            })
            .collect();
        Self {
            trait_name: trait_name.into(),
            observations,
            buckets,
        }
    }

    pub fn bucket(&self, bucket_start: i32) -> Option<&BucketBias<F>> {
        self.buckets.iter().find(|b| b.bucket_start == bucket_start)
    }

    /// `(bucket_start, mean_bias)` pairs.
    pub fn means(&self) -> Vec<(i32, F)> {
        self.buckets.iter().map(|b| (b.bucket_start, b.mean_bias)).collect()
    }

    /// Adds percentile bootstrap intervals, resampling trait words within
    /// each bucket.
    pub fn with_bootstrap_ci(mut self, resamples: usize, level: f64, seed: u64) -> Self {
        for (i, b) in self.buckets.iter_mut().enumerate() {
            let values: Vec<f64> = self
                .observations
                .iter()
                .filter(|o| o.bucket_start == b.bucket_start)
                .map(|o| o.bias.f64())
                .collect();
            if let Some((lo, hi)) = bootstrap_mean_ci(&values, resamples, level, seed, i as u64) {
                b.ci_low = Some(F::of(lo));
                b.ci_high = Some(F::of(hi));
            }
        }
        self
    }
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, level: f64, seed: u64, stream: u64) -> Option<(f64, f64)> {
    if values.is_empty() || resamples == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(|a, b| a.total_cmp(b));
    let alpha = (1.0 - level) / 2.0;
    Some((quantile_sorted(&means, alpha), quantile_sorted(&means, 1.0 - alpha)))
}

/// Linear-interpolated quantile of sorted data.
fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (xs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    xs[lo] + (xs[hi] - xs[lo]) * (pos - lo as f64)
}

/// Scores a trait lexicon in every bucket model.
pub fn bias_series<F: Real>(
    models: &[(i32, &EmbeddingModel<F>)],
    male: &Lexicon,
    female: &Lexicon,
    trait_lexicon: &Lexicon,
    options: BiasOptions,
) -> Result<BiasSeries<F>> {
    if models.len() < 2 {
        return Err(Error::Insufficient(format!(
            "a bias series needs at least 2 buckets, got {}",
            models.len()
        )));
    }
    let restricted: Option<HashSet<&str>> = match options.filter {
        WordFilter::EveryPeriod => {
            let keep: HashSet<&str> = trait_lexicon
                .words()
                .iter()
                .map(String::as_str)
                .filter(|w| models.iter().all(|(_, m)| m.contains(w)))
                .collect();
            if keep.is_empty() {
                return Err(Error::Empty(format!(
                    "no `{}` word occurs in every period",
                    trait_lexicon.name()
                )));
            }
            Some(keep)
        }
        _ => None,
    };

    let mut observations = Vec::new();
    for &(start, model) in models {
        let words: Vec<String> = trait_lexicon
            .words()
            .iter()
            .filter(|w| restricted.as_ref().is_none_or(|k| k.contains(w.as_str())))
            .filter(|w| match options.filter {
                WordFilter::MinCount5 => model.vocab().count_of(w).is_some_and(|c| c >= 5),
                _ => true,
            })
            .cloned()
            .collect();
        let Ok(lex) = Lexicon::new(trait_lexicon.name(), words) else {
            continue;
        };
        let mv = group_vector_with(model, male, Group::Male, options.averaging)?;
        let fv = group_vector_with(model, female, Group::Female, options.averaging)?;
        match trait_bias(model, &lex, &mv, &fv, start) {
            Ok(tb) => observations.extend(tb.observations),
            Err(Error::LexiconNotFound(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if observations.is_empty() {
        return Err(Error::LexiconNotFound(trait_lexicon.name().to_string()));
    }
    Ok(BiasSeries::from_observations(trait_lexicon.name(), observations))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationStatus {
    /// Mean of both groups' within-group similarities.
    Normalized,
    /// Only the male group had two or more words; its mean alone was used.
    MaleOnly,
    /// Only the female group had two or more words.
    FemaleOnly,
    /// No usable positive normalizer; the raw mean is kept.
    NotNormalizable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedBucket<F> {
    pub bucket_start: i32,
    pub raw_mean: F,
    pub normalizer: Option<F>,
    pub value: F,
    pub status: NormalizationStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries<F> {
    pub trait_name: String,
    pub buckets: Vec<NormalizedBucket<F>>,
}

impl<F: Real> NormalizedSeries<F> {
    pub fn means(&self) -> Vec<(i32, F)> {
        self.buckets.iter().map(|b| (b.bucket_start, b.value)).collect()
    }
}

/// Mean cosine over all pairs of distinct found words; `None` below two words.
pub fn mean_pairwise_similarity<F: Real>(model: &EmbeddingModel<F>, lexicon: &Lexicon) -> Result<Option<F>> {
    let vecs: Vec<&[F]> = lexicon.words().iter().filter_map(|w| model.vector(w)).collect();
    if vecs.len() < 2 {
        return Ok(None);
    }
    let mut sum = F::zero();
    let mut pairs = 0usize;
    for i in 0..vecs.len() {
        for j in (i + 1)..vecs.len() {
            sum += cosine(vecs[i], vecs[j])?;
            pairs += 1;
        }
    }
    Ok(Some(sum / F::of_usize(pairs)))
}

/// Divides each bucket mean by the average within-group similarity of the
/// male and female lexicons in that bucket's model.
pub fn complexity_normalize<F: Real>(
    series: &BiasSeries<F>,
    models: &[(i32, &EmbeddingModel<F>)],
    male: &Lexicon,
    female: &Lexicon,
) -> Result<NormalizedSeries<F>> {
    let mut buckets = Vec::with_capacity(series.buckets.len());
    for b in &series.buckets {
        let model = models
            .iter()
            .find(|(s, _)| *s == b.bucket_start)
            .map(|(_, m)| *m)
            .ok_or_else(|| Error::Insufficient(format!("no model for bucket {}", b.bucket_start)))?;
        let m = mean_pairwise_similarity(model, male)?;
        let f = mean_pairwise_similarity(model, female)?;
        let (normalizer, mut status) = match (m, f) {
            (Some(m), Some(f)) => (Some((m + f) / F::of(2.0)), NormalizationStatus::Normalized),
            (Some(m), None) => (Some(m), NormalizationStatus::MaleOnly),
            (None, Some(f)) => (Some(f), NormalizationStatus::FemaleOnly),
            (None, None) => (None, NormalizationStatus::NotNormalizable),
        };
        let value = match normalizer {
            Some(z) if z > F::zero() => b.mean_bias / z,
            _ => {
                status = NormalizationStatus::NotNormalizable;
                b.mean_bias
            }
        };
        buckets.push(NormalizedBucket {
            bucket_start: b.bucket_start,
            raw_mean: b.mean_bias,
            normalizer,
            value,
            status,
        });
    }
    Ok(NormalizedSeries {
        trait_name: series.trait_name.clone(),
        buckets,
    })
}

/// Writes `{bucket_start,trait_word,cos_male,cos_female,bias}` rows.
pub fn write_observations<F: Real + Serialize, W: Write>(w: W, obs: &[BiasObservation<F>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["bucket_start", "trait_word", "cos_male", "cos_female", "bias"])
        .map_err(|e| Error::parse("observations csv", e))?;
    for o in obs {
        out.write_record([
            o.bucket_start.to_string(),
            o.trait_word.clone(),
            o.cos_male.to_string(),
            o.cos_female.to_string(),
            o.bias.to_string(),
        ])
        .map_err(|e| Error::parse("observations csv", e))?;
    }
    out.flush().map_err(|e| Error::io("observations csv", e))
}

/// Reads rows written by [`write_observations`]; `#` lines are comments.
pub fn read_observations<F: Real + for<'de> Deserialize<'de>, R: Read>(r: R) -> Result<Vec<BiasObservation<F>>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize::<BiasObservation<F>>() {
        out.push(row.map_err(|e| Error::parse("observations csv", e))?);
    }
    Ok(out)
}

/// Writes `{bucket_start,mean_bias,n_words,ci_low,ci_high}` rows.
pub fn write_aggregate<F: Real, W: Write>(w: W, buckets: &[BucketBias<F>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["bucket_start", "mean_bias", "n_words", "ci_low", "ci_high"])
        .map_err(|e| Error::parse("aggregate csv", e))?;
    let opt = |v: Option<F>| v.map(|x| x.to_string()).unwrap_or_default();
    for b in buckets {
        out.write_record([
            b.bucket_start.to_string(),
            b.mean_bias.to_string(),
            b.n_words.to_string(),
            opt(b.ci_low),
            opt(b.ci_high),
        ])
        .map_err(|e| Error::parse("aggregate csv", e))?;
    }
    out.flush().map_err(|e| Error::io("aggregate csv", e))
}

/// Reads rows written by [`write_aggregate`].
pub fn read_aggregate<F: Real + for<'de> Deserialize<'de>, R: Read>(r: R) -> Result<Vec<BucketBias<F>>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize::<BucketBias<F>>() {
        out.push(row.map_err(|e| Error::parse("aggregate csv", e))?);
    }
    Ok(out)
}
