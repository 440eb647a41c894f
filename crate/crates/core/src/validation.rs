//! Correlation checks of embedding bias against external judgments, and the
//! lead/lag comparison with an opinion series.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Read};

use serde::Serialize;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::scalar::Real;
pub use crate::stats::{pearson, Correlation};

/// Which end of a rating scale is the masculine one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HigherMeans {
    Masculine,
    Feminine,
}

/// Human gender-association ratings for a set of words.
#[derive(Debug, Clone, PartialEq)]
pub struct RatedWordSet {
    rows: Vec<(String, f64)>,
    pub higher_means: HigherMeans,
    pub source: String,
}

impl RatedWordSet {
    pub fn new(rows: Vec<(String, f64)>, higher_means: HigherMeans, source: impl Into<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("rated word set has no rows".into()));
        }
        let mut seen = HashSet::new();
        for (w, s) in &rows {
            if !seen.insert(w.as_str()) {
                return Err(Error::parse("rated word set", format!("duplicate word `{w}`")));
            }
            if !s.is_finite() {
                return Err(Error::parse("rated word set", format!("non-finite score for `{w}`")));
            }
        }
        Ok(Self {
            rows,
            higher_means,
            source: source.into(),
        })
    }

    pub fn rows(&self) -> &[(String, f64)] {
        &self.rows
    }

    /// Scores flipped if needed so that larger means more masculine.
    pub fn male_positive(&self) -> Vec<(String, f64)> {
        let sign = match self.higher_means {
            HigherMeans::Masculine => 1.0,
            HigherMeans::Feminine => -1.0,
        };
        self.rows.iter().map(|(w, s)| (w.clone(), sign * s)).collect()
    }

    /// Reads `{word,score}` CSV. A leading comment line
    /// `# higher_means=masculine|feminine source=...` sets the metadata;
    /// without it the scale is taken as masculine-high.
    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut higher_means = HigherMeans::Masculine;
        let mut source = String::new();
        let mut body = String::new();
        for line in r.lines() {
            let line = line.map_err(|e| Error::io("rated word set", e))?;
            if let Some(meta) = line.trim_start().strip_prefix('#') {
                for kv in meta.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("higher_means", v)) => {
                            higher_means = match v.to_lowercase().as_str() {
                                "masculine" | "male" => HigherMeans::Masculine,
                                "feminine" | "female" => HigherMeans::Feminine,
                                _ => return Err(Error::parse("rated word set", format!("unknown higher_means `{v}`"))),
                            }
                        }
                        Some(("source", v)) => source = v.to_string(),
                        _ => {}
                    }
                }
                continue;
            }
            body.push_str(&line);
            body.push('\n');
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::parse("rated word set", e))?;
            let word = rec.get(0).unwrap_or("").to_lowercase();
            let score: f64 = rec
                .get(1)
                .unwrap_or("")
                .parse()
                .map_err(|e| Error::parse(format!("rated word set score for `{word}`"), e))?;
            rows.push((word, score));
        }
        Self::new(rows, higher_means, source)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatingCorrelation<F> {
    pub correlation: Correlation<F>,
    pub n_matched: usize,
    pub n_rated: usize,
    pub unmatched: Vec<String>,
}

/// Pearson r between per-word bias and male-positive human ratings over
/// the words both sides know.
pub fn embedding_vs_ratings<F: Real>(bias: &BTreeMap<String, F>, rated: &RatedWordSet) -> Result<RatingCorrelation<F>> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut unmatched = Vec::new();
    for (w, s) in rated.male_positive() {
        match bias.get(&w) {
            Some(&b) => {
                xs.push(b);
                ys.push(F::of(s));
            }
            None => unmatched.push(w),
        }
    }
    if xs.len() < 3 {
        return Err(Error::Insufficient(format!(
            "{} of {} rated words found in the bias map; at least 3 needed",
            xs.len(),
            rated.rows().len()
        )));
    }
    Ok(RatingCorrelation {
        correlation: pearson(&xs, &ys)?,
        n_matched: xs.len(),
        n_rated: rated.rows().len(),
        unmatched,
    })
}

/// A word pair with a human similarity judgment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityPair {
    pub a: String,
    pub b: String,
    pub score: f64,
}

/// Reads whitespace-separated `w1 w2 score` lines; blank and `#` lines are
/// skipped.
pub fn read_similarity_pairs<R: BufRead>(r: R) -> Result<Vec<SimilarityPair>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io("similarity pairs", e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::parse(format!("similarity pairs line {}", i + 1), "expected `w1 w2 score`"));
        }
        let score = parts[2]
            .parse()
            .map_err(|e| Error::parse(format!("similarity pairs line {}", i + 1), e))?;
        out.push(SimilarityPair {
            a: strip_pos(parts[0]),
            b: strip_pos(parts[1]),
            score,
        });
    }
    Ok(out)
}

// Distributed MEN files tag words as `sun-n`.
fn strip_pos(w: &str) -> String {
    match w.rsplit_once('-') {
        Some((head, tag)) if matches!(tag, "n" | "v" | "j" | "a" | "r") && !head.is_empty() => head.to_lowercase(),
        _ => w.to_lowercase(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkResult<F> {
    pub correlation: Correlation<F>,
    pub covered: usize,
    pub total: usize,
    pub coverage: f64,
}

/// Pearson r between model cosine and human similarity over the pairs whose
/// words are both in the vocabulary.
pub fn men_benchmark<F: Real>(model: &EmbeddingModel<F>, pairs: &[SimilarityPair]) -> Result<BenchmarkResult<F>> {
    let mut model_sim = Vec::new();
    let mut human = Vec::new();
    for p in pairs {
        if let Some(sim) = model.similarity(&p.a, &p.b) {
            model_sim.push(sim?);
            human.push(F::of(p.score));
        }
    }
    let total = pairs.len();
    let covered = model_sim.len();
    let coverage = if total == 0 { 0.0 } else { covered as f64 / total as f64 };
    if covered < 10 {
        return Err(Error::Insufficient(format!(
            "only {covered} of {total} pairs in vocabulary (coverage {coverage:.3}); at least 10 needed"
        )));
    }
    Ok(BenchmarkResult {
        correlation: pearson(&model_sim, &human)?,
        covered,
        total,
        coverage,
    })
}

/// Share of respondents naming women, per period.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionSeries {
    rows: Vec<(i32, f64)>,
}

impl OpinionSeries {
    pub fn new(rows: Vec<(i32, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("opinion series has no rows".into()));
        }
        for w in rows.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::parse("opinion series", "periods must be strictly increasing"));
            }
        }
        if let Some(&(p, s)) = rows.iter().find(|r| !(0.0..=1.0).contains(&r.1)) {
            return Err(Error::parse("opinion series", format!("share {s} for {p} outside [0, 1]")));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[(i32, f64)] {
        &self.rows
    }

    pub fn get(&self, period: i32) -> Option<f64> {
        self.rows.iter().find(|r| r.0 == period).map(|r| r.1)
    }

    /// Reads `{period_start,share_women}` CSV; `#` lines are comments.
    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::parse("opinion series", e))?;
            let period = rec.get(0).unwrap_or("").parse().map_err(|e| Error::parse("opinion series period_start", e))?;
            let share = rec.get(1).unwrap_or("").parse().map_err(|e| Error::parse("opinion series share_women", e))?;
            rows.push((period, share));
        }
        Self::new(rows)
    }
}

/// One alignment of the bias series against the opinion series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alignment<F> {
    /// Opinion period minus bias period, in years.
    pub offset: i32,
    /// Correlation of opinion with bias as scored (male-positive).
    pub raw: Correlation<F>,
    /// Correlation of opinion with negated bias; positive means lyrics
    /// favouring women go with opinion favouring women.
    pub oriented: Correlation<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeadLag<F> {
    pub preceding: Alignment<F>,
    pub simultaneous: Alignment<F>,
    pub subsequent: Alignment<F>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeadLagReport<F> {
    /// Bias levels against opinion levels.
    pub levels: LeadLag<F>,
    /// Period-to-period changes of both series, when enough periods align.
    pub differences: Option<LeadLag<F>>,
    pub differences_note: Option<String>,
}

fn align<F: Real>(bias: &[(i32, F)], opinion: &[(i32, F)], offset: i32) -> Result<Alignment<F>> {
    let lookup: BTreeMap<i32, F> = opinion.iter().copied().collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(p, b) in bias {
        if let Some(&o) = lookup.get(&(p + offset)) {
            xs.push(b);
            ys.push(o);
        }
    }
    if xs.len() < 3 {
        return Err(Error::Insufficient(format!(
            "{} period pairs align at offset {offset}; at least 3 needed",
            xs.len()
        )));
    }
    let raw = pearson(&ys, &xs)?;
    Ok(Alignment {
        offset,
        raw,
        oriented: raw.negated(),
    })
}

fn lead_lag_of<F: Real>(bias: &[(i32, F)], opinion: &[(i32, F)], width: i32) -> Result<LeadLag<F>> {
    Ok(LeadLag {
        preceding: align(bias, opinion, -width)?,
        simultaneous: align(bias, opinion, 0)?,
        subsequent: align(bias, opinion, width)?,
    })
}

fn differences<F: Real>(series: &[(i32, F)], width: i32) -> Vec<(i32, F)> {
    series
        .windows(2)
        .filter(|w| w[1].0 - w[0].0 == width)
        .map(|w| (w[1].0, w[1].1 - w[0].1))
        .collect()
}

/// Correlates the bias series with the opinion series one period earlier,
/// at the same period and one period later, for levels and for first
/// differences. `width` is the period length in years.
pub fn lead_lag<F: Real>(bias: &[(i32, F)], opinion: &OpinionSeries, width: i32) -> Result<LeadLagReport<F>> {
    if width < 1 {
        return Err(Error::Config(format!("period width must be >= 1, got {width}")));
    }
    let mut bias = bias.to_vec();
    bias.sort_by_key(|b| b.0);
    let op: Vec<(i32, F)> = opinion.rows().iter().map(|&(p, s)| (p, F::of(s))).collect();
    let levels = lead_lag_of(&bias, &op, width)?;
    let (differences, differences_note) = match lead_lag_of(&differences(&bias, width), &differences(&op, width), width) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(LeadLagReport {
        levels,
        differences,
        differences_note,
    })
}
