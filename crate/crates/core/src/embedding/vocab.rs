use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};

/// Dense word index with pre-filter corpus frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    words: Vec<String>,
    counts: Vec<u64>,
    total_tokens: u64,
    min_count: u64,
}

impl Vocabulary {
    /// Counts tokens and keeps words seen at least `min_count` times.
    /// Indices are assigned by descending count, ties broken alphabetically.
    pub fn from_documents<'a, I>(docs: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut counts: HashMap<&'a str, u64> = HashMap::new();
        for doc in docs {
            for tok in doc {
                *counts.entry(tok.as_str()).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            return Err(Error::Empty("cannot build a vocabulary from an empty corpus".into()));
        }
        let mut kept: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .collect();
        if kept.is_empty() {
            return Err(Error::Empty(format!(
                "every word occurs fewer than {min_count} times"
            )));
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Self::from_counts(
            kept.into_iter().map(|(w, c)| (w.to_string(), c)).collect(),
            min_count,
        ))
    }

    /// Builds from explicit `(word, count)` pairs, keeping their order.
    pub fn from_counts(entries: Vec<(String, u64)>, min_count: u64) -> Self {
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (i, (w, c)) in entries.into_iter().enumerate() {
            index.insert(w.clone(), i);
            words.push(w);
            counts.push(c);
        }
        let total_tokens = counts.iter().sum();
        Self {
            index,
            words,
            counts,
            total_tokens,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn count_of(&self, word: &str) -> Option<u64> {
        self.index_of(word).map(|i| self.counts[i])
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Sum of retained word counts.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }
}

/// Negative-sampling distribution, `P(w) ∝ count(w)^0.75`.
#[derive(Debug, Clone)]
pub struct UnigramTable {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

pub const UNIGRAM_POWER: f64 = 0.75;

impl UnigramTable {
    pub fn new(vocab: &Vocabulary) -> Result<Self> {
        if vocab.is_empty() {
            return Err(Error::Empty("negative table over an empty vocabulary".into()));
        }
        let weights: Vec<f64> = vocab
            .counts()
            .iter()
            .map(|&c| (c as f64).powf(UNIGRAM_POWER))
            .collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Ok(Self { probs, cdf })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Frequent-word keep probability, `min(1, (sqrt(f/t) + 1) t / f)`.
pub fn subsample_keep_prob(freq: f64, t: f64) -> f64 {
    (((freq / t).sqrt() + 1.0) * t / freq).min(1.0)
}
