use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{cosine, TrainConfig, Vocabulary};

/// Trained vectors for one bucket. `input` rows are the word vectors;
/// `output` rows are the negative-sampling context weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel<F> {
    pub(crate) vocab: Vocabulary,
    pub(crate) dim: usize,
    pub(crate) input: Vec<F>,
    pub(crate) output: Vec<F>,
    pub(crate) config: TrainConfig,
}

impl<F: Real> EmbeddingModel<F> {
    /// Assembles a model from row-major `V x dim` tables.
    pub fn from_parts(
        vocab: Vocabulary,
        input: Vec<F>,
        output: Vec<F>,
        config: TrainConfig,
    ) -> Result<Self> {
        let dim = config.dim;
        let expected = vocab.len() * dim;
        if input.len() != expected || output.len() != expected {
            return Err(Error::Config(format!(
                "vector tables must hold {} x {} values",
                vocab.len(),
                dim
            )));
        }
        if !input.iter().chain(&output).all(|v| v.is_finite()) {
            return Err(Error::Degenerate("non-finite vector entry".into()));
        }
        Ok(Self {
            vocab,
            dim,
            input,
            output,
            config,
        })
    }

    /// Builds a model whose word vectors are given explicitly; output rows are zero.
    pub fn from_word_vectors<S: AsRef<str>>(rows: &[(S, Vec<F>)]) -> Result<Self> {
        let dim = rows.first().map(|r| r.1.len()).unwrap_or(0);
        if dim == 0 || rows.iter().any(|r| r.1.len() != dim) {
            return Err(Error::Config("word vectors must share a nonzero dimension".into()));
        }
        let vocab = Vocabulary::from_counts(
            rows.iter().map(|(w, _)| (w.as_ref().to_string(), 1)).collect(),
            1,
        );
        let input: Vec<F> = rows.iter().flat_map(|r| r.1.iter().copied()).collect();
        let output = vec![F::zero(); input.len()];
        let config = TrainConfig {
            dim,
            min_count: 1,
            ..TrainConfig::default()
        };
        Self::from_parts(vocab, input, output, config)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn input_row(&self, i: usize) -> &[F] {
        &self.input[i * self.dim..(i + 1) * self.dim]
    }

    pub fn output_row(&self, i: usize) -> &[F] {
        &self.output[i * self.dim..(i + 1) * self.dim]
    }

    pub fn input_vectors(&self) -> &[F] {
        &self.input
    }

    pub fn output_vectors(&self) -> &[F] {
        &self.output
    }

    pub(crate) fn tables_mut(&mut self) -> (&mut [F], &mut [F]) {
        (&mut self.input, &mut self.output)
    }

    /// The word vector for `word`, if it is in the vocabulary.
    pub fn vector(&self, word: &str) -> Option<&[F]> {
        self.vocab.index_of(word).map(|i| self.input_row(i))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vocab.index_of(word).is_some()
    }

    /// Cosine between two vocabulary words; `None` if either is missing.
    pub fn similarity(&self, a: &str, b: &str) -> Option<Result<F>> {
        Some(cosine(self.vector(a)?, self.vector(b)?))
    }

    /// The `k` words closest to `word` by cosine, excluding itself.
    pub fn most_similar(&self, word: &str, k: usize) -> Option<Vec<(String, F)>> {
        let target = self.vector(word)?;
        let mut scored: Vec<(String, F)> = (0..self.vocab.len())
            .filter(|&i| self.vocab.word(i) != word)
            .filter_map(|i| {
                cosine(target, self.input_row(i))
                    .ok()
                    .map(|c| (self.vocab.word(i).to_string(), c))
            })
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
        scored.truncate(k);
        Some(scored)
    }

    /// Multiplies every vector entry by `c`.
    pub fn scaled(&self, c: F) -> Self {
        let mut m = self.clone();
        m.input.iter_mut().chain(m.output.iter_mut()).for_each(|v| *v *= c);
        m
    }

    /// Converts the vector tables to another scalar type.
    pub fn cast<G: Real>(&self) -> EmbeddingModel<G> {
        EmbeddingModel {
            vocab: self.vocab.clone(),
            dim: self.dim,
            input: self.input.iter().map(|v| G::of(v.f64())).collect(),
            output: self.output.iter().map(|v| G::of(v.f64())).collect(),
            config: self.config.clone(),
        }
    }
}
