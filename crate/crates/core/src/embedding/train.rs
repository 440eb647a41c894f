use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::BucketCorpus;
use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

use super::{subsample_keep_prob, EmbeddingModel, UnigramTable, Vocabulary};

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub negatives: usize,
    pub subsample_t: f64,
    pub min_count: u64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 300,
            window: 5,
            epochs: 5,
            initial_lr: 0.025,
            negatives: 5,
            subsample_t: 1e-3,
            min_count: 5,
            seed: 1,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.dim < 1 {
            return bad("dim must be >= 1");
        }
        if self.window < 1 {
            return bad("window must be >= 1");
        }
        if self.epochs < 1 {
            return bad("epochs must be >= 1");
        }
        if self.negatives < 1 {
            return bad("negatives must be >= 1");
        }
        if !(self.initial_lr > 0.0) || !self.initial_lr.is_finite() {
            return bad("initial_lr must be > 0");
        }
        if !(self.subsample_t > 0.0) {
            return bad("subsample_t must be > 0");
        }
        if self.threads < 1 {
            return bad("threads must be >= 1");
        }
        Ok(())
    }
}

/// Mean per-step loss for each epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
    pub steps: u64,
}

/// Negative-sample draws equal to the center word are redrawn this many times.
const NEGATIVE_REDRAWS: usize = 3;

#[inline]
fn sigmoid<F: Real>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// ln(1 + e^x), stable for large |x|.
#[inline]
fn softplus<F: Real>(x: F) -> F {
    x.max(F::zero()) + (-x.abs()).exp().ln_1p()
}

struct Scratch<F> {
    hidden: Vec<F>,
    grad_hidden: Vec<F>,
    coeffs: Vec<F>,
}

impl<F: Real> Scratch<F> {
    fn new(dim: usize) -> Self {
        Self {
            hidden: vec![F::zero(); dim],
            grad_hidden: vec![F::zero(); dim],
            coeffs: Vec::new(),
        }
    }
}

/// One CBOW negative-sampling update on raw tables. All gradients are taken
/// at the pre-update point, so repeated rows (a negative equal to the center,
/// duplicated context words) receive the sum of their gradients.
fn cbow_kernel<F: Real>(
    input: &mut [F],
    output: &mut [F],
    dim: usize,
    center: usize,
    context: &[usize],
    negatives: &[usize],
    lr: F,
    s: &mut Scratch<F>,
) -> F {
    if context.is_empty() {
        return F::zero();
    }
    let inv_c = F::one() / F::of_usize(context.len());
    s.hidden.iter_mut().for_each(|v| *v = F::zero());
    for &c in context {
        for (h, &x) in s.hidden.iter_mut().zip(&input[c * dim..(c + 1) * dim]) {
            *h += x;
        }
    }
    s.hidden.iter_mut().for_each(|v| *v *= inv_c);

    let mut loss = F::zero();
    s.coeffs.clear();
    s.grad_hidden.iter_mut().for_each(|v| *v = F::zero());
    let targets = std::iter::once((center, true)).chain(negatives.iter().map(|&k| (k, false)));
    for (row, positive) in targets {
        let u = &output[row * dim..(row + 1) * dim];
        let score = dot(u, &s.hidden);
        let (label, term) = if positive {
            (F::one(), softplus(-score))
        } else {
            (F::zero(), softplus(score))
        };
        loss += term;
        // negative derivative of the loss w.r.t. the score
        let g = label - sigmoid(score);
        for (gh, &x) in s.grad_hidden.iter_mut().zip(u) {
            *gh += g * x;
        }
        s.coeffs.push(g);
    }
    let targets = std::iter::once(center).chain(negatives.iter().copied());
    for (row, &g) in targets.zip(&s.coeffs) {
        let step = lr * g;
        for (x, &h) in output[row * dim..(row + 1) * dim].iter_mut().zip(&s.hidden) {
            *x += step * h;
        }
    }
    for &c in context {
        for (x, &gh) in input[c * dim..(c + 1) * dim].iter_mut().zip(&s.grad_hidden) {
            *x += lr * inv_c * gh;
        }
    }
    loss
}

/// Applies one gradient-descent step for predicting `center` from the mean
/// of `context` against the drawn `negatives`, returning the loss before the
/// update. An empty context is a no-op with zero loss.
pub fn cbow_step<F: Real>(
    model: &mut EmbeddingModel<F>,
    center: usize,
    context: &[usize],
    negatives: &[usize],
    lr: F,
) -> Result<F> {
    let v = model.vocab.len();
    if let Some(&bad) = std::iter::once(&center)
        .chain(context)
        .chain(negatives)
        .find(|&&i| i >= v)
    {
        return Err(Error::Config(format!("word index {bad} outside vocabulary of {v}")));
    }
    let dim = model.dim;
    let mut scratch = Scratch::new(dim);
    let (input, output) = model.tables_mut();
    Ok(cbow_kernel(input, output, dim, center, context, negatives, lr, &mut scratch))
}

/// Trains a model on one bucket's documents.
pub fn train<F: Real>(corpus: &BucketCorpus, config: &TrainConfig) -> Result<EmbeddingModel<F>> {
    let docs: Vec<&[String]> = corpus.documents().collect();
    train_documents(&docs, config).map(|(m, _)| m)
}

/// Trains on arbitrary tokenized documents and reports per-epoch losses.
///
/// With `threads == 1` the result depends only on the documents and the
/// config. With more threads, workers update shared rows without locking and
/// the result is no longer reproducible.
pub fn train_documents<F: Real>(
    docs: &[&[String]],
    config: &TrainConfig,
) -> Result<(EmbeddingModel<F>, TrainReport)> {
    config.validate()?;
    let vocab = Vocabulary::from_documents(docs.iter().copied(), config.min_count)?;
    let table = UnigramTable::new(&vocab)?;
    let dim = config.dim;
    let v = vocab.len();

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_rng.set_stream(u64::MAX);
    let half = 0.5 / dim as f64;
    let input: Vec<F> = (0..v * dim)
        .map(|_| F::of((init_rng.random::<f64>() * 2.0 - 1.0) * half))
        .collect();
    let output = vec![F::zero(); v * dim];

    let total = vocab.total_tokens() as f64;
    let keep: Vec<f64> = vocab
        .counts()
        .iter()
        .map(|&c| subsample_keep_prob(c as f64 / total, config.subsample_t))
        .collect();
    let encoded: Vec<Vec<usize>> = docs
        .iter()
        .map(|d| d.iter().filter_map(|w| vocab.index_of(w)).collect())
        .collect();

    let mut model = EmbeddingModel {
        vocab,
        dim,
        input,
        output,
        config: config.clone(),
    };

    let shared = Shared {
        table: &table,
        keep: &keep,
        config,
        schedule_total: config.epochs as f64 * total + 1.0,
        processed: AtomicU64::new(0),
    };
    let mut rngs: Vec<ChaCha8Rng> = (0..config.threads)
        .map(|w| {
            let mut r = ChaCha8Rng::seed_from_u64(config.seed);
            r.set_stream(w as u64);
            r
        })
        .collect();

    let mut report = TrainReport::default();
    for _ in 0..config.epochs {
        let (loss, steps) = if config.threads == 1 {
            let (input, output) = model.tables_mut();
            let docs: Vec<&[usize]> = encoded.iter().map(Vec::as_slice).collect();
            run_worker(&shared, input, output, dim, &docs, &mut rngs[0])
        } else {
            run_hogwild(&shared, &mut model, &encoded, &mut rngs)
        };
        report.steps += steps;
        report
            .epoch_losses
            .push(if steps == 0 { 0.0 } else { loss / steps as f64 });
    }
    if !model.input.iter().all(|x| x.is_finite()) {
        return Err(Error::Degenerate("training diverged to non-finite vectors".into()));
    }
    Ok((model, report))
}

struct Shared<'a> {
    table: &'a UnigramTable,
    keep: &'a [f64],
    config: &'a TrainConfig,
    schedule_total: f64,
    processed: AtomicU64,
}

fn run_worker<F: Real>(
    shared: &Shared<'_>,
    input: &mut [F],
    output: &mut [F],
    dim: usize,
    docs: &[&[usize]],
    rng: &mut ChaCha8Rng,
) -> (f64, u64) {
    let cfg = shared.config;
    let mut scratch = Scratch::new(dim);
    let mut sentence = Vec::new();
    let mut context = Vec::with_capacity(2 * cfg.window);
    let mut negatives = Vec::with_capacity(cfg.negatives);
    let (mut loss_sum, mut steps) = (0.0f64, 0u64);

    for doc in docs {
        let done = shared.processed.fetch_add(doc.len() as u64, Ordering::Relaxed) as f64;
        let lr = cfg.initial_lr * (1.0 - done / shared.schedule_total).max(1e-4);
        let lr = F::of(lr);
        sentence.clear();
        sentence.extend(
            doc.iter()
                .copied()
                .filter(|&w| shared.keep[w] >= 1.0 || rng.random::<f64>() < shared.keep[w]),
        );
        for pos in 0..sentence.len() {
            let reach = cfg.window - rng.random_range(0..cfg.window);
            let lo = pos.saturating_sub(reach);
            let hi = (pos + reach + 1).min(sentence.len());
            context.clear();
            context.extend((lo..hi).filter(|&j| j != pos).map(|j| sentence[j]));
            if context.is_empty() {
                continue;
            }
            let center = sentence[pos];
            negatives.clear();
            for _ in 0..cfg.negatives {
                let mut k = shared.table.sample(rng);
                for _ in 0..NEGATIVE_REDRAWS {
                    if k != center {
                        break;
                    }
                    k = shared.table.sample(rng);
                }
                negatives.push(k);
            }
            let l = cbow_kernel(input, output, dim, center, &context, &negatives, lr, &mut scratch);
            loss_sum += l.f64();
            steps += 1;
        }
    }
    (loss_sum, steps)
}

/// Raw table pointers handed to hogwild workers.
struct RacyTables<F> {
    input: *mut F,
    output: *mut F,
    len: usize,
}

// SAFETY: workers write to overlapping rows without synchronisation; lost or
// torn updates are accepted by the lock-free training contract. The tables
// outlive the scoped threads that use them.
unsafe impl<F: Send> Send for RacyTables<F> {}
unsafe impl<F: Send> Sync for RacyTables<F> {}

fn run_hogwild<F: Real>(
    shared: &Shared<'_>,
    model: &mut EmbeddingModel<F>,
    encoded: &[Vec<usize>],
    rngs: &mut [ChaCha8Rng],
) -> (f64, u64) {
    let dim = model.dim;
    let threads = rngs.len();
    let (input, output) = model.tables_mut();
    let tables = RacyTables {
        input: input.as_mut_ptr(),
        output: output.as_mut_ptr(),
        len: input.len(),
    };
    let tables = &tables;
    std::thread::scope(|scope| {
        let handles: Vec<_> = rngs
            .iter_mut()
            .enumerate()
            .map(|(w, rng)| {
                let shard: Vec<&[usize]> = encoded
                    .iter()
                    .skip(w)
                    .step_by(threads)
                    .map(Vec::as_slice)
                    .collect();
                scope.spawn(move || {
                    // SAFETY: see `RacyTables`.
                    let (input, output) = unsafe {
                        (
                            std::slice::from_raw_parts_mut(tables.input, tables.len),
                            std::slice::from_raw_parts_mut(tables.output, tables.len),
                        )
                    };
                    run_worker(shared, input, output, dim, &shard, rng)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training worker panicked"))
            .fold((0.0, 0), |(l, s), (l2, s2)| (l + l2, s + s2))
    })
}
