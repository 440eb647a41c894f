//! Acceptance suite. One PASS/FAIL line per criterion; exits nonzero if any fail.
//! Run alone with `cargo test -p biascorpus-cli --test acceptance`.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use biascorpus::aggression::{count_recipients, parse_conllu, BucketCounts, RecipientConfig};
use biascorpus::bias::{bias_series, BiasOptions, BiasSeries, Group};
use biascorpus::corpus::{BucketCorpus, Genre, SongRecord};
use biascorpus::embedding::{cbow_step, train_documents, TrainConfig, Vocabulary};
use biascorpus::lexicon::{Builtin, Lexicon};
use biascorpus::resampling::{popularity_quotas, sample_with_quotas, undersample, PopularityRow, PopularityTable};
use biascorpus::stats::{chi_square_share, pearson};
use biascorpus::synth::{bias_corpus, shuffled_scores, BiasCorpusSpec, SimilarityCorpus};
use biascorpus::trends::{fit_lmm_points, fit_ols, Lambda, LmmOptions, TimeCoding, TrendPoint};
use biascorpus::validation::{lead_lag, men_benchmark, OpinionSeries};
use biascorpus::EmbeddingModel64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Runs `jobs` on all cores, results in job order.
fn parallel<T: Send, J: Sync>(jobs: &[J], f: impl Fn(&J) -> T + Sync) -> Vec<T> {
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<T>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let n = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..n {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let v = f(&jobs[i]);
                out.lock().unwrap()[i] = Some(v);
            });
        }
    });
    out.into_inner().unwrap().into_iter().map(|v| v.unwrap()).collect()
}

// 1 ------------------------------------------------------------------

fn tiny_model(v: usize, dim: usize, input: Vec<f64>, output: Vec<f64>) -> EmbeddingModel64 {
    let vocab = Vocabulary::from_counts((0..v).map(|i| (format!("w{i}"), 5)).collect(), 1);
    let cfg = TrainConfig { dim, min_count: 1, ..TrainConfig::default() };
    EmbeddingModel64::from_parts(vocab, input, output, cfg).unwrap()
}

fn gradient_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let v = rng.random_range(2..=10);
        let dim = rng.random_range(1..=5);
        let input: Vec<f64> = (0..v * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let output: Vec<f64> = (0..v * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let center = rng.random_range(0..v);
        let ctx: Vec<usize> = (0..rng.random_range(1..=4)).map(|_| rng.random_range(0..v)).collect();
        let neg: Vec<usize> = (0..rng.random_range(1..=3)).map(|_| rng.random_range(0..v)).collect();
        let loss = |i: &[f64], o: &[f64]| {
            let mut m = tiny_model(v, dim, i.to_vec(), o.to_vec());
            cbow_step(&mut m, center, &ctx, &neg, 0.0).unwrap()
        };
        // a unit-rate step moves parameters by exactly minus the gradient
        let mut m = tiny_model(v, dim, input.clone(), output.clone());
        cbow_step(&mut m, center, &ctx, &neg, 1.0).unwrap();
        let g_in: Vec<f64> = input.iter().zip(m.input_vectors()).map(|(b, a)| b - a).collect();
        let g_out: Vec<f64> = output.iter().zip(m.output_vectors()).map(|(b, a)| b - a).collect();
        let rel = |a: f64, fd: f64| (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
        for k in 0..input.len() {
            let (mut p, mut q) = (input.clone(), input.clone());
            p[k] += h;
            q[k] -= h;
            let fd = (loss(&p, &output) - loss(&q, &output)) / (2.0 * h);
            worst = worst.max(rel(g_in[k], fd));
        }
        for k in 0..output.len() {
            let (mut p, mut q) = (output.clone(), output.clone());
            p[k] += h;
            q[k] -= h;
            let fd = (loss(&input, &p) - loss(&input, &q)) / (2.0 * h);
            worst = worst.max(rel(g_out[k], fd));
        }
    }
    check(worst < 1e-4, format!("max rel error {worst:.2e} over 50 configs"))
}

// 2, 3 ---------------------------------------------------------------

fn lexicons() -> (Lexicon, Lexicon, Lexicon) {
    (Builtin::Male.lexicon(), Builtin::Female.lexicon(), Builtin::Competence.lexicon())
}

fn train_bias_corpus(spec: &BiasCorpusSpec, dim: usize) -> EmbeddingModel64 {
    let (m, f, t) = lexicons();
    let docs = bias_corpus(spec, &m, &f, &t).unwrap();
    let refs: Vec<&[String]> = docs.iter().map(Vec::as_slice).collect();
    let cfg = TrainConfig { dim, seed: spec.seed, ..TrainConfig::default() };
    train_documents(&refs, &cfg).unwrap().0
}

fn series(models: &[(i32, &EmbeddingModel64)], m: &Lexicon, f: &Lexicon, t: &Lexicon) -> BiasSeries<f64> {
    bias_series(models, m, f, t, BiasOptions::default()).unwrap()
}

fn bias_recovery() -> Outcome {
    let jobs: Vec<(f64, Group, u64)> = [(1.0, Group::Male), (2.0, Group::Male), (3.0, Group::Male), (3.0, Group::Female)]
        .iter()
        .flat_map(|&(r, g)| (0..10).map(move |s| (r, g, 100 + s)))
        .collect();
    let means = parallel(&jobs, |&(rho, favored, seed)| {
        let spec = BiasCorpusSpec { favored, ..BiasCorpusSpec::new(rho, seed) };
        assert_eq!(spec.tokens, 200_000);
        let model = train_bias_corpus(&spec, 25);
        let (m, f, t) = lexicons();
        series(&[(0, &model), (5, &model)], &m, &f, &t).buckets[0].mean_bias
    });
    let (r1, r2, r3, sw) = (&means[0..10], &means[10..20], &means[20..30], &means[30..40]);
    let avg = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let null = avg(&r1.iter().map(|b| b.abs()).collect::<Vec<_>>());
    let pos = r3.iter().filter(|&&b| b > 0.0).count();
    let neg = sw.iter().filter(|&&b| b < 0.0).count();
    check(
        null < 0.05 && pos >= 9 && neg >= 9,
        format!(
            "rho=1 mean|bias|={null:.4}; rho=2 mean={:.3}; rho=3 positive {pos}/10 (mean {:.3}); swapped negative {neg}/10 (mean {:.3})",
            avg(r2),
            avg(r3),
            avg(sw)
        ),
    )
}

fn antisymmetry() -> Outcome {
    let (m, f, t) = lexicons();
    let a = train_bias_corpus(&BiasCorpusSpec { tokens: 100_000, ..BiasCorpusSpec::new(2.0, 7) }, 25);
    let b = train_bias_corpus(&BiasCorpusSpec { tokens: 100_000, ..BiasCorpusSpec::new(1.5, 8) }, 25);
    let models = [(1970, &a), (1975, &b)];
    let s = series(&models, &m, &f, &t);
    let w = series(&models, &f, &m, &t);
    let mut worst_swap: f64 = 0.0;
    for (x, y) in s.observations.iter().zip(&w.observations) {
        if x.trait_word != y.trait_word || x.bucket_start != y.bucket_start {
            return Err("observation order differs after swap".into());
        }
        worst_swap = worst_swap.max((x.bias + y.bias).abs());
    }
    for (x, y) in s.buckets.iter().zip(&w.buckets) {
        worst_swap = worst_swap.max((x.mean_bias + y.mean_bias).abs());
    }
    let (a7, b7) = (a.scaled(7.3), b.scaled(7.3));
    let z = series(&[(1970, &a7), (1975, &b7)], &m, &f, &t);
    let worst_scale = s
        .observations
        .iter()
        .zip(&z.observations)
        .map(|(x, y)| (x.bias - y.bias).abs())
        .fold(0.0f64, f64::max);
    check(
        !s.observations.is_empty() && worst_swap <= 1e-12 && worst_scale <= 1e-9,
        format!(
            "{} observations; swap residual {worst_swap:.1e}; scale residual {worst_scale:.1e}",
            s.observations.len()
        ),
    )
}

// 4 ------------------------------------------------------------------

const BETA1: f64 = -0.002;

fn simulate(sigma_word: f64, seed: u64) -> Vec<TrendPoint<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nr = Normal::new(0.0, 0.02).unwrap();
    let mut out = Vec::with_capacity(2000);
    for w in 0..200 {
        let u = if sigma_word > 0.0 { Normal::new(0.0, sigma_word).unwrap().sample(&mut rng) } else { 0.0 };
        for b in 0..10 {
            let year = 1965 + 5 * b;
            let value = 0.05 + BETA1 * (year - 1965) as f64 + u + nr.sample(&mut rng);
            out.push(TrendPoint { unit: format!("w{w}"), year: year as f64, value });
        }
    }
    out
}

fn lmm_oracle() -> Outcome {
    let seeds: Vec<u64> = (0..100).collect();
    let hits = parallel(&seeds, |&s| {
        let fit = fit_lmm_points(&simulate(0.01, 1000 + s), &LmmOptions::default()).unwrap();
        let b = fit.beta_linear();
        (b.estimate - BETA1).abs() <= 2.0 * b.std_error
    });
    let covered = hits.iter().filter(|&&h| h).count();
    let pts = simulate(0.0, 77);
    let lmm = fit_lmm_points(&pts, &LmmOptions { lambda: Lambda::Fixed(0.0), ..LmmOptions::default() }).unwrap();
    let coding = TimeCoding::default();
    let flat: Vec<(f64, f64)> = pts.iter().map(|p| (coding.code(p.year), p.value)).collect();
    let ols = fit_ols(&flat, false).unwrap();
    let gap = lmm
        .coefficients
        .iter()
        .zip(&ols.coefficients)
        .map(|(a, b)| (a.estimate - b.estimate).abs().max((a.std_error - b.std_error).abs()))
        .fold(0.0f64, f64::max);
    check(
        covered >= 93 && gap < 1e-8,
        format!("{covered}/100 within 2 SE; zero-variance gap to OLS {gap:.1e}"),
    )
}

// 5 ------------------------------------------------------------------

fn song(id: usize, genre: Genre) -> SongRecord {
    SongRecord {
        id: format!("s{id}"),
        artist: "a".into(),
        title: "t".into(),
        year: 1990,
        genre,
        artist_gender_score: None,
        tokens: vec!["la".into()],
    }
}

fn sampling_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for call in 0..1000 {
        let mut genres = Genre::ALL.to_vec();
        genres.shuffle(&mut rng);
        let active = &genres[..rng.random_range(1..=genres.len())];
        let mut records = Vec::new();
        for &g in &genres {
            let n = if active.contains(&g) { rng.random_range(1..40) } else { rng.random_range(0..5) };
            for _ in 0..n {
                records.push(song(records.len(), g));
            }
        }
        records.shuffle(&mut rng);
        let bucket = BucketCorpus::new(1990, 5, records);
        let out = undersample(&bucket, active, &mut rng).map_err(|e| format!("call {call}: {e}"))?;
        let counts = out.genre_counts();
        let want = active.iter().map(|g| bucket.genre_counts()[g]).min().unwrap();
        if counts.len() != active.len() || active.iter().any(|g| counts.get(g) != Some(&want)) {
            return Err(format!("call {call}: unequal counts {counts:?}"));
        }
        let ids: HashSet<&str> = out.records.iter().map(|r| r.id.as_str()).collect();
        if ids.len() != out.records.len() {
            return Err(format!("call {call}: duplicate ids"));
        }
    }
    let active = [Genre::Pop, Genre::Rock, Genre::Rap];
    let records: Vec<SongRecord> = active.iter().flat_map(|&g| (0..1000).map(move |i| (i, g))).enumerate().map(|(k, (_, g))| song(k, g)).collect();
    let bucket = BucketCorpus::new(1990, 5, records);
    let table = PopularityTable::new([
        PopularityRow { bucket_start: 1990, genre: Genre::Pop, share: 0.25 },
        PopularityRow { bucket_start: 1990, genre: Genre::Rock, share: 0.25 },
        PopularityRow { bucket_start: 1990, genre: Genre::Rap, share: 0.5 },
    ])
    .map_err(|e| e.to_string())?;
    let quotas = popularity_quotas(&bucket, &table, &active).map_err(|e| e.to_string())?;
    let drawn = sample_with_quotas(&bucket, &quotas, &mut rng).map_err(|e| e.to_string())?.genre_counts();
    let want: BTreeMap<Genre, usize> = [(Genre::Pop, 500), (Genre::Rock, 500), (Genre::Rap, 1000)].into();
    check(
        quotas == want && drawn == want,
        format!("1000 undersample calls equal and unique; popularity quotas {quotas:?}"),
    )
}

// 6 ------------------------------------------------------------------

fn statistical_oracles() -> Outcome {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let y = [2.0, 1.0, 4.0, 3.0, 6.0];
    let mut gaps = Vec::new();
    // sxy 10, sxx 10, syy 14.8
    let r = 10.0 / 148f64.sqrt();
    let t = r * (3.0 / (1.0 - r * r)).sqrt();
    // Student t with 3 df in closed form
    let th = (t / 3f64.sqrt()).atan();
    let p_t3 = |th: f64| 1.0 - 2.0 / std::f64::consts::PI * (th + th.sin() * th.cos());
    let c = pearson(&x, &y).map_err(|e| e.to_string())?;
    gaps.push((c.r - r).abs());
    gaps.push((c.p - p_t3(th)).abs());
    let fit = fit_ols(&x.iter().copied().zip(y).collect::<Vec<_>>(), false).map_err(|e| e.to_string())?;
    let (b0, b1) = (fit.beta0(), fit.beta_linear());
    let s2: f64 = 4.8 / 3.0;
    gaps.push((b1.estimate - 1.0).abs());
    gaps.push((b0.estimate - 0.2).abs());
    gaps.push((b1.std_error - (s2 / 10.0).sqrt()).abs());
    gaps.push((b0.std_error - (s2 * (0.2 + 0.9)).sqrt()).abs());
    gaps.push((b1.statistic - 2.5).abs());
    gaps.push((b1.p_value - p_t3((2.5 / 3f64.sqrt()).atan())).abs());
    let odd = chi_square_share(37, 81).map_err(|e| e.to_string())?;
    gaps.push((odd.statistic - 2.0 * 22.0 * 22.0 / 59.0).abs());
    gaps.push((odd.p - ChiSquared::new(1.0).unwrap().sf(2.0 * 22.0 * 22.0 / 59.0)).abs());
    let even = chi_square_share(50, 50).map_err(|e| e.to_string())?;
    let skew = chi_square_share(60, 40).map_err(|e| e.to_string())?;
    let worst = gaps.iter().copied().fold(0.0f64, f64::max);
    check(
        worst < 1e-10 && even.statistic == 0.0 && skew.statistic == 4.0,
        format!("max gap {worst:.1e}; chi2(50,50)={}; chi2(60,40)={}", even.statistic, skew.statistic),
    )
}

// 7 ------------------------------------------------------------------

fn aggression_fixture() -> Outcome {
    let path = workspace().join("data/fixtures/aggression.conllu");
    let doc = parse_conllu(std::io::BufReader::new(fs::File::open(&path).map_err(|e| e.to_string())?)).map_err(|e| e.to_string())?;
    let cfg = RecipientConfig::new(Builtin::AggressiveVerbs.lexicon(), Builtin::Male.lexicon(), Builtin::Female.lexicon());
    let counts = count_recipients(&doc.sentences, &cfg).map_err(|e| e.to_string())?;
    let row = |bucket_start, fa, ma, fy, my, tokens| BucketCounts {
        bucket_start,
        female_object_agg: fa,
        male_object_agg: ma,
        female_object_any: fy,
        male_object_any: my,
        tokens,
    };
    let want = vec![row(1970, 1, 4, 3, 5, 41), row(1985, 4, 2, 5, 3, 38), row(2005, 3, 2, 3, 4, 39)];
    let event = |id: &str| counts.events.iter().find(|e| e.sent_id.as_deref() == Some(id)).map(|e| (e.gender, e.aggressive));
    let quotes = event("s01") == Some((Group::Female, true)) && event("s02") == Some((Group::Male, false));
    check(
        doc.sentences.len() == 30 && doc.malformed.is_empty() && counts.rows() == want && counts.unbucketed == BucketCounts::default() && quotes,
        format!("{} sentences; rows {:?}", doc.sentences.len(), counts.rows()),
    )
}

// 8 ------------------------------------------------------------------

fn run(root: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_biascorpus"))
        .current_dir(root)
        .args(["--seed", "2018", "--threads", "1"])
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn pipeline(root: &Path) -> Result<(), String> {
    fs::copy(workspace().join("data/synthetic/songs.jsonl"), root.join("songs.jsonl")).map_err(|e| e.to_string())?;
    run(root, &["ingest", "--input", "songs.jsonl", "--out", "store", "--min-tokens", "5000"])?;
    run(root, &["train", "--store", "store", "--out", "models", "--dim", "50", "--epochs", "30"])?;
    run(root, &["bias", "--models", "models", "--out", "bias"])?;
    run(root, &["trend", "--bias", "bias", "--out", "trends"])?;
    run(root, &["report", "--bias", "bias", "--trends", "trends", "--out", "report"])
}

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

/// File bytes, with wall-clock timings dropped from run manifests.
fn comparable(path: &Path) -> Vec<u8> {
    let bytes = fs::read(path).unwrap();
    if path.to_string_lossy().ends_with(".manifest.json") {
        let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        v.as_object_mut().unwrap().remove("timings_ms");
        return v.to_string().into_bytes();
    }
    bytes
}

fn determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    pipeline(a.path())?;
    pipeline(b.path())?;
    let (fa, fb) = (files(a.path()), files(b.path()));
    if fa != fb {
        return Err("runs wrote different file sets".into());
    }
    let differing: Vec<String> = fa
        .iter()
        .filter(|p| comparable(&a.path().join(p)) != comparable(&b.path().join(p)))
        .map(|p| p.display().to_string())
        .collect();
    check(differing.is_empty(), format!("{} files compared; differing {differing:?}", fa.len()))
}

// 9, 10 --------------------------------------------------------------

fn men_sanity() -> Outcome {
    let corpus = SimilarityCorpus::generate(200, 200_000, 10, 4.0, 21).map_err(|e| e.to_string())?;
    let refs: Vec<&[String]> = corpus.documents.iter().map(Vec::as_slice).collect();
    let cfg = TrainConfig { dim: 25, seed: 21, ..TrainConfig::default() };
    let (model, _): (EmbeddingModel64, _) = train_documents(&refs, &cfg).map_err(|e| e.to_string())?;
    let pairs = corpus.pairs(500, 22);
    let real = men_benchmark(&model, &pairs).map_err(|e| e.to_string())?;
    let control = men_benchmark(&model, &shuffled_scores(&pairs, 23)).map_err(|e| e.to_string())?;
    check(
        real.covered == 500 && real.correlation.r > 0.5 && control.correlation.r.abs() < 0.2,
        format!("r={:.3} over {} pairs; shuffled r={:.3}", real.correlation.r, real.covered, control.correlation.r),
    )
}

fn lead_lag_construction() -> Outcome {
    let bias: Vec<(i32, f64)> = [0.012, 0.004, 0.010, -0.002, 0.007, 0.001, 0.005, -0.004, 0.003, -0.001]
        .iter()
        .enumerate()
        .map(|(i, &b)| (1965 + 5 * i as i32, b))
        .collect();
    // opinion one period later is the negated bias, shifted into [0, 1]
    let opinion = OpinionSeries::new(bias.iter().map(|&(p, b)| (p + 5, 0.5 - b)).collect()).map_err(|e| e.to_string())?;
    let rep = lead_lag(&bias, &opinion, 5).map_err(|e| e.to_string())?;
    let (sub, pre) = (rep.levels.subsequent.oriented.r, rep.levels.preceding.oriented.r);
    check(
        (sub - 1.0).abs() <= 1e-9 && pre < sub,
        format!("r_subsequent={sub:.12}; r_preceding={pre:.3}; r_simultaneous={:.3}", rep.levels.simultaneous.oriented.r),
    )
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("1 gradient oracle", Duration::from_secs(10), gradient_oracle),
        ("2 synthetic bias recovery", Duration::from_secs(300), bias_recovery),
        ("3 exact antisymmetry", Duration::MAX, antisymmetry),
        ("4 lmm oracle", Duration::from_secs(120), lmm_oracle),
        ("5 sampling invariants", Duration::MAX, sampling_invariants),
        ("6 statistical oracles", Duration::MAX, statistical_oracles),
        ("7 aggression fixture", Duration::MAX, aggression_fixture),
        ("8 pipeline determinism", Duration::from_secs(600), determinism),
        ("9 men sanity", Duration::MAX, men_sanity),
        ("10 lead/lag construction", Duration::MAX, lead_lag_construction),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, budget, f) in criteria {
        if filter.as_deref().is_some_and(|q| !name.contains(q)) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(d) if took > budget => Err(format!("{d}; over time budget {budget:?}")),
            o => o,
        };
        match outcome {
            Ok(d) => println!("PASS {name} ({:.1}s): {d}", took.as_secs_f64()),
            Err(d) => {
                failed += 1;
                println!("FAIL {name} ({:.1}s): {d}", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
