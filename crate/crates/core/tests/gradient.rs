use biascorpus::embedding::{cbow_step, train_documents, TrainConfig, Vocabulary};
use biascorpus::EmbeddingModel64;
use proptest::prelude::*;

fn model(v: usize, dim: usize, input: Vec<f64>, output: Vec<f64>) -> EmbeddingModel64 {
    let vocab = Vocabulary::from_counts((0..v).map(|i| (format!("w{i}"), 5)).collect(), 1);
    let cfg = TrainConfig { dim, min_count: 1, ..TrainConfig::default() };
    EmbeddingModel64::from_parts(vocab, input, output, cfg).unwrap()
}

fn loss(input: &[f64], output: &[f64], v: usize, dim: usize, center: usize, ctx: &[usize], neg: &[usize]) -> f64 {
    let mut m = model(v, dim, input.to_vec(), output.to_vec());
    cbow_step(&mut m, center, ctx, neg, 0.0).unwrap()
}

/// Max relative error between the step direction and central differences.
/// The update is exactly `-lr * grad` at the pre-update point, so a unit
/// learning rate exposes the gradient.
fn max_rel_error(v: usize, dim: usize, input: Vec<f64>, output: Vec<f64>, center: usize, ctx: &[usize], neg: &[usize]) -> f64 {
    let mut m = model(v, dim, input.clone(), output.clone());
    cbow_step(&mut m, center, ctx, neg, 1.0).unwrap();
    let g_in: Vec<f64> = input.iter().zip(m.input_vectors()).map(|(b, a)| b - a).collect();
    let g_out: Vec<f64> = output.iter().zip(m.output_vectors()).map(|(b, a)| b - a).collect();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let rel = |a: f64, fd: f64| (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
    for i in 0..input.len() {
        let (mut p, mut q) = (input.clone(), input.clone());
        p[i] += h;
        q[i] -= h;
        let fd = (loss(&p, &output, v, dim, center, ctx, neg) - loss(&q, &output, v, dim, center, ctx, neg)) / (2.0 * h);
        worst = worst.max(rel(g_in[i], fd));
    }
    for i in 0..output.len() {
        let (mut p, mut q) = (output.clone(), output.clone());
        p[i] += h;
        q[i] -= h;
        let fd = (loss(&input, &p, v, dim, center, ctx, neg) - loss(&input, &q, v, dim, center, ctx, neg)) / (2.0 * h);
        worst = worst.max(rel(g_out[i], fd));
    }
    worst
}

fn case() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>, usize, Vec<usize>, Vec<usize>)> {
    (2usize..=10, 1usize..=5).prop_flat_map(|(v, dim)| {
        (
            Just(v),
            Just(dim),
            prop::collection::vec(-1.0f64..1.0, v * dim),
            prop::collection::vec(-1.0f64..1.0, v * dim),
            0..v,
            prop::collection::vec(0..v, 1..=4),
            prop::collection::vec(0..v, 1..=3),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]
    #[test]
    fn analytic_gradient_matches_central_differences((v, dim, input, output, center, ctx, neg) in case()) {
        let err = max_rel_error(v, dim, input, output, center, &ctx, &neg);
        prop_assert!(err < 1e-4, "max relative error {err}");
    }
}

#[test]
fn epoch_loss_does_not_rise() {
    let words: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
    let docs: Vec<Vec<String>> = (0..400)
        .map(|d| (0..12).map(|i| words[(d * 5 + i * i + (d % 3) * i) % 30].clone()).collect())
        .collect();
    let refs: Vec<&[String]> = docs.iter().map(Vec::as_slice).collect();
    let cfg = TrainConfig { dim: 10, min_count: 1, epochs: 6, seed: 3, ..TrainConfig::default() };
    let (_, report) = train_documents::<f64>(&refs, &cfg).unwrap();
    for w in report.epoch_losses.windows(2) {
        assert!(w[1] <= w[0] * 1.01, "{:?}", report.epoch_losses);
    }
}
