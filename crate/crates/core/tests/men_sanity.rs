use biascorpus::embedding::{train_documents, TrainConfig};
use biascorpus::synth::{shuffled_scores, SimilarityCorpus};
use biascorpus::validation::men_benchmark;
use biascorpus::EmbeddingModel64;

#[test]
fn model_tracks_planted_similarity() {
    let corpus = SimilarityCorpus::generate(200, 200_000, 10, 4.0, 21).unwrap();
    let refs: Vec<&[String]> = corpus.documents.iter().map(Vec::as_slice).collect();
    let cfg = TrainConfig { dim: 25, seed: 21, ..TrainConfig::default() };
    let (model, _): (EmbeddingModel64, _) = train_documents(&refs, &cfg).unwrap();
    let pairs = corpus.pairs(500, 22);
    let real = men_benchmark(&model, &pairs).unwrap();
    assert_eq!(real.covered, 500);
    assert!(real.correlation.r > 0.5, "{}", real.correlation.r);
    let control = men_benchmark(&model, &shuffled_scores(&pairs, 23)).unwrap();
    assert!(control.correlation.r.abs() < 0.2, "{}", control.correlation.r);
}
