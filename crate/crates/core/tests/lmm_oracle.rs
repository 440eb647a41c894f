use biascorpus::trends::{fit_lmm_points, fit_ols, Lambda, LmmOptions, TimeCoding, TrendPoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const BETA1: f64 = -0.002;

fn simulate(words: usize, sigma_word: f64, sigma_resid: f64, seed: u64) -> Vec<TrendPoint<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nw, nr) = (Normal::new(0.0, sigma_word.max(1e-300)).unwrap(), Normal::new(0.0, sigma_resid).unwrap());
    let mut out = Vec::with_capacity(words * 10);
    for w in 0..words {
        let u = if sigma_word > 0.0 { nw.sample(&mut rng) } else { 0.0 };
        for b in 0..10 {
            let year = 1965 + 5 * b;
            out.push(TrendPoint {
                unit: format!("w{w}"),
                year: year as f64,
                value: 0.05 + BETA1 * (year - 1965) as f64 + u + nr.sample(&mut rng),
            });
        }
    }
    out
}

#[test]
fn slope_interval_covers_truth() {
    let mut covered = 0;
    let runs = 40;
    for seed in 0..runs {
        let pts = simulate(200, 0.01, 0.02, seed);
        let fit = fit_lmm_points(&pts, &LmmOptions::default()).unwrap();
        let b = fit.beta_linear();
        if (b.estimate - BETA1).abs() <= 2.0 * b.std_error {
            covered += 1;
        }
        assert!(fit.sigma2_word > 0.0);
    }
    assert!(covered >= 35, "{covered}/{runs}");
}

#[test]
fn no_word_variance_equals_ols() {
    let pts = simulate(50, 0.0, 0.02, 9);
    let opts = LmmOptions { lambda: Lambda::Fixed(0.0), ..LmmOptions::default() };
    let lmm = fit_lmm_points(&pts, &opts).unwrap();
    let coding = TimeCoding::default();
    let series: Vec<(f64, f64)> = pts.iter().map(|p| (coding.code(p.year), p.value)).collect();
    let ols = fit_ols(&series, false).unwrap();
    for (a, b) in lmm.coefficients.iter().zip(&ols.coefficients) {
        assert!((a.estimate - b.estimate).abs() < 1e-8);
        assert!((a.std_error - b.std_error).abs() < 1e-8);
    }
}
