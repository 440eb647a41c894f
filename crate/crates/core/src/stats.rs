//! Correlation and goodness-of-fit statistics with their reference
//! distributions.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A Pearson correlation with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation<F> {
    pub r: F,
    pub p: F,
    pub n: usize,
}

impl<F: Real> Correlation<F> {
    /// The same correlation with one argument negated.
    pub fn negated(self) -> Self {
        Self { r: -self.r, ..self }
    }
}

/// Sample Pearson correlation, p-value from `t = r sqrt((n-2)/(1-r^2))`
/// against Student's t with n - 2 degrees of freedom.
pub fn pearson<F: Real>(x: &[F], y: &[F]) -> Result<Correlation<F>> {
    if x.len() != y.len() {
        return Err(Error::Insufficient(format!(
            "pearson needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Insufficient(format!(
            "pearson needs at least 3 pairs, got {n}"
        )));
    }
    let nf = F::of_usize(n);
    let mx = x.iter().copied().sum::<F>() / nf;
    let my = y.iter().copied().sum::<F>() / nf;
    let (mut sxx, mut syy, mut sxy) = (F::zero(), F::zero(), F::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxx += da * da;
        syy += db * db;
        sxy += da * db;
    }
    // Deviations of a constant series are pure rounding noise.
    let floor = |v: &[F]| {
        let scale = v.iter().fold(F::zero(), |m, a| m.max(a.abs()));
        let e = nf * F::epsilon() * scale;
        e * e
    };
    if !(sxx > floor(x)) {
        return Err(Error::ZeroVariance("first pearson argument".into()));
    }
    if !(syy > floor(y)) {
        return Err(Error::ZeroVariance("second pearson argument".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).max(-F::one()).min(F::one());
    let p = correlation_p_value(r.f64(), n);
    Ok(Correlation { r, p: F::of(p), n })
}

fn correlation_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = r.abs() * (df / denom).sqrt();
    student_t_two_sided(t, df)
}

/// Two-sided tail probability of |T| >= t for Student's t with `df` degrees.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Two-sided normal tail probability of |Z| >= z.
/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(p)
}

pub fn normal_two_sided(z: f64) -> f64 {
    if z.is_nan() {
        return 1.0;
    }
    if !z.is_finite() {
        return 0.0;
    }
    let dist = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * dist.sf(z.abs())).clamp(0.0, 1.0)
}

/// Result of a goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: u32,
    pub p: f64,
}

/// One-degree-of-freedom goodness of fit of two counts against an even split.
pub fn chi_square_share(a: u64, b: u64) -> Result<ChiSquare> {
    let total = a + b;
    if total == 0 {
        return Err(Error::Insufficient("chi-square on zero total count".into()));
    }
    let expected = total as f64 / 2.0;
    let statistic = [a, b]
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum::<f64>();
    let dist = ChiSquared::new(1.0).expect("one degree of freedom");
    let p = if statistic == 0.0 {
        1.0
    } else {
        dist.sf(statistic).clamp(0.0, 1.0)
    };
    Ok(ChiSquare {
        statistic,
        df: 1,
        p,
    })
}
