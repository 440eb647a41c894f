//! Trend models for bias over time.
//!
//! The mixed model is `y_it = x_it' beta + b_i + e_it` with a random
//! intercept `b_i ~ N(0, s2_word)` per word and `e_it ~ N(0, s2_resid)`. With
//! `lambda = s2_word / s2_resid`, each word's covariance is
//! `s2_resid (I + lambda J)`, whose inverse is closed-form, so GLS and the
//! profiled REML likelihood reduce to per-word sums. `lambda` is found by a
//! log-spaced grid followed by golden-section refinement.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bias::BiasObservation;
use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::scalar::Real;
use crate::stats::{normal_two_sided, student_t_two_sided};

/// How calendar years become the regressor `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeCoding {
    /// `t = year - origin`.
    YearOffset { origin: i32 },
    /// `t = (year - origin) / width`.
    BucketIndex { origin: i32, width: i32 },
    /// Times are used exactly as supplied.
    AsGiven,
}

impl Default for TimeCoding {
    fn default() -> Self {
        TimeCoding::YearOffset { origin: 1965 }
    }
}

impl TimeCoding {
    pub fn code<F: Real>(&self, year: F) -> F {
        match *self {
            TimeCoding::YearOffset { origin } => year - F::of(origin as f64),
            TimeCoding::BucketIndex { origin, width } => {
                (year - F::of(origin as f64)) / F::of(width as f64)
            }
            TimeCoding::AsGiven => year,
        }
    }
}

/// One response value for one unit (word) at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendPoint<F> {
    pub unit: String,
    pub year: F,
    pub value: F,
}

impl<F: Real> From<&BiasObservation<F>> for TrendPoint<F> {
    fn from(o: &BiasObservation<F>) -> Self {
        TrendPoint {
            unit: o.trait_word.clone(),
            year: F::of(o.bucket_start as f64),
            value: o.bias,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient<F> {
    pub name: String,
    pub estimate: F,
    pub std_error: F,
    pub statistic: F,
    pub p_value: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Reml,
    Ols,
}

/// A fitted trend model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendFit<F> {
    pub method: FitMethod,
    pub formula: String,
    pub time_coding: TimeCoding,
    pub coefficients: Vec<Coefficient<F>>,
    /// Quadratic fits only: the same model on `(1, t, t^2)`.
    pub raw_time_coefficients: Option<Vec<Coefficient<F>>>,
    /// Quadratic fits only: the mean time the square term is centered on.
    pub time_center: Option<F>,
    pub sigma2_word: F,
    pub sigma2_resid: F,
    pub lambda: F,
    /// The variance-ratio search ended at zero; the fit is ordinary least squares.
    pub boundary: bool,
    pub log_likelihood: F,
    pub n_obs: usize,
    pub n_words: usize,
    /// Row-major covariance of `coefficients`.
    pub covariance: Vec<F>,
}

impl<F: Real> TrendFit<F> {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient<F>> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn beta0(&self) -> &Coefficient<F> {
        &self.coefficients[0]
    }

    pub fn beta_linear(&self) -> &Coefficient<F> {
        self.coefficient(TIME).expect("every fit has a time term")
    }

    pub fn beta_quadratic(&self) -> Option<&Coefficient<F>> {
        self.coefficient(TIME_SQ)
    }

    pub fn interaction(&self) -> Option<&Coefficient<F>> {
        self.coefficient(GROUP_X_TIME)
    }

    /// Fixed-effect prediction at a calendar year and its standard error,
    /// for fits on intercept, time and optionally the squared term.
    pub fn fitted(&self, year: F) -> Option<(F, F)> {
        let t = self.time_coding.code(year);
        let x: Vec<F> = self
            .coefficients
            .iter()
            .map(|c| match c.name.as_str() {
                INTERCEPT => Some(F::one()),
                TIME => Some(t),
                TIME_SQ => self.time_center.map(|m| (t - m) * (t - m)),
                _ => None,
            })
            .collect::<Option<_>>()?;
        let p = x.len();
        let mean = x.iter().zip(&self.coefficients).map(|(&xi, c)| xi * c.estimate).sum();
        let mut var = F::zero();
        for i in 0..p {
            for j in 0..p {
                var += x[i] * self.covariance[i * p + j] * x[j];
            }
        }
        Some((mean, var.max(F::zero()).sqrt()))
    }
}

pub const INTERCEPT: &str = "intercept";
pub const TIME: &str = "time";
pub const TIME_SQ: &str = "time_sq";
pub const GROUP: &str = "group";
pub const GROUP_X_TIME: &str = "group_x_time";

/// Variance-ratio handling for [`fit_lmm_points`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda<F> {
    Estimate,
    Fixed(F),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmmOptions<F> {
    pub quadratic: bool,
    pub time_coding: TimeCoding,
    pub lambda: Lambda<F>,
}

impl<F: Real> Default for LmmOptions<F> {
    fn default() -> Self {
        Self {
            quadratic: false,
            time_coding: TimeCoding::default(),
            lambda: Lambda::Estimate,
        }
    }
}

struct Design<F> {
    names: Vec<&'static str>,
    p: usize,
    x: Vec<F>,
    y: Vec<F>,
    group_of: Vec<usize>,
    n_groups: usize,
}

impl<F: Real> Design<F> {
    fn n(&self) -> usize {
        self.y.len()
    }

    fn row(&self, i: usize) -> &[F] {
        &self.x[i * self.p..(i + 1) * self.p]
    }
}

/// Sufficient statistics for profiling the REML likelihood.
struct Reml<'a, F> {
    d: &'a Design<F>,
    xtx: Vec<F>,
    xty: Vec<F>,
    group_n: Vec<usize>,
    group_sx: Vec<Vec<F>>,
    group_sy: Vec<F>,
}

struct Profile<F> {
    lambda: F,
    beta: Vec<F>,
    chol: Cholesky<F>,
    rss: F,
    ll: F,
    /// Derivative of `ll` with respect to `lambda`.
    score: F,
}

impl<'a, F: Real> Reml<'a, F> {
    fn new(d: &'a Design<F>) -> Self {
        let p = d.p;
        let mut xtx = vec![F::zero(); p * p];
        let mut xty = vec![F::zero(); p];
        let mut group_n = vec![0usize; d.n_groups];
        let mut group_sx = vec![vec![F::zero(); p]; d.n_groups];
        let mut group_sy = vec![F::zero(); d.n_groups];
        for i in 0..d.n() {
            let row = d.row(i);
            let g = d.group_of[i];
            group_n[g] += 1;
            group_sy[g] += d.y[i];
            for a in 0..p {
                xty[a] += row[a] * d.y[i];
                group_sx[g][a] += row[a];
                for b in 0..p {
                    xtx[a * p + b] += row[a] * row[b];
                }
            }
        }
        Self {
            d,
            xtx,
            xty,
            group_n,
            group_sx,
            group_sy,
        }
    }

    fn weight(&self, lambda: F, g: usize) -> F {
        lambda / (F::one() + F::of_usize(self.group_n[g]) * lambda)
    }

    fn profile(&self, lambda: F) -> Option<Profile<F>> {
        let d = self.d;
        let p = d.p;
        let mut a = self.xtx.clone();
        let mut b = self.xty.clone();
        if lambda > F::zero() {
            for g in 0..d.n_groups {
                let w = self.weight(lambda, g);
                let sx = &self.group_sx[g];
                for i in 0..p {
                    b[i] -= w * sx[i] * self.group_sy[g];
                    for j in 0..p {
                        a[i * p + j] -= w * sx[i] * sx[j];
                    }
                }
            }
        }
        let chol = Cholesky::factor(&a, p)?;
        let beta = chol.solve(&b);
        let mut rss = F::zero();
        let mut group_r = vec![F::zero(); d.n_groups];
        for i in 0..d.n() {
            let fitted: F = d.row(i).iter().zip(&beta).map(|(&x, &c)| x * c).sum();
            let r = d.y[i] - fitted;
            rss += r * r;
            group_r[d.group_of[i]] += r;
        }
        let mut ln_det_sigma = F::zero();
        if lambda > F::zero() {
            for (g, &sr) in group_r.iter().enumerate() {
                rss -= self.weight(lambda, g) * sr * sr;
                ln_det_sigma += (F::of_usize(self.group_n[g]) * lambda).ln_1p();
            }
        }
        let rss = rss.max(F::zero());
        let dof = F::of_usize(d.n() - p);
        let two_pi = F::of(2.0 * std::f64::consts::PI);
        let ll = -F::of(0.5)
            * (dof * (F::one() + (two_pi * rss / dof).ln()) + ln_det_sigma + chol.ln_det());

        // d ll / d lambda = ((N - p) |Z'Py|^2 / y'Py - tr(P Z Z')) / 2, where
        // per word V^-1 1 = u 1 with u = 1 / (1 + n lambda).
        let mut zpy = F::zero();
        let mut trace = F::zero();
        for g in 0..d.n_groups {
            let n = F::of_usize(self.group_n[g]);
            let u = F::one() / (F::one() + n * lambda);
            zpy += u * u * group_r[g] * group_r[g];
            let solved = chol.solve(&self.group_sx[g]);
            let quad: F = solved.iter().zip(&self.group_sx[g]).map(|(&a, &b)| a * b).sum();
            trace += n * u - u * u * quad;
        }
        let score = F::of(0.5) * (dof * zpy / rss - trace);
        Some(Profile {
            lambda,
            beta,
            chol,
            rss,
            ll,
            score,
        })
    }

    fn ll_at_log(&self, theta: f64) -> f64 {
        self.profile(F::of(theta.exp()))
            .map(|p| p.ll.f64())
            .filter(|v| v.is_finite())
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn score_at_log(&self, theta: f64) -> Option<f64> {
        self.profile(F::of(theta.exp()))
            .map(|p| p.score.f64())
            .filter(|v| v.is_finite())
    }

    /// Bisection on the score in `ln lambda`; `None` unless the score changes
    /// sign from positive to negative across the bracket.
    fn score_root(&self, mut lo: f64, mut hi: f64) -> Option<f64> {
        if !(self.score_at_log(lo)? > 0.0 && self.score_at_log(hi)? < 0.0) {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.score_at_log(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Grid over `ln lambda`, then score bisection (golden-section as a fallback) refinement around the best
    /// grid point; the zero boundary is checked separately.
    fn maximize(&self) -> Option<Profile<F>> {
        const LO: f64 = -18.0 * std::f64::consts::LN_10 / 2.0;
        const HI: f64 = 8.0 * std::f64::consts::LN_10;
        const STEPS: usize = 78;
        let grid: Vec<f64> = (0..=STEPS)
            .map(|k| LO + (HI - LO) * k as f64 / STEPS as f64)
            .collect();
        let values: Vec<f64> = grid.iter().map(|&t| self.ll_at_log(t)).collect();
        let best = (0..grid.len()).max_by(|&a, &b| values[a].total_cmp(&values[b]))?;
        let at_zero = self.profile(F::zero())?;

        let interior = if values[best].is_finite() {
            let lo = grid[best.saturating_sub(1)];
            let hi = grid[(best + 1).min(grid.len() - 1)];
            let theta = self
                .score_root(lo, hi)
                .unwrap_or_else(|| golden_max(|t| self.ll_at_log(t), lo, hi, 1e-12));
            self.profile(F::of(theta.exp()))
        } else {
            None
        };
        match interior {
            Some(p) if p.ll.is_finite() && p.ll > at_zero.ll => Some(p),
            _ => Some(at_zero),
        }
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        c
    } else {
        d
    }
}

/// Wald statistic and p-value; a zero standard error yields p = 1 for a
/// numerically zero estimate and p = 0 otherwise.
fn wald<F: Real>(est: F, se: F, scale: F, p_of: impl Fn(f64) -> f64) -> (F, F) {
    if se > F::zero() {
        let z = est / se;
        (z, F::of(p_of(z.f64())))
    } else if est.abs() <= F::of(1e-10) * scale.max(F::one()) {
        (F::zero(), F::one())
    } else {
        (F::infinity() * est.signum(), F::zero())
    }
}

fn coefficients<F: Real>(
    names: &[&str],
    beta: &[F],
    cov: &[F],
    scale: F,
    p_of: &impl Fn(f64) -> f64,
) -> Vec<Coefficient<F>> {
    let p = beta.len();
    (0..p)
        .map(|i| {
            let se = cov[i * p + i].max(F::zero()).sqrt();
            let (statistic, p_value) = wald(beta[i], se, scale, p_of);
            Coefficient {
                name: names[i].to_string(),
                estimate: beta[i],
                std_error: se,
                statistic,
                p_value,
            }
        })
        .collect()
}

/// Re-expresses `(1, t, (t - m)^2)` coefficients on `(1, t, t^2)`.
fn raw_time<F: Real>(beta: &[F], cov: &[F], m: F, scale: F, p_of: &impl Fn(f64) -> f64) -> Vec<Coefficient<F>> {
    let two = F::of(2.0);
    let j = [
        F::one(), F::zero(), m * m,
        F::zero(), F::one(), -two * m,
        F::zero(), F::zero(), F::one(),
    ];
    let mut raw = vec![F::zero(); 3];
    for i in 0..3 {
        raw[i] = (0..3).map(|k| j[i * 3 + k] * beta[k]).sum();
    }
    let mut jc = vec![F::zero(); 9];
    for i in 0..3 {
        for k in 0..3 {
            jc[i * 3 + k] = (0..3).map(|l| j[i * 3 + l] * cov[l * 3 + k]).sum();
        }
    }
    let mut out = vec![F::zero(); 9];
    for i in 0..3 {
        for k in 0..3 {
            out[i * 3 + k] = (0..3).map(|l| jc[i * 3 + l] * j[k * 3 + l]).sum();
        }
    }
    coefficients(&[INTERCEPT, TIME, "time_sq_raw"], &raw, &out, scale, p_of)
}

fn response_scale<F: Real>(y: &[F]) -> F {
    y.iter().fold(F::zero(), |m, v| m.max(v.abs()))
}

fn index_units<F>(points: &[TrendPoint<F>]) -> (Vec<usize>, usize) {
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    let group_of = points
        .iter()
        .map(|pt| {
            let next = ids.len();
            *ids.entry(pt.unit.as_str()).or_insert(next)
        })
        .collect();
    (group_of, ids.len())
}

fn check_variation<F: Real>(points: &[TrendPoint<F>], coding: TimeCoding) -> Result<()> {
    let units: BTreeSet<&str> = points.iter().map(|p| p.unit.as_str()).collect();
    if units.len() < 2 {
        return Err(Error::Insufficient(format!(
            "mixed model needs at least 2 words, got {}",
            units.len()
        )));
    }
    let first = coding.code(points[0].year);
    if points.iter().all(|p| coding.code(p.year) == first) {
        return Err(Error::Degenerate("time is constant".into()));
    }
    Ok(())
}

fn reml_fit<F: Real>(
    d: Design<F>,
    lambda: Lambda<F>,
    coding: TimeCoding,
    formula: String,
    quad_center: Option<F>,
) -> Result<TrendFit<F>> {
    let n = d.n();
    let p = d.p;
    if n <= p {
        return Err(Error::Insufficient(format!("{n} observations for {p} fixed effects")));
    }
    let reml = Reml::new(&d);
    let prof = match lambda {
        Lambda::Fixed(l) => {
            if !(l >= F::zero()) {
                return Err(Error::Config("fixed variance ratio must be >= 0".into()));
            }
            reml.profile(l)
        }
        Lambda::Estimate => reml.maximize(),
    }
    .ok_or_else(|| Error::Degenerate("fixed-effect design is rank deficient".into()))?;

    let sigma2_resid = prof.rss / F::of_usize(n - p);
    let sigma2_word = prof.lambda * sigma2_resid;
    let cov: Vec<F> = prof.chol.inverse().iter().map(|&v| v * sigma2_resid).collect();
    let scale = response_scale(&d.y);
    let coefficients = coefficients(&d.names, &prof.beta, &cov, scale, &normal_two_sided);
    let raw_time_coefficients =
        quad_center.map(|m| raw_time(&prof.beta, &cov, m, scale, &normal_two_sided));
    Ok(TrendFit {
        method: FitMethod::Reml,
        formula,
        time_coding: coding,
        coefficients,
        raw_time_coefficients,
        time_center: quad_center,
        sigma2_word,
        sigma2_resid,
        lambda: prof.lambda,
        boundary: prof.lambda == F::zero(),
        log_likelihood: prof.ll,
        n_obs: n,
        n_words: d.n_groups,
        covariance: cov,
    })
}

/// Random-intercept trend model on bias observations.
pub fn fit_lmm<F: Real>(
    observations: &[BiasObservation<F>],
    quadratic: bool,
    time_coding: TimeCoding,
) -> Result<TrendFit<F>> {
    let points: Vec<TrendPoint<F>> = observations.iter().map(TrendPoint::from).collect();
    fit_lmm_points(
        &points,
        &LmmOptions {
            quadratic,
            time_coding,
            lambda: Lambda::Estimate,
        },
    )
}

/// Random-intercept trend model on arbitrary unit/time/value points.
pub fn fit_lmm_points<F: Real>(points: &[TrendPoint<F>], options: &LmmOptions<F>) -> Result<TrendFit<F>> {
    if points.is_empty() {
        return Err(Error::Empty("no observations to fit".into()));
    }
    check_variation(points, options.time_coding)?;
    let coding = options.time_coding;
    let t: Vec<F> = points.iter().map(|pt| coding.code(pt.year)).collect();
    let (group_of, n_groups) = index_units(points);
    let center = options
        .quadratic
        .then(|| t.iter().copied().sum::<F>() / F::of_usize(t.len()));
    let mut names = vec![INTERCEPT, TIME];
    let mut x = Vec::with_capacity(points.len() * 3);
    for &ti in &t {
        x.push(F::one());
        x.push(ti);
        if let Some(m) = center {
            x.push((ti - m) * (ti - m));
        }
    }
    let formula = match center {
        Some(m) => {
            names.push(TIME_SQ);
            format!("bias ~ 1 + t + I((t - {m})^2) + (1 | word)")
        }
        None => "bias ~ 1 + t + (1 | word)".to_string(),
    };
    let design = Design {
        p: names.len(),
        names,
        x,
        y: points.iter().map(|pt| pt.value).collect(),
        group_of,
        n_groups,
    };
    reml_fit(design, options.lambda, coding, formula, center)
}

/// A point tagged with a binary group (e.g. artist gender, 1 = flagged).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedPoint<F> {
    pub point: TrendPoint<F>,
    pub group: bool,
}

/// Mixed model with group main effect and group x time interaction.
pub fn group_interaction<F: Real>(points: &[GroupedPoint<F>], time_coding: TimeCoding) -> Result<TrendFit<F>> {
    for flag in [false, true] {
        let times: BTreeSet<u64> = points
            .iter()
            .filter(|p| p.group == flag)
            .map(|p| time_coding.code(p.point.year).f64().to_bits())
            .collect();
        if times.len() < 2 {
            return Err(Error::Insufficient(format!(
                "group {} needs observations at 2 or more time points",
                u8::from(flag)
            )));
        }
    }
    let plain: Vec<TrendPoint<F>> = points.iter().map(|g| g.point.clone()).collect();
    check_variation(&plain, time_coding)?;
    let (group_of, n_groups) = index_units(&plain);
    let mut x = Vec::with_capacity(points.len() * 4);
    for gp in points {
        let t = time_coding.code(gp.point.year);
        let g = if gp.group { F::one() } else { F::zero() };
        x.extend_from_slice(&[F::one(), t, g, g * t]);
    }
    let design = Design {
        names: vec![INTERCEPT, TIME, GROUP, GROUP_X_TIME],
        p: 4,
        x,
        y: plain.iter().map(|p| p.value).collect(),
        group_of,
        n_groups,
    };
    reml_fit(
        design,
        Lambda::Estimate,
        time_coding,
        "bias ~ 1 + t + group + group:t + (1 | word)".to_string(),
        None,
    )
}

/// Ordinary least squares of `y` on `t` (and centered `t^2`), with classical
/// standard errors and t-test p-values.
pub fn fit_ols<F: Real>(series: &[(F, F)], quadratic: bool) -> Result<TrendFit<F>> {
    let p = if quadratic { 3 } else { 2 };
    let n = series.len();
    if n < p + 1 {
        return Err(Error::Insufficient(format!(
            "{} points; OLS with {p} coefficients needs at least {}",
            n,
            p + 1
        )));
    }
    let center = quadratic.then(|| series.iter().map(|s| s.0).sum::<F>() / F::of_usize(n));
    let mut x = Vec::with_capacity(n * p);
    for &(t, _) in series {
        x.push(F::one());
        x.push(t);
        if let Some(m) = center {
            x.push((t - m) * (t - m));
        }
    }
    let y: Vec<F> = series.iter().map(|s| s.1).collect();
    let mut xtx = vec![F::zero(); p * p];
    let mut xty = vec![F::zero(); p];
    for i in 0..n {
        let row = &x[i * p..(i + 1) * p];
        for a in 0..p {
            xty[a] += row[a] * y[i];
            for b in 0..p {
                xtx[a * p + b] += row[a] * row[b];
            }
        }
    }
    let chol = Cholesky::factor(&xtx, p)
        .ok_or_else(|| Error::Degenerate("OLS design is rank deficient".into()))?;
    let beta = chol.solve(&xty);
    let rss: F = (0..n)
        .map(|i| {
            let fitted: F = x[i * p..(i + 1) * p].iter().zip(&beta).map(|(&a, &b)| a * b).sum();
            (y[i] - fitted) * (y[i] - fitted)
        })
        .sum();
    let df = n - p;
    let s2 = rss / F::of_usize(df);
    let cov: Vec<F> = chol.inverse().iter().map(|&v| v * s2).collect();
    let names: Vec<&str> = [INTERCEPT, TIME, TIME_SQ][..p].to_vec();
    let scale = response_scale(&y);
    let p_of = |t: f64| student_t_two_sided(t, df as f64);
    let coefficients = coefficients(&names, &beta, &cov, scale, &p_of);
    let raw_time_coefficients = center.map(|m| raw_time(&beta, &cov, m, scale, &p_of));
    let nf = F::of_usize(n);
    let two_pi = F::of(2.0 * std::f64::consts::PI);
    let log_likelihood = -nf / F::of(2.0) * ((two_pi * rss / nf).ln() + F::one());
    let formula = match center {
        Some(m) => format!("y ~ 1 + t + I((t - {m})^2)"),
        None => "y ~ 1 + t".to_string(),
    };
    Ok(TrendFit {
        method: FitMethod::Ols,
        formula,
        time_coding: TimeCoding::AsGiven,
        coefficients,
        raw_time_coefficients,
        time_center: center,
        sigma2_word: F::zero(),
        sigma2_resid: s2,
        lambda: F::zero(),
        boundary: false,
        log_likelihood,
        n_obs: n,
        n_words: 0,
        covariance: cov,
    })
}

/// Residuals of an OLS fit, for diagnostics.
pub fn ols_residuals<F: Real>(series: &[(F, F)], fit: &TrendFit<F>) -> Vec<F> {
    let b = &fit.coefficients;
    series
        .iter()
        .map(|&(t, y)| {
            let mut f = b[0].estimate + b[1].estimate * t;
            if let (Some(m), Some(q)) = (fit.time_center, b.get(2)) {
                f += q.estimate * (t - m) * (t - m);
            }
            y - f
        })
        .collect()
}

/// Profiled REML log-likelihood at a given variance ratio; used to check
/// that a fit sits at a maximum.
pub fn reml_log_likelihood<F: Real>(points: &[TrendPoint<F>], options: &LmmOptions<F>, lambda: F) -> Result<F> {
    let fit = fit_lmm_points(
        points,
        &LmmOptions {
            lambda: Lambda::Fixed(lambda),
            ..*options
        },
    )?;
    Ok(fit.log_likelihood)
}
