use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use biascorpus::bias::read_aggregate;
use biascorpus::stats::normal_quantile;
use biascorpus::trends::{TimeCoding, TrendFit};
use biascorpus::Error;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::manifest::Run;
use crate::overlay;
use crate::store::{files_with_suffix, open};

#[derive(clap::Args)]
pub struct Args {
    /// Bias directory, optionally `label=dir`; repeat to overlay series.
    #[arg(long, required = true)]
    bias: Vec<String>,
    /// Trend directory matching each `--bias`, same syntax and order.
    #[arg(long)]
    trends: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    ci_level: Option<f64>,
}

#[derive(Serialize)]
struct PlotRow {
    series: String,
    bucket_start: i32,
    mean: f64,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
}

#[derive(Serialize)]
struct SummaryRow {
    series: String,
    trait_name: String,
    time_coding: String,
    beta_time: f64,
    std_error: f64,
    z: f64,
    p_value: f64,
    beta_time_sq: Option<f64>,
    sigma2_word: f64,
    sigma2_resid: f64,
    boundary: bool,
    n_obs: usize,
    n_words: usize,
    ols_means_beta_time: f64,
    ols_means_p_value: f64,
}

#[derive(Deserialize)]
struct TraitTrend {
    lmm: TrendFit<f64>,
    ols_on_means: TrendFit<f64>,
}

#[derive(Deserialize)]
struct NormalizedRow {
    bucket_start: i32,
    value: f64,
}

fn labelled(spec: &str, many: bool) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((l, p)) => (l.to_string(), PathBuf::from(p)),
        None => {
            let p = PathBuf::from(spec);
            let label = if many {
                p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
            } else {
                "observed".to_string()
            };
            (label, p)
        }
    }
}

fn coding_name(c: &TimeCoding) -> String {
    match c {
        TimeCoding::YearOffset { origin } => format!("year_offset({origin})"),
        TimeCoding::BucketIndex { origin, width } => format!("bucket_index({origin},{width})"),
        TimeCoding::AsGiven => "as_given".into(),
    }
}

fn read_trend(path: &Path) -> anyhow::Result<TraitTrend> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?)
}

pub fn run(a: Args, mut cfg: Config) -> anyhow::Result<()> {
    overlay!(cfg, a; ci_level);
    if !a.trends.is_empty() && a.trends.len() != a.bias.len() {
        return Err(Error::Config("give one --trends per --bias or none".into()).into());
    }
    let many = a.bias.len() > 1;
    let bias: Vec<(String, PathBuf)> = a.bias.iter().map(|s| labelled(s, many)).collect();
    let trends: Vec<PathBuf> = a.trends.iter().map(|s| labelled(s, many).1).collect();
    let inputs: Vec<&Path> = bias.iter().map(|b| b.1.as_path()).chain(trends.iter().map(PathBuf::as_path)).collect();
    let run = Run::start("report", &cfg, &inputs, &a.out)?;
    let z = normal_quantile(0.5 + cfg.ci_level / 2.0);

    let mut plots: BTreeMap<String, Vec<PlotRow>> = BTreeMap::new();
    let mut summary = Vec::new();
    for (i, (label, dir)) in bias.iter().enumerate() {
        let fit_label = if label == "observed" { "lmm_fit".to_string() } else { format!("{label}_fit") };
        let aggregates = files_with_suffix(dir, ".aggregate.csv")?;
        if aggregates.is_empty() {
            return Err(Error::Empty(format!("no aggregate files in {}", dir.display())).into());
        }
        for (name, path) in aggregates {
            let rows = plots.entry(name.clone()).or_default();
            let buckets = read_aggregate::<f64, _>(open(&path)?).with_context(|| path.display().to_string())?;
            for b in &buckets {
                rows.push(PlotRow {
                    series: label.clone(),
                    bucket_start: b.bucket_start,
                    mean: b.mean_bias,
                    ci_low: b.ci_low,
                    ci_high: b.ci_high,
                });
            }
            let norm_path = dir.join(format!("{name}.normalized.csv"));
            if norm_path.exists() {
                let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(open(&norm_path)?);
                for r in rdr.deserialize::<NormalizedRow>() {
                    let r = r.map_err(|e| Error::parse(norm_path.display().to_string(), e))?;
                    rows.push(PlotRow {
                        series: format!("{label}_normalized"),
                        bucket_start: r.bucket_start,
                        mean: r.value,
                        ci_low: None,
                        ci_high: None,
                    });
                }
            }
            let Some(tdir) = trends.get(i) else { continue };
            let tpath = tdir.join(format!("{name}.trend.json"));
            if !tpath.exists() {
                continue;
            }
            let t = read_trend(&tpath)?;
            for b in &buckets {
                if let Some((m, se)) = t.lmm.fitted(b.bucket_start as f64) {
                    rows.push(PlotRow {
                        series: fit_label.clone(),
                        bucket_start: b.bucket_start,
                        mean: m,
                        ci_low: Some(m - z * se),
                        ci_high: Some(m + z * se),
                    });
                }
            }
            let bt = t.lmm.beta_linear();
            let ot = t.ols_on_means.beta_linear();
            summary.push(SummaryRow {
                series: label.clone(),
                trait_name: name.clone(),
                time_coding: coding_name(&t.lmm.time_coding),
                beta_time: bt.estimate,
                std_error: bt.std_error,
                z: bt.statistic,
                p_value: bt.p_value,
                beta_time_sq: t.lmm.beta_quadratic().map(|c| c.estimate),
                sigma2_word: t.lmm.sigma2_word,
                sigma2_resid: t.lmm.sigma2_resid,
                boundary: t.lmm.boundary,
                n_obs: t.lmm.n_obs,
                n_words: t.lmm.n_words,
                ols_means_beta_time: ot.estimate,
                ols_means_p_value: ot.p_value,
            });
        }
    }
    for (name, rows) in &plots {
        run.write_csv(&format!("{name}.plot.csv"), rows)?;
    }
    run.write_csv("summary.csv", &summary)?;
    run.finish()
}
