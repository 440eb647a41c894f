use std::path::{Path, PathBuf};

use anyhow::Context;
use biascorpus::bias::{read_aggregate, read_observations, BiasObservation};
use biascorpus::trends::{fit_lmm, fit_ols, group_interaction, GroupedPoint, TrendFit, TrendPoint};
use biascorpus::Error;
use serde::Serialize;

use crate::config::{Coding, Config};
use crate::manifest::Run;
use crate::overlay;
use crate::store::{files_with_suffix, open};

#[derive(clap::Args)]
pub struct Args {
    /// Bias directory written by `bias`.
    #[arg(long)]
    bias: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Add a centered squared time term.
    #[arg(long)]
    quadratic: bool,
    #[arg(long, value_enum)]
    time_coding: Option<Coding>,
    #[arg(long)]
    origin: Option<i32>,
    #[arg(long)]
    bucket_width: Option<i32>,
    /// Second bias directory; fits group and group x time terms with this
    /// directory's observations as the flagged group.
    #[arg(long)]
    interaction: Option<PathBuf>,
}

#[derive(Serialize)]
struct TraitTrend<'a> {
    trait_name: &'a str,
    lmm: TrendFit<f64>,
    ols_on_means: TrendFit<f64>,
}

#[derive(Serialize)]
struct Interaction<'a> {
    trait_name: &'a str,
    flagged_group: String,
    fit: TrendFit<f64>,
}

fn observations(path: &Path) -> anyhow::Result<Vec<BiasObservation<f64>>> {
    let obs = read_observations(open(path)?).with_context(|| path.display().to_string())?;
    if obs.is_empty() {
        return Err(Error::Empty(format!("{} has no observations", path.display())).into());
    }
    Ok(obs)
}

pub fn run(a: Args, mut cfg: Config) -> anyhow::Result<()> {
    overlay!(cfg, a; time_coding, origin, bucket_width);
    if a.quadratic {
        cfg.quadratic = true;
    }
    let coding = cfg.coding();
    let mut inputs: Vec<&Path> = vec![a.bias.as_path()];
    if let Some(i) = &a.interaction {
        inputs.push(i);
    }
    let mut run = Run::start("trend", &cfg, &inputs, &a.out)?;
    let traits = files_with_suffix(&a.bias, ".observations.csv")?;
    if traits.is_empty() {
        return Err(Error::Empty(format!("no observation files in {}", a.bias.display())).into());
    }
    for (name, path) in &traits {
        let obs = observations(path)?;
        let lmm = run
            .timed(&format!("lmm_{name}"), || fit_lmm(&obs, cfg.quadratic, coding))
            .with_context(|| format!("trait `{name}`"))?;
        let agg_path = a.bias.join(format!("{name}.aggregate.csv"));
        let means = read_aggregate::<f64, _>(open(&agg_path)?)?;
        let pts: Vec<(f64, f64)> = means.iter().map(|b| (coding.code(b.bucket_start as f64), b.mean_bias)).collect();
        let mut ols_on_means = fit_ols(&pts, cfg.quadratic).with_context(|| format!("trait `{name}` bucket means"))?;
        ols_on_means.time_coding = coding;
        run.write_json(&format!("{name}.trend.json"), &TraitTrend { trait_name: name, lmm, ols_on_means })?;

        if let Some(other) = &a.interaction {
            let flagged = observations(&other.join(format!("{name}.observations.csv")))?;
            let tag = |o: &BiasObservation<f64>, group: bool| GroupedPoint {
                point: TrendPoint {
                    unit: format!("{}:{}", u8::from(group), o.trait_word),
                    ..TrendPoint::from(o)
                },
                group,
            };
            let points: Vec<GroupedPoint<f64>> = obs
                .iter()
                .map(|o| tag(o, false))
                .chain(flagged.iter().map(|o| tag(o, true)))
                .collect();
            let fit = run
                .timed(&format!("interaction_{name}"), || group_interaction(&points, coding))
                .with_context(|| format!("trait `{name}` interaction"))?;
            let flagged_group = other.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            run.write_json(&format!("{name}.interaction.json"), &Interaction { trait_name: name, flagged_group, fit })?;
        }
    }
    run.finish()
}
