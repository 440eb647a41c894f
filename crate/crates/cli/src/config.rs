//! Run settings: defaults, overlaid by a TOML file, overlaid by flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use biascorpus::bias::{Averaging, WordFilter};
use biascorpus::embedding::TrainConfig;
use biascorpus::resampling::{SampleMode, SeedPolicy};
use biascorpus::trends::TimeCoding;
use biascorpus::Error;
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "BIASCORPUS_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Coding {
    /// Years since the origin year.
    Year,
    /// Bucket index since the origin year.
    Bucket,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub threads: usize,

    pub start_year: i32,
    pub end_year: i32,
    pub origin: i32,
    pub bucket_width: i32,
    pub min_tokens: usize,
    pub english_filter: bool,
    pub english_threshold: f64,

    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub lr: f64,
    pub negatives: usize,
    pub subsample: f64,
    pub min_count: u64,

    pub traits: Vec<String>,
    pub male: Option<PathBuf>,
    pub female: Option<PathBuf>,
    pub filter: WordFilter,
    pub averaging: Averaging,
    pub normalize: bool,
    pub bootstrap: usize,
    pub ci_level: f64,

    pub repeats: usize,
    pub sampling: SampleMode,
    pub seed_policy: SeedPolicy,
    pub popularity: Option<PathBuf>,

    pub time_coding: Coding,
    pub quadratic: bool,

    pub verbs: Option<PathBuf>,
    pub relations: Vec<String>,

    pub margin: f64,
    pub threshold_f: f64,
    pub threshold_m: f64,
    pub by_genre: bool,
}

impl Default for Config {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            seed: t.seed,
            threads: 1,
            start_year: 1965,
            end_year: 2018,
            origin: 1965,
            bucket_width: 5,
            min_tokens: 500_000,
            english_filter: true,
            english_threshold: 0.15,
            dim: t.dim,
            window: t.window,
            epochs: t.epochs,
            lr: t.initial_lr,
            negatives: t.negatives,
            subsample: t.subsample_t,
            min_count: t.min_count,
            traits: vec!["competence".into(), "intelligence".into(), "warmth".into()],
            male: None,
            female: None,
            filter: WordFilter::None,
            averaging: Averaging::Raw,
            normalize: false,
            bootstrap: 0,
            ci_level: 0.95,
            repeats: 1,
            sampling: SampleMode::Undersample,
            seed_policy: SeedPolicy::PerRun,
            popularity: None,
            time_coding: Coding::Year,
            quadratic: false,
            verbs: None,
            relations: vec!["obj".into(), "iobj".into(), "obl".into()],
            margin: 0.9,
            threshold_f: 0.75,
            threshold_m: 0.25,
            by_genre: false,
        }
    }
}

impl Config {
    /// Defaults overlaid with `path`, then with the seed environment variable.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                toml::from_str(&text).map_err(|e| Error::parse(p.display().to_string(), e))?
            }
            None => Config::default(),
        };
        if let Ok(v) = std::env::var(SEED_ENV) {
            cfg.seed = v
                .trim()
                .parse()
                .map_err(|e| Error::parse(SEED_ENV, e))
                .with_context(|| format!("{SEED_ENV}={v}"))?;
        }
        Ok(cfg)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            window: self.window,
            epochs: self.epochs,
            initial_lr: self.lr,
            negatives: self.negatives,
            subsample_t: self.subsample,
            min_count: self.min_count,
            seed: self.seed,
            threads: self.threads,
        }
    }

    pub fn coding(&self) -> TimeCoding {
        match self.time_coding {
            Coding::Year => TimeCoding::YearOffset { origin: self.origin },
            Coding::Bucket => TimeCoding::BucketIndex { origin: self.origin, width: self.bucket_width },
        }
    }
}

/// Copies every `Some` flag onto the matching config field.
#[macro_export]
macro_rules! overlay {
    ($cfg:expr, $args:expr; $($field:ident),* $(,)?) => {
        $( if let Some(v) = $args.$field.clone() { $cfg.$field = v.into(); } )*
    };
}
