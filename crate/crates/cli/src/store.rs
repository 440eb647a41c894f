//! On-disk layout shared between commands.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::Context;
use biascorpus::corpus::{bucketize, read_records, write_records, write_bucket_report, BucketCorpus, SongRecord};
use biascorpus::embedding::read_model;
use biascorpus::lexicon::{Builtin, Lexicon};
use biascorpus::{EmbeddingModel64, Error};
use serde::{Deserialize, Serialize};

use crate::manifest::Run;

pub const RECORDS: &str = "records.jsonl";
pub const STORE: &str = "store.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoreInfo {
    pub bucket_width: i32,
    pub origin: i32,
    pub min_tokens: usize,
    pub records: usize,
    pub buckets: Vec<i32>,
}

/// Writes records plus bucket metadata; returns the included buckets.
pub fn write_store(run: &Run, prefix: &str, records: &[SongRecord], width: i32, origin: i32, min_tokens: usize) -> anyhow::Result<Vec<i32>> {
    let b = bucketize(records, width, min_tokens, origin)?;
    let included: Vec<i32> = b.buckets.iter().map(|b| b.bucket_start).collect();
    run.write_text(&format!("{prefix}{RECORDS}"), |w| write_records(w, records))?;
    run.write_text(&format!("{prefix}buckets.csv"), |w| write_bucket_report(w, &b.report))?;
    let info = StoreInfo {
        bucket_width: width,
        origin,
        min_tokens,
        records: records.len(),
        buckets: included.clone(),
    };
    run.write_json(&format!("{prefix}{STORE}"), &info)?;
    Ok(included)
}

pub fn read_store(dir: &Path) -> anyhow::Result<(StoreInfo, Vec<SongRecord>)> {
    let info_path = dir.join(STORE);
    let text = std::fs::read_to_string(&info_path).map_err(|e| Error::io(&info_path, e))?;
    let info: StoreInfo = serde_json::from_str(&text).map_err(|e| Error::parse(info_path.display().to_string(), e))?;
    let rp = dir.join(RECORDS);
    let f = File::open(&rp).map_err(|e| Error::io(&rp, e))?;
    let records = read_records(BufReader::new(f))?;
    Ok((info, records))
}

/// The store's included buckets.
pub fn store_buckets(dir: &Path) -> anyhow::Result<(StoreInfo, Vec<BucketCorpus>)> {
    let (info, records) = read_store(dir)?;
    let b = bucketize(&records, info.bucket_width, 0, info.origin)?;
    let buckets: Vec<BucketCorpus> = b.buckets.into_iter().filter(|b| info.buckets.contains(&b.bucket_start)).collect();
    if buckets.is_empty() {
        return Err(Error::Empty(format!("{} has no bucket above the token threshold", dir.display())).into());
    }
    Ok((info, buckets))
}

pub fn model_path(dir: &Path, bucket_start: i32) -> PathBuf {
    dir.join(format!("{bucket_start}.bin"))
}

/// Every `<bucket_start>.bin` in `dir`, in bucket order.
pub fn read_models(dir: &Path) -> anyhow::Result<Vec<(i32, EmbeddingModel64)>> {
    let mut starts: Vec<i32> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let p = e.path();
            (p.extension()? == "bin").then(|| p.file_stem()?.to_str()?.parse().ok())?
        })
        .collect();
    starts.sort_unstable();
    if starts.is_empty() {
        return Err(Error::Empty(format!("no model files in {}", dir.display())).into());
    }
    starts
        .into_iter()
        .map(|s| {
            let p = model_path(dir, s);
            let m = read_model(&p).with_context(|| format!("loading {}", p.display()))?;
            Ok((s, m))
        })
        .collect()
}

pub fn read_model_for(dir: &Path, bucket_start: i32) -> anyhow::Result<EmbeddingModel64> {
    let p = model_path(dir, bucket_start);
    if !p.exists() {
        return Err(Error::Empty(format!("no model for bucket {bucket_start} in {}", dir.display())).into());
    }
    Ok(read_model(&p)?)
}

/// A bundled lexicon by name, or a lexicon file.
pub fn lexicon(spec: &str) -> anyhow::Result<Lexicon> {
    match Builtin::from_name(spec) {
        Some(b) => Ok(b.lexicon()),
        None => Ok(Lexicon::load(Path::new(spec))?),
    }
}

pub fn lexicon_or(path: &Option<PathBuf>, fallback: Builtin) -> anyhow::Result<Lexicon> {
    match path {
        Some(p) => Ok(Lexicon::load(p)?),
        None => Ok(fallback.lexicon()),
    }
}

/// Files in `dir` ending with `suffix`, with the prefix before it, sorted.
pub fn files_with_suffix(dir: &Path, suffix: &str) -> anyhow::Result<Vec<(String, PathBuf)>> {
    let mut out: Vec<(String, PathBuf)> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let p = e.path();
            let name = p.file_name()?.to_str()?.to_string();
            let stem = name.strip_suffix(suffix)?.to_string();
            Some((stem, p))
        })
        .collect();
    out.sort();
    Ok(out)
}

pub fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?))
}
