use std::collections::BTreeMap;
use std::path::PathBuf;

use biascorpus::artistgender::{artist_score, female_share_trend, score_records, split_by_gender, ArtistResolution, NameTable, ShareTrend};
use serde::Serialize;

use crate::config::Config;
use crate::manifest::Run;
use crate::overlay;
use crate::store::{open, read_store, write_store, RECORDS, STORE};

#[derive(clap::Args)]
pub struct Args {
    /// Store directory written by `ingest`.
    #[arg(long)]
    store: PathBuf,
    /// CSV {name,gender,count}.
    #[arg(long)]
    names: PathBuf,
    /// CSV {artist,members} with members separated by `;`.
    #[arg(long)]
    members: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    margin: Option<f64>,
    /// Also fit the share trend within each genre.
    #[arg(long)]
    by_genre: bool,
    /// Scores at or above this go to the female-artist corpus.
    #[arg(long)]
    threshold_f: Option<f64>,
    /// Scores at or below this go to the male-artist corpus.
    #[arg(long)]
    threshold_m: Option<f64>,
    /// Buckets below this many tokens are left out of the split stores.
    #[arg(long)]
    min_tokens: Option<usize>,
}

#[derive(Serialize)]
struct ArtistRow {
    artist: String,
    score: Option<f64>,
    resolved: usize,
    members: usize,
    partial: bool,
}

#[derive(Serialize)]
struct Summary {
    artists: usize,
    resolved_artists: usize,
    partial_artists: usize,
    coverage: f64,
    unresolved: Vec<String>,
    songs: usize,
    female_songs: usize,
    male_songs: usize,
    mixed_songs: usize,
    unresolved_songs: usize,
    female_buckets: Vec<i32>,
    male_buckets: Vec<i32>,
    share_trends: Vec<ShareTrend>,
}

pub fn run(a: Args, mut cfg: Config) -> anyhow::Result<()> {
    overlay!(cfg, a; margin, threshold_f, threshold_m, min_tokens);
    if a.by_genre {
        cfg.by_genre = true;
    }
    let inputs = [a.store.join(RECORDS), a.store.join(STORE), a.names.clone(), a.members.clone()];
    let refs: Vec<&std::path::Path> = inputs.iter().map(PathBuf::as_path).collect();
    let mut run = Run::start("gender", &cfg, &refs, &a.out)?;
    let (info, mut records) = read_store(&a.store)?;
    let table = NameTable::read(open(&a.names)?)?;
    let resolution = ArtistResolution::read(open(&a.members)?)?;
    let report = run.timed("score", || score_records(&mut records, &resolution, &table, cfg.margin))?;

    let mut artists: BTreeMap<&str, ()> = BTreeMap::new();
    for r in &records {
        artists.insert(r.artist.as_str(), ());
    }
    let rows = artists
        .keys()
        .map(|&artist| {
            let s = artist_score(artist, &resolution, &table, cfg.margin)?;
            Ok(ArtistRow {
                artist: artist.to_string(),
                score: s.score,
                resolved: s.resolved,
                members: s.members,
                partial: s.partial,
            })
        })
        .collect::<biascorpus::Result<Vec<_>>>()?;
    run.write_csv("artists.csv", &rows)?;

    let share_trends = female_share_trend(&records, cfg.by_genre, info.bucket_width, info.origin, cfg.coding())?;
    let split = split_by_gender(&records, cfg.threshold_f, cfg.threshold_m)?;
    for sub in ["female", "male"] {
        let d = run.path(sub);
        std::fs::create_dir_all(&d).map_err(|e| biascorpus::Error::io(&d, e))?;
    }
    let female_buckets = write_store(&run, "female/", &split.female, info.bucket_width, info.origin, cfg.min_tokens)?;
    let male_buckets = write_store(&run, "male/", &split.male, info.bucket_width, info.origin, cfg.min_tokens)?;
    run.write_json(
        "gender.json",
        &Summary {
            artists: report.artists,
            resolved_artists: report.resolved_artists,
            partial_artists: report.partial_artists,
            coverage: report.coverage(),
            unresolved: report.unresolved.clone(),
            songs: records.len(),
            female_songs: split.female.len(),
            male_songs: split.male.len(),
            mixed_songs: split.mixed,
            unresolved_songs: split.unresolved,
            female_buckets,
            male_buckets,
            share_trends,
        },
    )?;
    run.finish()
}
