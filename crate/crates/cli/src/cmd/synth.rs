use std::path::PathBuf;

use biascorpus::corpus::Genre;
use biascorpus::lexicon::Builtin;
use biascorpus::resampling::{GenreSchedule, PopularityRow, PopularityTable};
use biascorpus::synth::{artist_pool, name_table_rows, song_corpus, write_jsonl, SongCorpusSpec};
use biascorpus::Error;
use serde::Serialize;

use crate::config::Config;
use crate::manifest::Run;

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    songs: usize,
}

#[derive(Serialize)]
struct NameRow<'a> {
    name: &'a str,
    gender: char,
    count: u64,
}

#[derive(Serialize)]
struct MemberRow {
    artist: String,
    members: String,
}

#[derive(Serialize)]
struct OpinionRow {
    period_start: i32,
    share_women: f64,
}

/// Per-mille chart weights; each bucket's active genres are renormalized.
fn weight(g: Genre, bucket: i32) -> u64 {
    let i = ((bucket - 1965) / 5) as u64;
    match g {
        Genre::Pop => 300,
        Genre::Rock => 300u64.saturating_sub(15 * i),
        Genre::Country => 150,
        Genre::Rnb => 150 + 5 * i,
        Genre::Dance => 80,
        Genre::Rap => 60 + 20 * i,
    }
}

fn popularity() -> biascorpus::Result<PopularityTable> {
    let schedule = GenreSchedule::default();
    let mut rows = Vec::new();
    for bucket in (1965..=2015).step_by(5) {
        let active = schedule.active_in(bucket);
        let w: Vec<u64> = active.iter().map(|&g| weight(g, bucket)).collect();
        let total: u64 = w.iter().sum();
        // integer per-mille shares summing to exactly 1000
        let mut mille: Vec<u64> = w.iter().map(|x| x * 1000 / total).collect();
        let short = 1000 - mille.iter().sum::<u64>();
        mille[0] += short;
        for (&genre, m) in active.iter().zip(mille) {
            rows.push(PopularityRow { bucket_start: bucket, genre, share: m as f64 / 1000.0 });
        }
    }
    PopularityTable::new(rows)
}

pub fn run(a: Args, cfg: Config) -> anyhow::Result<()> {
    let mut run = Run::start("synth", &cfg, &[], &a.out)?;
    let spec = SongCorpusSpec { songs: a.songs, seed: cfg.seed, ..SongCorpusSpec::default() };
    let songs = run.timed("generate", || song_corpus(&spec))?;
    run.write_text("songs.jsonl", |w| write_jsonl(w, &songs))?;

    let names: Vec<(String, char, u64)> = name_table_rows();
    let name_rows: Vec<NameRow> = names.iter().map(|(n, g, c)| NameRow { name: n, gender: *g, count: *c }).collect();
    run.write_csv("names.csv", &name_rows)?;
    let members: Vec<MemberRow> = artist_pool(spec.seed)
        .into_iter()
        .filter(|a| !a.members.is_empty())
        .map(|a| MemberRow { artist: a.name, members: a.members.join(";") })
        .collect();
    run.write_csv("members.csv", &members)?;

    let table = popularity()?;
    run.write_text("popularity.csv", |w| table.write(w))?;

    let opinion: Vec<OpinionRow> = (0..11)
        .map(|i| OpinionRow { period_start: 1965 + 5 * i, share_women: (450.0 - 30.0 * i as f64 + [5.0, -5.0][i as usize % 2]) / 1000.0 })
        .collect();
    run.write_csv("opinion.csv", &opinion)?;

    // Format stand-ins for external rating files: fixed, made-up scores.
    run.write_text("ratings.csv", |w| {
        let io = |e| Error::io("ratings.csv", e);
        writeln!(w, "# higher_means=masculine source=synthetic").map_err(io)?;
        writeln!(w, "word,score").map_err(io)?;
        let words = Builtin::Competence.lexicon();
        for (i, word) in words.words().iter().enumerate() {
            writeln!(w, "{word},{}", 2.0 + ((i * 37) % 41) as f64 / 10.0).map_err(io)?;
        }
        Ok(())
    })?;
    run.write_text("men_pairs.txt", |w| {
        let io = |e| Error::io("men_pairs.txt", e);
        let (m, f, c) = (Builtin::Male.lexicon(), Builtin::Female.lexicon(), Builtin::Competence.lexicon());
        for (i, (x, y)) in m.words().iter().zip(f.words()).enumerate() {
            writeln!(w, "{x}-n {y}-n {}", 35 + i % 10).map_err(io)?;
        }
        for (i, (x, y)) in m.words().iter().zip(c.words()).enumerate() {
            writeln!(w, "{x}-n {y}-j {}", 5 + i % 10).map_err(io)?;
        }
        for (i, x) in c.words().iter().enumerate() {
            let y = &c.words()[(i + 1) % c.len()];
            writeln!(w, "{x}-j {y}-j {}", 20 + i % 15).map_err(io)?;
        }
        Ok(())
    })?;
    run.finish()
}
