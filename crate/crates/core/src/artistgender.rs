//! Artist gender from given names and band rosters, female-artist share
//! trends, and the split of records by artist gender.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::corpus::{bucket_start_for, Genre, SongRecord};
use crate::error::{Error, Result};
use crate::trends::{fit_ols, TimeCoding, TrendFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NameGender {
    F,
    M,
    Unknown,
}

/// Given-name frequencies by gender.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NameTable {
    counts: HashMap<String, (u64, u64)>,
}

impl NameTable {
    /// Rows of `(name, gender, count)`; gender is `F` or `M`.
    pub fn new<S: AsRef<str>>(rows: impl IntoIterator<Item = (S, char, u64)>) -> Result<Self> {
        let mut counts: HashMap<String, (u64, u64)> = HashMap::new();
        let mut seen = std::collections::HashSet::new();
        for (name, g, n) in rows {
            let name = name.as_ref().trim().to_lowercase();
            let g = g.to_ascii_uppercase();
            if n == 0 {
                return Err(Error::parse("name table", format!("zero count for `{name}`")));
            }
            if !seen.insert((name.clone(), g)) {
                return Err(Error::parse("name table", format!("duplicate row `{name}`,{g}")));
            }
            let e = counts.entry(name).or_default();
            match g {
                'F' => e.0 += n,
                'M' => e.1 += n,
                _ => return Err(Error::parse("name table", format!("gender must be F or M, got `{g}`"))),
            }
        }
        Ok(Self { counts })
    }

    /// Reads `{name,gender,count}` CSV with a header row.
    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::parse("name table", e))?;
            let name = rec.get(0).unwrap_or("").to_string();
            let g = rec.get(1).unwrap_or("").chars().next().unwrap_or('?');
            let n: u64 = rec
                .get(2)
                .unwrap_or("")
                .parse()
                .map_err(|e| Error::parse(format!("name table count for `{name}`"), e))?;
            rows.push((name, g, n));
        }
        Self::new(rows)
    }

    pub fn counts(&self, name: &str) -> Option<(u64, u64)> {
        self.counts.get(&name.to_lowercase()).copied()
    }

    /// The same table with F and M exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            counts: self.counts.iter().map(|(k, &(f, m))| (k.clone(), (m, f))).collect(),
        }
    }
}

/// F when the female share of the name is at least `margin`, M when it is
/// at most `1 - margin`, otherwise unknown.
pub fn name_gender(given_name: &str, table: &NameTable, margin: f64) -> Result<NameGender> {
    if !(0.5..=1.0).contains(&margin) {
        return Err(Error::Config(format!("margin must be in [0.5, 1], got {margin}")));
    }
    let Some((f, m)) = table.counts(given_name.trim()) else {
        return Ok(NameGender::Unknown);
    };
    let share = f as f64 / (f + m) as f64;
    Ok(if share >= margin {
        NameGender::F
    } else if share <= 1.0 - margin {
        NameGender::M
    } else {
        NameGender::Unknown
    })
}

/// Member rosters for bands and pseudonyms, keyed by lowercased artist.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArtistResolution {
    members: HashMap<String, Vec<String>>,
}

impl ArtistResolution {
    pub fn new<S: AsRef<str>>(rows: impl IntoIterator<Item = (S, Vec<String>)>) -> Result<Self> {
        let mut members = HashMap::new();
        for (artist, list) in rows {
            let artist = artist.as_ref().trim().to_lowercase();
            let list: Vec<String> = list.into_iter().map(|m| m.trim().to_string()).filter(|m| !m.is_empty()).collect();
            if list.is_empty() {
                return Err(Error::parse("artist resolution", format!("`{artist}` has no members")));
            }
            if members.insert(artist.clone(), list).is_some() {
                return Err(Error::parse("artist resolution", format!("duplicate artist `{artist}`")));
            }
        }
        Ok(Self { members })
    }

    /// Reads `{artist,members}` CSV, members separated by `;`.
    pub fn read<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::parse("artist resolution", e))?;
            let artist = rec.get(0).unwrap_or("").to_string();
            let members = rec.get(1).unwrap_or("").split(';').map(str::to_string).collect();
            rows.push((artist, members));
        }
        Self::new(rows)
    }

    pub fn members(&self, artist: &str) -> Option<&[String]> {
        self.members.get(&artist.trim().to_lowercase()).map(Vec::as_slice)
    }
}

fn given_name(full: &str) -> &str {
    full.split_whitespace().next().unwrap_or("")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArtistScore {
    /// Fraction of resolved members classified female; `None` if none resolve.
    pub score: Option<f64>,
    pub resolved: usize,
    pub members: usize,
    /// Some but not all members resolved.
    pub partial: bool,
}

/// Scores an artist: a rostered band by its female fraction over resolved
/// members, anyone else by the first token of the artist name.
pub fn artist_score(artist: &str, resolution: &ArtistResolution, table: &NameTable, margin: f64) -> Result<ArtistScore> {
    let names: Vec<&str> = match resolution.members(artist) {
        Some(list) => list.iter().map(|m| given_name(m)).collect(),
        None => vec![given_name(artist)],
    };
    let mut female = 0usize;
    let mut resolved = 0usize;
    for n in &names {
        match name_gender(n, table, margin)? {
            NameGender::F => {
                female += 1;
                resolved += 1;
            }
            NameGender::M => resolved += 1,
            NameGender::Unknown => {}
        }
    }
    Ok(ArtistScore {
        score: (resolved > 0).then(|| female as f64 / resolved as f64),
        resolved,
        members: names.len(),
        partial: resolved > 0 && resolved < names.len(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScoringReport {
    pub artists: usize,
    pub resolved_artists: usize,
    pub partial_artists: usize,
    pub unresolved: Vec<String>,
}

impl ScoringReport {
    pub fn coverage(&self) -> f64 {
        if self.artists == 0 {
            0.0
        } else {
            self.resolved_artists as f64 / self.artists as f64
        }
    }
}

/// Fills `artist_gender_score` on every record whose artist resolves.
pub fn score_records(
    records: &mut [SongRecord],
    resolution: &ArtistResolution,
    table: &NameTable,
    margin: f64,
) -> Result<ScoringReport> {
    let mut cache: BTreeMap<String, ArtistScore> = BTreeMap::new();
    for r in records.iter_mut() {
        let key = r.artist.trim().to_lowercase();
        let s = match cache.get(&key) {
            Some(s) => *s,
            None => {
                let s = artist_score(&r.artist, resolution, table, margin)?;
                cache.insert(key, s);
                s
            }
        };
        r.artist_gender_score = s.score;
    }
    let mut report = ScoringReport {
        artists: cache.len(),
        ..Default::default()
    };
    for (artist, s) in cache {
        if s.score.is_some() {
            report.resolved_artists += 1;
        } else {
            report.unresolved.push(artist);
        }
        report.partial_artists += usize::from(s.partial);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareTrend {
    /// `None` for all genres together.
    pub genre: Option<Genre>,
    pub series: Vec<(i32, f64)>,
    pub fit: TrendFit<f64>,
}

fn share_trend(records: &[&SongRecord], genre: Option<Genre>, width: i32, origin: i32, coding: TimeCoding) -> Result<ShareTrend> {
    let mut by_bucket: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
    for r in records {
        if let Some(s) = r.artist_gender_score {
            let e = by_bucket.entry(bucket_start_for(r.year, origin, width)).or_default();
            e.0 += s;
            e.1 += 1;
        }
    }
    let series: Vec<(i32, f64)> = by_bucket.into_iter().map(|(b, (s, n))| (b, s / n as f64)).collect();
    if series.len() < 3 {
        let what = genre.map_or("all genres".to_string(), |g| g.to_string());
        return Err(Error::Insufficient(format!(
            "{what}: {} buckets with scored artists; at least 3 needed",
            series.len()
        )));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(b, v)| (coding.code(b as f64), v)).collect();
    let mut fit = fit_ols(&pts, false)?;
    fit.time_coding = coding;
    Ok(ShareTrend { genre, series, fit })
}

/// Mean artist score per bucket regressed on time, overall and optionally
/// once per genre. Genres with fewer than 3 scored buckets are skipped in
/// the per-genre fan-out.
pub fn female_share_trend(
    records: &[SongRecord],
    by_genre: bool,
    width: i32,
    origin: i32,
    coding: TimeCoding,
) -> Result<Vec<ShareTrend>> {
    if width < 1 {
        return Err(Error::Config("bucket width must be >= 1".into()));
    }
    let all: Vec<&SongRecord> = records.iter().collect();
    let mut out = vec![share_trend(&all, None, width, origin, coding)?];
    if by_genre {
        for g in Genre::ALL {
            let sub: Vec<&SongRecord> = records.iter().filter(|r| r.genre == g).collect();
            if let Ok(t) = share_trend(&sub, Some(g), width, origin, coding) {
                out.push(t);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenderSplit {
    pub female: Vec<SongRecord>,
    pub male: Vec<SongRecord>,
    pub mixed: usize,
    pub unresolved: usize,
}

/// Score at least `threshold_f` goes to the female side, at most
/// `threshold_m` to the male side; in between is mixed and dropped.
pub fn split_by_gender(records: &[SongRecord], threshold_f: f64, threshold_m: f64) -> Result<GenderSplit> {
    if !(0.0 <= threshold_m && threshold_m < threshold_f && threshold_f <= 1.0) {
        return Err(Error::Config(format!(
            "need 0 <= threshold_m < threshold_f <= 1, got ({threshold_f}, {threshold_m})"
        )));
    }
    let mut split = GenderSplit::default();
    for r in records {
        match r.artist_gender_score {
            Some(s) if s >= threshold_f => split.female.push(r.clone()),
            Some(s) if s <= threshold_m => split.male.push(r.clone()),
            Some(_) => split.mixed += 1,
            None => split.unresolved += 1,
        }
    }
    Ok(split)
}
