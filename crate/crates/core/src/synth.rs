//! Synthetic corpora with planted structure: gender/trait co-occurrence
//! for bias recovery, circular topic similarity for benchmark checks, and
//! a small song corpus with the quirks real lyric dumps have.

use std::collections::HashSet;
use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::Serialize;

use crate::bias::Group;
use crate::corpus::{default_stoplist, Genre, RawSong};
use crate::error::{Error, Result};
use crate::lexicon::{Builtin, Lexicon};
use crate::validation::SimilarityPair;

const ONSETS: [&str; 16] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 6] = ["", "n", "r", "l", "k", "sh"];

/// `n` distinct pronounceable pseudo-words, none of them a bundled lexicon
/// or stoplist word.
pub fn pseudo_words(n: usize, prefix: &str, seed: u64) -> Vec<String> {
    let mut taken: HashSet<String> = default_stoplist();
    for b in [
        Builtin::Female,
        Builtin::Male,
        Builtin::Competence,
        Builtin::Warmth,
        Builtin::Intelligence,
        Builtin::Feminine,
        Builtin::Masculine,
        Builtin::AggressiveVerbs,
    ] {
        taken.extend(b.lexicon().words().iter().cloned());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.random_range(2..=3);
        let mut w = prefix.to_string();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(&mut rng).expect("nonempty"));
            w.push_str(VOWELS.choose(&mut rng).expect("nonempty"));
        }
        w.push_str(CODAS.choose(&mut rng).expect("nonempty"));
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn zipf(n: usize) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|r| 1.0 / r as f64)).expect("positive weights")
}

/// Settings for the gender/trait co-occurrence generator.
#[derive(Debug, Clone)]
pub struct BiasCorpusSpec {
    pub tokens: usize,
    /// How many times more often the favoured gender shares a sentence with
    /// trait words than the other gender does.
    pub rho: f64,
    pub favored: Group,
    pub sentence_len: usize,
    pub seed: u64,
}

impl BiasCorpusSpec {
    pub fn new(rho: f64, seed: u64) -> Self {
        Self {
            tokens: 200_000,
            rho,
            favored: Group::Male,
            sentence_len: 10,
            seed,
        }
    }
}

/// Word pools shared by the generators.
struct Pools {
    generic: Vec<String>,
    generic_w: WeightedIndex<f64>,
    topic: Vec<String>,
    family: Vec<String>,
}

impl Pools {
    fn new(seed: u64) -> Self {
        let generic = pseudo_words(300, "", seed ^ 0x5eed);
        Self {
            generic_w: zipf(generic.len()),
            generic,
            topic: pseudo_words(40, "q", seed ^ 0x7091c),
            family: pseudo_words(40, "h", seed ^ 0xfa),
        }
    }

    fn fill<R: Rng>(&self, rng: &mut R, themed: Option<&[String]>, out: &mut Vec<String>, n: usize) {
        for _ in 0..n {
            match themed {
                Some(pool) if rng.random_bool(0.5) => out.push(pool.choose(rng).expect("nonempty").clone()),
                _ => out.push(self.generic[self.generic_w.sample(rng)].clone()),
            }
        }
    }
}

/// Sentences of three kinds in equal proportion. Trait sentences hold two
/// trait words, one gender word and topic filler; the gender word is the
/// favoured one with probability `rho / (1 + rho)`. Gender sentences hold
/// one gender word with the complementary probability, so both genders
/// occur equally often overall. The rest is generic filler.
pub fn bias_corpus(spec: &BiasCorpusSpec, male: &Lexicon, female: &Lexicon, traits: &Lexicon) -> Result<Vec<Vec<String>>> {
    if !(spec.rho > 0.0) || spec.sentence_len < 4 || male.is_empty() || female.is_empty() || traits.is_empty() {
        return Err(Error::Config("bias corpus needs rho > 0, sentence_len >= 4 and nonempty lexicons".into()));
    }
    let pools = Pools::new(spec.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let p_fav = spec.rho / (1.0 + spec.rho);
    let (fav, other) = match spec.favored {
        Group::Male => (male, female),
        Group::Female => (female, male),
    };
    let mut docs = Vec::with_capacity(spec.tokens / spec.sentence_len + 1);
    let mut total = 0;
    while total < spec.tokens {
        let mut s = Vec::with_capacity(spec.sentence_len);
        match rng.random_range(0..3) {
            0 => {
                for _ in 0..2 {
                    s.push(traits.words().choose(&mut rng).expect("nonempty").clone());
                }
                let lex = if rng.random_bool(p_fav) { fav } else { other };
                s.push(lex.words().choose(&mut rng).expect("nonempty").clone());
                pools.fill(&mut rng, Some(&pools.topic), &mut s, spec.sentence_len - 3);
            }
            1 => {
                let lex = if rng.random_bool(1.0 - p_fav) { fav } else { other };
                s.push(lex.words().choose(&mut rng).expect("nonempty").clone());
                pools.fill(&mut rng, Some(&pools.family), &mut s, spec.sentence_len - 1);
            }
            _ => pools.fill(&mut rng, None, &mut s, spec.sentence_len),
        }
        s.shuffle(&mut rng);
        total += s.len();
        docs.push(s);
    }
    Ok(docs)
}

/// Words on a ring; each sentence draws its words around a random point,
/// so words close on the ring share contexts.
#[derive(Debug, Clone)]
pub struct SimilarityCorpus {
    pub words: Vec<String>,
    pub documents: Vec<Vec<String>>,
    pub spread: f64,
}

impl SimilarityCorpus {
    pub fn generate(n_words: usize, tokens: usize, sentence_len: usize, spread: f64, seed: u64) -> Result<Self> {
        if n_words < 4 || sentence_len < 2 || !(spread > 0.0) {
            return Err(Error::Config("similarity corpus needs >= 4 words, sentence_len >= 2, spread > 0".into()));
        }
        let words = pseudo_words(n_words, "", seed ^ 0xc1c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offset = Normal::new(0.0, spread).map_err(|e| Error::Config(e.to_string()))?;
        let n = n_words as f64;
        let mut documents = Vec::with_capacity(tokens / sentence_len + 1);
        let mut total = 0;
        while total < tokens {
            let center = rng.random_range(0.0..n);
            let s: Vec<String> = (0..sentence_len)
                .map(|_| {
                    let pos = (center + offset.sample(&mut rng)).rem_euclid(n);
                    words[(pos.round() as usize) % n_words].clone()
                })
                .collect();
            total += s.len();
            documents.push(s);
        }
        Ok(Self { words, documents, spread })
    }

    fn ring_distance(&self, a: usize, b: usize) -> f64 {
        let n = self.words.len();
        let d = a.abs_diff(b);
        d.min(n - d) as f64
    }

    /// Context overlap of two ring positions: `exp(-d^2 / (4 spread^2))`.
    pub fn planted(&self, a: usize, b: usize) -> f64 {
        let d = self.ring_distance(a, b);
        (-d * d / (4.0 * self.spread * self.spread)).exp()
    }

    /// `n` distinct pairs with planted scores: half drawn near each other on
    /// the ring, half anywhere.
    pub fn pairs(&self, n: usize, seed: u64) -> Vec<SimilarityPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = self.words.len();
        let near = ((3.0 * self.spread).ceil() as usize).clamp(1, size / 2);
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0;
        while out.len() < n && attempts < 100 * n {
            attempts += 1;
            let a = rng.random_range(0..size);
            let b = if out.len() % 2 == 0 {
                (a + rng.random_range(1..=near)) % size
            } else {
                rng.random_range(0..size)
            };
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            out.push(SimilarityPair {
                a: self.words[a].clone(),
                b: self.words[b].clone(),
                score: self.planted(a, b),
            });
        }
        out
    }
}

/// The same pairs with their scores permuted.
pub fn shuffled_scores(pairs: &[SimilarityPair], seed: u64) -> Vec<SimilarityPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores: Vec<f64> = pairs.iter().map(|p| p.score).collect();
    scores.shuffle(&mut rng);
    pairs
        .iter()
        .zip(scores)
        .map(|(p, score)| SimilarityPair { score, ..p.clone() })
        .collect()
}

pub const FEMALE_NAMES: [&str; 16] = [
    "katy", "ann", "mary", "lucy", "rosa", "nina", "carla", "diana", "emma", "grace", "helen", "iris", "june", "lena", "tina", "vera",
];
pub const MALE_NAMES: [&str; 16] = [
    "billy", "tom", "john", "mike", "paul", "steve", "carl", "dave", "eric", "frank", "gary", "hank", "ivan", "jack", "luke", "ray",
];
/// Names recorded for both genders in similar numbers.
pub const AMBIGUOUS_NAMES: [&str; 3] = ["alex", "sam", "jordan"];
const SURNAMES: [&str; 12] = [
    "perry", "joel", "stone", "rivers", "hart", "lane", "moss", "reed", "shaw", "vale", "wolf", "young",
];

/// Rows of `(name, gender, count)` for the synthetic artists.
pub fn name_table_rows() -> Vec<(String, char, u64)> {
    let mut rows = Vec::new();
    for (i, n) in FEMALE_NAMES.iter().enumerate() {
        rows.push((n.to_string(), 'F', 5_000 + 311 * i as u64));
        rows.push((n.to_string(), 'M', 10 + i as u64));
    }
    for (i, n) in MALE_NAMES.iter().enumerate() {
        rows.push((n.to_string(), 'M', 6_000 + 277 * i as u64));
        rows.push((n.to_string(), 'F', 12 + i as u64));
    }
    for (i, n) in AMBIGUOUS_NAMES.iter().enumerate() {
        rows.push((n.to_string(), 'F', 900 + i as u64));
        rows.push((n.to_string(), 'M', 1_000 - i as u64));
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticArtist {
    pub name: String,
    /// Band members as full names; empty for solo acts.
    pub members: Vec<String>,
}

/// Solo acts, bands with rosters, and a few unresolvable stage names.
pub fn artist_pool(seed: u64) -> Vec<SyntheticArtist> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let full = |first: &str, rng: &mut ChaCha8Rng| {
        let mut s = first.to_string();
        s[..1].make_ascii_uppercase();
        let mut sur = SURNAMES.choose(rng).expect("nonempty").to_string();
        sur[..1].make_ascii_uppercase();
        format!("{s} {sur}")
    };
    for n in FEMALE_NAMES.iter().chain(MALE_NAMES.iter()) {
        out.push(SyntheticArtist { name: full(n, &mut rng), members: vec![] });
    }
    let band_words = pseudo_words(14, "", seed ^ 0xba4d);
    for (i, w) in band_words.iter().enumerate() {
        let size = rng.random_range(2..=5);
        let female_share = [0.0, 0.0, 1.0, 0.5, 0.25, 0.0, 1.0][i % 7];
        let members = (0..size)
            .map(|_| {
                let first = if i % 5 == 4 && rng.random_bool(0.3) {
                    *AMBIGUOUS_NAMES.choose(&mut rng).expect("nonempty")
                } else if rng.random_bool(female_share) {
                    *FEMALE_NAMES.choose(&mut rng).expect("nonempty")
                } else {
                    *MALE_NAMES.choose(&mut rng).expect("nonempty")
                };
                full(first, &mut rng)
            })
            .collect();
        let mut title = w.clone();
        title[..1].make_ascii_uppercase();
        out.push(SyntheticArtist { name: format!("The {title}s"), members });
    }
    for w in pseudo_words(3, "", seed ^ 0xd1) {
        out.push(SyntheticArtist { name: format!("DJ {}", w.to_uppercase()), members: vec![] });
    }
    out
}

/// Settings for the bundled song corpus.
#[derive(Debug, Clone)]
pub struct SongCorpusSpec {
    pub songs: usize,
    pub start_year: i32,
    pub end_year: i32,
    pub duplicates: usize,
    pub non_english: usize,
    /// Trait/gender co-occurrence ratio at the first and last year.
    pub rho_start: f64,
    pub rho_end: f64,
    pub seed: u64,
}

impl Default for SongCorpusSpec {
    fn default() -> Self {
        Self {
            songs: 2000,
            start_year: 1965,
            end_year: 2018,
            duplicates: 25,
            non_english: 15,
            rho_start: 3.0,
            rho_end: 1.2,
            seed: 2018,
        }
    }
}

fn genre_weights(year: i32) -> Vec<(Genre, f64)> {
    let mut w = vec![(Genre::Pop, 3.0), (Genre::Rock, 2.5), (Genre::Country, 1.5), (Genre::Rnb, 1.5)];
    if year >= 1980 {
        w.push((Genre::Dance, 1.0));
    }
    if year >= 1990 {
        w.push((Genre::Rap, 2.0));
    }
    w
}

const LINE_GLUE: [&str; 24] = [
    "i", "you", "the", "and", "my", "me", "we", "to", "in", "on", "is", "a", "it", "so", "all", "with", "your", "that", "for", "of",
    "never", "will", "just", "love",
];

fn capitalize(line: &mut String) {
    if let Some(c) = line.get(..1) {
        let up = c.to_uppercase();
        line.replace_range(..1, &up);
    }
}

fn lyric_line(words: Vec<String>, rng: &mut ChaCha8Rng) -> String {
    let mut line = words.join(" ");
    capitalize(&mut line);
    if rng.random_bool(0.3) {
        line.push(*[',', '!', '?', '.'].choose(rng).expect("nonempty"));
    }
    line
}

/// JSONL-ready songs. Trait lines pair competence words with a gender word,
/// male with probability `rho / (1 + rho)` where `rho` moves linearly from
/// `rho_start` to `rho_end`; a matching share of plain gender lines keeps
/// both genders equally frequent. Section markers in brackets, mixed case,
/// punctuation, non-English songs and re-released duplicates are included.
pub fn song_corpus(spec: &SongCorpusSpec) -> Result<Vec<RawSong>> {
    if spec.end_year < spec.start_year || spec.songs == 0 {
        return Err(Error::Config("song corpus needs songs > 0 and end_year >= start_year".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pools = Pools::new(spec.seed);
    let artists = artist_pool(spec.seed);
    let male = Builtin::Male.lexicon();
    let female = Builtin::Female.lexicon();
    let traits: Vec<String> = [Builtin::Competence, Builtin::Intelligence, Builtin::Warmth]
        .iter()
        .flat_map(|b| b.lexicon().words().to_vec())
        .collect();
    let foreign = pseudo_words(60, "x", spec.seed ^ 0xf0);
    let span = (spec.end_year - spec.start_year).max(1) as f64;
    let mut songs = Vec::with_capacity(spec.songs + spec.duplicates);
    let titles = pseudo_words(spec.songs, "", spec.seed ^ 0x717);

    for (i, title_word) in titles.iter().enumerate() {
        let year = spec.start_year + ((i * (spec.end_year - spec.start_year + 1) as usize) / spec.songs) as i32;
        let gw = genre_weights(year);
        let genre = gw[WeightedIndex::new(gw.iter().map(|g| g.1)).expect("positive").sample(&mut rng)].0;
        let artist = artists.choose(&mut rng).expect("nonempty");
        let rho = spec.rho_start + (spec.rho_end - spec.rho_start) * (year - spec.start_year) as f64 / span;
        let p_male = rho / (1.0 + rho);
        let english = i % (spec.songs / spec.non_english.max(1)).max(1) != 7 || spec.non_english == 0;
        let mut lines = Vec::new();
        let n_lines = rng.random_range(14..22);
        for l in 0..n_lines {
            if l % 6 == 0 {
                let marker = ["[Verse]", "[Chorus]", "[Bridge]", "[Verse 2]"].choose(&mut rng).expect("nonempty");
                lines.push(marker.to_string());
            }
            let mut words: Vec<String> = Vec::new();
            if !english {
                for _ in 0..8 {
                    words.push(foreign.choose(&mut rng).expect("nonempty").clone());
                }
                lines.push(lyric_line(words, &mut rng));
                continue;
            }
            match rng.random_range(0..3) {
                0 => {
                    words.push(traits.choose(&mut rng).expect("nonempty").clone());
                    words.push(traits.choose(&mut rng).expect("nonempty").clone());
                    let lex = if rng.random_bool(p_male) { &male } else { &female };
                    words.push(lex.words().choose(&mut rng).expect("nonempty").clone());
                    pools.fill(&mut rng, Some(&pools.topic), &mut words, 2);
                }
                1 => {
                    let lex = if rng.random_bool(1.0 - p_male) { &male } else { &female };
                    words.push(lex.words().choose(&mut rng).expect("nonempty").clone());
                    pools.fill(&mut rng, Some(&pools.family), &mut words, 4);
                }
                _ => pools.fill(&mut rng, None, &mut words, 5),
            }
            for _ in 0..3 {
                words.push(LINE_GLUE.choose(&mut rng).expect("nonempty").to_string());
            }
            words.shuffle(&mut rng);
            lines.push(lyric_line(words, &mut rng));
        }
        let mut title = title_word.clone();
        capitalize(&mut title);
        songs.push(RawSong {
            id: Some(format!("s{:05}", i + 1)),
            artist: Some(artist.name.clone()),
            title: Some(title),
            year: Some(year as i64),
            genre: Some(genre.to_string()),
            lyrics: Some(lines.join("\n")),
        });
    }
    for d in 0..spec.duplicates {
        let src = songs[(d * 7919 + 13) % spec.songs].clone();
        let shift = rng.random_range(1..=6);
        songs.push(RawSong {
            id: Some(format!("d{:05}", d + 1)),
            year: src.year.map(|y| (y + shift).min(spec.end_year as i64)),
            title: src.title.as_ref().map(|t| t.to_uppercase()),
            ..src
        });
    }
    let mut order: Vec<usize> = (0..songs.len()).collect();
    order.shuffle(&mut rng);
    Ok(order.into_iter().map(|i| songs[i].clone()).collect())
}

pub fn write_jsonl<W: Write>(mut w: W, songs: &[RawSong]) -> Result<()> {
    for s in songs {
        let line = serde_json::to_string(s).map_err(|e| Error::parse("jsonl", e))?;
        writeln!(w, "{line}").map_err(|e| Error::io("jsonl", e))?;
    }
    Ok(())
}
