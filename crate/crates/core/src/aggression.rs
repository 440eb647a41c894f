//! Gendered objects of aggressive verbs in dependency-parsed text.
//!
//! Input is CoNLL-U. A `# year = N` comment sets the year for that sentence
//! and every later one until the next such comment.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::bias::Group;
use crate::corpus::bucket_start_for;
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
pub use crate::stats::{chi_square_share, ChiSquare};
use crate::trends::{fit_ols, TimeCoding, TrendFit};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub id: usize,
    /// Lowercased surface form.
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub feats: String,
    /// 0 for the root.
    pub head: usize,
    pub deprel: String,
}

impl Token {
    /// Relation without its subtype (`obl:tmod` -> `obl`).
    pub fn base_relation(&self) -> &str {
        self.deprel.split(':').next().unwrap_or("")
    }

    fn has_feature(&self, key: &str, value: &str) -> bool {
        self.feats
            .split('|')
            .filter_map(|kv| kv.split_once('='))
            .any(|(k, v)| k == key && v == value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParsedSentence {
    pub sent_id: Option<String>,
    pub year: Option<i32>,
    pub tokens: Vec<Token>,
}

impl ParsedSentence {
    /// Checks that token ids run 1..=n and that heads form a single tree.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.tokens.len();
        if n == 0 {
            return Err("sentence has no tokens".into());
        }
        for (i, t) in self.tokens.iter().enumerate() {
            if t.id != i + 1 {
                return Err(format!("token id {} out of sequence (expected {})", t.id, i + 1));
            }
            if t.head > n {
                return Err(format!("token {} has head {} beyond sentence length {n}", t.id, t.head));
            }
            if t.head == t.id {
                return Err(format!("token {} is its own head", t.id));
            }
        }
        let roots = self.tokens.iter().filter(|t| t.head == 0).count();
        if roots != 1 {
            return Err(format!("{roots} root tokens; exactly 1 required"));
        }
        for t in &self.tokens {
            let mut cur = t.head;
            let mut steps = 0;
            while cur != 0 {
                steps += 1;
                if steps > n {
                    return Err(format!("cycle through token {}", t.id));
                }
                cur = self.tokens[cur - 1].head;
            }
        }
        Ok(())
    }

    pub fn head_of(&self, t: &Token) -> Option<&Token> {
        (t.head > 0).then(|| &self.tokens[t.head - 1])
    }
}

/// A sentence skipped because it did not parse or validate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Malformed {
    /// First line of the sentence block.
    pub line_no: usize,
    pub sent_id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConlluDocument {
    pub sentences: Vec<ParsedSentence>,
    pub malformed: Vec<Malformed>,
}

#[derive(Default)]
struct Block {
    start: usize,
    sent_id: Option<String>,
    tokens: Vec<Token>,
    error: Option<String>,
    seen_line: bool,
}

fn parse_token(line: &str) -> std::result::Result<Option<Token>, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(format!("expected 10 tab-separated columns, found {}", cols.len()));
    }
    if cols[0].contains('-') || cols[0].contains('.') {
        return Ok(None);
    }
    let id = cols[0].parse().map_err(|_| format!("bad token id `{}`", cols[0]))?;
    let head = cols[6].parse().map_err(|_| format!("bad head `{}` on token {}", cols[6], cols[0]))?;
    Ok(Some(Token {
        id,
        form: cols[1].to_lowercase(),
        lemma: cols[2].to_lowercase(),
        upos: cols[3].to_string(),
        feats: cols[5].to_string(),
        head,
        deprel: cols[7].to_string(),
    }))
}

/// Reads a CoNLL-U stream. Only I/O failures are errors; malformed
/// sentences are collected in `malformed`.
pub fn parse_conllu<R: BufRead>(reader: R) -> Result<ConlluDocument> {
    let mut doc = ConlluDocument::default();
    let mut year: Option<i32> = None;
    let mut block = Block::default();

    let finish = |block: Block, year: Option<i32>, doc: &mut ConlluDocument| {
        if !block.seen_line {
            return;
        }
        let sentence = ParsedSentence {
            sent_id: block.sent_id.clone(),
            year,
            tokens: block.tokens,
        };
        match block.error.map_or_else(|| sentence.validate(), Err) {
            Ok(()) => doc.sentences.push(sentence),
            Err(reason) => doc.malformed.push(Malformed {
                line_no: block.start,
                sent_id: block.sent_id,
                reason,
            }),
        }
    };

    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("conllu input", e))?;
        let line_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish(std::mem::take(&mut block), year, &mut doc);
            continue;
        }
        if !block.seen_line {
            block.seen_line = true;
            block.start = line_no;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                match k.trim() {
                    "year" => match v.trim().parse() {
                        Ok(y) => year = Some(y),
                        Err(_) => block.error = Some(format!("bad year comment `{}`", v.trim())),
                    },
                    "sent_id" => block.sent_id = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if block.error.is_none() {
            match parse_token(line) {
                Ok(Some(t)) => block.tokens.push(t),
                Ok(None) => {}
                Err(e) => block.error = Some(format!("line {line_no}: {e}")),
            }
        }
    }
    finish(block, year, &mut doc);
    Ok(doc)
}

/// Lexicons and relation set for recipient counting.
#[derive(Debug, Clone)]
pub struct RecipientConfig {
    pub aggressive_verbs: Lexicon,
    pub male: Lexicon,
    pub female: Lexicon,
    /// Base dependency relations treated as objects.
    pub relations: Vec<String>,
    pub bucket_width: i32,
    pub origin: i32,
}

impl RecipientConfig {
    pub fn new(aggressive_verbs: Lexicon, male: Lexicon, female: Lexicon) -> Self {
        Self {
            aggressive_verbs,
            male,
            female,
            relations: vec!["obj".into(), "iobj".into(), "obl".into()],
            bucket_width: 5,
            origin: 1965,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketCounts {
    pub bucket_start: i32,
    pub female_object_agg: u64,
    pub male_object_agg: u64,
    pub female_object_any: u64,
    pub male_object_any: u64,
    pub tokens: u64,
}

impl BucketCounts {
    fn add(&mut self, o: &BucketCounts) {
        self.female_object_agg += o.female_object_agg;
        self.male_object_agg += o.male_object_agg;
        self.female_object_any += o.female_object_any;
        self.male_object_any += o.male_object_any;
        self.tokens += o.tokens;
    }

    pub fn agg(&self, g: Group) -> u64 {
        match g {
            Group::Female => self.female_object_agg,
            Group::Male => self.male_object_agg,
        }
    }

    pub fn any(&self, g: Group) -> u64 {
        match g {
            Group::Female => self.female_object_any,
            Group::Male => self.male_object_any,
        }
    }
}

/// One gendered-object event, for audit output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObjectEvent {
    pub sent_id: Option<String>,
    pub year: Option<i32>,
    pub gender: Group,
    pub object: String,
    pub verb: String,
    pub relation: String,
    pub aggressive: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AggressionCounts {
    pub buckets: BTreeMap<i32, BucketCounts>,
    /// Events from sentences with no year.
    pub unbucketed: BucketCounts,
    pub events: Vec<ObjectEvent>,
}

impl AggressionCounts {
    pub fn totals(&self) -> BucketCounts {
        let mut t = self.unbucketed;
        for b in self.buckets.values() {
            t.add(b);
        }
        t.bucket_start = 0;
        t
    }

    pub fn rows(&self) -> Vec<BucketCounts> {
        self.buckets.values().copied().collect()
    }

    /// Adds another shard's counts.
    pub fn merge(&mut self, other: AggressionCounts) {
        for (k, v) in other.buckets {
            self.buckets
                .entry(k)
                .or_insert(BucketCounts { bucket_start: k, ..Default::default() })
                .add(&v);
        }
        self.unbucketed.add(&other.unbucketed);
        self.events.extend(other.events);
    }
}

fn gender_of(t: &Token, cfg: &RecipientConfig) -> Vec<Group> {
    if t.upos == "DET" || t.has_feature("Poss", "Yes") {
        return Vec::new();
    }
    let hit = |lex: &Lexicon| lex.contains(&t.form) || lex.contains(&t.lemma);
    let mut out = Vec::new();
    if hit(&cfg.female) {
        out.push(Group::Female);
    }
    if hit(&cfg.male) {
        out.push(Group::Male);
    }
    out
}

/// Counts gendered tokens in object relations to verbs, per bucket.
pub fn count_recipients<'a>(
    sentences: impl IntoIterator<Item = &'a ParsedSentence>,
    cfg: &RecipientConfig,
) -> Result<AggressionCounts> {
    if cfg.aggressive_verbs.is_empty() || cfg.male.is_empty() || cfg.female.is_empty() {
        return Err(Error::Config("recipient lexicons must be nonempty".into()));
    }
    if cfg.bucket_width < 1 {
        return Err(Error::Config("bucket width must be >= 1".into()));
    }
    let mut out = AggressionCounts::default();
    for s in sentences {
        let slot = match s.year {
            Some(y) => {
                let b = bucket_start_for(y, cfg.origin, cfg.bucket_width);
                out.buckets
                    .entry(b)
                    .or_insert(BucketCounts { bucket_start: b, ..Default::default() })
            }
            None => &mut out.unbucketed,
        };
        slot.tokens += s.tokens.len() as u64;
        for t in &s.tokens {
            if !cfg.relations.iter().any(|r| r == t.base_relation()) {
                continue;
            }
            let Some(head) = s.head_of(t) else { continue };
            if head.upos != "VERB" {
                continue;
            }
            let aggressive = cfg.aggressive_verbs.contains(&head.lemma);
            for g in gender_of(t, cfg) {
                match g {
                    Group::Female => {
                        slot.female_object_any += 1;
                        slot.female_object_agg += u64::from(aggressive);
                    }
                    Group::Male => {
                        slot.male_object_any += 1;
                        slot.male_object_agg += u64::from(aggressive);
                    }
                }
                out.events.push(ObjectEvent {
                    sent_id: s.sent_id.clone(),
                    year: s.year,
                    gender: g,
                    object: t.form.clone(),
                    verb: head.lemma.clone(),
                    relation: t.deprel.clone(),
                    aggressive,
                });
            }
        }
    }
    Ok(out)
}

/// χ² test of female versus male aggressive-object counts over all buckets.
pub fn overall_share_test(counts: &AggressionCounts) -> Result<ChiSquare> {
    let t = counts.totals();
    chi_square_share(t.female_object_agg, t.male_object_agg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesTrend {
    pub label: String,
    pub series: Vec<(i32, f64)>,
    /// Buckets left out, with the reason.
    pub excluded: Vec<(i32, String)>,
    pub fit: TrendFit<f64>,
}

fn trend_of(label: String, series: Vec<(i32, f64)>, excluded: Vec<(i32, String)>, coding: TimeCoding) -> Result<SeriesTrend> {
    if series.len() < 3 {
        return Err(Error::Insufficient(format!(
            "{label}: {} usable buckets; at least 3 needed",
            series.len()
        )));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(b, v)| (coding.code(b as f64), v)).collect();
    let mut fit = fit_ols(&pts, false)?;
    fit.time_coding = coding;
    Ok(SeriesTrend {
        label,
        series,
        excluded,
        fit,
    })
}

/// Uncontrolled: female share of aggressive-object events. Controlled:
/// `female_agg / female_any - male_agg / male_any`. Buckets with a zero
/// denominator are excluded and listed.
pub fn ratio_trend(counts: &[BucketCounts], controlled: bool, coding: TimeCoding) -> Result<SeriesTrend> {
    let mut series = Vec::new();
    let mut excluded = Vec::new();
    for c in counts {
        if controlled {
            if c.female_object_any == 0 || c.male_object_any == 0 {
                excluded.push((c.bucket_start, "no female or no male object events".to_string()));
                continue;
            }
            let f = c.female_object_agg as f64 / c.female_object_any as f64;
            let m = c.male_object_agg as f64 / c.male_object_any as f64;
            series.push((c.bucket_start, f - m));
        } else {
            let total = c.female_object_agg + c.male_object_agg;
            if total == 0 {
                excluded.push((c.bucket_start, "no aggressive object events".to_string()));
                continue;
            }
            series.push((c.bucket_start, c.female_object_agg as f64 / total as f64));
        }
    }
    let label = if controlled { "controlled_ratio_difference" } else { "female_share" };
    trend_of(label.to_string(), series, excluded, coding)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyScale {
    Raw,
    PerMillionTokens,
}

/// Trend of one gender's aggressive-object count, raw or per million tokens.
pub fn frequency_trend(counts: &[BucketCounts], gender: Group, scale: FrequencyScale, coding: TimeCoding) -> Result<SeriesTrend> {
    let mut series = Vec::new();
    let mut excluded = Vec::new();
    for c in counts {
        let v = c.agg(gender) as f64;
        match scale {
            FrequencyScale::Raw => series.push((c.bucket_start, v)),
            FrequencyScale::PerMillionTokens if c.tokens == 0 => {
                excluded.push((c.bucket_start, "no tokens".to_string()))
            }
            FrequencyScale::PerMillionTokens => series.push((c.bucket_start, v * 1e6 / c.tokens as f64)),
        }
    }
    let g = match gender {
        Group::Female => "female",
        Group::Male => "male",
    };
    let s = match scale {
        FrequencyScale::Raw => "raw",
        FrequencyScale::PerMillionTokens => "per_million",
    };
    trend_of(format!("{g}_aggressive_objects_{s}"), series, excluded, coding)
}

pub fn write_counts<W: Write>(w: W, rows: &[BucketCounts]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(|e| Error::parse("aggression counts", e))?;
    }
    wtr.flush().map_err(|e| Error::io("aggression counts", e))
}

pub fn write_malformed<W: Write>(w: W, rows: &[Malformed]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["line_no", "sent_id", "reason"])
        .map_err(|e| Error::parse("malformed report", e))?;
    for m in rows {
        wtr.write_record([m.line_no.to_string(), m.sent_id.clone().unwrap_or_default(), m.reason.clone()])
            .map_err(|e| Error::parse("malformed report", e))?;
    }
    wtr.flush().map_err(|e| Error::io("malformed report", e))
}
