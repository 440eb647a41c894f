//! Word lists: group lexicons (male/female), trait lexicons and the
//! aggressive-verb list.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

/// A named, ordered, duplicate-free list of lowercase words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    name: String,
    words: Vec<String>,
}

impl Lexicon {
    pub fn new(name: impl Into<String>, words: Vec<String>) -> Result<Self> {
        let name = name.into();
        if words.is_empty() {
            return Err(Error::Config(format!("lexicon `{name}` is empty")));
        }
        let mut seen = HashSet::new();
        for w in &words {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::Config(format!("lexicon `{name}`: bad entry {w:?}")));
            }
            if w.chars().any(char::is_uppercase) {
                return Err(Error::Config(format!("lexicon `{name}`: `{w}` is not lowercase")));
            }
            if !seen.insert(w.as_str()) {
                return Err(Error::Config(format!("lexicon `{name}`: duplicate `{w}`")));
            }
        }
        Ok(Self { name, words })
    }

    pub fn from_words<S: AsRef<str>>(name: impl Into<String>, words: &[S]) -> Result<Self> {
        Self::new(name, words.iter().map(|w| w.as_ref().to_string()).collect())
    }

    /// Parses one word per line; `#` starts a comment, words are lowercased.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        Self::new(name, parse_word_lines(text))
    }

    /// Loads a lexicon file; the name is the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "lexicon".into());
        Self::parse(name, &text).map_err(|e| match e {
            Error::Config(m) => Error::parse(path.display().to_string(), m),
            other => other,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.iter().any(|w| w == word)
    }

    pub fn to_set(&self) -> HashSet<&str> {
        self.words.iter().map(String::as_str).collect()
    }

    /// Copy under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            words: self.words.clone(),
        }
    }
}

pub(crate) fn parse_word_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Lexicons shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Female,
    Male,
    Competence,
    Warmth,
    Intelligence,
    Feminine,
    Masculine,
    AggressiveVerbs,
}

impl Builtin {
    pub const TRAITS: [Builtin; 5] = [
        Builtin::Competence,
        Builtin::Intelligence,
        Builtin::Warmth,
        Builtin::Masculine,
        Builtin::Feminine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Female => "female",
            Builtin::Male => "male",
            Builtin::Competence => "competence",
            Builtin::Warmth => "warmth",
            Builtin::Intelligence => "intelligence",
            Builtin::Feminine => "feminine",
            Builtin::Masculine => "masculine",
            Builtin::AggressiveVerbs => "aggressive_verbs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Builtin::Female,
            Builtin::Male,
            Builtin::Competence,
            Builtin::Warmth,
            Builtin::Intelligence,
            Builtin::Feminine,
            Builtin::Masculine,
            Builtin::AggressiveVerbs,
        ]
        .into_iter()
        .find(|b| b.name() == name)
    }

    fn text(self) -> &'static str {
        match self {
            Builtin::Female => include_str!("../data/lexicons/female.txt"),
            Builtin::Male => include_str!("../data/lexicons/male.txt"),
            Builtin::Competence => include_str!("../data/lexicons/competence.txt"),
            Builtin::Warmth => include_str!("../data/lexicons/warmth.txt"),
            Builtin::Intelligence => include_str!("../data/lexicons/intelligence.txt"),
            Builtin::Feminine => include_str!("../data/lexicons/feminine.txt"),
            Builtin::Masculine => include_str!("../data/lexicons/masculine.txt"),
            Builtin::AggressiveVerbs => include_str!("../data/lexicons/aggressive_verbs.txt"),
        }
    }

    pub fn lexicon(self) -> Lexicon {
        Lexicon::parse(self.name(), self.text()).expect("bundled lexicons are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicons_load() {
        assert_eq!(Builtin::Female.lexicon().len(), 20);
        assert_eq!(Builtin::Male.lexicon().len(), 20);
        assert_eq!(Builtin::Competence.lexicon().len(), 13);
        assert_eq!(Builtin::Intelligence.lexicon().len(), 28);
        assert!(Builtin::Feminine.lexicon().contains("whiny"));
        assert!(Builtin::AggressiveVerbs.lexicon().contains("hit"));
        assert!(Builtin::Male.lexicon().contains("him"));
    }

    #[test]
    fn parse_handles_comments_and_case() {
        let l = Lexicon::parse("t", "# header\nSmart\n  brave # inline\n\n").unwrap();
        assert_eq!(l.words(), ["smart", "brave"]);
    }

    #[test]
    fn invariants_are_enforced() {
        assert!(Lexicon::from_words::<&str>("e", &[]).is_err());
        assert!(Lexicon::from_words("d", &["a", "a"]).is_err());
        assert!(Lexicon::from_words("u", &["A"]).is_err());
    }
}
