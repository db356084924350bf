use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TweetRecord;
use crate::error::{Error, Result};
use crate::Polarity;

/// Per-tweet emotion indicator `e`. There is no neutral value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionIndicator {
    Negative,
    Positive,
    #[default]
    Unobserved,
}

impl EmotionIndicator {
    pub fn observed(self) -> Option<Polarity> {
        match self {
            EmotionIndicator::Negative => Some(Polarity::Negative),
            EmotionIndicator::Positive => Some(Polarity::Positive),
            EmotionIndicator::Unobserved => None,
        }
    }

    pub fn is_observed(self) -> bool {
        self != EmotionIndicator::Unobserved
    }
}

impl From<Polarity> for EmotionIndicator {
    fn from(p: Polarity) -> Self {
        match p {
            Polarity::Negative => EmotionIndicator::Negative,
            Polarity::Positive => EmotionIndicator::Positive,
        }
    }
}

impl From<Option<Polarity>> for EmotionIndicator {
    fn from(p: Option<Polarity>) -> Self {
        p.map_or(EmotionIndicator::Unobserved, Into::into)
    }
}

const DEFAULT_LEXICON: &str = include_str!("emotion_markers.txt");

/// Emoticons and strong sentiment words that reveal the writer's emotion.
///
/// Alphabetic markers match whole words case-insensitively; everything else is an
/// emoticon matched exactly against whitespace-separated tokens.
#[derive(Clone, Debug, PartialEq)]
pub struct EmotionLexicon {
    positive_words: BTreeSet<String>,
    negative_words: BTreeSet<String>,
    positive_emoticons: BTreeSet<String>,
    negative_emoticons: BTreeSet<String>,
}

impl Default for EmotionLexicon {
    fn default() -> Self {
        Self::parse(DEFAULT_LEXICON, Path::new("<builtin>")).expect("builtin emotion lexicon")
    }
}

fn is_word_marker(m: &str) -> bool {
    m.chars().all(|c| c.is_alphabetic() || c == '_' || c == '\'')
}

impl EmotionLexicon {
    pub fn from_markers<'a>(
        positive: impl IntoIterator<Item = &'a str>,
        negative: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let mut lex = EmotionLexicon {
            positive_words: BTreeSet::new(),
            negative_words: BTreeSet::new(),
            positive_emoticons: BTreeSet::new(),
            negative_emoticons: BTreeSet::new(),
        };
        for m in positive {
            lex.insert(m, Polarity::Positive);
        }
        for m in negative {
            lex.insert(m, Polarity::Negative);
        }
        lex.check_disjoint()?;
        Ok(lex)
    }

    fn insert(&mut self, marker: &str, side: Polarity) {
        let marker = marker.trim();
        if marker.is_empty() {
            return;
        }
        let (words, emoticons) = match side {
            Polarity::Positive => (&mut self.positive_words, &mut self.positive_emoticons),
            Polarity::Negative => (&mut self.negative_words, &mut self.negative_emoticons),
        };
        if is_word_marker(marker) {
            words.insert(marker.to_lowercase());
        } else {
            emoticons.insert(marker.to_string());
        }
    }

    fn check_disjoint(&self) -> Result<()> {
        let clash = self
            .positive_words
            .intersection(&self.negative_words)
            .chain(self.positive_emoticons.intersection(&self.negative_emoticons))
            .next();
        match clash {
            Some(m) => Err(Error::invalid(format!("marker `{m}` is both positive and negative"))),
            None => Ok(()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// One marker per line under `[positive]` / `[negative]` headers.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        let mut section: Option<Polarity> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[positive]" => section = Some(Polarity::Positive),
                "[negative]" => section = Some(Polarity::Negative),
                _ => match section {
                    Some(Polarity::Positive) => positive.push(line),
                    Some(Polarity::Negative) => negative.push(line),
                    None => {
                        return Err(Error::Parse {
                            path: path.to_path_buf(),
                            line: i + 1,
                            message: "marker before any [positive]/[negative] header".into(),
                        })
                    }
                },
            }
        }
        Self::from_markers(positive, negative)
    }

    /// Counts of positive and negative markers found in `text`.
    pub fn count_markers(&self, text: &str) -> (usize, usize) {
        let mut pos = 0;
        let mut neg = 0;
        for token in text.split_whitespace() {
            if self.positive_emoticons.contains(token) {
                pos += 1;
                continue;
            }
            if self.negative_emoticons.contains(token) {
                neg += 1;
                continue;
            }
            let word = token
                .trim_matches(|c: char| !c.is_alphanumeric() && c != '_' && c != '\'')
                .to_lowercase();
            if self.positive_words.contains(&word) {
                pos += 1;
            } else if self.negative_words.contains(&word) {
                neg += 1;
            }
        }
        (pos, neg)
    }
}

/// `+1` when only positive indicators fire, `−1` when only negative ones do,
/// unobserved otherwise. The record's direct-object signal votes like a marker.
pub fn detect_emotion(record: &TweetRecord, lexicon: &EmotionLexicon) -> EmotionIndicator {
    let (mut pos, mut neg) = lexicon.count_markers(&record.text);
    match record.dobj_emotion {
        Some(Polarity::Positive) => pos += 1,
        Some(Polarity::Negative) => neg += 1,
        None => {}
    }
    match (pos > 0, neg > 0) {
        (true, false) => EmotionIndicator::Positive,
        (false, true) => EmotionIndicator::Negative,
        _ => EmotionIndicator::Unobserved,
    }
}
