//! Tweet ingestion and preprocessing.
//!
//! Pipeline: [`load_tweets`] → [`detect_emotion`] → [`apply_negation`] →
//! [`aggregate_by_tag`] → [`build_vocabulary`] → [`split_corpus`].

mod aggregate;
mod emotion;
mod extract;
mod ingest;
mod snapshot;
mod vocab;

use serde::{Deserialize, Serialize};

pub use aggregate::{aggregate_by_tag, RawDocument};
pub use emotion::{detect_emotion, EmotionIndicator, EmotionLexicon};
pub use extract::{naive_extract_pairs, ExtractorConfig};
pub use ingest::{load_tweets, parse_tweets, IngestReport};
pub use snapshot::{CorpusSnapshot, CorpusStats, CORPUS_FORMAT_VERSION};
pub use vocab::{
    build_vocabulary, default_stop_words, parse_stop_words, split_corpus, Vocabulary, VocabularyConfig,
};

use crate::Polarity;

/// A target-opinion pair as extracted from text.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetOpinionPair {
    pub target: String,
    pub opinion: String,
    /// Opinion is under a negation that has not been folded into the token yet.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub negated: bool,
}

impl TargetOpinionPair {
    pub fn new(target: impl Into<String>, opinion: impl Into<String>) -> Self {
        TargetOpinionPair {
            target: target.into(),
            opinion: opinion.into(),
            negated: false,
        }
    }
}

/// One ingested tweet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub text: String,
    pub pairs: Vec<TargetOpinionPair>,
    /// Lowercase hashtags and mentions, deduplicated, in first-seen order.
    pub tags: Vec<String>,
    pub emotion: EmotionIndicator,
    /// Emotion signal from a direct-object relation, when the upstream parser gave one.
    pub dobj_emotion: Option<Polarity>,
    pub gold_label: Option<Polarity>,
}

/// A pair encoded against a [`Vocabulary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairIds {
    #[serde(rename = "t")]
    pub target: u32,
    #[serde(rename = "o")]
    pub opinion: u32,
}

/// A tweet inside a preprocessed document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub tweet_id: String,
    pub text: String,
    pub emotion: EmotionIndicator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Polarity>,
    pub pairs: Vec<PairIds>,
}

/// Tweets grouped under one tag (or a lone tweet), encoded against the vocabulary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub tweets: Vec<Tweet>,
}

impl Document {
    /// `N_d`, the number of pairs.
    pub fn num_pairs(&self) -> usize {
        self.tweets.iter().map(|t| t.pairs.len()).sum()
    }

    pub fn pairs(&self) -> impl Iterator<Item = PairIds> + '_ {
        self.tweets.iter().flat_map(|t| t.pairs.iter().copied())
    }
}

/// Folds negation flags into opinions as `not_<opinion>`.
///
/// Opinions that already carry the prefix are left alone, so the result never
/// contains `not_not_`.
pub fn apply_negation(pairs: Vec<TargetOpinionPair>) -> Vec<TargetOpinionPair> {
    pairs
        .into_iter()
        .map(|mut p| {
            if p.negated {
                if !p.opinion.starts_with(NEGATION_PREFIX) {
                    p.opinion = format!("{NEGATION_PREFIX}{}", p.opinion);
                }
                p.negated = false;
            }
            p
        })
        .collect()
}

pub const NEGATION_PREFIX: &str = "not_";
