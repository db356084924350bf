use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Document, TweetRecord, Vocabulary};
use crate::error::{Error, Result};

pub const CORPUS_FORMAT_VERSION: u32 = 1;

/// Corpus-level statistics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Records accepted at ingest.
    pub tweets: usize,
    /// Records rejected at ingest.
    pub skipped_records: usize,
    /// Ingested tweets with at least one pair.
    pub tweets_with_pairs: usize,
    /// Pairs over all ingested tweets.
    pub pairs: usize,
    pub pairs_per_tweet: f64,
    /// Share of tweets with pairs that carry an observed emotion indicator, in percent.
    pub emotion_percent: f64,
    pub target_vocabulary: usize,
    pub opinion_vocabulary: usize,
    pub train_documents: usize,
    pub test_documents: usize,
    /// Pairs kept in the encoded documents (multi-tag duplicates counted).
    pub encoded_pairs: usize,
}

impl CorpusStats {
    pub fn compute(
        records: &[TweetRecord],
        skipped_records: usize,
        vocab: &Vocabulary,
        train: &[Document],
        test: &[Document],
    ) -> Self {
        let with_pairs: Vec<&TweetRecord> = records.iter().filter(|r| !r.pairs.is_empty()).collect();
        let pairs: usize = records.iter().map(|r| r.pairs.len()).sum();
        let with_e = with_pairs.iter().filter(|r| r.emotion.is_observed()).count();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        CorpusStats {
            tweets: records.len(),
            skipped_records,
            tweets_with_pairs: with_pairs.len(),
            pairs,
            pairs_per_tweet: ratio(pairs, records.len()),
            emotion_percent: 100.0 * ratio(with_e, with_pairs.len()),
            target_vocabulary: vocab.num_targets(),
            opinion_vocabulary: vocab.num_opinions(),
            train_documents: train.len(),
            test_documents: test.len(),
            encoded_pairs: train.iter().chain(test).map(Document::num_pairs).sum(),
        }
    }
}

/// A preprocessed corpus, stored as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSnapshot {
    pub format_version: u32,
    pub vocabulary_fingerprint: String,
    pub vocabulary: Vocabulary,
    pub stats: CorpusStats,
    pub train: Vec<Document>,
    pub test: Vec<Document>,
}

impl CorpusSnapshot {
    pub fn new(vocabulary: Vocabulary, train: Vec<Document>, test: Vec<Document>, stats: CorpusStats) -> Self {
        CorpusSnapshot {
            format_version: CORPUS_FORMAT_VERSION,
            vocabulary_fingerprint: format!("{:016x}", vocabulary.fingerprint()),
            vocabulary,
            stats,
            train,
            test,
        }
    }

    /// Checks the version, fingerprint, and that every pair indexes the vocabulary.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != CORPUS_FORMAT_VERSION {
            return Err(Error::Snapshot(format!(
                "corpus format version {} is not supported (expected {CORPUS_FORMAT_VERSION})",
                self.format_version
            )));
        }
        let fp = format!("{:016x}", self.vocabulary.fingerprint());
        if fp != self.vocabulary_fingerprint {
            return Err(Error::Snapshot(format!(
                "vocabulary fingerprint {fp} does not match recorded {}",
                self.vocabulary_fingerprint
            )));
        }
        let (nt, no) = (self.vocabulary.num_targets() as u32, self.vocabulary.num_opinions() as u32);
        for doc in self.train.iter().chain(&self.test) {
            if doc.num_pairs() == 0 {
                return Err(Error::Snapshot(format!("document {} has no pairs", doc.doc_id)));
            }
            if let Some(p) = doc.pairs().find(|p| p.target >= nt || p.opinion >= no) {
                return Err(Error::Snapshot(format!(
                    "document {} references pair ({}, {}) outside the vocabulary",
                    doc.doc_id, p.target, p.opinion
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("corpus serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snap: CorpusSnapshot =
            serde_json::from_str(text).map_err(|e| Error::Snapshot(format!("corpus snapshot: {e}")))?;
        snap.validate()?;
        Ok(snap)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
