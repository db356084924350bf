use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::{EmotionIndicator, TargetOpinionPair, TweetRecord};
use crate::error::{Error, Result};
use crate::Polarity;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    t: String,
    o: String,
    #[serde(default)]
    neg: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTweet {
    id: String,
    text: String,
    pairs: Vec<RawPair>,
    #[serde(default)]
    tags: Option<Vec<String>>,
    #[serde(default)]
    dobj_emotion: Option<Polarity>,
    #[serde(default)]
    label: Option<Polarity>,
}

/// Records read from a JSONL file plus the lines that were skipped.
#[derive(Clone, Debug, Default)]
pub struct IngestReport {
    pub records: Vec<TweetRecord>,
    /// `(line number, reason)` for every rejected line.
    pub skipped: Vec<(usize, String)>,
}

/// Hashtags and mentions found in free text.
pub(crate) fn tags_from_text(text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    for token in text.split_whitespace() {
        if !(token.starts_with('#') || token.starts_with('@')) {
            continue;
        }
        let body: String = token[1..]
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        if body.is_empty() {
            continue;
        }
        push_tag(&mut tags, format!("{}{}", &token[..1], body.to_lowercase()));
    }
    tags
}

fn push_tag(tags: &mut Vec<String>, tag: String) {
    if !tags.contains(&tag) {
        tags.push(tag);
    }
}

fn convert(raw: RawTweet) -> std::result::Result<TweetRecord, String> {
    if raw.id.is_empty() {
        return Err("empty id".into());
    }
    let mut pairs = Vec::with_capacity(raw.pairs.len());
    for (i, p) in raw.pairs.into_iter().enumerate() {
        let (t, o) = (p.t.trim(), p.o.trim());
        if t.is_empty() || o.is_empty() {
            return Err(format!("pair {i} has an empty target or opinion"));
        }
        pairs.push(TargetOpinionPair {
            target: t.to_string(),
            opinion: o.to_string(),
            negated: p.neg,
        });
    }
    let tags = match raw.tags {
        Some(given) => {
            let mut tags = Vec::new();
            for tag in given {
                let tag = tag.trim().to_lowercase();
                if !tag.is_empty() {
                    push_tag(&mut tags, tag);
                }
            }
            tags
        }
        None => tags_from_text(&raw.text),
    };
    Ok(TweetRecord {
        tweet_id: raw.id,
        text: raw.text,
        pairs,
        tags,
        emotion: EmotionIndicator::Unobserved,
        dobj_emotion: raw.dobj_emotion,
        gold_label: raw.label,
    })
}

/// Parses JSONL text. Bad lines are logged and skipped; blank lines are ignored.
pub fn parse_tweets(reader: impl BufRead, path: &Path) -> Result<IngestReport> {
    let mut report = IngestReport::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<RawTweet>(&line)
            .map_err(|e| e.to_string())
            .and_then(convert);
        match parsed {
            Ok(record) => report.records.push(record),
            Err(msg) => {
                log::warn!("{}:{}: skipping record: {msg}", path.display(), i + 1);
                report.skipped.push((i + 1, msg));
            }
        }
    }
    Ok(report)
}

/// Reads tweets from a JSONL file in file order.
pub fn load_tweets(path: &Path) -> Result<IngestReport> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_tweets(BufReader::new(file), path)
}
