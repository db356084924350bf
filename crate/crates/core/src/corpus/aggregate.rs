use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TweetRecord;

/// A document before vocabulary encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: String,
    pub tweets: Vec<TweetRecord>,
}

impl RawDocument {
    pub fn num_pairs(&self) -> usize {
        self.tweets.iter().map(|t| t.pairs.len()).sum()
    }
}

/// Groups tweets sharing a tag that occurs in at least `min_tag_count` tweets.
///
/// A tweet joins every qualifying tag's document. Tweets without a qualifying
/// tag become singleton documents named by their id. Tag documents come first,
/// in order of the tag's first appearance, then singletons in input order.
pub fn aggregate_by_tag(records: &[TweetRecord], min_tag_count: usize) -> Vec<RawDocument> {
    let min_tag_count = min_tag_count.max(1);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        for tag in &r.tags {
            *counts.entry(tag).or_default() += 1;
        }
    }
    let qualifies = |tag: &str| counts.get(tag).copied().unwrap_or(0) >= min_tag_count;

    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<TweetRecord>> = BTreeMap::new();
    let mut singles = Vec::new();
    for r in records {
        let mut joined = false;
        for tag in r.tags.iter().filter(|t| qualifies(t)) {
            let group = groups.entry(tag).or_insert_with(|| {
                order.push(tag);
                Vec::new()
            });
            group.push(r.clone());
            joined = true;
        }
        if !joined {
            singles.push(RawDocument {
                doc_id: r.tweet_id.clone(),
                tweets: vec![r.clone()],
            });
        }
    }
    let mut docs: Vec<RawDocument> = order
        .into_iter()
        .map(|tag| RawDocument {
            doc_id: tag.to_string(),
            tweets: groups.remove(tag).unwrap_or_default(),
        })
        .collect();
    docs.extend(singles);
    log::info!(
        "aggregated {} tweets into {} documents ({} tag groups)",
        records.len(),
        docs.len(),
        docs.len() - records.iter().filter(|r| !r.tags.iter().any(|t| qualifies(t))).count()
    );
    docs
}
