use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Document, PairIds, RawDocument, Tweet};
use crate::error::{Error, Result};
use crate::util::{stream_rng, Fnv64};

const DEFAULT_STOP_WORDS: &str = include_str!("stop_words.txt");

/// The shipped opinion stop-word list.
pub fn default_stop_words() -> BTreeSet<String> {
    parse_stop_words(DEFAULT_STOP_WORDS)
}

/// One word per line; `#` starts a comment.
pub fn parse_stop_words(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct VocabularyConfig {
    /// Tokens in at least this fraction of documents are removed.
    pub common_threshold: f64,
    /// Tokens seen fewer times than this are removed.
    pub min_count: u64,
    /// Removed from opinions before frequency filtering.
    pub stop_words: BTreeSet<String>,
}

impl Default for VocabularyConfig {
    fn default() -> Self {
        VocabularyConfig {
            common_threshold: 0.90,
            min_count: 50,
            stop_words: default_stop_words(),
        }
    }
}

impl VocabularyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.common_threshold > 0.0 && self.common_threshold <= 1.0) {
            return Err(Error::invalid(format!(
                "common_threshold must be in (0, 1], got {}",
                self.common_threshold
            )));
        }
        if self.min_count < 1 {
            return Err(Error::invalid("min_count must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
struct Side {
    tokens: Vec<String>,
    document_frequency: Vec<u64>,
    corpus_frequency: Vec<u64>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Side {
    fn from_counts(counts: BTreeMap<String, (u64, u64)>) -> Self {
        let mut side = Side::default();
        for (tok, (df, cf)) in counts {
            side.tokens.push(tok);
            side.document_frequency.push(df);
            side.corpus_frequency.push(cf);
        }
        side.reindex();
        side
    }

    fn reindex(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
    }
}

/// Target and opinion vocabularies, each sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    targets: Side,
    opinions: Side,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    targets: Side,
    opinions: Side,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(mut r: VocabularyRepr) -> Self {
        r.targets.reindex();
        r.opinions.reindex();
        Vocabulary {
            targets: r.targets,
            opinions: r.opinions,
        }
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            targets: v.targets,
            opinions: v.opinions,
        }
    }
}

impl Vocabulary {
    /// Builds a vocabulary with unit frequencies. Tokens are sorted and deduplicated.
    pub fn from_tokens<S: AsRef<str>>(targets: &[S], opinions: &[S]) -> Self {
        let side = |toks: &[S]| {
            Side::from_counts(toks.iter().map(|t| (t.as_ref().to_string(), (1, 1))).collect())
        };
        Vocabulary {
            targets: side(targets),
            opinions: side(opinions),
        }
    }

    pub fn target_tokens(&self) -> &[String] {
        &self.targets.tokens
    }

    pub fn opinion_tokens(&self) -> &[String] {
        &self.opinions.tokens
    }

    pub fn num_targets(&self) -> usize {
        self.targets.tokens.len()
    }

    pub fn num_opinions(&self) -> usize {
        self.opinions.tokens.len()
    }

    pub fn target(&self, id: u32) -> &str {
        &self.targets.tokens[id as usize]
    }

    pub fn opinion(&self, id: u32) -> &str {
        &self.opinions.tokens[id as usize]
    }

    pub fn target_id(&self, token: &str) -> Option<u32> {
        self.targets.index.get(token).copied()
    }

    pub fn opinion_id(&self, token: &str) -> Option<u32> {
        self.opinions.index.get(token).copied()
    }

    /// `(document frequency, corpus frequency)` of a target.
    pub fn target_frequency(&self, id: u32) -> (u64, u64) {
        let i = id as usize;
        (self.targets.document_frequency[i], self.targets.corpus_frequency[i])
    }

    pub fn opinion_frequency(&self, id: u32) -> (u64, u64) {
        let i = id as usize;
        (self.opinions.document_frequency[i], self.opinions.corpus_frequency[i])
    }

    /// Stable fingerprint of both token lists.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::default();
        for t in &self.targets.tokens {
            h.write_str(t);
        }
        h.write(&[0xfe]);
        for o in &self.opinions.tokens {
            h.write_str(o);
        }
        h.finish()
    }

    pub fn encode(&self, target: &str, opinion: &str) -> Option<PairIds> {
        Some(PairIds {
            target: self.target_id(target)?,
            opinion: self.opinion_id(opinion)?,
        })
    }
}

type Counts = BTreeMap<String, (u64, u64)>;

fn count(docs: &[Vec<Vec<(String, String)>>]) -> (Counts, Counts) {
    let mut targets: Counts = BTreeMap::new();
    let mut opinions: Counts = BTreeMap::new();
    for doc in docs {
        let mut seen_t = BTreeSet::new();
        let mut seen_o = BTreeSet::new();
        for (t, o) in doc.iter().flatten() {
            targets.entry(t.clone()).or_default().1 += 1;
            opinions.entry(o.clone()).or_default().1 += 1;
            seen_t.insert(t);
            seen_o.insert(o);
        }
        for t in seen_t {
            targets.get_mut(t).unwrap().0 += 1;
        }
        for o in seen_o {
            opinions.get_mut(o).unwrap().0 += 1;
        }
    }
    (targets, opinions)
}

fn violators(counts: &Counts, d: usize, config: &VocabularyConfig) -> BTreeSet<String> {
    let limit = config.common_threshold * d as f64;
    counts
        .iter()
        .filter(|(_, &(df, cf))| df as f64 >= limit || cf < config.min_count)
        .map(|(t, _)| t.clone())
        .collect()
}

/// Lowercases, removes stop-word opinions, and prunes common and rare tokens.
///
/// Pruning repeats until neither constraint is violated, since dropping pairs
/// and documents shifts both frequencies. Tweets left without pairs are removed
/// from their documents and empty documents are dropped.
pub fn build_vocabulary(
    documents: &[RawDocument],
    config: &VocabularyConfig,
) -> Result<(Vocabulary, Vec<Document>)> {
    config.validate()?;
    if documents.is_empty() {
        return Err(Error::EmptyCorpus("no documents to build a vocabulary from".into()));
    }
    let initial_pairs: usize = documents.iter().map(RawDocument::num_pairs).sum();
    let mut ids: Vec<usize> = (0..documents.len()).collect();
    let mut work: Vec<Vec<Vec<(String, String)>>> = documents
        .iter()
        .map(|d| {
            d.tweets
                .iter()
                .map(|t| {
                    t.pairs
                        .iter()
                        .map(|p| (p.target.to_lowercase(), p.opinion.to_lowercase()))
                        .filter(|(_, o)| !config.stop_words.contains(o))
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut rounds = 0;
    let (targets, opinions) = loop {
        let keep: Vec<bool> = work.iter().map(|d| d.iter().any(|t| !t.is_empty())).collect();
        let mut k = keep.iter();
        ids.retain(|_| *k.next().unwrap());
        let mut k = keep.iter();
        work.retain(|_| *k.next().unwrap());

        let (targets, opinions) = count(&work);
        let bad_t = violators(&targets, work.len(), config);
        let bad_o = violators(&opinions, work.len(), config);
        if bad_t.is_empty() && bad_o.is_empty() {
            break (targets, opinions);
        }
        rounds += 1;
        for doc in &mut work {
            for tweet in doc.iter_mut() {
                tweet.retain(|(t, o)| !bad_t.contains(t) && !bad_o.contains(o));
            }
        }
    };

    if work.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "all {initial_pairs} pairs were filtered out (common_threshold {}, min_count {})",
            config.common_threshold, config.min_count
        )));
    }

    let vocab = Vocabulary {
        targets: Side::from_counts(targets),
        opinions: Side::from_counts(opinions),
    };
    let mut out = Vec::with_capacity(work.len());
    let mut kept_pairs = 0;
    for (doc_idx, pairs) in ids.iter().zip(work) {
        let src = &documents[*doc_idx];
        let tweets: Vec<Tweet> = src
            .tweets
            .iter()
            .zip(pairs)
            .filter(|(_, p)| !p.is_empty())
            .map(|(t, p)| Tweet {
                tweet_id: t.tweet_id.clone(),
                text: t.text.clone(),
                emotion: t.emotion,
                label: t.gold_label,
                pairs: p
                    .iter()
                    .map(|(a, b)| vocab.encode(a, b).expect("filtered token in vocabulary"))
                    .collect(),
            })
            .collect();
        kept_pairs += tweets.iter().map(|t| t.pairs.len()).sum::<usize>();
        out.push(Document {
            doc_id: src.doc_id.clone(),
            tweets,
        });
    }
    log::info!(
        "vocabulary: {} targets, {} opinions after {rounds} pruning rounds; dropped {} of {initial_pairs} pairs and {} of {} documents",
        vocab.num_targets(),
        vocab.num_opinions(),
        initial_pairs - kept_pairs,
        documents.len() - out.len(),
        documents.len()
    );
    Ok((vocab, out))
}

/// Random document-level partition with `round(train_fraction × D)` training documents.
///
/// Both halves keep the input order. The training size is clamped to
/// `[1, D − 1]` so neither side is empty.
pub fn split_corpus(
    documents: Vec<Document>,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<Document>, Vec<Document>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let d = documents.len();
    if d < 2 {
        return Err(Error::invalid(format!("cannot split {d} document(s)")));
    }
    let n_train = ((train_fraction * d as f64).round() as usize).clamp(1, d - 1);
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(&mut stream_rng(seed, 0));
    let mut in_train = vec![false; d];
    for &i in &order[..n_train] {
        in_train[i] = true;
    }
    let (mut train, mut test) = (Vec::with_capacity(n_train), Vec::with_capacity(d - n_train));
    for (doc, t) in documents.into_iter().zip(in_train) {
        if t {
            train.push(doc);
        } else {
            test.push(doc);
        }
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::super::{EmotionIndicator, TargetOpinionPair, TweetRecord};
    use super::*;

    fn doc(id: &str, pairs: &[(&str, &str)]) -> RawDocument {
        RawDocument {
            doc_id: id.into(),
            tweets: vec![TweetRecord {
                tweet_id: id.into(),
                text: String::new(),
                pairs: pairs.iter().map(|(t, o)| TargetOpinionPair::new(*t, *o)).collect(),
                tags: vec![],
                emotion: EmotionIndicator::Unobserved,
                dobj_emotion: None,
                gold_label: None,
            }],
        }
    }

    fn loose() -> VocabularyConfig {
        VocabularyConfig {
            common_threshold: 1.0,
            min_count: 1,
            stop_words: BTreeSet::new(),
        }
    }

    #[test]
    fn all_tokens_kept_without_filters() {
        let cfg = loose();
        let docs = [doc("a", &[("camera", "great")]), doc("b", &[("screen", "bad")])];
        let (v, out) = build_vocabulary(&docs, &cfg).unwrap();
        assert_eq!(v.target_tokens(), &["camera", "screen"]);
        assert_eq!(v.opinion_tokens(), &["bad", "great"]);
        assert_eq!(out.iter().map(Document::num_pairs).sum::<usize>(), 2);
    }

    #[test]
    fn common_token_removed() {
        let mut docs: Vec<RawDocument> = (0..20)
            .map(|i| {
                let t = format!("t{i}");
                let o = format!("o{i}");
                doc(&t.clone(), &[(t.as_str(), o.as_str()), ("phone", o.as_str())])
            })
            .collect();
        docs[0].tweets[0].pairs.remove(1);
        let cfg = VocabularyConfig { common_threshold: 0.9, ..loose() };
        let (v, out) = build_vocabulary(&docs, &cfg).unwrap();
        assert!(v.target_id("phone").is_none());
        assert_eq!(out.len(), 20);
    }

    #[test]
    fn rare_token_removed_with_pairs() {
        let names = [("a", "x"), ("b", "y")];
        let mut docs: Vec<RawDocument> = (0..10).map(|i| doc(&i.to_string(), &[names[i % 2]])).collect();
        for d in docs.iter_mut().take(3) {
            d.tweets[0].pairs.push(TargetOpinionPair::new("rare", "x"));
        }
        let cfg = VocabularyConfig { min_count: 5, ..loose() };
        let (v, out) = build_vocabulary(&docs, &cfg).unwrap();
        assert!(v.target_id("rare").is_none());
        assert_eq!(out.iter().map(Document::num_pairs).sum::<usize>(), 10);
    }

    #[test]
    fn stop_words_apply_to_opinions_only() {
        let docs = [doc("a", &[("the", "the"), ("my", "great")]), doc("b", &[("x", "bad")])];
        let cfg = VocabularyConfig {
            stop_words: ["the".to_string(), "my".to_string()].into(),
            ..loose()
        };
        let (v, _) = build_vocabulary(&docs, &cfg).unwrap();
        assert_eq!(v.target_tokens(), &["my", "x"]);
        assert!(v.opinion_id("the").is_none());
    }

    #[test]
    fn filtering_reaches_a_fixed_point() {
        // dropping "z" pairs empties doc c, which changes D and makes "a" common
        let docs = [
            doc("a", &[("a", "p"), ("b", "q")]),
            doc("b", &[("a", "q"), ("c", "p")]),
            doc("c", &[("z", "p")]),
        ];
        let cfg = VocabularyConfig { common_threshold: 0.9, min_count: 2, stop_words: BTreeSet::new() };
        let res = build_vocabulary(&docs, &cfg);
        if let Ok((v, out)) = res {
            let d = out.len() as f64;
            for id in 0..v.num_targets() as u32 {
                let (df, cf) = v.target_frequency(id);
                assert!((df as f64) < 0.9 * d && cf >= 2);
            }
            for id in 0..v.num_opinions() as u32 {
                let (df, cf) = v.opinion_frequency(id);
                assert!((df as f64) < 0.9 * d && cf >= 2);
            }
        }
    }

    #[test]
    fn everything_filtered_is_an_error() {
        let docs = [doc("a", &[("a", "b")])];
        assert!(matches!(build_vocabulary(&docs, &VocabularyConfig::default()), Err(Error::EmptyCorpus(_))));
    }

    #[test]
    fn vocabulary_serde_rebuilds_index() {
        let v = Vocabulary::from_tokens(&["b", "a"], &["x"]);
        let back: Vocabulary = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back.target_id("b"), Some(1));
        assert_eq!(back, v);
        assert_eq!(back.fingerprint(), v.fingerprint());
    }

    fn encoded(n: usize) -> Vec<Document> {
        (0..n)
            .map(|i| Document { doc_id: i.to_string(), tweets: vec![] })
            .collect()
    }

    #[test]
    fn split_sizes_and_partition() {
        let (tr, te) = split_corpus(encoded(10), 0.9, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (9, 1));
        let (a, _) = split_corpus(encoded(100), 0.9, 7).unwrap();
        let (b, _) = split_corpus(encoded(100), 0.9, 7).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<String> = a.iter().chain(&split_corpus(encoded(100), 0.9, 7).unwrap().1).map(|d| d.doc_id.clone()).collect();
        all.sort_by_key(|s| s.parse::<usize>().unwrap());
        assert_eq!(all, (0..100).map(|i| i.to_string()).collect::<Vec<_>>());
        assert!(split_corpus(encoded(1), 0.9, 1).is_err());
        assert!(split_corpus(encoded(5), 1.0, 1).is_err());
    }

    #[test]
    fn seeds_give_different_splits() {
        let splits: Vec<Vec<String>> = (0..5)
            .map(|s| split_corpus(encoded(100), 0.9, s).unwrap().1.into_iter().map(|d| d.doc_id).collect())
            .collect();
        for i in 0..5 {
            for j in i + 1..5 {
                assert_ne!(splits[i], splits[j]);
            }
        }
    }
}
