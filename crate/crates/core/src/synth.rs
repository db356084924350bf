//! Synthetic corpora with known generating structure.
//!
//! Opinion tokens are laid out in three blocks, `neg*`, `neu*` and `pos*`, so
//! sorted vocabulary ids run negative, neutral, positive.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, EmotionIndicator, PairIds, Tweet, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::{DocLogProb, FoldInConfig, HeldOutModel, TestDoc};
use crate::lexicon::{AffinityLexicon, SentimentLexicon};
use crate::pyp::{PypParams, RestaurantNode};
use crate::util::{log_add_exp, sample_weighted, stream_rng};
use crate::{Polarity, Sentiment};

fn dirichlet<R: Rng + ?Sized>(alpha: f64, k: usize, rng: &mut R) -> Vec<f64> {
    let g = Gamma::new(alpha, 1.0).expect("positive shape");
    let mut v: Vec<f64> = (0..k).map(|_| g.sample(rng).max(1e-300)).collect();
    let z: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= z);
    v
}

/// Opinion token names and the id range of each sentiment block.
fn opinion_layout(num_opinions: usize) -> (Vec<String>, [std::ops::Range<usize>; 3]) {
    let neu = (num_opinions / 5).max(1);
    let neg = (num_opinions - neu) / 2;
    let pos = num_opinions - neu - neg;
    let mut tokens: Vec<String> = (0..neg).map(|i| format!("neg{i:03}")).collect();
    tokens.extend((0..neu).map(|i| format!("neu{i:03}")));
    tokens.extend((0..pos).map(|i| format!("pos{i:03}")));
    (tokens, [0..neg, neg..neg + neu, neg + neu..num_opinions])
}

fn target_tokens(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i:03}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicCorpusConfig {
    pub num_docs: usize,
    pub num_aspects: usize,
    pub num_targets: usize,
    pub num_opinions: usize,
    pub tweets_per_doc: (usize, usize),
    pub pairs_per_tweet: (usize, usize),
    /// Symmetric Dirichlet parameter of the document aspect mixtures.
    pub doc_concentration: f64,
    /// Opinion words carrying most of each `(target, sentiment)` distribution.
    pub opinions_per_target: usize,
    /// Mass of those words; the rest is spread over the sentiment block.
    pub opinion_focus: f64,
    /// Probability that a tweet's emotion is observed.
    pub emotion_observed: f64,
}

impl Default for TopicCorpusConfig {
    fn default() -> Self {
        TopicCorpusConfig {
            num_docs: 2000,
            num_aspects: 5,
            num_targets: 50,
            num_opinions: 100,
            tweets_per_doc: (3, 8),
            pairs_per_tweet: (1, 3),
            doc_concentration: 0.3,
            opinions_per_target: 3,
            opinion_focus: 0.85,
            emotion_observed: 0.2,
        }
    }
}

/// The generating distributions of a [`TopicCorpus`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub num_targets: usize,
    pub num_opinions: usize,
    /// Aspect mixture of every document, by id.
    pub theta: BTreeMap<String, Vec<f64>>,
    /// Target distribution per aspect.
    pub psi: Vec<Vec<f64>>,
    /// Sentiment distribution per emotion (negative, positive).
    pub gamma: [[f64; 3]; 2],
    /// Opinion distribution per target and sentiment.
    pub phi: Vec<[Vec<f64>; 3]>,
}

#[derive(Clone, Debug)]
pub struct TopicCorpus {
    pub vocab: Vocabulary,
    pub docs: Vec<Document>,
    pub truth: Truth,
    /// True aspect and sentiment of every pair, in document order.
    pub assignments: Vec<(u32, Sentiment)>,
}

/// Corpus drawn from a TOTM-like process with target-specific opinion distributions.
///
/// Aspect `a` owns a contiguous block of targets (90% of its mass); each target
/// has, per sentiment, a few favourite opinion words inside that sentiment's block.
pub fn topic_corpus(config: &TopicCorpusConfig, seed: u64) -> Result<TopicCorpus> {
    let c = config;
    if c.num_docs == 0 || c.num_aspects == 0 || c.num_targets < c.num_aspects || c.num_opinions < 5 {
        return Err(Error::invalid("synthetic corpus sizes too small"));
    }
    if c.tweets_per_doc.0 == 0 || c.tweets_per_doc.0 > c.tweets_per_doc.1 || c.pairs_per_tweet.0 == 0 || c.pairs_per_tweet.0 > c.pairs_per_tweet.1 {
        return Err(Error::invalid("tweet and pair ranges must be non-empty and start at 1 or more"));
    }
    let mut rng = stream_rng(seed, 0x5eed);
    let (opinions, blocks) = opinion_layout(c.num_opinions);
    let vocab = Vocabulary::from_tokens(&target_tokens(c.num_targets), &opinions);

    let per = c.num_targets / c.num_aspects;
    let psi: Vec<Vec<f64>> = (0..c.num_aspects)
        .map(|a| {
            let owned = a * per..if a + 1 == c.num_aspects { c.num_targets } else { (a + 1) * per };
            let w = dirichlet(1.0, owned.len(), &mut rng);
            let mut p = vec![0.1 / c.num_targets as f64; c.num_targets];
            for (t, x) in owned.zip(w) {
                p[t] += 0.9 * x;
            }
            p
        })
        .collect();
    let phi: Vec<[Vec<f64>; 3]> = (0..c.num_targets)
        .map(|_| {
            std::array::from_fn(|r| {
                let block = blocks[r].clone();
                let k = c.opinions_per_target.min(block.len());
                let favourites = sample(&mut rng, block.len(), k);
                let w = dirichlet(1.0, k, &mut rng);
                let mut p = vec![0.0; c.num_opinions];
                for o in block.clone() {
                    p[o] = (1.0 - c.opinion_focus) / block.len() as f64;
                }
                for (i, x) in favourites.iter().zip(w) {
                    p[block.start + i] += c.opinion_focus * x;
                }
                p
            })
        })
        .collect();
    let gamma = [[0.8, 0.15, 0.05], [0.05, 0.15, 0.8]];

    let mut theta = BTreeMap::new();
    let mut docs = Vec::with_capacity(c.num_docs);
    let mut assignments = Vec::new();
    for d in 0..c.num_docs {
        let doc_id = format!("doc{d:05}");
        let th = dirichlet(c.doc_concentration, c.num_aspects, &mut rng);
        let n_tweets = rng.random_range(c.tweets_per_doc.0..=c.tweets_per_doc.1);
        let tweets = (0..n_tweets)
            .map(|k| {
                let e = if rng.random::<bool>() { Polarity::Positive } else { Polarity::Negative };
                let n_pairs = rng.random_range(c.pairs_per_tweet.0..=c.pairs_per_tweet.1);
                let pairs = (0..n_pairs)
                    .map(|_| {
                        let a = sample_weighted(&th, &mut rng);
                        let t = sample_weighted(&psi[a], &mut rng);
                        let r = sample_weighted(&gamma[e.index()], &mut rng);
                        let o = sample_weighted(&phi[t][r], &mut rng);
                        assignments.push((a as u32, Sentiment::from_index(r)));
                        PairIds { target: t as u32, opinion: o as u32 }
                    })
                    .collect();
                let observed = rng.random::<f64>() < c.emotion_observed;
                Tweet {
                    tweet_id: format!("{doc_id}/{k}"),
                    text: String::new(),
                    emotion: if observed { e.into() } else { EmotionIndicator::Unobserved },
                    label: Some(e),
                    pairs,
                }
            })
            .collect();
        theta.insert(doc_id.clone(), th);
        docs.push(Document { doc_id, tweets });
    }
    Ok(TopicCorpus {
        vocab,
        docs,
        truth: Truth {
            num_targets: c.num_targets,
            num_opinions: c.num_opinions,
            theta,
            psi,
            gamma,
            phi,
        },
        assignments,
    })
}

/// Scores documents with the true distributions: `P(t) = Σ_a θ_a ψ_a(t)` and
/// opinions given targets with each tweet's emotion marginalised.
impl HeldOutModel for Truth {
    fn vocabulary_sizes(&self) -> (usize, usize) {
        (self.num_targets, self.num_opinions)
    }

    fn doc_log_prob(&self, doc: &TestDoc, _: &FoldInConfig, _: &mut ChaCha8Rng) -> DocLogProb {
        let Some(theta) = self.theta.get(&doc.doc_id) else {
            return DocLogProb::default();
        };
        let target = doc
            .pairs
            .iter()
            .map(|p| {
                theta
                    .iter()
                    .zip(&self.psi)
                    .map(|(w, psi)| w * psi[p.target as usize])
                    .sum::<f64>()
                    .ln()
            })
            .sum();
        let mut opinion = 0.0;
        for (range, emotion) in &doc.tweets {
            let given = |e: Polarity| -> f64 {
                doc.pairs[range.clone()]
                    .iter()
                    .map(|p| {
                        (0..3)
                            .map(|r| self.gamma[e.index()][r] * self.phi[p.target as usize][r][p.opinion as usize])
                            .sum::<f64>()
                            .ln()
                    })
                    .sum()
            };
            opinion += match emotion.observed() {
                Some(e) => given(e),
                None => log_add_exp(given(Polarity::Negative), given(Polarity::Positive)) - 2f64.ln(),
            };
        }
        DocLogProb {
            target: Some(target),
            opinion: Some(opinion),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedConfig {
    pub num_docs: usize,
    pub tweets_per_doc: usize,
    pub pairs_per_tweet: (usize, usize),
    pub num_targets: usize,
    pub num_opinions: usize,
    /// Probability that a pair's opinion comes from the tweet's polarity block
    /// (otherwise from the neutral block).
    pub polar_rate: f64,
    /// Word popularity inside a block falls off as `rank^-zipf_exponent`.
    pub zipf_exponent: f64,
    /// Fraction of each polarity block listed in the training lexicon.
    pub lexicon_coverage: f64,
    /// Integer magnitude range of the listed lexicon scores.
    pub lexicon_scores: (u8, u8),
    pub emotion_observed: f64,
    /// Probability that an observed emotion is flipped.
    pub emotion_noise: f64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            num_docs: 400,
            tweets_per_doc: 6,
            pairs_per_tweet: (1, 3),
            num_targets: 30,
            num_opinions: 1000,
            polar_rate: 0.75,
            zipf_exponent: 0.5,
            lexicon_coverage: 0.8,
            lexicon_scores: (2, 4),
            emotion_observed: 0.179,
            emotion_noise: 0.1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlantedCorpus {
    pub vocab: Vocabulary,
    pub docs: Vec<Document>,
    /// Training lexicon covering part of each polarity block.
    pub lexicon: SentimentLexicon,
    /// Evaluation affinities for every polarity word.
    pub affinity: AffinityLexicon,
}

/// Tweets with a planted polarity: their opinions come from that polarity's block
/// (or the neutral block) and their gold label is the polarity. Tweets are
/// grouped into documents of mixed polarity.
pub fn planted_polarity(config: &PlantedConfig, seed: u64) -> Result<PlantedCorpus> {
    let c = config;
    if c.num_docs == 0 || c.tweets_per_doc == 0 || c.num_targets == 0 || c.num_opinions < 5 || c.pairs_per_tweet.0 == 0 || c.pairs_per_tweet.0 > c.pairs_per_tweet.1 {
        return Err(Error::invalid("planted corpus sizes too small"));
    }
    let mut rng = stream_rng(seed, 0x91a7);
    let (opinions, blocks) = opinion_layout(c.num_opinions);
    let vocab = Vocabulary::from_tokens(&target_tokens(c.num_targets), &opinions);
    let popularity: [Vec<f64>; 3] =
        std::array::from_fn(|r| (0..blocks[r].len()).map(|i| (i as f64 + 1.0).powf(-c.zipf_exponent)).collect());

    let mut scores = Vec::new();
    let mut affinities = Vec::new();
    for (r, sign) in [(0usize, -1.0), (2, 1.0)] {
        let block = blocks[r].clone();
        let listed = sample(&mut rng, block.len(), (c.lexicon_coverage * block.len() as f64).round() as usize);
        for i in listed.iter() {
            scores.push((opinions[block.start + i].clone(), sign * f64::from(rng.random_range(c.lexicon_scores.0..=c.lexicon_scores.1))));
        }
        for o in block {
            let z = rng.random_range(0.5..=1.0);
            let (pos, neg) = if sign > 0.0 { (z, 0.0) } else { (0.0, z) };
            affinities.push((opinions[o].clone(), pos, neg));
        }
    }

    let docs = (0..c.num_docs)
        .map(|d| {
            let doc_id = format!("tag{d:04}");
            let tweets = (0..c.tweets_per_doc)
                .map(|k| {
                    let polarity = if rng.random::<bool>() { Polarity::Positive } else { Polarity::Negative };
                    let home = Sentiment::from(polarity).index();
                    let n = rng.random_range(c.pairs_per_tweet.0..=c.pairs_per_tweet.1);
                    let pairs = (0..n)
                        .map(|_| {
                            let r = if rng.random::<f64>() < c.polar_rate { home } else { 1 };
                            let o = blocks[r].start + sample_weighted(&popularity[r], &mut rng);
                            PairIds {
                                target: rng.random_range(0..c.num_targets) as u32,
                                opinion: o as u32,
                            }
                        })
                        .collect();
                    let emotion = if rng.random::<f64>() < c.emotion_observed {
                        let flipped = rng.random::<f64>() < c.emotion_noise;
                        let e = match (polarity, flipped) {
                            (p, false) => p,
                            (Polarity::Positive, true) => Polarity::Negative,
                            (Polarity::Negative, true) => Polarity::Positive,
                        };
                        e.into()
                    } else {
                        EmotionIndicator::Unobserved
                    };
                    Tweet {
                        tweet_id: format!("{doc_id}/{k}"),
                        text: String::new(),
                        emotion,
                        label: Some(polarity),
                        pairs,
                    }
                })
                .collect();
            Document { doc_id, tweets }
        })
        .collect();
    Ok(PlantedCorpus {
        vocab,
        docs,
        lexicon: SentimentLexicon::from_scores(scores),
        affinity: AffinityLexicon::from_entries(affinities),
    })
}

/// Renders documents as ingestible JSONL: each tweet is tagged with its document
/// id, an observed emotion becomes `dobj_emotion` and the gold label is kept.
pub fn to_jsonl(docs: &[Document], vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for doc in docs {
        for tweet in &doc.tweets {
            let pairs: Vec<serde_json::Value> = tweet
                .pairs
                .iter()
                .map(|p| serde_json::json!({ "t": vocab.target(p.target), "o": vocab.opinion(p.opinion) }))
                .collect();
            let mut record = serde_json::json!({
                "id": tweet.tweet_id,
                "text": tweet.text,
                "pairs": pairs,
                "tags": [doc.doc_id],
            });
            if let Some(e) = tweet.emotion.observed() {
                record["dobj_emotion"] = e.value().into();
            }
            if let Some(label) = tweet.label {
                record["label"] = label.value().into();
            }
            out.push_str(&record.to_string());
            out.push('\n');
        }
    }
    out
}

/// A single restaurant seated by the Pitman-Yor Chinese restaurant process with
/// `customers` customers over a base uniform on `base_size` items.
pub fn crp_node<R: Rng + ?Sized>(params: PypParams, customers: usize, base_size: u32, rng: &mut R) -> RestaurantNode {
    let (a, b) = (params.discount, params.concentration);
    // (item, size) per table
    let mut tables: Vec<(u32, u64)> = Vec::new();
    for n in 0..customers {
        let open = b + a * tables.len() as f64;
        let mut u = rng.random::<f64>() * (b + n as f64);
        let mut joined = None;
        if u >= open {
            u -= open;
            for (i, &(_, size)) in tables.iter().enumerate() {
                let w = size as f64 - a;
                if u < w {
                    joined = Some(i);
                    break;
                }
                u -= w;
            }
            joined = joined.or(Some(tables.len() - 1));
        }
        match joined {
            Some(i) => tables[i].1 += 1,
            None => tables.push((rng.random_range(0..base_size), 1)),
        }
    }
    let mut counts: BTreeMap<u32, crate::pyp::ItemCounts> = BTreeMap::new();
    for (item, size) in tables {
        let e = counts.entry(item).or_default();
        e.customers += size as u32;
        e.tables += 1;
    }
    RestaurantNode::from_counts(counts).expect("consistent seating")
}
