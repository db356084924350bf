//! Ranked word lists, per-tag opinion comparisons and contrasting tweets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::distance::hellinger_matrix;
use crate::error::{Error, Result};
use crate::model::{ModelState, TotmState};
use crate::{Polarity, Sentiment};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranked {
    pub id: u32,
    pub prob: f64,
}

/// Indices sorted by descending probability, ties by ascending id, cut to `k`.
pub fn rank(probs: &[f64], k: usize) -> Vec<Ranked> {
    let mut out: Vec<Ranked> = probs
        .iter()
        .enumerate()
        .map(|(i, &p)| Ranked { id: i as u32, prob: p })
        .collect();
    out.sort_by(|a, b| b.prob.total_cmp(&a.prob).then(a.id.cmp(&b.id)));
    out.truncate(k);
    out
}

/// Target distribution of aspect `a` (TOTM `ψ_a` predictive or ILDA posterior mean).
pub fn aspect_target_distribution(model: &ModelState, a: usize) -> Result<Vec<f64>> {
    let unknown = || Error::Unknown {
        kind: "aspect",
        name: a.to_string(),
    };
    let vt = model.corpus().num_targets as u32;
    match model {
        ModelState::Totm(s) if a < s.num_aspects() => Ok((0..vt).map(|t| s.target_predictive(a, t)).collect()),
        ModelState::Ilda(s) if a < s.num_aspects() => Ok((0..vt).map(|t| s.psi(a, t)).collect()),
        ModelState::Ldadp(_) => Err(Error::invalid("LDA-DP has no aspects")),
        _ => Err(unknown()),
    }
}

/// Aspects with at least one assigned pair, in label order.
pub fn live_aspect_labels(model: &ModelState) -> Vec<usize> {
    let aspects = match model {
        ModelState::Totm(s) => s.aspects(),
        ModelState::Ilda(s) => s.aspects(),
        ModelState::Ldadp(_) => return Vec::new(),
    };
    let mut live: Vec<usize> = aspects.iter().map(|&a| a as usize).collect();
    live.sort_unstable();
    live.dedup();
    live
}

pub fn top_target_words(model: &ModelState, aspect: usize, k: usize) -> Result<Vec<Ranked>> {
    Ok(rank(&aspect_target_distribution(model, aspect)?, k))
}

/// `φ'_{t,r}` predictive ranking; a leaf never seen falls back to `φ_r`.
pub fn top_opinion_words(state: &TotmState, target: u32, r: Sentiment, k: usize) -> Result<Vec<Ranked>> {
    let corpus = state.corpus();
    if target as usize >= corpus.num_targets {
        return Err(Error::Unknown {
            kind: "target",
            name: target.to_string(),
        });
    }
    let probs: Vec<f64> = (0..corpus.num_opinions as u32)
        .map(|o| state.opinion_predictive(target, r, o))
        .collect();
    Ok(rank(&probs, k))
}

/// Pairwise Hellinger distances between the target distributions of the live aspects.
pub fn aspect_distances(model: &ModelState) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    let live = live_aspect_labels(model);
    let dists = live
        .iter()
        .map(|&a| aspect_target_distribution(model, a))
        .collect::<Result<Vec<_>>>()?;
    Ok((live, hellinger_matrix(&dists)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpinionCount {
    pub opinion: u32,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetOpinions {
    pub target: u32,
    pub count: usize,
    pub positive: Vec<OpinionCount>,
    pub negative: Vec<OpinionCount>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AspectCell {
    pub aspect: usize,
    /// Empty when the tag has no pairs under this aspect.
    pub targets: Vec<TargetOpinions>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrandReport {
    pub tag: String,
    pub aspects: Vec<AspectCell>,
}

fn find_doc(state: &TotmState, tag: &str) -> Result<usize> {
    let docs = &state.corpus().docs;
    let lower = tag.to_lowercase();
    let candidates = [lower.clone(), format!("#{lower}")];
    candidates
        .iter()
        .find_map(|c| docs.iter().position(|d| &d.doc_id == c))
        .ok_or(Error::Unknown {
            kind: "tag",
            name: tag.to_string(),
        })
}

/// For each tag document and aspect: the `k` most frequent targets assigned that
/// aspect, each with its `k` most frequent positive and negative opinions in the
/// document. Count ties are broken by the `φ'_{t,r}` predictive, then by id.
pub fn brand_comparison(state: &TotmState, tags: &[String], aspects: &[usize], k: usize) -> Result<Vec<BrandReport>> {
    let corpus = state.corpus();
    for &a in aspects {
        if a >= state.num_aspects() {
            return Err(Error::Unknown {
                kind: "aspect",
                name: a.to_string(),
            });
        }
    }
    tags.iter()
        .map(|tag| {
            let d = find_doc(state, tag)?;
            let range = corpus.doc_pairs(d);
            let cells = aspects
                .iter()
                .map(|&a| {
                    let mut target_counts: BTreeMap<u32, usize> = BTreeMap::new();
                    for i in range.clone() {
                        if state.aspects()[i] as usize == a {
                            *target_counts.entry(corpus.pairs[i].target).or_default() += 1;
                        }
                    }
                    let mut ranked: Vec<(u32, usize)> = target_counts.into_iter().collect();
                    ranked.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
                    ranked.truncate(k);
                    let targets = ranked
                        .into_iter()
                        .map(|(t, count)| {
                            let opinions = |r: Sentiment| {
                                let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
                                for i in range.clone() {
                                    let p = corpus.pairs[i];
                                    if p.target == t && state.sentiments()[i] == r {
                                        *counts.entry(p.opinion).or_default() += 1;
                                    }
                                }
                                let mut list: Vec<(u32, usize, f64)> = counts
                                    .into_iter()
                                    .map(|(o, c)| (o, c, state.opinion_predictive(t, r, o)))
                                    .collect();
                                list.sort_by(|x, y| y.1.cmp(&x.1).then(y.2.total_cmp(&x.2)).then(x.0.cmp(&y.0)));
                                list.truncate(k);
                                list.into_iter().map(|(opinion, count, _)| OpinionCount { opinion, count }).collect()
                            };
                            TargetOpinions {
                                target: t,
                                count,
                                positive: opinions(Sentiment::Positive),
                                negative: opinions(Sentiment::Negative),
                            }
                        })
                        .collect();
                    AspectCell { aspect: a, targets }
                })
                .collect();
            Ok(BrandReport {
                tag: corpus.docs[d].doc_id.clone(),
                aspects: cells,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveTweet {
    pub tweet_id: String,
    pub doc_id: String,
    pub opinion: u32,
    /// Posterior probability of the requested sentiment for the pair.
    pub confidence: f64,
}

/// Tweets holding a pair with `target` currently assigned sentiment `r`, ranked by
/// the pair's sentiment posterior `∝ γ_e(r) · φ'_{t,r}(o)`; one entry per tweet id.
pub fn contrastive_tweets(state: &TotmState, target: u32, r: Sentiment, k: usize) -> Vec<ContrastiveTweet> {
    let corpus = state.corpus();
    let mut best: BTreeMap<&str, (f64, usize, u32)> = BTreeMap::new();
    for (i, p) in corpus.pairs.iter().enumerate() {
        if p.target != target || state.sentiments()[i] != r {
            continue;
        }
        let tw = corpus.pair_tweet[i] as usize;
        let e: Polarity = state.emotions()[tw];
        let w = Sentiment::ALL.map(|s| state.emotion_sentiment_predictive(e, s) * state.opinion_predictive(target, s, p.opinion));
        let conf = w[r.index()] / w.iter().sum::<f64>();
        let id = corpus.tweets[tw].tweet_id.as_str();
        let entry = best.entry(id).or_insert((f64::NEG_INFINITY, i, p.opinion));
        if conf > entry.0 {
            *entry = (conf, i, p.opinion);
        }
    }
    let mut out: Vec<(f64, usize, ContrastiveTweet)> = best
        .into_iter()
        .map(|(id, (confidence, i, opinion))| {
            let tw = corpus.pair_tweet[i] as usize;
            let doc = corpus.tweets[tw].doc as usize;
            (
                confidence,
                i,
                ContrastiveTweet {
                    tweet_id: id.to_string(),
                    doc_id: corpus.docs[doc].doc_id.clone(),
                    opinion,
                    confidence,
                },
            )
        })
        .collect();
    out.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    out.into_iter().take(k).map(|(_, _, t)| t).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_breaks_ties_by_id() {
        let r = rank(&[0.2, 0.4, 0.2, 0.1, 0.1], 10);
        assert_eq!(r.iter().map(|x| x.id).collect::<Vec<_>>(), vec![1, 0, 2, 3, 4]);
        assert_eq!(rank(&[0.2, 0.4], 1).len(), 1);
    }
}
