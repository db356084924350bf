//! Held-out perplexity with fold-in document mixtures.
//!
//! Global counts stay frozen. Each test document gets its own aspect (or
//! sentiment) mixture, sampled for `burn_in` sweeps and then read off for
//! `samples` sweeps. The per-pair probability at a retained sweep is the
//! leave-one-out predictive with that pair's own assignment removed; the
//! probabilities are averaged over retained sweeps before taking logs.

use std::ops::Range;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, EmotionIndicator, PairIds};
use crate::error::{Error, Result};
use crate::model::{IldaState, LdaDpState, ModelState, TotmState};
use crate::pyp::{Removal, RestaurantNode, StirlingTable};
use crate::util::{hash_str, log_add_exp, sample_weighted, stream_rng};
use crate::{Polarity, Sentiment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FoldInConfig {
    pub burn_in: usize,
    pub samples: usize,
}

impl Default for FoldInConfig {
    fn default() -> Self {
        FoldInConfig {
            burn_in: 50,
            samples: 10,
        }
    }
}

/// A test document restricted to in-vocabulary pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct TestDoc {
    pub doc_id: String,
    pub pairs: Vec<PairIds>,
    pub tweets: Vec<(Range<usize>, EmotionIndicator)>,
}

impl TestDoc {
    /// Drops pairs outside a `(num_targets, num_opinions)` vocabulary; returns the
    /// document and the number of pairs dropped.
    pub fn new(doc: &Document, num_targets: usize, num_opinions: usize) -> (TestDoc, usize) {
        let mut out = TestDoc {
            doc_id: doc.doc_id.clone(),
            pairs: Vec::new(),
            tweets: Vec::new(),
        };
        let mut dropped = 0;
        for tweet in &doc.tweets {
            let start = out.pairs.len();
            for p in &tweet.pairs {
                if (p.target as usize) < num_targets && (p.opinion as usize) < num_opinions {
                    out.pairs.push(*p);
                } else {
                    dropped += 1;
                }
            }
            if out.pairs.len() > start {
                out.tweets.push((start..out.pairs.len(), tweet.emotion));
            }
        }
        (out, dropped)
    }
}

/// Log probability of a test document's targets, and of its opinions given the targets.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DocLogProb {
    pub target: Option<f64>,
    pub opinion: Option<f64>,
}

/// A model that can score held-out documents.
pub trait HeldOutModel: Sync {
    fn vocabulary_sizes(&self) -> (usize, usize);

    fn doc_log_prob(&self, doc: &TestDoc, config: &FoldInConfig, rng: &mut ChaCha8Rng) -> DocLogProb;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerplexityReport {
    pub target_perplexity: Option<f64>,
    pub opinion_perplexity: Option<f64>,
    pub overall_perplexity: Option<f64>,
    pub documents: usize,
    pub pairs: usize,
    pub dropped_pairs: usize,
    pub target_log_prob: Option<f64>,
    pub opinion_log_prob: Option<f64>,
}

/// Held-out perplexity of `docs`.
///
/// Each document's fold-in chain is seeded from `seed` and a hash of its id, so
/// results do not depend on thread scheduling or document order.
pub fn perplexity<M: HeldOutModel + ?Sized>(
    model: &M,
    docs: &[Document],
    config: &FoldInConfig,
    seed: u64,
) -> Result<PerplexityReport> {
    if config.samples == 0 {
        return Err(Error::invalid("fold-in needs at least one retained sample"));
    }
    let (vt, vo) = model.vocabulary_sizes();
    let mut dropped = 0;
    let test: Vec<TestDoc> = docs
        .iter()
        .filter_map(|d| {
            let (doc, n) = TestDoc::new(d, vt, vo);
            dropped += n;
            (!doc.pairs.is_empty()).then_some(doc)
        })
        .collect();
    let pairs: usize = test.iter().map(|d| d.pairs.len()).sum();
    if pairs == 0 {
        return Err(Error::EmptyCorpus("no usable test pairs".into()));
    }
    if dropped > 0 {
        log::info!("dropped {dropped} out-of-vocabulary test pairs");
    }
    let scores: Vec<DocLogProb> = test
        .par_iter()
        .map(|d| {
            let mut rng = stream_rng(seed, hash_str(&d.doc_id));
            model.doc_log_prob(d, config, &mut rng)
        })
        .collect();
    let total = |f: fn(&DocLogProb) -> Option<f64>| -> Option<f64> {
        scores.iter().map(f).sum::<Option<f64>>()
    };
    let target = total(|s| s.target);
    let opinion = total(|s| s.opinion);
    let n = pairs as f64;
    Ok(PerplexityReport {
        target_perplexity: target.map(|lp| (-lp / n).exp()),
        opinion_perplexity: opinion.map(|lp| (-lp / n).exp()),
        overall_perplexity: target.zip(opinion).map(|(t, o)| (-(t + o) / (2.0 * n)).exp()),
        documents: test.len(),
        pairs,
        dropped_pairs: dropped,
        target_log_prob: target,
        opinion_log_prob: opinion,
    })
}

/// Uniform distributions over both vocabularies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformModel {
    pub num_targets: usize,
    pub num_opinions: usize,
}

impl HeldOutModel for UniformModel {
    fn vocabulary_sizes(&self) -> (usize, usize) {
        (self.num_targets, self.num_opinions)
    }

    fn doc_log_prob(&self, doc: &TestDoc, _: &FoldInConfig, _: &mut ChaCha8Rng) -> DocLogProb {
        let n = doc.pairs.len() as f64;
        DocLogProb {
            target: Some(-n * (self.num_targets as f64).ln()),
            opinion: Some(-n * (self.num_opinions as f64).ln()),
        }
    }
}

fn mean_log(acc: &[f64], samples: usize) -> f64 {
    acc.iter().map(|p| (p / samples as f64).ln()).sum()
}

/// Fold-in of a local aspect mixture for TOTM: a PYP restaurant over a uniform
/// base of `A` labels, scored against the frozen `ψ_a`.
fn totm_targets(state: &TotmState, doc: &TestDoc, config: &FoldInConfig, rng: &mut ChaCha8Rng) -> f64 {
    let hyper = state.hyper();
    let num_aspects = hyper.max_aspects;
    let params = hyper.theta;
    let base = 1.0 / num_aspects as f64;
    let psi: Vec<Vec<f64>> = doc
        .pairs
        .iter()
        .map(|p| (0..num_aspects).map(|a| state.target_predictive(a, p.target)).collect())
        .collect();
    let mut node = RestaurantNode::new();
    let mut table = StirlingTable::new(params.discount);
    let mut weights = vec![0.0; num_aspects];
    let mut draw = |node: &mut RestaurantNode, table: &mut StirlingTable, psi: &[f64], rng: &mut ChaCha8Rng| {
        for (a, w) in weights.iter_mut().enumerate() {
            let (stay, new) = node.gibbs_weights(a as u32, params, table, base);
            *w = (stay + new) * psi[a];
        }
        let a = sample_weighted(&weights, rng) as u32;
        node.add_customer(a, params, table, base, rng);
        a
    };
    let mut aspects: Vec<u32> = psi.iter().map(|p| draw(&mut node, &mut table, p, rng)).collect();
    let mut acc = vec![0.0; doc.pairs.len()];
    for sweep in 0..config.burn_in + config.samples {
        for i in 0..doc.pairs.len() {
            let a = aspects[i];
            let removal = node.remove_customer(a, rng).expect("seated aspect");
            let blocked = removal == Removal::Blocked;
            if sweep >= config.burn_in {
                // a blocked removal is scored with the customer gone and its table kept
                if blocked {
                    node.apply_remove(a, false);
                }
                acc[i] += (0..num_aspects)
                    .map(|b| node.predictive(b as u32, params, base) * psi[i][b])
                    .sum::<f64>();
                if blocked {
                    node.apply_add(a, false);
                }
            }
            if !blocked {
                aspects[i] = draw(&mut node, &mut table, &psi[i], rng);
            }
        }
    }
    mean_log(&acc, config.samples)
}

/// Opinions given targets under TOTM, with each tweet's emotion marginalised.
fn totm_opinions(state: &TotmState, doc: &TestDoc) -> f64 {
    let gamma: [[f64; 3]; 2] = Polarity::BOTH.map(|e| Sentiment::ALL.map(|r| state.emotion_sentiment_predictive(e, r)));
    let mut total = 0.0;
    for (range, emotion) in &doc.tweets {
        let log_given = |e: Polarity| -> f64 {
            doc.pairs[range.clone()]
                .iter()
                .map(|p| {
                    Sentiment::ALL
                        .iter()
                        .map(|&r| gamma[e.index()][r.index()] * state.opinion_predictive(p.target, r, p.opinion))
                        .sum::<f64>()
                        .ln()
                })
                .sum()
        };
        total += match emotion.observed() {
            Some(e) => log_given(e),
            None => log_add_exp(log_given(Polarity::Negative), log_given(Polarity::Positive)) - 2f64.ln(),
        };
    }
    total
}

impl HeldOutModel for TotmState {
    fn vocabulary_sizes(&self) -> (usize, usize) {
        (self.corpus().num_targets, self.corpus().num_opinions)
    }

    fn doc_log_prob(&self, doc: &TestDoc, config: &FoldInConfig, rng: &mut ChaCha8Rng) -> DocLogProb {
        DocLogProb {
            target: Some(totm_targets(self, doc, config, rng)),
            opinion: Some(totm_opinions(self, doc)),
        }
    }
}

/// Collapsed Dirichlet fold-in over `k` local labels.
///
/// `like[i][k]` is pair `i`'s frozen likelihood under label `k`; `score(i, θ̂)`
/// returns the quantities to average for pair `i` given the leave-one-out mixture.
fn dirichlet_fold_in<const N: usize>(
    like: &[Vec<f64>],
    prior: f64,
    config: &FoldInConfig,
    rng: &mut impl Rng,
    score: impl Fn(usize, &[f64]) -> [f64; N],
) -> Vec<[f64; N]> {
    let k = like.first().map_or(0, Vec::len);
    let mut counts = vec![0u32; k];
    let mut weights = vec![0.0; k];
    let mut labels = Vec::with_capacity(like.len());
    for l in like {
        for (j, w) in weights.iter_mut().enumerate() {
            *w = (f64::from(counts[j]) + prior) * l[j];
        }
        let z = sample_weighted(&weights, rng);
        counts[z] += 1;
        labels.push(z);
    }
    let n = like.len() as f64;
    let mut theta = vec![0.0; k];
    let mut acc = vec![[0.0; N]; like.len()];
    for sweep in 0..config.burn_in + config.samples {
        for (i, l) in like.iter().enumerate() {
            counts[labels[i]] -= 1;
            if sweep >= config.burn_in {
                let denom = n - 1.0 + k as f64 * prior;
                for (j, t) in theta.iter_mut().enumerate() {
                    *t = (f64::from(counts[j]) + prior) / denom;
                }
                for (a, s) in acc[i].iter_mut().zip(score(i, &theta)) {
                    *a += s;
                }
            }
            for (j, w) in weights.iter_mut().enumerate() {
                *w = (f64::from(counts[j]) + prior) * l[j];
            }
            let z = sample_weighted(&weights, rng);
            counts[z] += 1;
            labels[i] = z;
        }
    }
    acc
}

impl HeldOutModel for IldaState {
    fn vocabulary_sizes(&self) -> (usize, usize) {
        (self.corpus().num_targets, self.corpus().num_opinions)
    }

    fn doc_log_prob(&self, doc: &TestDoc, config: &FoldInConfig, rng: &mut ChaCha8Rng) -> DocLogProb {
        let num_aspects = self.num_aspects();
        let phi: Vec<[f64; 3]> = doc
            .pairs
            .iter()
            .map(|p| Sentiment::ALL.map(|r| self.phi(r, p.opinion)))
            .collect();
        let target_like: Vec<Vec<f64>> = doc
            .pairs
            .iter()
            .map(|p| (0..num_aspects).map(|a| self.psi(a, p.target)).collect())
            .collect();
        let opinion_like: Vec<Vec<f64>> = phi
            .iter()
            .map(|f| {
                (0..num_aspects)
                    .map(|a| Sentiment::ALL.iter().map(|&r| self.eta(a, r) * f[r.index()]).sum())
                    .collect()
            })
            .collect();
        let joint: Vec<Vec<f64>> = target_like
            .iter()
            .zip(&opinion_like)
            .map(|(t, o)| t.iter().zip(o).map(|(x, y)| x * y).collect())
            .collect();
        let acc = dirichlet_fold_in(&joint, self.priors().theta, config, rng, |i, theta| {
            let pt: f64 = theta.iter().zip(&target_like[i]).map(|(a, b)| a * b).sum();
            let pto: f64 = theta.iter().zip(&joint[i]).map(|(a, b)| a * b).sum();
            [pt, pto]
        });
        let target: f64 = acc.iter().map(|a| (a[0] / config.samples as f64).ln()).sum();
        let opinion: f64 = acc.iter().map(|a| (a[1] / a[0]).ln()).sum();
        DocLogProb {
            target: Some(target),
            opinion: Some(opinion),
        }
    }
}

impl HeldOutModel for LdaDpState {
    fn vocabulary_sizes(&self) -> (usize, usize) {
        (self.corpus().num_targets, self.corpus().num_opinions)
    }

    fn doc_log_prob(&self, doc: &TestDoc, config: &FoldInConfig, rng: &mut ChaCha8Rng) -> DocLogProb {
        let like: Vec<Vec<f64>> = doc
            .pairs
            .iter()
            .map(|p| Sentiment::ALL.iter().map(|&r| self.phi(r, p.opinion)).collect())
            .collect();
        let acc = dirichlet_fold_in(&like, self.priors().doc, config, rng, |i, theta| {
            [theta.iter().zip(&like[i]).map(|(a, b)| a * b).sum()]
        });
        DocLogProb {
            target: None,
            opinion: Some(acc.iter().map(|a| (a[0] / config.samples as f64).ln()).sum()),
        }
    }
}

impl HeldOutModel for ModelState {
    fn vocabulary_sizes(&self) -> (usize, usize) {
        (self.corpus().num_targets, self.corpus().num_opinions)
    }

    fn doc_log_prob(&self, doc: &TestDoc, config: &FoldInConfig, rng: &mut ChaCha8Rng) -> DocLogProb {
        match self {
            ModelState::Totm(s) => s.doc_log_prob(doc, config, rng),
            ModelState::Ilda(s) => s.doc_log_prob(doc, config, rng),
            ModelState::Ldadp(s) => s.doc_log_prob(doc, config, rng),
        }
    }
}
