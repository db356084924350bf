//! Latent state of TOTM and the two baselines, with their joint likelihoods.

mod ilda;
mod ldadp;
mod snapshot;
mod totm;

use serde::{Deserialize, Serialize};

pub use ilda::{IldaPriors, IldaState};
pub use ldadp::{LdaDpPriors, LdaDpState};
pub use snapshot::{ModelSnapshot, ModelState, MODEL_FORMAT_VERSION};
pub use totm::{leaf_key, TotmState};

use crate::corpus::{Document, EmotionIndicator, PairIds, Vocabulary};
use crate::error::{Error, Result};
use crate::pyp::PypParams;
use crate::Polarity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Totm,
    Ilda,
    Ldadp,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "totm" => Ok(ModelKind::Totm),
            "ilda" => Ok(ModelKind::Ilda),
            "ldadp" | "lda-dp" => Ok(ModelKind::Ldadp),
            _ => Err(Error::Unknown {
                kind: "model",
                name: s.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Totm => "totm",
            ModelKind::Ilda => "ilda",
            ModelKind::Ldadp => "ldadp",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatDoc {
    pub doc_id: String,
    pub tweets: (u32, u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatTweet {
    pub tweet_id: String,
    pub doc: u32,
    pub emotion: EmotionIndicator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Polarity>,
    pub pairs: (u32, u32),
}

/// Documents flattened into contiguous tweet and pair arrays.
///
/// Every occurrence of a tweet in a document is its own entry, so a tweet in two
/// tag documents has two independent latent emotions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatCorpus {
    pub num_targets: usize,
    pub num_opinions: usize,
    pub docs: Vec<FlatDoc>,
    pub tweets: Vec<FlatTweet>,
    pub pairs: Vec<PairIds>,
    /// Tweet index of every pair.
    pub pair_tweet: Vec<u32>,
}

impl FlatCorpus {
    pub fn new(documents: &[Document], vocab: &Vocabulary) -> Result<Self> {
        Self::with_sizes(documents, vocab.num_targets(), vocab.num_opinions())
    }

    pub fn with_sizes(documents: &[Document], num_targets: usize, num_opinions: usize) -> Result<Self> {
        if num_targets == 0 || num_opinions == 0 {
            return Err(Error::EmptyCorpus("empty vocabulary".into()));
        }
        let mut flat = FlatCorpus {
            num_targets,
            num_opinions,
            docs: Vec::with_capacity(documents.len()),
            tweets: Vec::new(),
            pairs: Vec::new(),
            pair_tweet: Vec::new(),
        };
        for doc in documents {
            let d = flat.docs.len() as u32;
            let first_tweet = flat.tweets.len() as u32;
            for tweet in doc.tweets.iter().filter(|t| !t.pairs.is_empty()) {
                let tw = flat.tweets.len() as u32;
                let start = flat.pairs.len() as u32;
                for p in &tweet.pairs {
                    if p.target as usize >= num_targets || p.opinion as usize >= num_opinions {
                        return Err(Error::VocabularyMismatch {
                            model: format!("{num_targets} targets / {num_opinions} opinions"),
                            corpus: format!("pair ({}, {}) in {}", p.target, p.opinion, doc.doc_id),
                        });
                    }
                    flat.pairs.push(*p);
                    flat.pair_tweet.push(tw);
                }
                flat.tweets.push(FlatTweet {
                    tweet_id: tweet.tweet_id.clone(),
                    doc: d,
                    emotion: tweet.emotion,
                    label: tweet.label,
                    pairs: (start, flat.pairs.len() as u32),
                });
            }
            if flat.tweets.len() as u32 > first_tweet {
                flat.docs.push(FlatDoc {
                    doc_id: doc.doc_id.clone(),
                    tweets: (first_tweet, flat.tweets.len() as u32),
                });
            }
        }
        if flat.pairs.is_empty() {
            return Err(Error::EmptyCorpus("no pairs to model".into()));
        }
        Ok(flat)
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair_doc(&self, i: usize) -> usize {
        self.tweets[self.pair_tweet[i] as usize].doc as usize
    }

    pub fn doc_pairs(&self, d: usize) -> std::ops::Range<usize> {
        let (a, b) = self.docs[d].tweets;
        self.tweets[a as usize].pairs.0 as usize..self.tweets[b as usize - 1].pairs.1 as usize
    }

    pub fn tweet_pairs(&self, tw: usize) -> std::ops::Range<usize> {
        let (a, b) = self.tweets[tw].pairs;
        a as usize..b as usize
    }
}

/// TOTM hyperparameters, with discount/concentration tied per node group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Document aspect mixtures.
    pub theta: PypParams,
    /// Aspect target distributions.
    pub psi: PypParams,
    /// Sentiment opinion distributions.
    pub phi: PypParams,
    /// Target-specific opinion distributions.
    pub phi_leaf: PypParams,
    /// Lexicon strength.
    pub b: f64,
    pub max_aspects: usize,
    /// Dirichlet priors over sentiment given negative / positive emotion.
    pub q: [[f64; 3]; 2],
}

impl Default for Hyperparameters {
    fn default() -> Self {
        let p = PypParams {
            discount: 0.1,
            concentration: 0.1,
        };
        Hyperparameters {
            theta: p,
            psi: p,
            phi: p,
            phi_leaf: p,
            b: 10.0,
            max_aspects: 20,
            q: [[0.9, 0.05, 0.05], [0.05, 0.05, 0.9]],
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        for p in [self.theta, self.psi, self.phi, self.phi_leaf] {
            p.validate()?;
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::invalid(format!("b must be positive, got {}", self.b)));
        }
        if self.max_aspects == 0 {
            return Err(Error::invalid("max_aspects must be at least 1"));
        }
        if self.q.iter().flatten().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::invalid("q vectors must be positive"));
        }
        Ok(())
    }

    pub fn discounts(&self) -> [f64; 4] {
        [self.theta.discount, self.psi.discount, self.phi.discount, self.phi_leaf.discount]
    }
}

pub(crate) fn symmetric_dm_log_likelihood(counts: &[u32], total: u64, prior: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    if total == 0 {
        return 0.0;
    }
    let k = counts.len() as f64;
    let lg = ln_gamma(prior);
    let per: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| ln_gamma(prior + f64::from(c)) - lg)
        .sum();
    per - (ln_gamma(k * prior + total as f64) - ln_gamma(k * prior))
}
