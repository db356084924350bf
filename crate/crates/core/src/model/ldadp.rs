use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::{symmetric_dm_log_likelihood, FlatCorpus};
use crate::error::{Error, Result};
use crate::util::sample_weighted;
use crate::Sentiment;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaDpPriors {
    /// Symmetric Dirichlet prior of the per-document sentiment mixture.
    pub doc: f64,
    /// `α_r`: scale applied to the lexicon rows `λ_r` to form the word priors.
    pub word_scale: f64,
}

impl Default for LdaDpPriors {
    fn default() -> Self {
        LdaDpPriors {
            doc: 0.5,
            word_scale: 0.3,
        }
    }
}

/// Three-sentiment LDA over opinion words with word priors `λ_r · α_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaDpState {
    pub(crate) corpus: FlatCorpus,
    pub(crate) priors: LdaDpPriors,
    /// Word prior per sentiment, `λ_{r,v} · α_r`.
    word_prior: [Vec<f64>; 3],
    word_prior_total: [f64; 3],
    pub(crate) sentiments: Vec<Sentiment>,
    doc_sentiment: Vec<u32>,
    doc_total: Vec<u32>,
    sentiment_word: Vec<u32>,
    sentiment_total: [u32; 3],
}

impl LdaDpState {
    pub fn init<R: Rng + ?Sized>(
        corpus: FlatCorpus,
        lambda: &[Vec<f64>; 3],
        priors: LdaDpPriors,
        rng: &mut R,
    ) -> Result<Self> {
        if lambda.iter().any(|row| row.len() != corpus.num_opinions) {
            return Err(Error::VocabularyMismatch {
                model: format!("λ over {} words", lambda[0].len()),
                corpus: format!("{} opinions", corpus.num_opinions),
            });
        }
        if !(priors.doc > 0.0 && priors.word_scale > 0.0) {
            return Err(Error::invalid(format!("LDA-DP priors must be positive, got {priors:?}")));
        }
        if lambda.iter().flatten().any(|&x| !(x > 0.0)) {
            return Err(Error::invalid("λ entries must be positive"));
        }
        let word_prior: [Vec<f64>; 3] =
            std::array::from_fn(|r| lambda[r].iter().map(|l| l * priors.word_scale).collect());
        let word_prior_total = std::array::from_fn(|r| word_prior[r].iter().sum());
        let n = corpus.num_pairs();
        let mut s = LdaDpState {
            doc_sentiment: vec![0; corpus.docs.len() * 3],
            doc_total: vec![0; corpus.docs.len()],
            sentiment_word: vec![0; 3 * corpus.num_opinions],
            sentiment_total: [0; 3],
            sentiments: vec![Sentiment::Neutral; n],
            word_prior,
            word_prior_total,
            corpus,
            priors,
        };
        for i in 0..n {
            s.add(i, Sentiment::from_index(rng.random_range(0..3)));
        }
        Ok(s)
    }

    pub fn corpus(&self) -> &FlatCorpus {
        &self.corpus
    }

    pub fn priors(&self) -> LdaDpPriors {
        self.priors
    }

    pub fn sentiments(&self) -> &[Sentiment] {
        &self.sentiments
    }

    fn update(&mut self, i: usize, r: Sentiment, up: bool) {
        let d = self.corpus.pair_doc(i);
        let o = self.corpus.pairs[i].opinion as usize;
        let ri = r.index();
        let vo = self.corpus.num_opinions;
        for c in [
            &mut self.doc_sentiment[d * 3 + ri],
            &mut self.doc_total[d],
            &mut self.sentiment_word[ri * vo + o],
            &mut self.sentiment_total[ri],
        ] {
            if up {
                *c += 1;
            } else {
                *c -= 1;
            }
        }
    }

    pub fn add(&mut self, i: usize, r: Sentiment) {
        self.update(i, r, true);
        self.sentiments[i] = r;
    }

    pub fn remove(&mut self, i: usize) {
        self.update(i, self.sentiments[i], false);
    }

    /// Unnormalised conditional over sentiments for a removed pair.
    pub fn weights(&self, i: usize) -> [f64; 3] {
        let d = self.corpus.pair_doc(i);
        let o = self.corpus.pairs[i].opinion;
        std::array::from_fn(|r| {
            (f64::from(self.doc_sentiment[d * 3 + r]) + self.priors.doc) * self.phi(Sentiment::from_index(r), o)
        })
    }

    pub fn resample<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) {
        self.remove(i);
        let w = self.weights(i);
        self.add(i, Sentiment::from_index(sample_weighted(&w, rng)));
    }

    /// `φ_r` posterior mean of opinion `o`.
    pub fn phi(&self, r: Sentiment, o: u32) -> f64 {
        let (ri, vo) = (r.index(), self.corpus.num_opinions);
        (f64::from(self.sentiment_word[ri * vo + o as usize]) + self.word_prior[ri][o as usize])
            / (f64::from(self.sentiment_total[ri]) + self.word_prior_total[ri])
    }

    pub fn log_likelihood(&self) -> f64 {
        let vo = self.corpus.num_opinions;
        let mut ll = 0.0;
        for d in 0..self.corpus.docs.len() {
            ll += symmetric_dm_log_likelihood(&self.doc_sentiment[d * 3..d * 3 + 3], u64::from(self.doc_total[d]), self.priors.doc);
        }
        for r in 0..3 {
            let prior = &self.word_prior[r];
            let counts = &self.sentiment_word[r * vo..(r + 1) * vo];
            let per: f64 = counts
                .iter()
                .zip(prior)
                .filter(|(&c, _)| c > 0)
                .map(|(&c, &q)| ln_gamma(q + f64::from(c)) - ln_gamma(q))
                .sum();
            let total = self.word_prior_total[r];
            ll += per - (ln_gamma(total + f64::from(self.sentiment_total[r])) - ln_gamma(total));
        }
        ll
    }

    pub fn audit(&self) -> Result<()> {
        let mut fresh = self.clone();
        fresh.doc_sentiment.iter_mut().for_each(|c| *c = 0);
        fresh.doc_total.iter_mut().for_each(|c| *c = 0);
        fresh.sentiment_word.iter_mut().for_each(|c| *c = 0);
        fresh.sentiment_total = [0; 3];
        for i in 0..self.corpus.num_pairs() {
            fresh.add(i, self.sentiments[i]);
        }
        if &fresh != self {
            return Err(Error::Audit("LDA-DP counts do not match assignments".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, EmotionIndicator, PairIds, Tweet};
    use crate::util::stream_rng;

    fn corpus(docs: &[&[u32]], vo: usize) -> FlatCorpus {
        let docs: Vec<Document> = docs
            .iter()
            .enumerate()
            .map(|(d, os)| Document {
                doc_id: d.to_string(),
                tweets: vec![Tweet {
                    tweet_id: d.to_string(),
                    text: String::new(),
                    emotion: EmotionIndicator::Unobserved,
                    label: None,
                    pairs: os.iter().map(|&o| PairIds { target: 0, opinion: o }).collect(),
                }],
            })
            .collect();
        FlatCorpus::with_sizes(&docs, 1, vo).unwrap()
    }

    #[test]
    fn single_word_posterior_follows_lambda() {
        // rows of λ have equal sums, so the word-prior normalisers cancel
        let lambda = [vec![0.9, 0.05, 0.05], vec![0.05, 0.9, 0.05], vec![0.05, 0.05, 0.9]];
        let mut s = LdaDpState::init(corpus(&[&[2]], 3), &lambda, LdaDpPriors::default(), &mut stream_rng(1, 0)).unwrap();
        s.remove(0);
        let w = s.weights(0);
        let total: f64 = w.iter().sum();
        let want = [0.05, 0.05, 0.9];
        for r in 0..3 {
            assert!((w[r] / total - want[r]).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_lambda_is_symmetric_lda() {
        let lambda: [Vec<f64>; 3] = std::array::from_fn(|_| vec![1.0 / 3.0; 4]);
        let c = corpus(&[&[0, 1, 1], &[2, 3]], 4);
        let s = LdaDpState::init(c, &lambda, LdaDpPriors::default(), &mut stream_rng(2, 0)).unwrap();
        let mut swapped = s.clone();
        for i in 0..5 {
            swapped.remove(i);
        }
        for i in 0..5 {
            let r = s.sentiments[i];
            let flip = Sentiment::from_index(2 - r.index());
            swapped.add(i, flip);
        }
        assert!((swapped.log_likelihood() - s.log_likelihood()).abs() < 1e-12);
    }

    #[test]
    fn lexicon_words_pull_their_sentiment() {
        // words 0-2 are positive, 3-4 unlisted; a strong prior scale makes λ dominate
        let u = 1.0 / 3.0;
        let lambda = [
            vec![0.05, 0.05, 0.05, u, u],
            vec![0.05, 0.05, 0.05, u, u],
            vec![0.9, 0.9, 0.9, u, u],
        ];
        let docs: Vec<Vec<u32>> = (0..30).map(|d| vec![(d % 3) as u32, ((d + 1) % 3) as u32, 0, 1]).collect();
        let refs: Vec<&[u32]> = docs.iter().map(|d| d.as_slice()).collect();
        let priors = LdaDpPriors { doc: 0.5, word_scale: 30.0 };
        let mut s = LdaDpState::init(corpus(&refs, 5), &lambda, priors, &mut stream_rng(3, 0)).unwrap();
        let mut rng = stream_rng(3, 1);
        for _ in 0..100 {
            for i in 0..s.corpus.num_pairs() {
                s.resample(i, &mut rng);
            }
        }
        s.audit().unwrap();
        let pos = s.sentiments.iter().filter(|&&r| r == Sentiment::Positive).count();
        assert!(pos * 2 > s.sentiments.len(), "{pos} of {}", s.sentiments.len());
    }
}
