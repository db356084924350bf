use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::model::{IldaState, LdaDpState, ModelState, TotmState};
use crate::{Polarity, Sentiment};

/// A model exposing a sentiment-level opinion distribution `φ_r`.
pub trait SentimentWords {
    fn num_opinions(&self) -> usize;

    fn sentiment_word_prob(&self, r: Sentiment, o: u32) -> f64;

    /// `φ_r` as a dense, normalised vector.
    fn sentiment_distribution(&self, r: Sentiment) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.num_opinions() as u32).map(|o| self.sentiment_word_prob(r, o)).collect();
        let z: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= z);
        v
    }
}

impl SentimentWords for TotmState {
    fn num_opinions(&self) -> usize {
        self.corpus().num_opinions
    }

    fn sentiment_word_prob(&self, r: Sentiment, o: u32) -> f64 {
        self.sentiment_predictive(r, o)
    }
}

impl SentimentWords for IldaState {
    fn num_opinions(&self) -> usize {
        self.corpus().num_opinions
    }

    fn sentiment_word_prob(&self, r: Sentiment, o: u32) -> f64 {
        self.phi(r, o)
    }
}

impl SentimentWords for LdaDpState {
    fn num_opinions(&self) -> usize {
        self.corpus().num_opinions
    }

    fn sentiment_word_prob(&self, r: Sentiment, o: u32) -> f64 {
        self.phi(r, o)
    }
}

impl SentimentWords for ModelState {
    fn num_opinions(&self) -> usize {
        self.corpus().num_opinions
    }

    fn sentiment_word_prob(&self, r: Sentiment, o: u32) -> f64 {
        match self {
            ModelState::Totm(s) => s.sentiment_word_prob(r, o),
            ModelState::Ilda(s) => s.sentiment_word_prob(r, o),
            ModelState::Ldadp(s) => s.sentiment_word_prob(r, o),
        }
    }
}

/// Polarity with the higher likelihood `Σ log φ_{r,o}` over the given opinion
/// words; ties go to positive. `None` (abstain) when no word is in vocabulary.
pub fn classify_polarity<M: SentimentWords + ?Sized>(opinions: &[u32], model: &M) -> Option<Polarity> {
    let v = model.num_opinions() as u32;
    let usable: Vec<u32> = opinions.iter().copied().filter(|&o| o < v).collect();
    if usable.is_empty() {
        return None;
    }
    let score = |r| usable.iter().map(|&o| model.sentiment_word_prob(r, o).ln()).sum::<f64>();
    if score(Sentiment::Positive) >= score(Sentiment::Negative) {
        Some(Polarity::Positive)
    } else {
        Some(Polarity::Negative)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelledPrediction {
    pub tweet_id: String,
    pub gold: Polarity,
    pub predicted: Option<Polarity>,
}

/// Classifies every labelled tweet once (the first occurrence of each tweet id).
pub fn classify_labelled<M: SentimentWords + ?Sized>(docs: &[Document], model: &M) -> Vec<LabelledPrediction> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for tweet in docs.iter().flat_map(|d| &d.tweets) {
        let Some(gold) = tweet.label else { continue };
        if !seen.insert(tweet.tweet_id.as_str()) {
            continue;
        }
        let opinions: Vec<u32> = tweet.pairs.iter().map(|p| p.opinion).collect();
        out.push(LabelledPrediction {
            tweet_id: tweet.tweet_id.clone(),
            gold,
            predicted: classify_polarity(&opinions, model),
        });
    }
    out
}

/// Binary metrics with positive as the positive class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
    pub abstained: usize,
    /// No positive predictions: precision reported as 0.
    pub precision_undefined: bool,
    /// No positive gold labels: recall reported as 0.
    pub recall_undefined: bool,
}

/// Accuracy, precision, recall and F1; abstentions (`None`) are excluded from
/// every denominator and counted separately.
pub fn classification_metrics(predictions: &[Option<Polarity>], gold: &[Polarity]) -> Result<ClassificationReport> {
    if predictions.len() != gold.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    let (mut tp, mut fp, mut tn, mut fn_, mut abstained) = (0, 0, 0, 0, 0);
    for (p, g) in predictions.iter().zip(gold) {
        match (p, g) {
            (None, _) => abstained += 1,
            (Some(Polarity::Positive), Polarity::Positive) => tp += 1,
            (Some(Polarity::Positive), Polarity::Negative) => fp += 1,
            (Some(Polarity::Negative), Polarity::Negative) => tn += 1,
            (Some(Polarity::Negative), Polarity::Positive) => fn_ += 1,
        }
    }
    let decided = tp + fp + tn + fn_;
    if decided == 0 {
        return Err(Error::EmptyCorpus("no classified examples".into()));
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ClassificationReport {
        accuracy: ratio(tp + tn, decided),
        precision,
        recall,
        f1,
        true_positive: tp,
        false_positive: fp,
        true_negative: tn,
        false_negative: fn_,
        abstained,
        precision_undefined: tp + fp == 0,
        recall_undefined: tp + fn_ == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Polarity::{Negative as N, Positive as P};

    struct Table(Vec<[f64; 3]>);

    impl SentimentWords for Table {
        fn num_opinions(&self) -> usize {
            self.0.len()
        }

        fn sentiment_word_prob(&self, r: Sentiment, o: u32) -> f64 {
            self.0[o as usize][r.index()]
        }
    }

    #[test]
    fn hand_counted_metrics() {
        let r = classification_metrics(&[Some(P), Some(P), Some(N), Some(N)], &[P, N, N, N]).unwrap();
        assert_eq!(r.accuracy, 0.75);
        assert_eq!(r.precision, 0.5);
        assert_eq!(r.recall, 1.0);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn undefined_precision_is_flagged() {
        let r = classification_metrics(&[Some(N), Some(N), None], &[P, N, P]).unwrap();
        assert!(r.precision_undefined);
        assert_eq!((r.precision, r.recall, r.f1, r.abstained), (0.0, 0.0, 0.0, 1));
        assert_eq!(r.accuracy, 0.5);
        assert!(classification_metrics(&[], &[]).is_err());
        assert!(classification_metrics(&[None], &[P, N]).is_err());
    }

    #[test]
    fn argmax_and_ties() {
        let t = Table(vec![[0.2, 0.3, 0.5], [0.4, 0.2, 0.4], [0.6, 0.3, 0.1]]);
        assert_eq!(classify_polarity(&[0], &t), Some(P));
        assert_eq!(classify_polarity(&[1], &t), Some(P));
        assert_eq!(classify_polarity(&[2], &t), Some(N));
        assert_eq!(classify_polarity(&[], &t), None);
        assert_eq!(classify_polarity(&[17], &t), None);
        let scaled = Table(t.0.iter().map(|r| r.map(|x| x * 7.0)).collect());
        for o in 0..3 {
            assert_eq!(classify_polarity(&[o, 0], &t), classify_polarity(&[o, 0], &scaled));
        }
    }
}
