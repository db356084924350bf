//! Sentiment lexicons and the lexicon-driven opinion priors.
//!
//! Training lexicons give a scalar score `S_v ∈ [−5, 5]` per opinion word; unlisted
//! words score 0. The score expands into exponents `X_{r,v}` for the three sentiments
//! and the prior over opinion words for sentiment `r` is `φ*_{r,v} ∝ (1+b)^{X_{r,v}}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::Sentiment;

pub const SCORE_LIMIT: f64 = 5.0;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SentimentLexicon {
    scores: BTreeMap<String, f64>,
    declared_range: (f64, f64),
}

impl SentimentLexicon {
    pub fn from_scores(scores: impl IntoIterator<Item = (String, f64)>) -> Self {
        let scores: BTreeMap<String, f64> =
            scores.into_iter().map(|(w, s)| (w.to_lowercase(), s)).collect();
        let range = scores
            .values()
            .fold((0.0f64, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
        SentimentLexicon {
            scores,
            declared_range: range,
        }
    }

    /// `word<TAB>score` lines in word order, readable by [`SentimentLexicon::parse`].
    pub fn to_tsv(&self) -> String {
        let (lo, hi) = self.declared_range;
        let mut out = format!("# range: {lo} {hi}\n");
        for (w, s) in &self.scores {
            out.push_str(&format!("{w}\t{s}\n"));
        }
        out
    }

    /// Score of `word`, 0 when unlisted.
    pub fn score(&self, word: &str) -> f64 {
        self.scores.get(word).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn declared_range(&self) -> (f64, f64) {
        self.declared_range
    }

    /// Rescales onto `[−5, 5]` keeping 0 fixed: positives by `5/max`, negatives by
    /// `5/|min|`.
    pub fn normalized(&self) -> SentimentLexicon {
        let (lo, hi) = self.declared_range;
        let scores = self
            .scores
            .iter()
            .map(|(w, &s)| {
                let v = if s > 0.0 && hi > 0.0 {
                    s * SCORE_LIMIT / hi
                } else if s < 0.0 && lo < 0.0 {
                    s * SCORE_LIMIT / -lo
                } else {
                    0.0
                };
                (w.clone(), v)
            })
            .collect();
        SentimentLexicon {
            scores,
            declared_range: (if lo < 0.0 { -SCORE_LIMIT } else { 0.0 }, if hi > 0.0 { SCORE_LIMIT } else { 0.0 }),
        }
    }

    /// Loads `word<TAB>score` lines; `#` comments and blank lines are skipped.
    pub fn load(path: &Path, normalize: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, normalize)
    }

    pub fn parse(text: &str, path: &Path, normalize: bool) -> Result<Self> {
        let mut scores: BTreeMap<String, f64> = BTreeMap::new();
        let mut declared: Option<(f64, f64)> = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                // "# range: -1 1" declares the source scale
                if let Some(r) = comment.trim().strip_prefix("range:") {
                    let parts: Vec<f64> =
                        r.split_whitespace().filter_map(|p| p.parse().ok()).collect();
                    if let [lo, hi] = parts[..] {
                        declared = Some((lo, hi));
                    }
                }
                continue;
            }
            let mut fields = line.split('\t');
            let (word, score) = match (fields.next(), fields.next()) {
                (Some(w), Some(s)) if !w.trim().is_empty() => (w.trim().to_lowercase(), s.trim()),
                _ => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: i + 1,
                        message: "expected `word<TAB>score`".into(),
                    })
                }
            };
            let score: f64 = score.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("score `{score}` is not a number"),
            })?;
            if !score.is_finite() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "score is not finite".into(),
                });
            }
            if scores.insert(word.clone(), score).is_some() {
                log::warn!("{}:{}: duplicate entry `{word}`, keeping the last", path.display(), i + 1);
            }
        }
        if scores.is_empty() {
            return Err(Error::EmptyCorpus(format!("lexicon {} has no entries", path.display())));
        }
        let mut lexicon = SentimentLexicon::from_scores(scores);
        if let Some(range) = declared {
            lexicon.declared_range = range;
        }
        Ok(if normalize { lexicon.normalized() } else { lexicon })
    }
}

/// Positive/negative affinities `(Z⁺, Z⁻) ∈ [0,1]²` used to score learned
/// distributions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffinityLexicon {
    affinities: BTreeMap<String, (f64, f64)>,
}

impl AffinityLexicon {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, f64, f64)>) -> Self {
        AffinityLexicon {
            affinities: entries
                .into_iter()
                .map(|(w, p, n)| (w.to_lowercase(), (p.clamp(0.0, 1.0), n.clamp(0.0, 1.0))))
                .collect(),
        }
    }

    /// `word<TAB>pos<TAB>neg` lines in word order, readable by [`AffinityLexicon::parse`].
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (w, (p, n)) in &self.affinities {
            out.push_str(&format!("{w}\t{p}\t{n}\n"));
        }
        out
    }

    pub fn get(&self, word: &str) -> (f64, f64) {
        self.affinities.get(word).copied().unwrap_or((0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.affinities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.affinities.is_empty()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses `word<TAB>pos<TAB>neg`; out-of-range values are clamped with a warning.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut affinities = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
            let [word, pos, neg] = fields[..] else {
                return Err(err("expected `word<TAB>pos<TAB>neg`".into()));
            };
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("`{s}` is not a number")))
            };
            let (p, n) = (parse(pos)?, parse(neg)?);
            if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&n) {
                log::warn!("{}:{}: affinity outside [0,1] clamped", path.display(), i + 1);
            }
            affinities.insert(word.trim().to_lowercase(), (p.clamp(0.0, 1.0), n.clamp(0.0, 1.0)));
        }
        Ok(AffinityLexicon { affinities })
    }
}

/// `X_{r,v}` for `r ∈ {−1, 0, +1}` over the opinion vocabulary:
/// `X₊ = S`, `X₀ = −|S|`, `X₋ = −S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentimentExponents {
    rows: [Vec<f64>; 3],
}

impl SentimentExponents {
    pub fn from_scores(scores: &[f64]) -> Self {
        SentimentExponents {
            rows: [
                scores.iter().map(|&s| -s).collect(),
                scores.iter().map(|&s| -s.abs()).collect(),
                scores.to_vec(),
            ],
        }
    }

    /// All-zero exponents: the prior is uniform whatever `b` is.
    pub fn zeros(size: usize) -> Self {
        Self::from_scores(&vec![0.0; size])
    }

    pub fn build(lexicon: &SentimentLexicon, vocab: &Vocabulary) -> Self {
        let scores: Vec<f64> = vocab.opinion_tokens().iter().map(|w| lexicon.score(w)).collect();
        Self::from_scores(&scores)
    }

    pub fn row(&self, r: Sentiment) -> &[f64] {
        &self.rows[r.index()]
    }

    pub fn len(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows[0].is_empty()
    }

    pub fn is_flat(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|&x| x == 0.0))
    }

    /// `φ*_r ∝ (1+b)^{X_r}` for each sentiment, computed in log space.
    pub fn prior(&self, strength: f64) -> Result<[Vec<f64>; 3]> {
        if !(strength > 0.0) || !strength.is_finite() {
            return Err(Error::invalid(format!("lexicon strength b = {strength} must be positive")));
        }
        let log_base = strength.ln_1p();
        Ok(std::array::from_fn(|r| softmax_scaled(&self.rows[r], log_base)))
    }
}

/// `exp(k·x_v) / Σ_j exp(k·x_j)` with max subtraction.
pub(crate) fn softmax_scaled(xs: &[f64], k: f64) -> Vec<f64> {
    let max = xs.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(k * x));
    let mut out: Vec<f64> = xs.iter().map(|&x| (k * x - max).exp()).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    out
}

/// LDA-DP word priors: `1/3` for unlisted words, otherwise `0.9` on the matching
/// sentiment and `0.05` elsewhere. Rows are indexed by [`Sentiment::index`].
pub fn lda_dp_lambda(lexicon: &SentimentLexicon, vocab: &Vocabulary) -> [Vec<f64>; 3] {
    let scores: Vec<f64> = vocab.opinion_tokens().iter().map(|w| lexicon.score(w)).collect();
    lambda_from_scores(&scores)
}

pub fn lambda_from_scores(scores: &[f64]) -> [Vec<f64>; 3] {
    let mut rows: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(scores.len()));
    for &s in scores {
        let polarity = if s > 0.0 {
            Some(Sentiment::Positive)
        } else if s < 0.0 {
            Some(Sentiment::Negative)
        } else {
            None
        };
        for r in Sentiment::ALL {
            rows[r.index()].push(match polarity {
                None => 1.0 / 3.0,
                Some(p) if p == r => 0.9,
                Some(_) => 0.05,
            });
        }
    }
    rows
}
