use serde::{Deserialize, Serialize};

use super::classify::SentimentWords;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::lexicon::AffinityLexicon;
use crate::{Polarity, Sentiment};

/// `H(p, q) = sqrt(Σ (√p − √q)²) / √2`, in `[0, 1]`.
pub fn hellinger(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!(
            "distributions over {} and {} items",
            p.len(),
            q.len()
        )));
    }
    let s: f64 = p.iter().zip(q).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
    Ok((s.sqrt() / std::f64::consts::SQRT_2).min(1.0))
}

/// Symmetric matrix of pairwise Hellinger distances with a zero diagonal.
pub fn hellinger_matrix(dists: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = dists.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let h = hellinger(&dists[i], &dists[j])?;
            m[i][j] = h;
            m[j][i] = h;
        }
    }
    Ok(m)
}

/// Per-opinion affinity `Z⁺` (positive side) or `Z⁻` (negative side).
pub fn affinity_vector(lexicon: &AffinityLexicon, vocab: &Vocabulary, side: Polarity) -> Vec<f64> {
    vocab
        .opinion_tokens()
        .iter()
        .map(|w| {
            let (pos, neg) = lexicon.get(w);
            match side {
                Polarity::Positive => pos,
                Polarity::Negative => neg,
            }
        })
        .collect()
}

/// Expected affinity `Σ_v Z_v φ_v`.
pub fn score_against(phi: &[f64], z: &[f64]) -> Result<f64> {
    if phi.len() != z.len() {
        return Err(Error::invalid(format!(
            "distribution over {} opinions, affinities for {}",
            phi.len(),
            z.len()
        )));
    }
    Ok(phi.iter().zip(z).map(|(p, z)| p * z).sum())
}

/// Lexicon score of `φ_r`: `Z⁺` for the positive side, `Z⁻` for the negative one.
pub fn sentiment_score(phi: &[f64], lexicon: &AffinityLexicon, vocab: &Vocabulary, side: Polarity) -> Result<f64> {
    score_against(phi, &affinity_vector(lexicon, vocab, side))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentimentScores {
    /// `Score(φ₊₁, Z⁺)`.
    pub positive: f64,
    /// `Score(φ₋₁, Z⁻)`.
    pub negative: f64,
}

pub fn sentiment_scores<M: SentimentWords + ?Sized>(
    model: &M,
    lexicon: &AffinityLexicon,
    vocab: &Vocabulary,
) -> Result<SentimentScores> {
    Ok(SentimentScores {
        positive: sentiment_score(
            &model.sentiment_distribution(Sentiment::Positive),
            lexicon,
            vocab,
            Polarity::Positive,
        )?,
        negative: sentiment_score(
            &model.sentiment_distribution(Sentiment::Negative),
            lexicon,
            vocab,
            Polarity::Negative,
        )?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hellinger_identities() {
        assert_eq!(hellinger(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!((hellinger(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        let h = hellinger(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        let expect = ((1.0 - 0.5f64.sqrt()).powi(2) + 0.5).sqrt() / 2f64.sqrt();
        assert!((h - expect).abs() < 1e-15);
        assert!((h - 0.5412).abs() < 5e-5);
        assert!(hellinger(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn matrix_is_symmetric_with_zero_diagonal() {
        let d = vec![vec![0.5, 0.5, 0.0], vec![0.1, 0.2, 0.7], vec![0.0, 0.0, 1.0]];
        let m = hellinger_matrix(&d).unwrap();
        for i in 0..3 {
            assert_eq!(m[i][i], 0.0);
            for j in 0..3 {
                assert_eq!(m[i][j], m[j][i]);
                assert!((0.0..=1.0).contains(&m[i][j]));
                for k in 0..3 {
                    assert!(m[i][k] <= m[i][j] + m[j][k] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn score_of_degenerate_distribution() {
        let vocab = Vocabulary::from_tokens(&["x"], &["active", "supreme"]);
        let lex = AffinityLexicon::from_entries([("active".into(), 0.5, 0.125), ("supreme".into(), 0.75, 0.0)]);
        assert_eq!(sentiment_score(&[0.0, 1.0], &lex, &vocab, Polarity::Positive).unwrap(), 0.75);
        assert_eq!(sentiment_score(&[0.5, 0.5], &lex, &vocab, Polarity::Negative).unwrap(), 0.0625);
        assert_eq!(score_against(&[0.5, 0.5], &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn score_is_linear_in_affinities() {
        let phi = [0.2, 0.5, 0.3];
        let (z1, z2) = ([0.1, 0.9, 0.4], [0.7, 0.0, 1.0]);
        let a = 0.35;
        let mix: Vec<f64> = z1.iter().zip(&z2).map(|(x, y)| a * x + (1.0 - a) * y).collect();
        let lhs = score_against(&phi, &mix).unwrap();
        let rhs = a * score_against(&phi, &z1).unwrap() + (1.0 - a) * score_against(&phi, &z2).unwrap();
        assert!((lhs - rhs).abs() < 1e-15);
    }
}
