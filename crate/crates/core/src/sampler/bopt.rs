//! MAP gradient ascent for the lexicon strength `b`.

use serde::{Deserialize, Serialize};

use crate::lexicon::SentimentExponents;
use crate::Sentiment;

/// Smallest value `b` may take.
pub const B_FLOOR: f64 = 1e-6;

/// `(c_rv)` per sentiment, dense over the opinion vocabulary.
pub type SentimentCounts = [Vec<f64>; 3];

fn log_normaliser(x: &[f64], k: f64) -> (f64, f64) {
    // returns (log Σ_v e^{k x_v}, E[x]) under the softmax
    let max = x.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(k * v));
    let mut z = 0.0;
    let mut ex = 0.0;
    for &v in x {
        let w = (k * v - max).exp();
        z += w;
        ex += w * v;
    }
    (max + z.ln(), ex / z)
}

/// `l(b) = log p(b) + Σ_r Σ_v c_rv log φ*_rv(b)` with a Gamma(1, 1) prior on `b`.
pub fn b_objective(exponents: &SentimentExponents, counts: &SentimentCounts, b: f64) -> f64 {
    let k = b.ln_1p();
    let mut l = -b;
    for r in Sentiment::ALL {
        let x = exponents.row(r);
        let c = &counts[r.index()];
        let (log_z, _) = log_normaliser(x, k);
        let total: f64 = c.iter().sum();
        let dot: f64 = c.iter().zip(x).map(|(c, x)| c * x).sum();
        l += k * dot - total * log_z;
    }
    l
}

/// `l'(b) = 1/(1+b) · Σ_r Σ_v c_rv (X_rv − E_{φ*_r}[X_r]) − 1`.
pub fn b_gradient(exponents: &SentimentExponents, counts: &SentimentCounts, b: f64) -> f64 {
    let k = b.ln_1p();
    let mut g = 0.0;
    for r in Sentiment::ALL {
        let x = exponents.row(r);
        let c = &counts[r.index()];
        let (_, mean) = log_normaliser(x, k);
        g += c.iter().zip(x).map(|(c, x)| c * (x - mean)).sum::<f64>();
    }
    g / (1.0 + b) - 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BStep {
    pub b: f64,
    pub proposal: f64,
    pub objective: f64,
    pub proposal_objective: f64,
    pub rate: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BSearch {
    pub b: f64,
    pub steps: Vec<BStep>,
}

/// Gradient ascent from `b0` with rate `rate0`, halving the rate and rejecting
/// any step that lowers `l`. Stops when a step moves `b` by less than `1e-6` or
/// after `max_steps` steps.
pub fn optimize_b(
    exponents: &SentimentExponents,
    counts: &SentimentCounts,
    b0: f64,
    rate0: f64,
    max_steps: usize,
) -> BSearch {
    let mut b = b0.max(B_FLOOR);
    let mut rate = rate0;
    let mut l = b_objective(exponents, counts, b);
    let mut steps = Vec::new();
    for _ in 0..max_steps {
        let g = b_gradient(exponents, counts, b);
        let mut proposal = b + rate * g;
        if proposal < B_FLOOR {
            log::debug!("b step to {proposal} clamped to {B_FLOOR}");
            proposal = B_FLOOR;
        }
        let lp = b_objective(exponents, counts, proposal);
        let accepted = lp >= l;
        steps.push(BStep {
            b,
            proposal,
            objective: l,
            proposal_objective: lp,
            rate,
            accepted,
        });
        let moved = (proposal - b).abs();
        if accepted {
            b = proposal;
            l = lp;
        } else {
            rate /= 2.0;
        }
        if moved < 1e-6 {
            break;
        }
    }
    if b <= B_FLOOR {
        log::warn!("lexicon strength b reached the floor {B_FLOOR}");
    }
    BSearch { b, steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use crate::util::stream_rng;

    fn fixture(seed: u64) -> (SentimentExponents, SentimentCounts, f64) {
        let mut rng = stream_rng(seed, 0);
        let v = rng.random_range(2..30);
        let scores: Vec<f64> = (0..v).map(|_| rng.random_range(-5.0..5.0)).collect();
        let counts = std::array::from_fn(|_| (0..v).map(|_| f64::from(rng.random_range(0..50u32))).collect());
        (SentimentExponents::from_scores(&scores), counts, rng.random_range(0.05..20.0))
    }

    #[test]
    fn gradient_matches_central_differences() {
        for seed in 0..20 {
            let (x, c, b) = fixture(seed);
            let h = 1e-5;
            let fd = (b_objective(&x, &c, b + h) - b_objective(&x, &c, b - h)) / (2.0 * h);
            let g = b_gradient(&x, &c, b);
            assert!(((g - fd) / g).abs() < 1e-4, "seed {seed}: {g} vs {fd}");
        }
    }

    #[test]
    fn flat_exponents_push_b_to_floor() {
        let x = SentimentExponents::zeros(4);
        let c = std::array::from_fn(|_| vec![3.0; 4]);
        assert_eq!(b_gradient(&x, &c, 2.0), -1.0);
        let s = optimize_b(&x, &c, 10.0, 1.0, 200);
        assert_eq!(s.b, B_FLOOR);
    }

    #[test]
    fn counts_matching_the_prior_zero_the_data_term() {
        let x = SentimentExponents::from_scores(&[2.0, -1.0, 0.5, 0.0]);
        let b = 3.0;
        let prior = x.prior(b).unwrap();
        let c: SentimentCounts = std::array::from_fn(|r| prior[r].iter().map(|p| p * 1000.0).collect());
        assert!((b_gradient(&x, &c, b) + 1.0).abs() < 1e-9);
    }

    #[test]
    fn accepted_steps_never_decrease_the_objective() {
        for seed in 0..20 {
            let (x, c, b) = fixture(seed);
            let s = optimize_b(&x, &c, b, 1.0, 200);
            assert!(s.b >= B_FLOOR);
            for st in &s.steps {
                if st.accepted {
                    assert!(st.proposal_objective >= st.objective);
                }
            }
        }
    }

    #[test]
    fn lexicon_consistent_counts_raise_b() {
        let x = SentimentExponents::from_scores(&[4.0, -4.0, 0.0]);
        let c: SentimentCounts = [vec![0.0, 50.0, 1.0], vec![0.0, 0.0, 50.0], vec![50.0, 0.0, 1.0]];
        assert!(b_gradient(&x, &c, 0.01) > 0.0);
    }
}
