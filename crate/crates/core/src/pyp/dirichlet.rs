use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Dirichlet-multinomial node with an explicit (possibly asymmetric) prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletNode {
    prior: Vec<f64>,
    counts: Vec<u32>,
    total: u64,
}

impl DirichletNode {
    pub fn new(prior: Vec<f64>) -> Result<Self> {
        if prior.is_empty() || prior.iter().any(|&q| !(q > 0.0) || !q.is_finite()) {
            return Err(Error::invalid(format!("Dirichlet prior {prior:?} must be positive")));
        }
        let counts = vec![0; prior.len()];
        Ok(DirichletNode {
            prior,
            counts,
            total: 0,
        })
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn add(&mut self, k: usize) {
        self.counts[k] += 1;
        self.total += 1;
    }

    pub fn remove(&mut self, k: usize) {
        assert!(self.counts[k] > 0, "category {k} is empty");
        self.counts[k] -= 1;
        self.total -= 1;
    }

    /// `(q_k + c_k) / (Σq + C)`.
    pub fn predictive(&self, k: usize) -> f64 {
        let q: f64 = self.prior.iter().sum();
        (self.prior[k] + f64::from(self.counts[k])) / (q + self.total as f64)
    }

    /// `Σ_k [lnΓ(q_k + c_k) − lnΓ(q_k)] − [lnΓ(Σq + C) − lnΓ(Σq)]`.
    pub fn log_likelihood(&self) -> f64 {
        let q: f64 = self.prior.iter().sum();
        let per: f64 = self
            .prior
            .iter()
            .zip(&self.counts)
            .filter(|(_, &c)| c > 0)
            .map(|(&qk, &c)| ln_gamma(qk + f64::from(c)) - ln_gamma(qk))
            .sum();
        per - (ln_gamma(q + self.total as f64) - ln_gamma(q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_prior() {
        assert!(DirichletNode::new(vec![0.9, 0.0, 0.05]).is_err());
    }

    #[test]
    fn sequential_predictives_multiply_to_likelihood() {
        let mut node = DirichletNode::new(vec![0.9, 0.05, 0.05]).unwrap();
        let mut log_p = 0.0;
        for &k in &[0usize, 0, 2, 1, 0, 2] {
            log_p += node.predictive(k).ln();
            node.add(k);
        }
        assert!((log_p - node.log_likelihood()).abs() < 1e-12);
    }

    #[test]
    fn empty_node_predictive_is_prior_mean() {
        let node = DirichletNode::new(vec![0.05, 0.05, 0.9]).unwrap();
        assert!((node.predictive(2) - 0.9).abs() < 1e-15);
        assert_eq!(node.log_likelihood(), 0.0);
    }
}
