use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{symmetric_dm_log_likelihood, FlatCorpus};
use crate::error::{Error, Result};
use crate::util::sample_weighted;
use crate::Sentiment;

/// Symmetric Dirichlet priors of ILDA.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IldaPriors {
    /// Document aspect mixture.
    pub theta: f64,
    /// Aspect sentiment mixture.
    pub eta: f64,
    /// Aspect target distribution.
    pub psi: f64,
    /// Sentiment opinion distribution.
    pub phi: f64,
}

impl Default for IldaPriors {
    fn default() -> Self {
        IldaPriors {
            theta: 0.1,
            eta: 0.1,
            psi: 0.1,
            phi: 0.1,
        }
    }
}

impl IldaPriors {
    pub fn validate(&self) -> Result<()> {
        for x in [self.theta, self.eta, self.psi, self.phi] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::invalid(format!("ILDA priors must be positive, got {self:?}")));
            }
        }
        Ok(())
    }
}

/// Collapsed ILDA: `a ~ θ_d`, `r ~ η_a`, `t ~ ψ_a`, `o ~ φ_r`, all Dirichlet-multinomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IldaState {
    pub(crate) corpus: FlatCorpus,
    pub(crate) priors: IldaPriors,
    pub(crate) num_aspects: usize,
    pub(crate) aspects: Vec<u32>,
    pub(crate) sentiments: Vec<Sentiment>,
    doc_aspect: Vec<u32>,
    doc_total: Vec<u32>,
    aspect_sentiment: Vec<u32>,
    aspect_target: Vec<u32>,
    aspect_total: Vec<u32>,
    sentiment_opinion: Vec<u32>,
    sentiment_total: [u32; 3],
}

impl IldaState {
    pub fn init<R: Rng + ?Sized>(
        corpus: FlatCorpus,
        num_aspects: usize,
        priors: IldaPriors,
        rng: &mut R,
    ) -> Result<Self> {
        if num_aspects < 1 {
            return Err(Error::invalid("ILDA needs at least one aspect"));
        }
        priors.validate()?;
        let n = corpus.num_pairs();
        let mut s = IldaState {
            doc_aspect: vec![0; corpus.docs.len() * num_aspects],
            doc_total: vec![0; corpus.docs.len()],
            aspect_sentiment: vec![0; num_aspects * 3],
            aspect_target: vec![0; num_aspects * corpus.num_targets],
            aspect_total: vec![0; num_aspects],
            sentiment_opinion: vec![0; 3 * corpus.num_opinions],
            sentiment_total: [0; 3],
            aspects: vec![0; n],
            sentiments: vec![Sentiment::Neutral; n],
            corpus,
            priors,
            num_aspects,
        };
        for i in 0..n {
            let a = rng.random_range(0..num_aspects as u32);
            let r = Sentiment::from_index(rng.random_range(0..3));
            s.add(i, a, r);
        }
        Ok(s)
    }

    pub fn corpus(&self) -> &FlatCorpus {
        &self.corpus
    }

    pub fn priors(&self) -> IldaPriors {
        self.priors
    }

    pub fn num_aspects(&self) -> usize {
        self.num_aspects
    }

    pub fn aspects(&self) -> &[u32] {
        &self.aspects
    }

    pub fn sentiments(&self) -> &[Sentiment] {
        &self.sentiments
    }

    pub fn live_aspects(&self) -> usize {
        self.aspect_total.iter().filter(|&&c| c > 0).count()
    }

    fn update(&mut self, i: usize, a: u32, r: Sentiment, up: bool) {
        let d = self.corpus.pair_doc(i);
        let p = self.corpus.pairs[i];
        let (a, ri) = (a as usize, r.index());
        let (vt, vo, na) = (self.corpus.num_targets, self.corpus.num_opinions, self.num_aspects);
        let cells = [
            &mut self.doc_aspect[d * na + a],
            &mut self.doc_total[d],
            &mut self.aspect_sentiment[a * 3 + ri],
            &mut self.aspect_target[a * vt + p.target as usize],
            &mut self.aspect_total[a],
            &mut self.sentiment_opinion[ri * vo + p.opinion as usize],
            &mut self.sentiment_total[ri],
        ];
        for c in cells {
            if up {
                *c += 1;
            } else {
                *c -= 1;
            }
        }
    }

    pub fn add(&mut self, i: usize, a: u32, r: Sentiment) {
        self.update(i, a, r, true);
        self.aspects[i] = a;
        self.sentiments[i] = r;
    }

    pub fn remove(&mut self, i: usize) {
        self.update(i, self.aspects[i], self.sentiments[i], false);
    }

    /// Unnormalised joint conditional of `(a, r)` for a removed pair, laid out `a * 3 + r`.
    pub(crate) fn weights(&self, i: usize, out: &mut Vec<f64>) {
        let d = self.corpus.pair_doc(i);
        let p = self.corpus.pairs[i];
        let pr = &self.priors;
        let (vt, na) = (self.corpus.num_targets as f64, self.num_aspects);
        let phi: [f64; 3] = std::array::from_fn(|r| self.phi(Sentiment::from_index(r), p.opinion));
        out.clear();
        for a in 0..na {
            let theta = f64::from(self.doc_aspect[d * na + a]) + pr.theta;
            let denom = f64::from(self.aspect_total[a]);
            let psi = (f64::from(self.aspect_target[a * self.corpus.num_targets + p.target as usize]) + pr.psi)
                / (denom + vt * pr.psi);
            for (r, phi_r) in phi.iter().enumerate() {
                let eta = (f64::from(self.aspect_sentiment[a * 3 + r]) + pr.eta) / (denom + 3.0 * pr.eta);
                out.push(theta * psi * eta * phi_r);
            }
        }
    }

    /// One collapsed Gibbs update of pair `i`.
    pub fn resample<R: Rng + ?Sized>(&mut self, i: usize, buf: &mut Vec<f64>, rng: &mut R) {
        self.remove(i);
        self.weights(i, buf);
        let k = sample_weighted(buf, rng);
        self.add(i, (k / 3) as u32, Sentiment::from_index(k % 3));
    }

    /// `ψ_a` posterior mean of target `t`.
    pub fn psi(&self, a: usize, t: u32) -> f64 {
        (f64::from(self.aspect_target[a * self.corpus.num_targets + t as usize]) + self.priors.psi)
            / (f64::from(self.aspect_total[a]) + self.corpus.num_targets as f64 * self.priors.psi)
    }

    /// `η_a` posterior mean of sentiment `r`.
    pub fn eta(&self, a: usize, r: Sentiment) -> f64 {
        (f64::from(self.aspect_sentiment[a * 3 + r.index()]) + self.priors.eta)
            / (f64::from(self.aspect_total[a]) + 3.0 * self.priors.eta)
    }

    /// `φ_r` posterior mean of opinion `o`.
    pub fn phi(&self, r: Sentiment, o: u32) -> f64 {
        let vo = self.corpus.num_opinions;
        (f64::from(self.sentiment_opinion[r.index() * vo + o as usize]) + self.priors.phi)
            / (f64::from(self.sentiment_total[r.index()]) + vo as f64 * self.priors.phi)
    }

    /// Sum of the Dirichlet-multinomial terms for `θ`, `η`, `ψ` and `φ`.
    pub fn log_likelihood(&self) -> f64 {
        let (na, vt, vo) = (self.num_aspects, self.corpus.num_targets, self.corpus.num_opinions);
        let pr = &self.priors;
        let mut ll = 0.0;
        for d in 0..self.corpus.docs.len() {
            ll += symmetric_dm_log_likelihood(&self.doc_aspect[d * na..(d + 1) * na], u64::from(self.doc_total[d]), pr.theta);
        }
        for a in 0..na {
            let total = u64::from(self.aspect_total[a]);
            ll += symmetric_dm_log_likelihood(&self.aspect_sentiment[a * 3..a * 3 + 3], total, pr.eta);
            ll += symmetric_dm_log_likelihood(&self.aspect_target[a * vt..(a + 1) * vt], total, pr.psi);
        }
        for r in 0..3 {
            ll += symmetric_dm_log_likelihood(
                &self.sentiment_opinion[r * vo..(r + 1) * vo],
                u64::from(self.sentiment_total[r]),
                pr.phi,
            );
        }
        ll
    }

    pub fn audit(&self) -> Result<()> {
        let mut fresh = self.clone();
        for v in [
            &mut fresh.doc_aspect,
            &mut fresh.doc_total,
            &mut fresh.aspect_sentiment,
            &mut fresh.aspect_target,
            &mut fresh.aspect_total,
            &mut fresh.sentiment_opinion,
        ] {
            v.iter_mut().for_each(|c| *c = 0);
        }
        fresh.sentiment_total = [0; 3];
        for i in 0..self.corpus.num_pairs() {
            if self.aspects[i] as usize >= self.num_aspects {
                return Err(Error::Audit(format!("pair {i} aspect out of range")));
            }
            fresh.add(i, self.aspects[i], self.sentiments[i]);
        }
        if &fresh != self {
            return Err(Error::Audit("ILDA counts do not match assignments".into()));
        }
        Ok(())
    }
}
