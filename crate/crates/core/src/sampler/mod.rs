//! Collapsed Gibbs sampling, hyperparameter updates and convergence control.

mod bopt;
mod select;
mod trace;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use bopt::{b_gradient, b_objective, optimize_b, BSearch, BStep, SentimentCounts, B_FLOOR};
pub use select::{select_num_aspects, AspectSelection};
pub use trace::{TraceLog, TraceRow};

use crate::error::{Error, Result};
use crate::lexicon::SentimentExponents;
use crate::model::{
    FlatCorpus, Hyperparameters, IldaPriors, IldaState, LdaDpPriors, LdaDpState, ModelKind,
    ModelSnapshot, ModelState, TotmState, MODEL_FORMAT_VERSION,
};
use crate::pyp::{sample_group, HyperPriors};
use crate::util::{sample_weighted, stream_rng};
use crate::Sentiment;

/// Which counts feed the `b` objective.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BCounts {
    /// Customers reaching `φ*_r`, i.e. the table counts of `φ_r`.
    #[default]
    Tables,
    /// Raw number of pairs assigned `(r, v)`.
    Assignments,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub max_sweeps: usize,
    pub convergence_window: usize,
    pub convergence_rel_tol: f64,
    /// Resample PYP hyperparameters (and re-optimise `b`) every this many sweeps; 0 disables.
    pub hyper_sample_every: usize,
    /// No hyperparameter or `b` updates before this sweep.
    pub hyper_burn_in: usize,
    pub optimize_b: bool,
    pub b_learning_rate: f64,
    pub b_max_steps: usize,
    pub b_counts: BCounts,
    /// Full count audit every this many sweeps; 0 disables.
    pub audit_every: usize,
    /// Visit pairs in a fresh random order each sweep instead of corpus order.
    pub shuffle: bool,
    /// Record wall-clock time per sweep in the trace (otherwise written as 0).
    pub trace_timing: bool,
    pub hyper_priors: HyperPriors,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            max_sweeps: 1000,
            convergence_window: 10,
            convergence_rel_tol: 0.001,
            hyper_sample_every: 5,
            hyper_burn_in: 0,
            optimize_b: true,
            b_learning_rate: 1.0,
            b_max_steps: 200,
            b_counts: BCounts::Tables,
            audit_every: 50,
            shuffle: false,
            trace_timing: false,
            hyper_priors: HyperPriors::default(),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.convergence_window < 2 {
            return Err(Error::invalid("convergence_window must be at least 2"));
        }
        if !(self.convergence_rel_tol > 0.0) {
            return Err(Error::invalid("convergence_rel_tol must be positive"));
        }
        if !(self.b_learning_rate > 0.0) {
            return Err(Error::invalid("b_learning_rate must be positive"));
        }
        Ok(())
    }
}

/// Everything needed to initialise any of the three models.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSetup {
    pub hyper: Hyperparameters,
    /// TOTM lexicon exponents; all zeros means no lexicon.
    pub exponents: SentimentExponents,
    /// LDA-DP word-prior rows.
    pub lambda: [Vec<f64>; 3],
    pub ilda_aspects: usize,
    pub ilda_priors: IldaPriors,
    pub ldadp_priors: LdaDpPriors,
}

impl ModelSetup {
    /// Setup without any lexicon.
    pub fn plain(num_opinions: usize, aspects: usize) -> Self {
        ModelSetup {
            hyper: Hyperparameters {
                max_aspects: aspects,
                ..Default::default()
            },
            exponents: SentimentExponents::zeros(num_opinions),
            lambda: std::array::from_fn(|_| vec![1.0 / 3.0; num_opinions]),
            ilda_aspects: aspects,
            ilda_priors: IldaPriors::default(),
            ldadp_priors: LdaDpPriors::default(),
        }
    }
}

/// Initial state of the requested model, drawn from RNG stream 0 of `seed`.
pub fn init_model(kind: ModelKind, corpus: FlatCorpus, setup: &ModelSetup, seed: u64) -> Result<ModelState> {
    let mut rng = stream_rng(seed, 0);
    Ok(match kind {
        ModelKind::Totm => ModelState::Totm(TotmState::init(
            corpus,
            setup.exponents.clone(),
            setup.hyper.clone(),
            &mut rng,
        )?),
        ModelKind::Ilda => {
            ModelState::Ilda(IldaState::init(corpus, setup.ilda_aspects, setup.ilda_priors, &mut rng)?)
        }
        ModelKind::Ldadp => {
            ModelState::Ldadp(LdaDpState::init(corpus, &setup.lambda, setup.ldadp_priors, &mut rng)?)
        }
    })
}

/// Counts of blocked removals in one sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub blocked_aspects: usize,
    pub blocked_sentiments: usize,
}

fn visit_order<R: Rng + ?Sized>(n: usize, shuffle: bool, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if shuffle {
        order.shuffle(rng);
    }
    order
}

/// One TOTM sweep: aspect then sentiment for every pair, then every unobserved emotion.
///
/// A pair whose removal is blocked keeps its current value for that step.
pub fn gibbs_sweep<R: Rng + ?Sized>(state: &mut TotmState, shuffle: bool, rng: &mut R) -> SweepStats {
    let mut stats = SweepStats::default();
    let mut weights = Vec::with_capacity(state.num_aspects());
    for i in visit_order(state.corpus().num_pairs(), shuffle, rng) {
        if state.remove_aspect(i, rng) {
            state.aspect_weights(i, &mut weights);
            let a = sample_weighted(&weights, rng) as u32;
            state.add_aspect(i, a, rng);
        } else {
            stats.blocked_aspects += 1;
        }
        if state.remove_sentiment(i, rng) {
            let w = state.sentiment_weights(i);
            let r = Sentiment::from_index(sample_weighted(&w, rng));
            state.add_sentiment(i, r, rng);
        } else {
            stats.blocked_sentiments += 1;
        }
    }
    for tw in 0..state.corpus().tweets.len() {
        state.resample_emotion(tw, rng);
    }
    stats
}

/// One collapsed sweep of ILDA over all pairs.
pub fn ilda_sweep<R: Rng + ?Sized>(state: &mut IldaState, shuffle: bool, rng: &mut R) {
    let mut buf = Vec::with_capacity(state.num_aspects() * 3);
    for i in visit_order(state.corpus().num_pairs(), shuffle, rng) {
        state.resample(i, &mut buf, rng);
    }
}

/// One collapsed sweep of LDA-DP over all opinion words.
pub fn ldadp_sweep<R: Rng + ?Sized>(state: &mut LdaDpState, shuffle: bool, rng: &mut R) {
    for i in visit_order(state.corpus().num_pairs(), shuffle, rng) {
        state.resample(i, rng);
    }
}

/// Auxiliary-variable update of the four tied PYP groups.
pub fn sample_pyp_hyperparameters<R: Rng + ?Sized>(state: &mut TotmState, priors: &HyperPriors, rng: &mut R) -> Result<()> {
    let mut hyper = state.hyper().clone();
    hyper.theta = sample_group(state.theta.iter(), hyper.theta, priors, rng);
    hyper.psi = sample_group(state.psi.iter(), hyper.psi, priors, rng);
    hyper.phi = sample_group(state.phi.iter(), hyper.phi, priors, rng);
    hyper.phi_leaf = sample_group(state.phi_leaf.values(), hyper.phi_leaf, priors, rng);
    state.set_pyp_params(&hyper)
}

/// Counts `c_rv` used by the `b` objective.
pub fn b_counts(state: &TotmState, which: BCounts) -> SentimentCounts {
    let v = state.corpus().num_opinions;
    match which {
        BCounts::Tables => std::array::from_fn(|r| {
            let mut dense = vec![0.0; v];
            for (o, t) in state.base_counts(Sentiment::from_index(r)) {
                dense[o as usize] = f64::from(t);
            }
            dense
        }),
        BCounts::Assignments => state.assignment_counts().map(|row| row.into_iter().map(f64::from).collect()),
    }
}

/// Re-optimises `b` for the current counts and installs it.
pub fn update_b(state: &mut TotmState, config: &SamplerConfig) -> Result<BSearch> {
    let counts = b_counts(state, config.b_counts);
    let search = optimize_b(
        state.exponents(),
        &counts,
        state.hyper().b,
        config.b_learning_rate,
        config.b_max_steps,
    );
    state.set_b(search.b)?;
    Ok(search)
}

/// True when each of the last `window` sweeps changed the log likelihood by at
/// most `tol` relative to the sweep before. `history[0]` is the initial state.
pub fn has_converged(history: &[f64], window: usize, tol: f64) -> bool {
    if history.len() < window + 1 {
        return false;
    }
    history[history.len() - window - 1..]
        .windows(2)
        .all(|w| ((w[1] - w[0]) / w[0]).abs() <= tol)
}

/// A fresh snapshot of an initialised state (no sweeps yet).
pub fn start(mut state: ModelState, vocabulary_fingerprint: String, seed: u64) -> Result<ModelSnapshot> {
    let ll = state.log_likelihood();
    if !ll.is_finite() {
        return Err(Error::NonFinite { sweep: 0 });
    }
    Ok(ModelSnapshot {
        format_version: MODEL_FORMAT_VERSION,
        vocabulary_fingerprint,
        seed,
        sweeps: 0,
        converged: false,
        history: vec![ll],
        state,
    })
}

/// Runs sweeps until convergence or `config.max_sweeps` total sweeps.
///
/// Sweep `s` draws from RNG stream `s` of the snapshot's seed, so a resumed run
/// continues exactly as an uninterrupted one would.
pub fn run_training(mut snap: ModelSnapshot, config: &SamplerConfig) -> Result<(ModelSnapshot, TraceLog)> {
    config.validate()?;
    let mut trace = TraceLog::default();
    while !snap.converged && snap.sweeps < config.max_sweeps {
        let sweep = snap.sweeps + 1;
        let mut rng = stream_rng(snap.seed, sweep as u64);
        let started = Instant::now();
        let (b, live) = match &mut snap.state {
            ModelState::Totm(s) => {
                let stats = gibbs_sweep(s, config.shuffle, &mut rng);
                if stats.blocked_aspects + stats.blocked_sentiments > 0 {
                    log::trace!("sweep {sweep}: {stats:?}");
                }
                if config.hyper_sample_every > 0 && sweep >= config.hyper_burn_in && sweep % config.hyper_sample_every == 0 {
                    sample_pyp_hyperparameters(s, &config.hyper_priors, &mut rng)?;
                    if config.optimize_b {
                        update_b(s, config)?;
                    }
                }
                (Some(s.hyper().b), s.live_aspects())
            }
            ModelState::Ilda(s) => {
                ilda_sweep(s, config.shuffle, &mut rng);
                (None, s.live_aspects())
            }
            ModelState::Ldadp(s) => {
                ldadp_sweep(s, config.shuffle, &mut rng);
                (None, 0)
            }
        };
        let ll = snap.state.log_likelihood();
        if !ll.is_finite() {
            return Err(Error::NonFinite { sweep });
        }
        if config.audit_every > 0 && sweep % config.audit_every == 0 {
            snap.state.audit()?;
        }
        snap.sweeps = sweep;
        snap.history.push(ll);
        snap.converged = has_converged(&snap.history, config.convergence_window, config.convergence_rel_tol);
        trace.rows.push(TraceRow {
            sweep,
            loglik: ll,
            b,
            live_aspects: live,
            millis: if config.trace_timing { started.elapsed().as_millis() as u64 } else { 0 },
        });
        if sweep % 50 == 0 {
            log::info!("sweep {sweep}: log likelihood {ll:.3}");
        }
    }
    snap.state.audit()?;
    Ok((snap, trace))
}

/// Initialises and trains a model in one go.
pub fn train(
    kind: ModelKind,
    corpus: FlatCorpus,
    setup: &ModelSetup,
    config: &SamplerConfig,
    seed: u64,
    vocabulary_fingerprint: String,
) -> Result<(ModelSnapshot, TraceLog)> {
    let state = init_model(kind, corpus, setup, seed)?;
    run_training(start(state, vocabulary_fingerprint, seed)?, config)
}
