use std::path::Path;

use anyhow::{bail, Context, Result};
use totm_core::corpus::CorpusSnapshot;
use totm_core::lexicon::{lda_dp_lambda, SentimentExponents, SentimentLexicon};
use totm_core::model::{FlatCorpus, ModelKind, ModelSnapshot};
use totm_core::sampler::{init_model, run_training, select_num_aspects, start, ModelSetup};

use crate::config::RunConfig;
use crate::output::{load_corpus, write_json};
use crate::Outcome;

pub const MODEL_FILE: &str = "model.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const SELECTION_FILE: &str = "aspect_selection.json";

/// Builds the model setup, choosing the aspect count first when candidates are configured.
fn setup(corpus: &CorpusSnapshot, config: &RunConfig, out: &Path) -> Result<ModelSetup> {
    let mc = &config.model;
    let vocab = &corpus.vocabulary;
    let mut aspects = mc.max_aspects;
    if !mc.aspect_candidates.is_empty() {
        let selection = select_num_aspects(
            &corpus.train,
            vocab.num_targets(),
            vocab.num_opinions(),
            mc.dev_fraction,
            &mc.aspect_candidates,
            mc.ilda,
            &config.sampler,
            &config.evaluate.fold_in(),
            config.seed,
        )
        .context("aspect selection")?;
        log::info!("selected {} aspects", selection.chosen);
        write_json(&out.join(SELECTION_FILE), &selection)?;
        aspects = match mc.kind {
            ModelKind::Totm => aspects.min(selection.chosen),
            _ => selection.chosen,
        };
    }
    let mut setup = ModelSetup::plain(vocab.num_opinions(), aspects);
    setup.hyper = mc.hyperparameters(aspects)?;
    setup.ilda_priors = mc.ilda;
    setup.ldadp_priors = mc.ldadp;
    if let Some(path) = &mc.lexicon {
        let lexicon = SentimentLexicon::load(path, mc.normalize_lexicon).context("sentiment lexicon")?;
        setup.exponents = SentimentExponents::build(&lexicon, vocab);
        setup.lambda = lda_dp_lambda(&lexicon, vocab);
    }
    Ok(setup)
}

/// Trains (or resumes) a model; writes `model.json`, `trace.csv` and the config echo.
///
/// A resumed run appends to an existing trace in `out`.
pub fn cmd_train(corpus_path: &Path, resume: Option<&Path>, config: &RunConfig, out: &Path) -> Result<Outcome> {
    let corpus = load_corpus(corpus_path)?;
    let snap = match resume {
        Some(path) => {
            let snap = crate::output::load_model(path, &corpus)?;
            if snap.kind() != config.model.kind {
                bail!("snapshot holds a {} model, config asks for {}", snap.kind(), config.model.kind);
            }
            if snap.seed != config.seed {
                log::warn!("resuming with the snapshot's seed {} (config seed {} ignored)", snap.seed, config.seed);
            }
            snap
        }
        None => {
            let setup = setup(&corpus, config, out)?;
            let flat = FlatCorpus::new(&corpus.train, &corpus.vocabulary)?;
            let state = init_model(config.model.kind, flat, &setup, config.seed)?;
            start(state, corpus.vocabulary_fingerprint.clone(), config.seed)?
        }
    };
    let resumed_at = snap.sweeps;
    let (snap, trace): (ModelSnapshot, _) = run_training(snap, &config.sampler)?;
    snap.save(&out.join(MODEL_FILE))?;
    trace.write(&out.join(TRACE_FILE), resume.is_some())?;
    config.echo(out, "train")?;
    let ll = snap.history.last().copied().unwrap_or(f64::NAN);
    if snap.converged {
        log::info!("converged after {} sweeps (log likelihood {ll:.3})", snap.sweeps);
        Ok(Outcome::Converged)
    } else {
        log::warn!(
            "stopped at max_sweeps = {} without converging ({} sweeps this run, log likelihood {ll:.3})",
            config.sampler.max_sweeps,
            snap.sweeps - resumed_at
        );
        Ok(Outcome::MaxSweeps)
    }
}
