use serde::{Deserialize, Serialize};

use super::{run_training, start, SamplerConfig};
use crate::corpus::{split_corpus, Document};
use crate::error::{Error, Result};
use crate::eval::{perplexity, FoldInConfig};
use crate::model::{FlatCorpus, IldaPriors, IldaState, ModelState};
use crate::util::stream_rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AspectSelection {
    pub chosen: usize,
    /// Dev-set overall perplexity per candidate (empty when only one candidate).
    pub perplexities: Vec<(usize, f64)>,
    pub train_documents: usize,
    pub dev_documents: usize,
}

/// Picks the ILDA aspect count with the lowest overall perplexity on a dev split
/// carved from `docs`. Candidates are tried in the given order; ties keep the first.
#[allow(clippy::too_many_arguments)]
pub fn select_num_aspects(
    docs: &[Document],
    num_targets: usize,
    num_opinions: usize,
    dev_fraction: f64,
    candidates: &[usize],
    priors: IldaPriors,
    config: &SamplerConfig,
    fold_in: &FoldInConfig,
    seed: u64,
) -> Result<AspectSelection> {
    let Some(&first) = candidates.first() else {
        return Err(Error::invalid("no aspect-count candidates"));
    };
    if candidates.len() == 1 {
        return Ok(AspectSelection {
            chosen: first,
            perplexities: Vec::new(),
            train_documents: docs.len(),
            dev_documents: 0,
        });
    }
    let (train, dev) = split_corpus(docs.to_vec(), 1.0 - dev_fraction, seed)?;
    let corpus = FlatCorpus::with_sizes(&train, num_targets, num_opinions)?;
    let mut perplexities = Vec::with_capacity(candidates.len());
    for &a in candidates {
        let state = IldaState::init(corpus.clone(), a, priors, &mut stream_rng(seed, 0))?;
        let (snap, _) = run_training(start(ModelState::Ilda(state), String::new(), seed)?, config)?;
        let report = perplexity(&snap.state, &dev, fold_in, seed)?;
        let pp = report.overall_perplexity.expect("ILDA scores targets and opinions");
        log::info!("A = {a}: dev perplexity {pp:.3}");
        perplexities.push((a, pp));
    }
    let chosen = perplexities
        .iter()
        .fold((first, f64::INFINITY), |best, &(a, pp)| if pp < best.1 { (a, pp) } else { best })
        .0;
    Ok(AspectSelection {
        chosen,
        perplexities,
        train_documents: train.len(),
        dev_documents: dev.len(),
    })
}
