use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use totm_core::corpus::CorpusSnapshot;
use totm_core::model::ModelSnapshot;

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

pub fn load_corpus(path: &Path) -> Result<CorpusSnapshot> {
    CorpusSnapshot::load(path).with_context(|| format!("cannot load corpus snapshot {}", path.display()))
}

/// Loads a model snapshot and checks that it was trained on `corpus`'s vocabulary.
pub fn load_model(path: &Path, corpus: &CorpusSnapshot) -> Result<ModelSnapshot> {
    let snap = ModelSnapshot::load(path).with_context(|| format!("cannot load model snapshot {}", path.display()))?;
    if snap.vocabulary_fingerprint != corpus.vocabulary_fingerprint {
        bail!(totm_core::Error::VocabularyMismatch {
            model: snap.vocabulary_fingerprint.clone(),
            corpus: corpus.vocabulary_fingerprint.clone(),
        });
    }
    Ok(snap)
}
