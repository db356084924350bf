use std::path::Path;

use anyhow::{Context, Result};
use totm_core::corpus::{
    aggregate_by_tag, apply_negation, build_vocabulary, detect_emotion, load_tweets, split_corpus, CorpusSnapshot,
    CorpusStats, EmotionLexicon,
};

use crate::config::RunConfig;
use crate::output::write_json;

pub const CORPUS_FILE: &str = "corpus.json";
pub const STATS_FILE: &str = "stats.json";

/// Ingest → emotion detection → negation → tag aggregation → vocabulary → split.
///
/// Writes `corpus.json`, `stats.json` and the effective config into `out`.
pub fn cmd_preprocess(input: &Path, config: &RunConfig, out: &Path) -> Result<CorpusSnapshot> {
    config.validate()?;
    let pc = &config.preprocess;
    let ingest = load_tweets(input).context("ingest")?;
    if !ingest.skipped.is_empty() {
        log::warn!("skipped {} malformed records", ingest.skipped.len());
    }
    let markers = match &pc.emotion_lexicon {
        Some(path) => EmotionLexicon::load(path).context("emotion lexicon")?,
        None => EmotionLexicon::default(),
    };
    let mut records = ingest.records;
    for r in &mut records {
        r.emotion = detect_emotion(r, &markers);
        r.pairs = apply_negation(std::mem::take(&mut r.pairs));
    }
    let raw = aggregate_by_tag(&records, pc.min_tag_count);
    log::info!("{} tweets grouped into {} documents", records.len(), raw.len());
    let (vocab, docs) = build_vocabulary(&raw, &pc.vocabulary()?).context("vocabulary")?;
    let (train, test) = split_corpus(docs, pc.train_fraction, config.seed).context("split")?;
    let stats = CorpusStats::compute(&records, ingest.skipped.len(), &vocab, &train, &test);
    log::info!(
        "vocabulary: {} targets, {} opinions; {} train / {} test documents",
        stats.target_vocabulary,
        stats.opinion_vocabulary,
        stats.train_documents,
        stats.test_documents
    );
    let snap = CorpusSnapshot::new(vocab, train, test, stats);
    snap.save(&out.join(CORPUS_FILE))?;
    write_json(&out.join(STATS_FILE), &snap.stats)?;
    config.echo(out, "preprocess")?;
    Ok(snap)
}
