use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use totm_core::eval::{
    classification_metrics, classify_labelled, perplexity, sentiment_scores, ClassificationReport, PerplexityReport,
    SentimentScores,
};
use totm_core::lexicon::AffinityLexicon;

use crate::config::RunConfig;
use crate::output::{csv_writer, load_corpus, load_model, write_json};

pub const PERPLEXITY_FILE: &str = "perplexity.json";
pub const CLASSIFICATION_FILE: &str = "classification.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const SCORES_FILE: &str = "sentiment_scores.json";

#[derive(Clone, Debug, Serialize)]
pub struct Evaluation {
    pub perplexity: PerplexityReport,
    pub classification: Option<ClassificationReport>,
    pub sentiment_scores: Option<SentimentScores>,
}

/// Scores the corpus's test half. Classification is skipped when no test tweet
/// has a gold label; sentiment scores need an affinity lexicon.
pub fn cmd_evaluate(model_path: &Path, corpus_path: &Path, config: &RunConfig, out: &Path) -> Result<Evaluation> {
    config.validate()?;
    let corpus = load_corpus(corpus_path)?;
    let snap = load_model(model_path, &corpus)?;
    let state = &snap.state;

    let pp = perplexity(state, &corpus.test, &config.evaluate.fold_in(), config.seed).context("perplexity")?;
    write_json(&out.join(PERPLEXITY_FILE), &pp)?;

    let predictions = classify_labelled(&corpus.test, state);
    let classification = if predictions.is_empty() {
        log::info!("no gold labels in the test set; classification skipped");
        None
    } else {
        let predicted: Vec<_> = predictions.iter().map(|p| p.predicted).collect();
        let gold: Vec<_> = predictions.iter().map(|p| p.gold).collect();
        let report = classification_metrics(&predicted, &gold)?;
        write_json(&out.join(CLASSIFICATION_FILE), &report)?;
        let mut w = csv_writer(&out.join(PREDICTIONS_FILE))?;
        w.write_record(["tweet_id", "gold", "predicted"])?;
        for p in &predictions {
            let predicted = p.predicted.map(|x| x.value().to_string()).unwrap_or_default();
            w.write_record([p.tweet_id.as_str(), &p.gold.value().to_string(), &predicted])?;
        }
        w.flush()?;
        Some(report)
    };

    let sentiment_scores = match &config.evaluate.affinity_lexicon {
        Some(path) => {
            let lexicon = AffinityLexicon::load(path).context("affinity lexicon")?;
            let scores = sentiment_scores(state, &lexicon, &corpus.vocabulary)?;
            write_json(&out.join(SCORES_FILE), &scores)?;
            Some(scores)
        }
        None => {
            log::info!("no affinity lexicon; sentiment scores skipped");
            None
        }
    };
    config.echo(out, "evaluate")?;

    let eval = Evaluation {
        perplexity: pp,
        classification,
        sentiment_scores,
    };
    println!("{}", serde_json::to_string(&eval)?);
    Ok(eval)
}
