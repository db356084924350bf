use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Result};
use serde::Serialize;
use totm_core::corpus::{CorpusSnapshot, Vocabulary};
use totm_core::eval::{
    aspect_distances, brand_comparison, contrastive_tweets, live_aspect_labels, rank, top_opinion_words,
    top_target_words, SentimentWords,
};
use totm_core::model::{ModelState, TotmState};
use totm_core::Sentiment;

use crate::config::RunConfig;
use crate::output::{csv_writer, load_corpus, load_model, write_json};
use crate::ReportKind;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Word {
    pub token: String,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AspectWords {
    pub aspect: usize,
    pub targets: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SentimentList {
    pub sentiment: Sentiment,
    pub opinions: Vec<Word>,
}

fn totm(state: &ModelState) -> Result<&TotmState> {
    match state {
        ModelState::Totm(s) => Ok(s),
        other => bail!("this report needs a totm model, got {}", other.kind()),
    }
}

fn target_id(vocab: &Vocabulary, target: &str) -> Result<u32> {
    vocab
        .target_id(&target.to_lowercase())
        .ok_or_else(|| anyhow!(totm_core::Error::Unknown { kind: "target", name: target.to_string() }))
}

fn write_word_lists(path: &Path, key: &str, lists: &[(String, &[Word])]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([key, "rank", "token", "prob"])?;
    for (label, words) in lists {
        for (i, word) in words.iter().enumerate() {
            w.write_record([label.as_str(), &(i + 1).to_string(), &word.token, &word.prob.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn topics(state: &ModelState, vocab: &Vocabulary, k: usize, out: &Path) -> Result<()> {
    let aspects = live_aspect_labels(state)
        .into_iter()
        .map(|a| {
            let targets = top_target_words(state, a, k)?
                .into_iter()
                .map(|r| Word { token: vocab.target(r.id).to_string(), prob: r.prob })
                .collect();
            Ok(AspectWords { aspect: a, targets })
        })
        .collect::<Result<Vec<_>>>()?;
    let sentiments: Vec<SentimentList> = Sentiment::ALL
        .iter()
        .map(|&r| SentimentList {
            sentiment: r,
            opinions: rank(&state.sentiment_distribution(r), k)
                .into_iter()
                .map(|x| Word { token: vocab.opinion(x.id).to_string(), prob: x.prob })
                .collect(),
        })
        .collect();
    let lists: Vec<(String, &[Word])> = aspects.iter().map(|a| (a.aspect.to_string(), &a.targets[..])).collect();
    write_word_lists(&out.join("topics.csv"), "aspect", &lists)?;
    let lists: Vec<(String, &[Word])> =
        sentiments.iter().map(|s| (s.sentiment.to_string(), &s.opinions[..])).collect();
    write_word_lists(&out.join("sentiments.csv"), "sentiment", &lists)?;
    #[derive(Serialize)]
    struct Topics {
        aspects: Vec<AspectWords>,
        sentiments: Vec<SentimentList>,
    }
    write_json(&out.join("topics.json"), &Topics { aspects, sentiments })
}

fn opinions(state: &TotmState, vocab: &Vocabulary, target: &str, k: usize, out: &Path) -> Result<()> {
    let t = target_id(vocab, target)?;
    let lists: Vec<SentimentList> = [Sentiment::Positive, Sentiment::Negative]
        .iter()
        .map(|&r| {
            Ok(SentimentList {
                sentiment: r,
                opinions: top_opinion_words(state, t, r, k)?
                    .into_iter()
                    .map(|x| Word { token: vocab.opinion(x.id).to_string(), prob: x.prob })
                    .collect(),
            })
        })
        .collect::<Result<_>>()?;
    let rows: Vec<(String, &[Word])> = lists.iter().map(|s| (s.sentiment.to_string(), &s.opinions[..])).collect();
    write_word_lists(&out.join("opinions.csv"), "sentiment", &rows)?;
    #[derive(Serialize)]
    struct Opinions<'a> {
        target: &'a str,
        lists: Vec<SentimentList>,
    }
    write_json(&out.join("opinions.json"), &Opinions { target: vocab.target(t), lists })
}

#[derive(Serialize)]
struct OpinionOut {
    opinion: String,
    count: usize,
}

#[derive(Serialize)]
struct TargetOut {
    target: String,
    count: usize,
    positive: Vec<OpinionOut>,
    negative: Vec<OpinionOut>,
}

#[derive(Serialize)]
struct CellOut {
    aspect: usize,
    targets: Vec<TargetOut>,
}

#[derive(Serialize)]
struct BrandOut {
    tag: String,
    aspects: Vec<CellOut>,
}

fn compare(state: &TotmState, vocab: &Vocabulary, tags: &[String], aspects: &[usize], k: usize, out: &Path) -> Result<()> {
    let aspects = if aspects.is_empty() {
        let mut live: Vec<usize> = state.aspects().iter().map(|&a| a as usize).collect();
        live.sort_unstable();
        live.dedup();
        live
    } else {
        aspects.to_vec()
    };
    let reports = brand_comparison(state, tags, &aspects, k)?;
    let named = |list: &[totm_core::eval::OpinionCount]| -> Vec<OpinionOut> {
        list.iter()
            .map(|o| OpinionOut { opinion: vocab.opinion(o.opinion).to_string(), count: o.count })
            .collect()
    };
    let brands: Vec<BrandOut> = reports
        .iter()
        .map(|b| BrandOut {
            tag: b.tag.clone(),
            aspects: b
                .aspects
                .iter()
                .map(|c| CellOut {
                    aspect: c.aspect,
                    targets: c
                        .targets
                        .iter()
                        .map(|t| TargetOut {
                            target: vocab.target(t.target).to_string(),
                            count: t.count,
                            positive: named(&t.positive),
                            negative: named(&t.negative),
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    let mut w = csv_writer(&out.join("compare.csv"))?;
    w.write_record(["tag", "aspect", "target", "target_count", "sentiment", "opinion", "count"])?;
    for b in &brands {
        for c in &b.aspects {
            for t in &c.targets {
                for (label, list) in [("positive", &t.positive), ("negative", &t.negative)] {
                    for o in list {
                        w.write_record([
                            b.tag.as_str(),
                            &c.aspect.to_string(),
                            &t.target,
                            &t.count.to_string(),
                            label,
                            &o.opinion,
                            &o.count.to_string(),
                        ])?;
                    }
                }
            }
        }
    }
    w.flush()?;
    write_json(&out.join("compare.json"), &brands)
}

#[derive(Serialize)]
struct ContrastOut {
    tweet_id: String,
    doc_id: String,
    opinion: String,
    confidence: f64,
    text: String,
}

fn contrast(state: &TotmState, corpus: &CorpusSnapshot, target: &str, r: Sentiment, k: usize, out: &Path) -> Result<()> {
    let vocab = &corpus.vocabulary;
    let t = target_id(vocab, target)?;
    let texts: BTreeMap<&str, &str> = corpus
        .train
        .iter()
        .flat_map(|d| &d.tweets)
        .map(|tw| (tw.tweet_id.as_str(), tw.text.as_str()))
        .collect();
    let rows: Vec<ContrastOut> = contrastive_tweets(state, t, r, k)
        .into_iter()
        .map(|c| ContrastOut {
            text: texts.get(c.tweet_id.as_str()).copied().unwrap_or_default().to_string(),
            opinion: vocab.opinion(c.opinion).to_string(),
            tweet_id: c.tweet_id,
            doc_id: c.doc_id,
            confidence: c.confidence,
        })
        .collect();
    let mut w = csv_writer(&out.join("contrast.csv"))?;
    w.write_record(["rank", "tweet_id", "doc_id", "opinion", "confidence", "text"])?;
    for (i, c) in rows.iter().enumerate() {
        w.write_record([
            &(i + 1).to_string(),
            c.tweet_id.as_str(),
            &c.doc_id,
            &c.opinion,
            &c.confidence.to_string(),
            &c.text,
        ])?;
    }
    w.flush()?;
    write_json(&out.join("contrast.json"), &rows)
}

fn heatmap(state: &ModelState, out: &Path) -> Result<()> {
    let (labels, matrix) = aspect_distances(state)?;
    let mut w = csv_writer(&out.join("heatmap.csv"))?;
    let mut header = vec!["aspect".to_string()];
    header.extend(labels.iter().map(|a| a.to_string()));
    w.write_record(&header)?;
    for (a, row) in labels.iter().zip(&matrix) {
        let mut record = vec![a.to_string()];
        record.extend(row.iter().map(|x| x.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the requested report as CSV (and JSON where the table is nested).
pub fn cmd_report(model_path: &Path, corpus_path: &Path, kind: &ReportKind, config: &RunConfig, out: &Path) -> Result<()> {
    let corpus = load_corpus(corpus_path)?;
    let snap = load_model(model_path, &corpus)?;
    let state = &snap.state;
    let vocab = &corpus.vocabulary;
    let k = config.evaluate.top_k;
    match kind {
        ReportKind::Topics => topics(state, vocab, k, out)?,
        ReportKind::Opinions { target } => opinions(totm(state)?, vocab, target, k, out)?,
        ReportKind::Compare { tags, aspects } => compare(totm(state)?, vocab, tags, aspects, k, out)?,
        ReportKind::Contrast { target, sentiment } => contrast(totm(state)?, &corpus, target, *sentiment, k, out)?,
        ReportKind::Heatmap => heatmap(state, out)?,
    }
    config.echo(out, "report")
}
