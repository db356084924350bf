#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use totm_core::synth::{planted_polarity, to_jsonl, PlantedConfig};

pub struct Fixture {
    pub dir: tempfile::TempDir,
}

impl Fixture {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

/// A small planted-polarity corpus as JSONL plus matching lexicons and a config
/// loose enough for a tiny vocabulary.
pub fn planted_fixture(num_docs: usize, max_sweeps: usize) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PlantedConfig {
        num_docs,
        num_targets: 8,
        num_opinions: 40,
        ..Default::default()
    };
    let p = planted_polarity(&cfg, 3).unwrap();
    let d = dir.path();
    std::fs::write(d.join("tweets.jsonl"), to_jsonl(&p.docs, &p.vocab)).unwrap();
    std::fs::write(d.join("lexicon.tsv"), p.lexicon.to_tsv()).unwrap();
    std::fs::write(d.join("affinity.tsv"), p.affinity.to_tsv()).unwrap();
    let config = format!(
        "seed = 5\n\n[preprocess]\nmin_count = 1\ncommon_threshold = 1.0\n\n[model]\nmax_aspects = 4\n\n\
         [sampler]\nmax_sweeps = {max_sweeps}\naudit_every = 5\n\n[evaluate]\nburn_in = 5\nsamples = 2\ntop_k = 5\n"
    );
    std::fs::write(d.join("config.toml"), config).unwrap();
    Fixture { dir }
}

pub fn totm(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_totm"))
        .current_dir(cwd)
        .env("TOTM_LOG", "warn")
        .args(args)
        .output()
        .unwrap()
}

/// Runs the whole pipeline into `out` (relative to the fixture directory).
pub fn pipeline(f: &Fixture, out: &str) -> Vec<Output> {
    let d = f.dir.path();
    let common = ["--config", "config.toml", "--output", out];
    let corpus = format!("{out}/corpus.json");
    let model = format!("{out}/model.json");
    let mut runs = vec![totm(d, &[&common[..], &["preprocess", "--input", "tweets.jsonl"]].concat())];
    runs.push(totm(d, &[&common[..], &["train", "--corpus", &corpus, "--lexicon", "lexicon.tsv"]].concat()));
    runs.push(totm(
        d,
        &[&common[..], &["evaluate", "--model", &model, "--corpus", &corpus, "--affinity", "affinity.tsv"]].concat(),
    ));
    for report in [
        vec!["topics"],
        vec!["heatmap"],
        vec!["opinions", "--target", "t001"],
        vec!["compare", "--tags", "tag0000", "tag0001"],
        vec!["contrast", "--target", "t001", "--sentiment", "positive"],
    ] {
        let args = [&common[..], &["report", "--model", &model, "--corpus", &corpus], &report[..]].concat();
        runs.push(totm(d, &args));
    }
    runs
}
