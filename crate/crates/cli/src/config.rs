use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use totm_core::corpus::{default_stop_words, parse_stop_words, VocabularyConfig};
use totm_core::eval::FoldInConfig;
use totm_core::model::{Hyperparameters, IldaPriors, LdaDpPriors, ModelKind};
use totm_core::pyp::PypParams;
use totm_core::sampler::SamplerConfig;

/// The shipped defaults, with comments.
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

/// File name of the effective configuration a command echoes into its output directory.
pub fn echo_file(command: &str) -> String {
    format!("config-{command}.toml")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub preprocess: PreprocessConfig,
    pub model: ModelConfig,
    pub sampler: SamplerConfig,
    pub evaluate: EvaluateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            preprocess: PreprocessConfig::default(),
            model: ModelConfig::default(),
            sampler: SamplerConfig::default(),
            evaluate: EvaluateConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emotion_lexicon: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_words: Option<PathBuf>,
    pub min_tag_count: usize,
    pub common_threshold: f64,
    pub min_count: u64,
    pub train_fraction: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            emotion_lexicon: None,
            stop_words: None,
            min_tag_count: 5,
            common_threshold: 0.9,
            min_count: 50,
            train_fraction: 0.9,
        }
    }
}

impl PreprocessConfig {
    pub fn vocabulary(&self) -> Result<VocabularyConfig> {
        let stop_words = match &self.stop_words {
            Some(path) => parse_stop_words(
                &std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?,
            ),
            None => default_stop_words(),
        };
        Ok(VocabularyConfig {
            common_threshold: self.common_threshold,
            min_count: self.min_count,
            stop_words,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub max_aspects: usize,
    pub aspect_candidates: Vec<usize>,
    pub dev_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    pub normalize_lexicon: bool,
    pub discount: f64,
    pub concentration: f64,
    pub b: f64,
    pub q_negative: [f64; 3],
    pub q_positive: [f64; 3],
    pub ilda: IldaPriors,
    pub ldadp: LdaDpPriors,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let hyper = Hyperparameters::default();
        ModelConfig {
            kind: ModelKind::Totm,
            max_aspects: hyper.max_aspects,
            aspect_candidates: Vec::new(),
            dev_fraction: 0.05,
            lexicon: None,
            normalize_lexicon: true,
            discount: hyper.theta.discount,
            concentration: hyper.theta.concentration,
            b: hyper.b,
            q_negative: hyper.q[0],
            q_positive: hyper.q[1],
            ilda: IldaPriors::default(),
            ldadp: LdaDpPriors::default(),
        }
    }
}

impl ModelConfig {
    pub fn hyperparameters(&self, max_aspects: usize) -> Result<Hyperparameters> {
        let p = PypParams::new(self.discount, self.concentration)?;
        let hyper = Hyperparameters {
            theta: p,
            psi: p,
            phi: p,
            phi_leaf: p,
            b: self.b,
            max_aspects,
            q: [self.q_negative, self.q_positive],
        };
        hyper.validate()?;
        Ok(hyper)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affinity_lexicon: Option<PathBuf>,
    pub burn_in: usize,
    pub samples: usize,
    pub top_k: usize,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        let fold = FoldInConfig::default();
        EvaluateConfig {
            affinity_lexicon: None,
            burn_in: fold.burn_in,
            samples: fold.samples,
            top_k: 10,
        }
    }
}

impl EvaluateConfig {
    pub fn fold_in(&self) -> FoldInConfig {
        FoldInConfig {
            burn_in: self.burn_in,
            samples: self.samples,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Range checks that do not need any input file.
    pub fn validate(&self) -> Result<()> {
        let p = &self.preprocess;
        if !(p.train_fraction > 0.0 && p.train_fraction < 1.0) {
            bail!("preprocess.train_fraction must be in (0, 1), got {}", p.train_fraction);
        }
        if !(p.common_threshold > 0.0 && p.common_threshold <= 1.0) {
            bail!("preprocess.common_threshold must be in (0, 1], got {}", p.common_threshold);
        }
        if p.min_count == 0 {
            bail!("preprocess.min_count must be at least 1");
        }
        let m = &self.model;
        if m.max_aspects == 0 {
            bail!("model.max_aspects must be at least 1");
        }
        if m.aspect_candidates.contains(&0) {
            bail!("model.aspect_candidates must be positive");
        }
        if !(m.dev_fraction > 0.0 && m.dev_fraction < 1.0) {
            bail!("model.dev_fraction must be in (0, 1), got {}", m.dev_fraction);
        }
        m.hyperparameters(m.max_aspects)?;
        let ilda = [m.ilda.theta, m.ilda.eta, m.ilda.psi, m.ilda.phi];
        if ilda.iter().chain(&[m.ldadp.doc, m.ldadp.word_scale]).any(|&x| !(x > 0.0 && x.is_finite())) {
            bail!("Dirichlet priors must be positive");
        }
        self.sampler.validate()?;
        if self.evaluate.samples == 0 {
            bail!("evaluate.samples must be at least 1");
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Writes the effective configuration of `command` into `dir`.
    pub fn echo(&self, dir: &Path, command: &str) -> Result<()> {
        let path = dir.join(echo_file(command));
        std::fs::write(&path, self.to_toml()).with_context(|| format!("cannot write {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults_match_code_defaults() {
        assert_eq!(RunConfig::parse(DEFAULT_CONFIG).unwrap(), RunConfig::default());
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.seed = 17;
        c.model.kind = ModelKind::Ilda;
        c.model.lexicon = Some("lex.tsv".into());
        c.sampler.max_sweeps = 3;
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("sed = 1").is_err());
        assert!(RunConfig::parse("[sampler]\nmax_sweep = 1").is_err());
        assert!(RunConfig::parse("[model.ilda]\nalpha = 1").is_err());
        assert!(RunConfig::parse("[sampler.hyper_priors]\ndiscount = { a = 1.0, c = 1.0 }").is_err());
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        assert!(RunConfig::parse("[preprocess]\ntrain_fraction = 1.0").is_err());
        assert!(RunConfig::parse("[model]\ndiscount = 1.0").is_err());
        assert!(RunConfig::parse("[model]\nkind = \"mglda\"").is_err());
        assert!(RunConfig::parse("[sampler]\nconvergence_window = 1").is_err());
        assert!(RunConfig::parse("[model]\nb = 0.0").is_err());
    }
}
