use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FlatCorpus, IldaState, LdaDpState, ModelKind, TotmState};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelState {
    Totm(TotmState),
    Ilda(IldaState),
    Ldadp(LdaDpState),
}

impl ModelState {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelState::Totm(_) => ModelKind::Totm,
            ModelState::Ilda(_) => ModelKind::Ilda,
            ModelState::Ldadp(_) => ModelKind::Ldadp,
        }
    }

    pub fn corpus(&self) -> &FlatCorpus {
        match self {
            ModelState::Totm(s) => s.corpus(),
            ModelState::Ilda(s) => s.corpus(),
            ModelState::Ldadp(s) => s.corpus(),
        }
    }

    pub fn audit(&self) -> Result<()> {
        match self {
            ModelState::Totm(s) => s.audit(),
            ModelState::Ilda(s) => s.audit(),
            ModelState::Ldadp(s) => s.audit(),
        }
    }

    pub fn log_likelihood(&mut self) -> f64 {
        match self {
            ModelState::Totm(s) => s.joint_log_likelihood(),
            ModelState::Ilda(s) => s.log_likelihood(),
            ModelState::Ldadp(s) => s.log_likelihood(),
        }
    }
}

/// A trained (or partially trained) model with what is needed to resume it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSnapshot {
    pub format_version: u32,
    pub vocabulary_fingerprint: String,
    pub seed: u64,
    pub sweeps: usize,
    pub converged: bool,
    /// Log likelihood after every completed sweep.
    pub history: Vec<f64>,
    pub state: ModelState,
}

impl ModelSnapshot {
    pub fn kind(&self) -> ModelKind {
        self.state.kind()
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Snapshot(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        self.state.audit()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snap: ModelSnapshot =
            serde_json::from_str(text).map_err(|e| Error::Snapshot(format!("model snapshot: {e}")))?;
        snap.validate()?;
        Ok(snap)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
