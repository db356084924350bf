//! Aspect-based target-opinion mining on tweets.
//!
//! The crate is organised bottom-up:
//!
//! * [`corpus`] turns JSONL tweets carrying target-opinion pairs into tag-aggregated
//!   documents over filtered target and opinion vocabularies.
//! * [`lexicon`] loads sentiment lexicons and builds the `(1+b)^X` opinion prior.
//! * [`pyp`] holds the marginalised Pitman-Yor machinery: customer/table counts,
//!   cached generalised Stirling numbers and hyperparameter sampling.
//! * [`model`] assembles the opinion topic model state and the ILDA / LDA-DP baselines.
//! * [`sampler`] runs collapsed Gibbs sweeps, learns the lexicon strength and decides
//!   convergence.
//! * [`eval`] computes held-out perplexity, polarity classification, lexicon sentiment
//!   scores, Hellinger matrices and the qualitative opinion tables.
//! * [`synth`] generates desk-scale synthetic corpora with known structure.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod model;
pub mod pyp;
pub mod sampler;
pub mod synth;
mod types;
pub mod util;

pub use error::{Error, Result};
pub use types::{Polarity, Sentiment};
