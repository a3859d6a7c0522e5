//! Populist discourse analysis toolkit.
//!
//! Sentences of political speeches are coded with a multi-label state
//! (anti-elitism, people-centrism, both, or neutral). On top of that coding
//! this crate provides:
//!
//! * [`corpus`]: JSONL ingestion, sentence segmentation and the scoring filters,
//! * [`features`]: an n-gram TF-IDF feature space,
//! * [`classify`]: the distribution-random and linear SVM baselines plus F1 evaluation,
//! * [`scoring`]: sentence scores, the speech-level discourse indices and positional volume,
//! * [`stats`]: ANOVA, t-tests, effect sizes, correlation and Krippendorff's alpha,
//! * [`promptkit`]: deterministic prompt construction for external LLM runs.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod features;
pub mod promptkit;
pub mod scoring;
pub mod stats;

pub use error::{Error, Result};
