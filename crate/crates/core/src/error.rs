use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate sentence ({speech_id}, {index})")]
    DuplicateSentence { speech_id: String, index: usize },

    #[error("speech {speech_id}: sentence indices are not contiguous from 0 (expected {expected}, found {found})")]
    IndexGap {
        speech_id: String,
        expected: usize,
        found: usize,
    },

    #[error("duplicate speech id {0}")]
    DuplicateSpeech(String),

    #[error("speech {speech_id}: campaign {campaign} is inconsistent with date {date}")]
    CampaignMismatch {
        speech_id: String,
        campaign: String,
        date: String,
    },

    #[error("speech {0} has sentences without gold labels")]
    MissingGold(String),

    #[error("speech {speech_id}: sentence {index} has no label")]
    Unlabeled { speech_id: String, index: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("class {0} has no positive (or no negative) training examples")]
    DegenerateClass(String),

    #[error("feature space mismatch: model expects {expected} features, tf-idf model has {found}")]
    VocabularyMismatch { expected: usize, found: usize },

    #[error("predictions missing for {count} sentences, first: {first:?}")]
    MissingPredictions { count: usize, first: Vec<String> },

    #[error("prediction for unknown sentence {0}")]
    UnknownSentence(String),

    #[error("unknown label token {0:?}")]
    UnknownLabel(String),

    #[error("not enough examples for category {category}: need {needed}, have {available}")]
    InsufficientExamples {
        category: String,
        needed: usize,
        available: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("unsupported model file version {0}")]
    UnsupportedVersion(u32),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::DuplicateSentence { .. } => "duplicate_sentence",
            Error::IndexGap { .. } => "index_gap",
            Error::DuplicateSpeech(_) => "duplicate_speech",
            Error::CampaignMismatch { .. } => "campaign_mismatch",
            Error::MissingGold(_) => "missing_gold",
            Error::Unlabeled { .. } => "unlabeled",
            Error::EmptyCorpus => "empty_corpus",
            Error::DegenerateClass(_) => "degenerate_class",
            Error::VocabularyMismatch { .. } => "vocabulary_mismatch",
            Error::MissingPredictions { .. } => "missing_predictions",
            Error::UnknownSentence(_) => "unknown_sentence",
            Error::UnknownLabel(_) => "unknown_label",
            Error::InsufficientExamples { .. } => "insufficient_examples",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Degenerate(_) => "degenerate",
            Error::UnsupportedVersion(_) => "unsupported_version",
            Error::Json(_) => "json",
        }
    }
}
