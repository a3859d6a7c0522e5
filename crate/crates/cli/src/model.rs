use std::path::Path;

use popdisc_core::classify::{DistRandom, LinearSvm, PredictionSet};
use popdisc_core::corpus::Corpus;
use popdisc_core::features::TfidfModel;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

const BUNDLE_VERSION: u32 = 1;

/// A trained baseline as stored on disk.
pub enum Baseline {
    TfidfSvm { tfidf: TfidfModel, svm: LinearSvm },
    DistRandom(DistRandom),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Stored {
    TfidfSvm { tfidf: Value, svm: LinearSvm },
    DistRandom { model: DistRandom },
}

#[derive(Serialize, Deserialize)]
struct Bundle {
    version: u32,
    #[serde(flatten)]
    stored: Stored,
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::TfidfSvm { .. } => "tfidf-svm",
            Baseline::DistRandom(_) => "dist-random",
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        let stored = match self {
            Baseline::TfidfSvm { tfidf, svm } => Stored::TfidfSvm {
                tfidf: serde_json::from_str(&tfidf.to_json()?)
                    .map_err(|e| CliError::internal("json", e.to_string()))?,
                svm: svm.clone(),
            },
            Baseline::DistRandom(m) => Stored::DistRandom { model: m.clone() },
        };
        serde_json::to_string(&Bundle {
            version: BUNDLE_VERSION,
            stored,
        })
        .map_err(|e| CliError::internal("json", e.to_string()))
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let bundle: Bundle = serde_json::from_str(text).map_err(|e| CliError::input("json", e.to_string()))?;
        if bundle.version != BUNDLE_VERSION {
            return Err(popdisc_core::Error::UnsupportedVersion(bundle.version).into());
        }
        Ok(match bundle.stored {
            Stored::TfidfSvm { tfidf, svm } => Baseline::TfidfSvm {
                tfidf: TfidfModel::from_json(&tfidf.to_string())?,
                svm,
            },
            Stored::DistRandom { model } => Baseline::DistRandom(model),
        })
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn predict(&self, corpus: &Corpus, seed: u64) -> CliResult<PredictionSet> {
        Ok(match self {
            Baseline::TfidfSvm { tfidf, svm } => {
                let (set, disagreements) = svm.predict_with_diagnostics(tfidf, corpus)?;
                if disagreements > 0 {
                    log::info!("neutral head disagreed on {disagreements} sentences");
                }
                set
            }
            Baseline::DistRandom(m) => m.predict(corpus, seed),
        })
    }

    pub fn tfidf(&self) -> Option<&TfidfModel> {
        match self {
            Baseline::TfidfSvm { tfidf, .. } => Some(tfidf),
            Baseline::DistRandom(_) => None,
        }
    }
}
