//! Optional TOML run configuration. Values here are defaults that any
//! command-line flag overrides.

use std::path::{Path, PathBuf};

use popdisc_core::classify::{ClassWeighting, SvmConfig};
use popdisc_core::features::TfidfConfig;
use popdisc_core::promptkit::{OptionOrder, PromptSetting};
use popdisc_core::scoring::ScoreConfig;
use popdisc_core::stats::TTestVariant;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub paths: Paths,
    pub score: ScoreConfig,
    pub tfidf: TfidfConfig,
    pub svm: SvmSection,
    pub stats: StatsSection,
    pub prompts: PromptSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmSection {
    pub c: Option<f64>,
    pub epochs: Option<usize>,
    pub class_weighting: Option<ClassWeighting>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub alpha: Option<f64>,
    pub t_test: Option<TTestVariant>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptSection {
    pub setting: Option<PromptSetting>,
    pub k: Option<usize>,
    pub context_window: Option<usize>,
    pub option_order: Option<OptionOrder>,
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_ALPHA: f64 = 0.05;

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::input("invalid_config", e.to_string()))?;
        cfg.score.validate()?;
        cfg.tfidf.validate()?;
        Ok(cfg)
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(DEFAULT_SEED)
    }

    pub fn svm(&self, c: Option<f64>, epochs: Option<usize>, balanced: bool, seed: u64) -> SvmConfig {
        let d = SvmConfig::default();
        SvmConfig {
            c: c.or(self.svm.c).unwrap_or(d.c),
            epochs: epochs.or(self.svm.epochs).unwrap_or(d.epochs),
            seed,
            class_weighting: if balanced {
                ClassWeighting::Balanced
            } else {
                self.svm.class_weighting.unwrap_or(d.class_weighting)
            },
        }
    }

    /// Resolves an output path: the flag, else `default_name` inside
    /// `output_dir`, else `None` (stdout).
    pub fn output(&self, flag: Option<PathBuf>, default_name: &str) -> Option<PathBuf> {
        flag.or_else(|| self.output_dir.as_ref().map(|d| d.join(default_name)))
    }
}

/// Picks the flag value, else the config value, and checks the file exists.
pub fn require_path(flag: Option<PathBuf>, config: &Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
    let path = flag
        .or_else(|| config.clone())
        .ok_or_else(|| CliError::input("missing_argument", format!("no {what} given")))?;
    if !path.is_file() {
        return Err(CliError::input(
            "missing_file",
            format!("{what} {} does not exist", path.display()),
        ));
    }
    Ok(path)
}
