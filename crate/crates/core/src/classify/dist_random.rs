use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PredictionSet;
use crate::corpus::{Corpus, LabelDistribution, LabelSet};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Draw one of the four joint states from their training frequencies.
    #[default]
    Joint,
    /// Draw AE and PC as independent coins with their marginal rates.
    Independent,
}

/// Random baseline that samples labels from the training distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistRandom {
    pub mode: SamplingMode,
    /// Joint frequencies of N, AE only, PC only, both.
    pub joint: [f64; 4],
    pub ae_rate: f64,
    pub pc_rate: f64,
}

impl DistRandom {
    pub fn fit(train: &Corpus, mode: SamplingMode) -> Result<Self> {
        let dist = LabelDistribution::from_labels(train.gold_labels()?);
        let n = dist.total.max(1) as f64;
        Ok(DistRandom {
            mode,
            joint: dist.joint_frequencies(),
            ae_rate: dist.anti_elitism as f64 / n,
            pc_rate: dist.people_centrism as f64 / n,
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> LabelSet {
        match self.mode {
            SamplingMode::Joint => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (state, p) in LabelSet::ALL.iter().zip(self.joint) {
                    acc += p;
                    if u < acc {
                        return *state;
                    }
                }
                // Rounding slack: fall back to the last state with mass.
                LabelSet::ALL
                    .iter()
                    .zip(self.joint)
                    .rev()
                    .find(|(_, p)| *p > 0.0)
                    .map_or(LabelSet::NEUTRAL, |(s, _)| *s)
            }
            SamplingMode::Independent => {
                let ae = rng.gen::<f64>() < self.ae_rate;
                let pc = rng.gen::<f64>() < self.pc_rate;
                LabelSet::new(ae, pc)
            }
        }
    }

    /// One draw per sentence, in corpus order, from a generator seeded with `seed`.
    pub fn predict(&self, corpus: &Corpus, seed: u64) -> PredictionSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut set = PredictionSet::new(format!("dist-random:{seed}"));
        for (sp, s) in corpus.sentences() {
            set.insert(&sp.id, s.index, self.sample(&mut rng));
        }
        set
    }
}
