//! One-vs-rest linear SVM trained with deterministic Pegasos-style primal
//! subgradient descent.
//!
//! Each head minimises
//! `lambda/2 * (|w|^2 + b^2) + 1/n * sum_i c_i * max(0, 1 - y_i (w.x_i + b))`
//! with `lambda = 1 / (C n)`, which is the soft-margin objective
//! `1/2 |w|^2 + C sum hinge` rescaled by `1/(C n)`. The bias is treated as the
//! weight of a constant feature. The iterate with the lowest objective at an
//! epoch boundary is kept.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Class, PredictionSet};
use crate::corpus::{Corpus, LabelSet};
use crate::error::{Error, Result};
use crate::features::{SparseVector, TfidfModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClassWeighting {
    #[default]
    None,
    /// Per-class loss weights `n / (2 n_class)`.
    Balanced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Soft-margin penalty.
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
    #[serde(default)]
    pub class_weighting: ClassWeighting,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            epochs: 30,
            seed: 42,
            class_weighting: ClassWeighting::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryHead {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective of the kept iterate after each epoch (non-increasing).
    #[serde(default)]
    pub objective_history: Vec<f64>,
    /// Objective of the raw iterate at each epoch end.
    #[serde(default)]
    pub raw_objective_history: Vec<f64>,
}

impl BinaryHead {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }
}

/// A labelled training problem for one binary head.
pub struct BinaryProblem<'a> {
    pub xs: &'a [SparseVector],
    /// +1 / -1 targets.
    pub ys: Vec<f64>,
    /// Per-example loss weights.
    pub costs: Vec<f64>,
    pub n_features: usize,
}

impl BinaryProblem<'_> {
    pub fn lambda(&self, c: f64) -> f64 {
        1.0 / (c * self.xs.len() as f64)
    }

    /// Primal objective at `(w, b)`.
    pub fn objective(&self, weights: &[f64], bias: f64, lambda: f64) -> f64 {
        let reg = 0.5 * lambda * (weights.iter().map(|w| w * w).sum::<f64>() + bias * bias);
        let loss: f64 = self
            .xs
            .iter()
            .zip(&self.ys)
            .zip(&self.costs)
            .map(|((x, y), c)| c * (1.0 - y * (x.dot_dense(weights) + bias)).max(0.0))
            .sum();
        reg + loss / self.xs.len() as f64
    }
}

/// Pegasos on one binary problem.
pub fn train_binary(problem: &BinaryProblem<'_>, config: &SvmConfig) -> BinaryHead {
    let n = problem.xs.len();
    let dim = problem.n_features;
    let lambda = problem.lambda(config.c);
    let radius_sq = 1.0 / lambda;

    // w = scale * v, the last slot of v is the bias.
    let mut v = vec![0.0f64; dim + 1];
    let mut scale = 1.0f64;
    let mut v_norm_sq = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut t: u64 = 0;

    let mut best_w = vec![0.0; dim];
    let mut best_b = 0.0;
    let mut best_obj = problem.objective(&best_w, best_b, lambda);
    let mut history = Vec::with_capacity(config.epochs);
    let mut raw_history = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let x = &problem.xs[i];
            let y = problem.ys[i];
            let eta = 1.0 / (lambda * t as f64);
            let margin = y * scale * (x.dot_dense(&v[..dim]) + v[dim]);

            let shrink = 1.0 - 1.0 / t as f64;
            if shrink <= 0.0 {
                v.iter_mut().for_each(|w| *w = 0.0);
                v_norm_sq = 0.0;
                scale = 1.0;
            } else {
                scale *= shrink;
            }

            if margin < 1.0 {
                let a = eta * y * problem.costs[i] / scale;
                let mut vx = v[dim];
                let mut xx = 1.0;
                for (j, xj) in x.iter() {
                    vx += v[j as usize] * xj;
                    xx += xj * xj;
                }
                for (j, xj) in x.iter() {
                    v[j as usize] += a * xj;
                }
                v[dim] += a;
                v_norm_sq += 2.0 * a * vx + a * a * xx;
            }

            let w_norm_sq = scale * scale * v_norm_sq;
            if w_norm_sq > radius_sq {
                scale *= (radius_sq / w_norm_sq).sqrt();
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                v_norm_sq *= scale * scale;
                scale = 1.0;
            }
        }

        let w: Vec<f64> = v[..dim].iter().map(|x| x * scale).collect();
        let b = v[dim] * scale;
        let obj = problem.objective(&w, b, lambda);
        raw_history.push(obj);
        if obj < best_obj {
            best_obj = obj;
            best_w = w;
            best_b = b;
        }
        history.push(best_obj);
    }

    BinaryHead {
        weights: best_w,
        bias: best_b,
        objective_history: history,
        raw_objective_history: raw_history,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub config: SvmConfig,
    pub n_features: usize,
    /// Heads in [`Class::ALL`] order: N, AE, PC.
    pub heads: [BinaryHead; 3],
}

#[derive(Serialize, Deserialize)]
struct SvmFile {
    version: u32,
    #[serde(flatten)]
    model: LinearSvm,
}

/// Per-sentence decision values of the three heads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub neutral: f64,
    pub anti_elitism: f64,
    pub people_centrism: f64,
}

impl Decision {
    pub fn labels(&self) -> LabelSet {
        LabelSet::new(self.anti_elitism > 0.0, self.people_centrism > 0.0)
    }

    /// Whether the neutral head disagrees with the derived label set.
    pub fn neutral_head_disagrees(&self) -> bool {
        (self.neutral > 0.0) != self.labels().is_neutral()
    }
}

fn costs_for(ys: &[f64], weighting: ClassWeighting) -> Vec<f64> {
    match weighting {
        ClassWeighting::None => vec![1.0; ys.len()],
        ClassWeighting::Balanced => {
            let n = ys.len() as f64;
            let pos = ys.iter().filter(|&&y| y > 0.0).count() as f64;
            let neg = n - pos;
            ys.iter()
                .map(|&y| if y > 0.0 { n / (2.0 * pos) } else { n / (2.0 * neg) })
                .collect()
        }
    }
}

impl LinearSvm {
    /// Trains the three heads on the gold labels of `train`.
    pub fn train(train: &Corpus, tfidf: &TfidfModel, config: &SvmConfig) -> Result<Self> {
        if !(config.c > 0.0) {
            return Err(Error::InvalidConfig(format!("C must be positive, got {}", config.c)));
        }
        let labels = train.gold_labels()?;
        if labels.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let xs: Vec<SparseVector> = train
            .sentences()
            .map(|(_, s)| tfidf.transform(&s.text))
            .collect();
        Self::train_vectors(&xs, &labels, tfidf.len(), config)
    }

    /// Trains on pre-computed feature vectors.
    pub fn train_vectors(
        xs: &[SparseVector],
        labels: &[LabelSet],
        n_features: usize,
        config: &SvmConfig,
    ) -> Result<Self> {
        let mut heads = Vec::with_capacity(3);
        for class in Class::ALL {
            let ys: Vec<f64> = labels
                .iter()
                .map(|l| if class.is_positive(*l) { 1.0 } else { -1.0 })
                .collect();
            let pos = ys.iter().filter(|&&y| y > 0.0).count();
            if pos == 0 || pos == ys.len() {
                return Err(Error::DegenerateClass(class.name().to_string()));
            }
            let problem = BinaryProblem {
                xs,
                costs: costs_for(&ys, config.class_weighting),
                ys,
                n_features,
            };
            heads.push(train_binary(&problem, config));
        }
        let heads: [BinaryHead; 3] = heads.try_into().expect("three heads");
        Ok(LinearSvm {
            config: config.clone(),
            n_features,
            heads,
        })
    }

    pub fn head(&self, class: Class) -> &BinaryHead {
        &self.heads[class as usize]
    }

    pub fn decision(&self, x: &SparseVector) -> Decision {
        Decision {
            neutral: self.heads[0].decision(x),
            anti_elitism: self.heads[1].decision(x),
            people_centrism: self.heads[2].decision(x),
        }
    }

    fn check_features(&self, tfidf: &TfidfModel) -> Result<()> {
        if tfidf.len() != self.n_features {
            return Err(Error::VocabularyMismatch {
                expected: self.n_features,
                found: tfidf.len(),
            });
        }
        Ok(())
    }

    /// Predicts every sentence of `corpus`; also returns how often the
    /// neutral head disagrees with the AE/PC heads.
    pub fn predict_with_diagnostics(
        &self,
        tfidf: &TfidfModel,
        corpus: &Corpus,
    ) -> Result<(PredictionSet, usize)> {
        self.check_features(tfidf)?;
        let mut set = PredictionSet::new("tfidf-svm");
        let mut disagreements = 0;
        for (sp, s) in corpus.sentences() {
            let d = self.decision(&tfidf.transform(&s.text));
            disagreements += usize::from(d.neutral_head_disagrees());
            set.insert(&sp.id, s.index, d.labels());
        }
        if disagreements > 0 {
            log::info!("neutral head disagrees with AE/PC heads on {disagreements} sentences");
        }
        Ok((set, disagreements))
    }

    pub fn predict(&self, tfidf: &TfidfModel, corpus: &Corpus) -> Result<PredictionSet> {
        self.predict_with_diagnostics(tfidf, corpus).map(|(p, _)| p)
    }

    /// Top-`k` n-grams by signed weight, descending; ties by n-gram.
    pub fn top_features(&self, tfidf: &TfidfModel, class: Class, k: usize) -> Result<Vec<(String, f64)>> {
        self.check_features(tfidf)?;
        let w = &self.head(class).weights;
        let mut idx: Vec<usize> = (0..w.len()).collect();
        idx.sort_by(|&a, &b| {
            w[b].total_cmp(&w[a])
                .then_with(|| tfidf.terms()[a].cmp(&tfidf.terms()[b]))
        });
        Ok(idx
            .into_iter()
            .take(k)
            .map(|i| (tfidf.terms()[i].clone(), w[i]))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SvmFile {
            version: 1,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SvmFile = serde_json::from_str(text)?;
        if file.version != 1 {
            return Err(Error::UnsupportedVersion(file.version));
        }
        if file.model.heads.iter().any(|h| h.weights.len() != file.model.n_features) {
            return Err(Error::InvalidConfig("weight vector length differs from n_features".into()));
        }
        Ok(file.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
