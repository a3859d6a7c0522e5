//! N-gram TF-IDF features.
//!
//! Text is lower-cased and split on non-alphanumeric boundaries; an
//! apostrophe between two alphanumerics stays inside the token ("don't").
//! The vocabulary keeps n-grams whose document frequency lies within
//! `[min_df, max_df * D]`, truncated to the `max_features` most frequent
//! (ties broken lexicographically). Weights are raw counts times the
//! smoothed idf `ln((1 + D) / (1 + df)) + 1`, L2-normalised.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TfidfConfig {
    /// Minimum number of documents an n-gram must occur in.
    pub min_df: usize,
    /// Maximum document frequency as a fraction of the corpus size.
    pub max_df: f64,
    pub max_features: usize,
    /// Inclusive n-gram order range.
    pub ngram_range: (usize, usize),
}

impl Default for TfidfConfig {
    fn default() -> Self {
        TfidfConfig {
            min_df: 20,
            max_df: 0.5,
            max_features: 10_000,
            ngram_range: (1, 3),
        }
    }
}

impl TfidfConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.ngram_range;
        if lo == 0 || lo > hi {
            return Err(Error::InvalidConfig(format!("bad ngram_range {:?}", self.ngram_range)));
        }
        if !(self.max_df > 0.0 && self.max_df <= 1.0) {
            return Err(Error::InvalidConfig(format!("max_df {} not in (0, 1]", self.max_df)));
        }
        Ok(())
    }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVector {
    /// Builds a vector from unsorted pairs; duplicate indices are summed.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut v = SparseVector::default();
        for (i, w) in pairs {
            if v.indices.last() == Some(&i) {
                *v.values.last_mut().unwrap() += w;
            } else {
                v.indices.push(i);
                v.values.push(w);
            }
        }
        v
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&w| w == 0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Dot product with a dense weight vector.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, w)| dense[i as usize] * w).sum()
    }
}

/// Cosine similarity; 0 when either side is the zero vector.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Lower-cased word tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text
        .chars()
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .collect();
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if c == '\''
            && !cur.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            cur.push('\'');
        } else if !cur.is_empty() {
            tokens.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

/// All n-grams of the given orders, space-joined, in text order.
pub fn ngrams(tokens: &[String], range: (usize, usize)) -> Vec<String> {
    let mut out = Vec::new();
    for n in range.0..=range.1 {
        if n > tokens.len() {
            break;
        }
        for w in tokens.windows(n) {
            out.push(w.join(" "));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    pub config: TfidfConfig,
    vocabulary: HashMap<String, u32>,
    terms: Vec<String>,
    idf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TfidfFile {
    version: u32,
    config: TfidfConfig,
    vocab: Vec<(String, u32)>,
    idf: Vec<f64>,
}

impl TfidfModel {
    /// Fits the vocabulary and idf weights on the training texts.
    pub fn fit<S: AsRef<str>>(docs: &[S], config: TfidfConfig) -> Result<Self> {
        config.validate()?;
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let n_docs = docs.len();
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in docs {
            let grams: HashSet<String> = ngrams(&tokenize(doc.as_ref()), config.ngram_range)
                .into_iter()
                .collect();
            for g in grams {
                *df.entry(g).or_insert(0) += 1;
            }
        }

        let ceiling = config.max_df * n_docs as f64;
        let mut kept: Vec<(String, usize)> = df
            .into_iter()
            .filter(|(_, d)| *d >= config.min_df && (*d as f64) <= ceiling)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        kept.truncate(config.max_features);
        // Feature indices follow lexicographic n-gram order.
        kept.sort_by(|a, b| a.0.cmp(&b.0));

        let mut vocabulary = HashMap::with_capacity(kept.len());
        let mut terms = Vec::with_capacity(kept.len());
        let mut idf = Vec::with_capacity(kept.len());
        for (i, (term, d)) in kept.into_iter().enumerate() {
            idf.push(((1.0 + n_docs as f64) / (1.0 + d as f64)).ln() + 1.0);
            vocabulary.insert(term.clone(), i as u32);
            terms.push(term);
        }
        Ok(TfidfModel {
            config,
            vocabulary,
            terms,
            idf,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.vocabulary.get(term).copied()
    }

    pub fn term(&self, index: usize) -> Option<&str> {
        self.terms.get(index).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    /// TF-IDF vector of one text, L2-normalised; out-of-vocabulary n-grams
    /// are ignored so an all-OOV text maps to the zero vector.
    pub fn transform(&self, text: &str) -> SparseVector {
        let pairs: Vec<(u32, f64)> = ngrams(&tokenize(text), self.config.ngram_range)
            .iter()
            .filter_map(|g| self.vocabulary.get(g).map(|&i| (i, 1.0)))
            .collect();
        let mut v = SparseVector::from_pairs(pairs);
        for (i, w) in v.indices.iter().zip(v.values.iter_mut()) {
            *w *= self.idf[*i as usize];
        }
        let norm = v.norm();
        if norm > 0.0 {
            v.values.iter_mut().for_each(|w| *w /= norm);
        }
        v
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TfidfFile {
            version: 1,
            config: self.config.clone(),
            vocab: self
                .terms
                .iter()
                .enumerate()
                .map(|(i, t)| (t.clone(), i as u32))
                .collect(),
            idf: self.idf.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TfidfFile = serde_json::from_str(text)?;
        if file.version != 1 {
            return Err(Error::UnsupportedVersion(file.version));
        }
        if file.vocab.len() != file.idf.len() {
            return Err(Error::InvalidConfig("vocab and idf lengths differ".into()));
        }
        let mut terms = vec![String::new(); file.vocab.len()];
        let mut vocabulary = HashMap::with_capacity(file.vocab.len());
        for (term, idx) in file.vocab {
            let slot = terms
                .get_mut(idx as usize)
                .ok_or_else(|| Error::InvalidConfig(format!("feature index {idx} out of range")))?;
            *slot = term.clone();
            if vocabulary.insert(term, idx).is_some() {
                return Err(Error::InvalidConfig("duplicate vocabulary entry".into()));
            }
        }
        Ok(TfidfModel {
            config: file.config,
            vocabulary,
            terms,
            idf: file.idf,
        })
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

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> TfidfConfig {
        TfidfConfig {
            min_df: 1,
            max_df: 1.0,
            max_features: 1000,
            ngram_range: (1, 3),
        }
    }

    #[test]
    fn tokenizer_keeps_internal_apostrophes() {
        assert_eq!(tokenize("Don't SAY it's 3-D!"), vec!["don't", "say", "it's", "3", "d"]);
        assert_eq!(tokenize("'quoted' words\u{2019}"), vec!["quoted", "words"]);
        assert_eq!(tokenize("They\u{2019}re here"), vec!["they're", "here"]);
    }

    #[test]
    fn ngram_orders() {
        let t = tokenize("a b c");
        assert_eq!(ngrams(&t, (1, 3)), vec!["a", "b", "c", "a b", "b c", "a b c"]);
        assert_eq!(ngrams(&t, (2, 2)), vec!["a b", "b c"]);
    }

    #[test]
    fn min_df_floor() {
        let mut docs = vec!["the rigged system".to_string(); 25];
        docs.extend((0..975).map(|i| format!("filler{} text", i % 100)));
        let m = TfidfModel::fit(&docs, TfidfConfig::default()).unwrap();
        assert!(m.index_of("rigged").is_some());
        assert!(m.index_of("filler7").is_none());
    }

    #[test]
    fn max_df_ceiling() {
        let mut docs = vec!["common word".to_string(); 60];
        docs.extend((0..40).map(|i| format!("rare{}", i % 2)));
        let cfg = TfidfConfig {
            min_df: 1,
            ..TfidfConfig::default()
        };
        let m = TfidfModel::fit(&docs, cfg).unwrap();
        assert!(m.index_of("common").is_none());
        assert!(m.index_of("rare0").is_some());
    }

    #[test]
    fn max_features_ties_are_lexicographic() {
        let docs = ["b a", "c a", "d"];
        let cfg = TfidfConfig {
            max_features: 2,
            ngram_range: (1, 1),
            ..small_config()
        };
        let m = TfidfModel::fit(&docs, cfg).unwrap();
        // "a" has df 2, then b/c/d tie at 1 and "b" wins.
        assert_eq!(m.terms(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn empty_corpus_errors() {
        let docs: Vec<String> = vec![];
        assert!(matches!(TfidfModel::fit(&docs, TfidfConfig::default()), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn transform_examples() {
        let docs = ["the rigged system", "a fair system", "rigged again"];
        let m = TfidfModel::fit(&docs, small_config()).unwrap();
        assert!(m.transform("zzz qqq").is_zero());

        let v = m.transform("fair");
        assert_eq!(v.nnz(), 1);
        assert_eq!(v.values[0], 1.0);

        assert_eq!(m.transform("the rigged system"), m.transform("The RIGGED system"));
        let v = m.transform("the rigged system, rigged");
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn idf_formula() {
        let docs = ["a b", "a", "c"];
        let m = TfidfModel::fit(&docs, small_config()).unwrap();
        let a = m.index_of("a").unwrap() as usize;
        let c = m.index_of("c").unwrap() as usize;
        assert!((m.idf()[a] - ((4.0f64 / 3.0).ln() + 1.0)).abs() < 1e-15);
        assert!((m.idf()[c] - ((4.0f64 / 2.0).ln() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn cosine_examples() {
        let v = SparseVector::from_pairs(vec![(0, 0.6), (3, 0.8)]);
        assert!((cosine(&v, &v) - 1.0).abs() < 1e-15);
        let w = SparseVector::from_pairs(vec![(1, 2.0)]);
        assert_eq!(cosine(&v, &w), 0.0);
        assert_eq!(cosine(&v, &SparseVector::default()), 0.0);
        // (1, 2) . (3, 1) = 5; |a| = sqrt 5, |b| = sqrt 10
        let a = SparseVector::from_pairs(vec![(0, 1.0), (1, 2.0)]);
        let b = SparseVector::from_pairs(vec![(1, 1.0), (0, 3.0)]);
        let expected = 5.0 / (5.0f64.sqrt() * 10.0f64.sqrt());
        assert!((cosine(&a, &b) - expected).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let docs = ["the rigged system", "a fair system", "rigged again"];
        let m = TfidfModel::fit(&docs, small_config()).unwrap();
        let back = TfidfModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(m, back);
        let bad = m.to_json().unwrap().replacen("\"version\":1", "\"version\":2", 1);
        assert!(matches!(TfidfModel::from_json(&bad), Err(Error::UnsupportedVersion(2))));
    }
}
