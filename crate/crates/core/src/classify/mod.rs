//! Baselines, prediction sets and the per-class F1 evaluation protocol.

mod dist_random;
mod svm;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::{Corpus, LabelSet};
use crate::error::{Error, Result};
use crate::promptkit::OptionOrder;

pub use dist_random::{DistRandom, SamplingMode};
pub use svm::{train_binary, BinaryHead, BinaryProblem, ClassWeighting, Decision, LinearSvm, SvmConfig};

/// Evaluation classes. `Neutral` is the empty label set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    Neutral = 0,
    AntiElitism = 1,
    PeopleCentrism = 2,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Neutral, Class::AntiElitism, Class::PeopleCentrism];

    pub fn name(self) -> &'static str {
        match self {
            Class::Neutral => "N",
            Class::AntiElitism => "AE",
            Class::PeopleCentrism => "PC",
        }
    }

    /// Whether a label set counts as a positive of this class. A fully
    /// populist sentence is positive for both AE and PC.
    pub fn is_positive(self, labels: LabelSet) -> bool {
        match self {
            Class::Neutral => labels.is_neutral(),
            Class::AntiElitism => labels.anti_elitism,
            Class::PeopleCentrism => labels.people_centrism,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "N" | "NEUTRAL" => Ok(Class::Neutral),
            "AE" | "ANTI_ELITISM" | "ANTI-ELITISM" => Ok(Class::AntiElitism),
            "PC" | "PEOPLE_CENTRISM" | "PEOPLE-CENTRISM" => Ok(Class::PeopleCentrism),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

/// Labels assigned to sentences by some model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionSet {
    pub provenance: String,
    labels: BTreeMap<String, BTreeMap<usize, LabelSet>>,
    len: usize,
}

#[derive(Serialize)]
struct PredictionRecord<'a> {
    speech_id: &'a str,
    index: usize,
    labels: LabelSet,
}

impl PredictionSet {
    pub fn new(provenance: impl Into<String>) -> Self {
        PredictionSet {
            provenance: provenance.into(),
            labels: BTreeMap::new(),
            len: 0,
        }
    }

    /// The gold labels of a corpus as a prediction set.
    pub fn from_gold(corpus: &Corpus) -> Result<Self> {
        let mut set = PredictionSet::new(format!("gold:{}", corpus.name));
        for (sp, s) in corpus.sentences() {
            let l = s.gold.ok_or_else(|| Error::MissingGold(sp.id.clone()))?;
            set.insert(&sp.id, s.index, l);
        }
        Ok(set)
    }

    /// Inserts a label, returning the previous one for the same key.
    pub fn insert(&mut self, speech_id: &str, index: usize, labels: LabelSet) -> Option<LabelSet> {
        let speech = match self.labels.get_mut(speech_id) {
            Some(m) => m,
            None => self.labels.entry(speech_id.to_string()).or_default(),
        };
        let prev = speech.insert(index, labels);
        if prev.is_none() {
            self.len += 1;
        }
        prev
    }

    pub fn get(&self, speech_id: &str, index: usize) -> Option<LabelSet> {
        self.labels.get(speech_id)?.get(&index).copied()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Entries ordered by speech id, then index.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize, LabelSet)> {
        self.labels
            .iter()
            .flat_map(|(id, m)| m.iter().map(move |(i, l)| (id.as_str(), *i, *l)))
    }

    /// Errors unless the keys are exactly the sentences of `corpus`.
    pub fn check_coverage(&self, corpus: &Corpus) -> Result<()> {
        let mut known: HashSet<(&str, usize)> = HashSet::with_capacity(corpus.sentence_count());
        let mut missing = Vec::new();
        let mut missing_count = 0;
        for (sp, s) in corpus.sentences() {
            known.insert((sp.id.as_str(), s.index));
            if self.get(&sp.id, s.index).is_none() {
                missing_count += 1;
                if missing.len() < 10 {
                    missing.push(format!("{}#{}", sp.id, s.index));
                }
            }
        }
        if let Some((id, i, _)) = self.iter().find(|(id, i, _)| !known.contains(&(*id, *i))) {
            return Err(Error::UnknownSentence(format!("{id}#{i}")));
        }
        if missing_count > 0 {
            return Err(Error::MissingPredictions {
                count: missing_count,
                first: missing,
            });
        }
        Ok(())
    }

    /// Labels in corpus order; errors on any uncovered sentence.
    pub fn aligned(&self, corpus: &Corpus) -> Result<Vec<LabelSet>> {
        self.check_coverage(corpus)?;
        Ok(corpus
            .sentences()
            .map(|(sp, s)| self.get(&sp.id, s.index).expect("coverage checked"))
            .collect())
    }

    /// Copy of `corpus` with `predicted` filled from this set.
    pub fn apply_to(&self, corpus: &Corpus) -> Result<Corpus> {
        let labels = self.aligned(corpus)?;
        let mut out = corpus.clone();
        let mut it = labels.into_iter();
        for sp in &mut out.speeches {
            for s in &mut sp.sentences {
                s.predicted = it.next();
            }
        }
        Ok(out)
    }

    /// Writes `{"speech_id","index","labels"}` lines in key order.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for (speech_id, index, labels) in self.iter() {
            let rec = PredictionRecord {
                speech_id,
                index,
                labels,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
        }
        Ok(())
    }
}

/// Reads a prediction JSONL file and checks it covers `corpus` exactly.
pub fn import_predictions(path: impl AsRef<Path>, corpus: &Corpus) -> Result<PredictionSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let provenance = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_predictions(&text, corpus, provenance)
}

/// Parses prediction records and checks they cover `corpus` exactly.
pub fn parse_predictions(text: &str, corpus: &Corpus, provenance: impl Into<String>) -> Result<PredictionSet> {
    let set = parse_prediction_records(text, provenance)?;
    set.check_coverage(corpus)?;
    Ok(set)
}

/// Parses prediction records given either as a `labels` array or as an
/// option letter `a`-`d` (with optional `option_order`, default forward).
/// Coverage is not checked.
pub fn parse_prediction_records(text: &str, provenance: impl Into<String>) -> Result<PredictionSet> {
    let mut set = PredictionSet::new(provenance);
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let v: Value = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        let speech_id = match v.get("speech_id") {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => return Err(parse_err("missing speech_id".into())),
        };
        let index = v
            .get("index")
            .and_then(Value::as_u64)
            .ok_or_else(|| parse_err("missing or invalid index".into()))? as usize;

        let labels = match (v.get("labels"), v.get("option")) {
            (Some(Value::Array(items)), _) => {
                let tokens: Vec<String> = items
                    .iter()
                    .map(|t| t.as_str().map(str::to_string).ok_or_else(|| Error::UnknownLabel(t.to_string())))
                    .collect::<Result<_>>()?;
                LabelSet::from_tokens(&tokens)?
            }
            (_, Some(Value::String(letter))) => {
                let order = match v.get("option_order").and_then(Value::as_str) {
                    Some(o) => o.parse::<OptionOrder>()?,
                    None => OptionOrder::Forward,
                };
                order.label_for(letter)?
            }
            (None | Some(Value::Null), None | Some(Value::Null)) => LabelSet::NEUTRAL,
            _ => return Err(parse_err("labels must be an array and option a string".into())),
        };
        if set.insert(&speech_id, index, labels).is_some() {
            return Err(Error::DuplicateSentence { speech_id, index });
        }
    }
    Ok(set)
}

/// Binary confusion counts and scores for one class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: Class,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassMetrics {
    /// Scores from counts. A ratio with an empty denominator is 1 when the
    /// class is absent from both sides and 0 otherwise.
    pub fn from_counts(class: Class, tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let ratio = |num: usize, den: usize, other_err: usize| {
            if den == 0 {
                if other_err == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp, fn_);
        let recall = ratio(tp, tp + fn_, fp);
        let f1 = ratio(2 * tp, 2 * tp + fp + fn_, 0);
        ClassMetrics {
            class,
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    /// In [`Class::ALL`] order.
    pub per_class: [ClassMetrics; 3],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

impl EvalReport {
    pub fn class(&self, class: Class) -> &ClassMetrics {
        &self.per_class[class as usize]
    }

    /// `class,precision,recall,f1` rows followed by a `macro` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,precision,recall,f1\n");
        for m in &self.per_class {
            out.push_str(&format!("{},{},{},{}\n", m.class, m.precision, m.recall, m.f1));
        }
        out.push_str(&format!(
            "macro,{},{},{}\n",
            self.macro_precision, self.macro_recall, self.macro_f1
        ));
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "class  precision  recall     f1")?;
        for m in &self.per_class {
            writeln!(f, "{:<5}  {:>9.3}  {:>6.3}  {:>5.3}", m.class.name(), m.precision, m.recall, m.f1)?;
        }
        write!(
            f,
            "macro  {:>9.3}  {:>6.3}  {:>5.3}",
            self.macro_precision, self.macro_recall, self.macro_f1
        )
    }
}

/// Scores aligned prediction/gold label sequences.
pub fn evaluate_labels(pred: &[LabelSet], gold: &[LabelSet]) -> EvalReport {
    assert_eq!(pred.len(), gold.len(), "prediction and gold lengths differ");
    let per_class = Class::ALL.map(|class| {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (p, g) in pred.iter().zip(gold) {
            match (class.is_positive(*p), class.is_positive(*g)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        ClassMetrics::from_counts(class, tp, fp, fn_, tn)
    });
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / 3.0;
    EvalReport {
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        per_class,
    }
}

/// Evaluates a prediction set against the gold labels of `gold`.
pub fn evaluate(pred: &PredictionSet, gold: &Corpus) -> Result<EvalReport> {
    let gold_labels = gold.gold_labels()?;
    let pred_labels = pred.aligned(gold)?;
    Ok(evaluate_labels(&pred_labels, &gold_labels))
}
