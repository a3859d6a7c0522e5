//! Prompt construction for external LLM classification runs.
//!
//! Every prompt starts with the base instruction and the four answer
//! options, optionally followed by one setting-specific block, and ends with
//! the classification question for the target sentence.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, LabelSet, Sentence, Speech};
use crate::error::{Error, Result};
use crate::features::{cosine, SparseVector, TfidfModel};

const BASE_INTRO: &str = "You are a helpful AI assistant with expertise in identifying populism in public discourse. Populism can be defined as an anti-elite discourse in the name of the \"people\". In other words, populism emphasizes the idea of the common \"people\" and often positions this group in opposition to a perceived elite group.\n\nThere are two core elements in identifying populism: (i) anti-elitism, i.e., negative invocations of \"elites\", and (ii) people-centrism, i.e., positive invocations of the \"people\".\n\nYou must classify each sentence in one of the following categories:\n\n";

const CONTEXT_HEADER: &str = "Here are the preceding sentences for context:";
const CONTEXT_INSTRUCTION: &str = "When classifying a sentence, focus primarily on the content of that specific sentence. Use the context of preceding sentences only to resolve coreferences (e.g., identifying who \"they\" or \"you\" refer to) or to disambiguate when the sentence is ambiguous on its own.";
const RAG_INSTRUCTION: &str = "When classifying a sentence, focus primarily on the content of that specific sentence.";

pub const MAX_CONTEXT_WINDOW: usize = 5;

/// Answer-option text for a label state.
pub fn option_text(label: LabelSet) -> &'static str {
    match label.code() {
        0 => "No populism.",
        1 => "Anti-elitism, i.e., negative invocations of \"elites\".",
        2 => "People-centrism, i.e., positive invocations of the \"People\".",
        _ => "Both people-centrism and anti-elitism populism.",
    }
}

fn category_name(label: LabelSet) -> &'static str {
    match label.code() {
        0 => "No populism",
        1 => "Anti-elitism populism",
        2 => "People-centrism populism",
        _ => "Both people-centrism and anti-elitism populism",
    }
}

/// Name and rounded share used in the label-distribution line.
fn distribution_entry(label: LabelSet) -> (&'static str, u32) {
    match label.code() {
        0 => ("No populism", 92),
        1 => ("Anti-elitism", 4),
        2 => ("People-centrism", 2),
        _ => ("Both people-centrism and anti-elitism", 2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionOrder {
    /// a neutral, b anti-elitism, c people-centrism, d both.
    #[default]
    Forward,
    /// a both, b anti-elitism, c people-centrism, d neutral.
    Reversed,
}

const LETTERS: [char; 4] = ['a', 'b', 'c', 'd'];

impl OptionOrder {
    pub fn labels(self) -> [LabelSet; 4] {
        match self {
            OptionOrder::Forward => [LabelSet::NEUTRAL, LabelSet::AE, LabelSet::PC, LabelSet::BOTH],
            OptionOrder::Reversed => [LabelSet::BOTH, LabelSet::AE, LabelSet::PC, LabelSet::NEUTRAL],
        }
    }

    /// `(letter, label)` pairs in presentation order.
    pub fn options(self) -> [(char, LabelSet); 4] {
        let labels = self.labels();
        [0, 1, 2, 3].map(|i| (LETTERS[i], labels[i]))
    }

    pub fn letter_for(self, label: LabelSet) -> char {
        self.options()
            .into_iter()
            .find(|(_, l)| *l == label)
            .map(|(c, _)| c)
            .expect("every label state has an option")
    }

    pub fn label_for(self, letter: &str) -> Result<LabelSet> {
        let t = letter.trim().trim_start_matches('(').trim_end_matches(')').to_ascii_lowercase();
        self.options()
            .into_iter()
            .find(|(c, _)| t.len() == 1 && t.starts_with(*c))
            .map(|(_, l)| l)
            .ok_or_else(|| Error::UnknownLabel(letter.to_string()))
    }
}

impl FromStr for OptionOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "forward" => Ok(OptionOrder::Forward),
            "reversed" | "reverse" => Ok(OptionOrder::Reversed),
            _ => Err(Error::InvalidConfig(format!("unknown option order {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptSetting {
    Base,
    ContextAware,
    DistributionAware,
    KShot,
    RagShot,
}

impl PromptSetting {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptSetting::Base => "base",
            PromptSetting::ContextAware => "context_aware",
            PromptSetting::DistributionAware => "distribution_aware",
            PromptSetting::KShot => "k_shot",
            PromptSetting::RagShot => "rag_shot",
        }
    }
}

impl fmt::Display for PromptSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "base" => Ok(PromptSetting::Base),
            "contextaware" | "context" => Ok(PromptSetting::ContextAware),
            "distributionaware" | "distribution" => Ok(PromptSetting::DistributionAware),
            "kshot" => Ok(PromptSetting::KShot),
            "ragshot" | "rag" => Ok(PromptSetting::RagShot),
            _ => Err(Error::InvalidConfig(format!("unknown prompt setting {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptSpec {
    pub setting: PromptSetting,
    /// Number of demonstrations for K-shot and RAG-shot.
    pub k: usize,
    pub context_window: usize,
    pub seed: u64,
    pub option_order: OptionOrder,
}

impl PromptSpec {
    pub fn new(setting: PromptSetting) -> Self {
        PromptSpec {
            setting,
            k: 0,
            context_window: MAX_CONTEXT_WINDOW,
            seed: 42,
            option_order: OptionOrder::Forward,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.context_window > MAX_CONTEXT_WINDOW {
            return Err(Error::InvalidConfig(format!(
                "context_window {} exceeds {MAX_CONTEXT_WINDOW}",
                self.context_window
            )));
        }
        if self.setting == PromptSetting::KShot && self.k % 4 != 0 {
            return Err(Error::InvalidConfig(format!("k = {} is not divisible by 4", self.k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PromptInstance {
    pub speech_id: String,
    pub index: usize,
    pub setting: PromptSetting,
    pub prompt: String,
    /// Option letter matching the target's gold label, when known.
    pub answer: Option<char>,
}

/// The base instruction with the answer options in the given order.
pub fn base_prompt(order: OptionOrder) -> String {
    let mut s = String::from(BASE_INTRO);
    let lines: Vec<String> = order
        .options()
        .iter()
        .map(|(c, l)| format!("({c}) {}", option_text(*l)))
        .collect();
    s.push_str(&lines.join("\n"));
    s
}

pub fn question(sentence: &str) -> String {
    format!("Which is the most relevant category for the sentence: {sentence}?")
}

struct RagEntry {
    text: String,
    label: LabelSet,
    vector: SparseVector,
}

/// Prepared prompt construction for one spec: K-shot demonstrations are
/// sampled and the retrieval index is built once.
pub struct PromptBuilder<'a> {
    spec: PromptSpec,
    base: String,
    kshot: Vec<(LabelSet, Vec<String>)>,
    rag: Vec<RagEntry>,
    tfidf: Option<&'a TfidfModel>,
}

impl<'a> PromptBuilder<'a> {
    pub fn new(spec: PromptSpec, train: Option<&Corpus>, tfidf: Option<&'a TfidfModel>) -> Result<Self> {
        spec.validate()?;
        let needs_train = matches!(spec.setting, PromptSetting::KShot | PromptSetting::RagShot) && spec.k > 0;
        let train = match (needs_train, train) {
            (true, None) => {
                return Err(Error::InvalidConfig(format!("{} needs a training corpus", spec.setting)))
            }
            (_, t) => t,
        };
        let mut builder = PromptBuilder {
            base: base_prompt(spec.option_order),
            kshot: Vec::new(),
            rag: Vec::new(),
            tfidf,
            spec,
        };
        if builder.spec.setting == PromptSetting::KShot {
            builder.kshot = sample_kshot(train, builder.spec.k, builder.spec.seed)?;
        }
        if builder.spec.setting == PromptSetting::RagShot && builder.spec.k > 0 {
            let tfidf = tfidf.ok_or_else(|| Error::InvalidConfig("rag_shot needs a tf-idf model".into()))?;
            let train = train.expect("checked above");
            for (sp, s) in train.sentences() {
                let label = s.gold.ok_or_else(|| Error::MissingGold(sp.id.clone()))?;
                builder.rag.push(RagEntry {
                    text: s.text.clone(),
                    label,
                    vector: tfidf.transform(&s.text),
                });
            }
        }
        Ok(builder)
    }

    pub fn spec(&self) -> &PromptSpec {
        &self.spec
    }

    /// Sampled K-shot demonstrations per label state.
    pub fn kshot_examples(&self) -> &[(LabelSet, Vec<String>)] {
        &self.kshot
    }

    /// The `k` most similar training sentences (text, label), excluding
    /// any with the same text as the target. Ties keep training order.
    pub fn retrieve(&self, target: &str) -> Vec<(&str, LabelSet)> {
        let Some(tfidf) = self.tfidf else {
            return Vec::new();
        };
        let q = tfidf.transform(target);
        let target = target.trim();
        let mut scored: Vec<(usize, f64)> = self
            .rag
            .iter()
            .enumerate()
            .filter(|(_, e)| e.text.trim() != target)
            .map(|(i, e)| (i, cosine(&q, &e.vector)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored
            .into_iter()
            .take(self.spec.k)
            .map(|(i, _)| (self.rag[i].text.as_str(), self.rag[i].label))
            .collect()
    }

    /// Prompt body without the closing question.
    pub fn body(&self, speech: &Speech, target: &Sentence) -> String {
        let order = self.spec.option_order;
        let mut s = self.base.clone();
        match self.spec.setting {
            PromptSetting::Base => {}
            PromptSetting::ContextAware => {
                s.push_str("\n\n");
                s.push_str(CONTEXT_HEADER);
                s.push('\n');
                let pos = speech
                    .sentences
                    .iter()
                    .position(|x| x.index == target.index)
                    .unwrap_or(0);
                let from = pos.saturating_sub(self.spec.context_window);
                for prev in &speech.sentences[from..pos] {
                    s.push_str(&prev.text);
                    s.push('\n');
                }
                s.push('\n');
                s.push_str(CONTEXT_INSTRUCTION);
            }
            PromptSetting::DistributionAware => {
                let parts: Vec<String> = order
                    .options()
                    .iter()
                    .map(|(c, l)| {
                        let (name, pct) = distribution_entry(*l);
                        format!("({c}) {name} ({pct}%)")
                    })
                    .collect();
                s.push_str("\n\nThe label distribution is ");
                s.push_str(&parts.join(", "));
                s.push('.');
            }
            PromptSetting::KShot => {
                for (c, l) in order.options() {
                    s.push_str(&format!(
                        "\n\nThe following sentences are in category ({c}) {}:",
                        category_name(l)
                    ));
                    if let Some((_, examples)) = self.kshot.iter().find(|(state, _)| *state == l) {
                        for e in examples {
                            s.push('\n');
                            s.push_str(e);
                        }
                    }
                }
            }
            PromptSetting::RagShot => {
                s.push_str(&format!(
                    "\n\nHere are the most similar {} sentences from the training set, accompanied by their label:",
                    self.spec.k
                ));
                for (text, label) in self.retrieve(&target.text) {
                    let c = order.letter_for(label);
                    let name = option_text(label).trim_end_matches('.');
                    s.push_str(&format!("\n{text} -> ({c}) {name}"));
                }
                s.push_str("\n\n");
                s.push_str(RAG_INSTRUCTION);
            }
        }
        s
    }

    pub fn build(&self, speech: &Speech, target: &Sentence) -> PromptInstance {
        let body = self.body(speech, target);
        PromptInstance {
            speech_id: speech.id.clone(),
            index: target.index,
            setting: self.spec.setting,
            prompt: format!("{body}\n\n{}", question(&target.text)),
            answer: target.gold.map(|g| self.spec.option_order.letter_for(g)),
        }
    }
}

fn sample_kshot(train: Option<&Corpus>, k: usize, seed: u64) -> Result<Vec<(LabelSet, Vec<String>)>> {
    let per = k / 4;
    let mut pools: [Vec<&str>; 4] = Default::default();
    if per > 0 {
        let train = train.expect("caller checks");
        for (sp, s) in train.sentences() {
            let g = s.gold.ok_or_else(|| Error::MissingGold(sp.id.clone()))?;
            pools[g.code()].push(&s.text);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(4);
    for state in LabelSet::ALL {
        let pool = &pools[state.code()];
        if pool.len() < per {
            return Err(Error::InsufficientExamples {
                category: state.short_name().to_string(),
                needed: per,
                available: pool.len(),
            });
        }
        let mut idx = rand::seq::index::sample(&mut rng, pool.len(), per).into_vec();
        idx.sort_unstable();
        out.push((state, idx.into_iter().map(|i| pool[i].to_string()).collect()));
    }
    Ok(out)
}

/// Convenience wrapper building a single prompt.
pub fn build_prompt(
    spec: &PromptSpec,
    target: &Sentence,
    speech: &Speech,
    train: Option<&Corpus>,
    tfidf: Option<&TfidfModel>,
) -> Result<PromptInstance> {
    Ok(PromptBuilder::new(spec.clone(), train, tfidf)?.build(speech, target))
}

#[derive(Serialize)]
struct PromptRecord<'a> {
    speech_id: &'a str,
    index: usize,
    setting: PromptSetting,
    prompt: &'a str,
    options: BTreeMap<String, &'static str>,
    answer: Option<String>,
}

/// Writes one prompt line per (builder, target sentence), builders outer.
pub fn emit_prompt_file<W: Write>(builders: &[PromptBuilder<'_>], corpus: &Corpus, mut out: W) -> Result<usize> {
    let mut count = 0;
    for b in builders {
        let options: BTreeMap<String, &'static str> = b
            .spec
            .option_order
            .options()
            .iter()
            .map(|(c, l)| (c.to_string(), option_text(*l)))
            .collect();
        for (sp, s) in corpus.sentences() {
            let inst = b.build(sp, s);
            let rec = PromptRecord {
                speech_id: &inst.speech_id,
                index: inst.index,
                setting: inst.setting,
                prompt: &inst.prompt,
                options: options.clone(),
                answer: inst.answer.map(String::from),
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
            count += 1;
        }
    }
    Ok(count)
}

/// Writes the gold answer key as prediction-style option records.
pub fn emit_answer_key<W: Write>(corpus: &Corpus, order: OptionOrder, mut out: W) -> Result<usize> {
    #[derive(Serialize)]
    struct AnswerRecord<'a> {
        speech_id: &'a str,
        index: usize,
        option: String,
        option_order: OptionOrder,
    }
    let mut count = 0;
    for (sp, s) in corpus.sentences() {
        let g = s.gold.ok_or_else(|| Error::MissingGold(sp.id.clone()))?;
        let rec = AnswerRecord {
            speech_id: &sp.id,
            index: s.index,
            option: order.letter_for(g).to_string(),
            option_order: order,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
        count += 1;
    }
    Ok(count)
}
