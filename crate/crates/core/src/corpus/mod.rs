//! Speech corpora: labels, sentences, speeches, ingestion and scoring filters.

mod campaign;
mod jsonl;
mod segment;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

pub use campaign::{is_swing, swing_states, Campaign, SwingScheme};
pub use jsonl::{ingest_jsonl, read_jsonl_str, write_sentences_jsonl, Schema};
pub use segment::{segment, split_spans, ABBREVIATIONS};

/// Multi-label state of a sentence. Neutral is the empty set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelSet {
    pub anti_elitism: bool,
    pub people_centrism: bool,
}

impl LabelSet {
    pub const NEUTRAL: LabelSet = LabelSet::new(false, false);
    pub const AE: LabelSet = LabelSet::new(true, false);
    pub const PC: LabelSet = LabelSet::new(false, true);
    pub const BOTH: LabelSet = LabelSet::new(true, true);
    /// All four states in nominal-code order.
    pub const ALL: [LabelSet; 4] = [Self::NEUTRAL, Self::AE, Self::PC, Self::BOTH];

    pub const fn new(anti_elitism: bool, people_centrism: bool) -> Self {
        LabelSet {
            anti_elitism,
            people_centrism,
        }
    }

    pub fn is_neutral(self) -> bool {
        !self.anti_elitism && !self.people_centrism
    }

    pub fn is_populist(self) -> bool {
        !self.is_neutral()
    }

    pub fn is_fully_populist(self) -> bool {
        self.anti_elitism && self.people_centrism
    }

    /// Exactly one of the two populist labels.
    pub fn is_single(self) -> bool {
        self.anti_elitism != self.people_centrism
    }

    /// Nominal code: 0 neutral, 1 AE, 2 PC, 3 both.
    pub fn code(self) -> usize {
        usize::from(self.anti_elitism) + 2 * usize::from(self.people_centrism)
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn tokens(self) -> Vec<&'static str> {
        let mut v = Vec::with_capacity(2);
        if self.anti_elitism {
            v.push("AE");
        }
        if self.people_centrism {
            v.push("PC");
        }
        v
    }

    /// Builds a label set from tokens such as `["AE", "PC"]`. `N` and
    /// `neutral` are accepted as explicit neutral markers.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        let mut set = LabelSet::NEUTRAL;
        for t in tokens {
            match t.as_ref().trim().to_ascii_lowercase().as_str() {
                "ae" | "anti_elitism" | "anti-elitism" => set.anti_elitism = true,
                "pc" | "people_centrism" | "people-centrism" => set.people_centrism = true,
                "n" | "neutral" => {}
                _ => return Err(Error::UnknownLabel(t.as_ref().to_string())),
            }
        }
        Ok(set)
    }

    pub fn short_name(self) -> &'static str {
        match self.code() {
            0 => "N",
            1 => "AE",
            2 => "PC",
            _ => "AE+PC",
        }
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl Serialize for LabelSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.tokens().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabelSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let tokens = Vec::<String>::deserialize(deserializer)?;
        LabelSet::from_tokens(&tokens).map_err(serde::de::Error::custom)
    }
}

/// Number of whitespace-delimited tokens, punctuation attached.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub text: String,
    /// 0-based position within the speech.
    pub index: usize,
    pub word_count: usize,
    pub gold: Option<LabelSet>,
    pub predicted: Option<LabelSet>,
    /// Unrecognised record fields, kept for round-tripping.
    pub extra: BTreeMap<String, Value>,
}

impl Sentence {
    pub fn new(index: usize, text: impl Into<String>) -> Self {
        let text = text.into();
        Sentence {
            word_count: word_count(&text),
            text,
            index,
            gold: None,
            predicted: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn with_gold(mut self, gold: LabelSet) -> Self {
        self.gold = Some(gold);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Speech {
    pub id: String,
    pub sentences: Vec<Sentence>,
    pub date: Option<NaiveDate>,
    pub location: Option<String>,
    /// Two-letter state code.
    pub state: Option<String>,
    pub campaign: Option<Campaign>,
    pub swing_ballotpedia: Option<bool>,
    pub swing_high_attention: Option<bool>,
    pub extra: BTreeMap<String, Value>,
}

impl Speech {
    pub fn new(id: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        Speech {
            id: id.into(),
            sentences,
            ..Default::default()
        }
    }

    /// Builds a speech from sentence texts with the given gold labels.
    pub fn from_labeled<S: AsRef<str>>(id: &str, items: &[(S, LabelSet)]) -> Self {
        let sentences = items
            .iter()
            .enumerate()
            .map(|(i, (t, l))| Sentence::new(i, t.as_ref()).with_gold(*l))
            .collect();
        Speech::new(id, sentences)
    }

    /// Campaign given explicitly, otherwise derived from the date.
    pub fn effective_campaign(&self) -> Option<Campaign> {
        self.campaign.or_else(|| self.date.map(Campaign::from_date))
    }

    /// Explicit swing flag, or the lookup from campaign and state.
    pub fn swing(&self, scheme: SwingScheme) -> Option<bool> {
        let explicit = match scheme {
            SwingScheme::Ballotpedia => self.swing_ballotpedia,
            SwingScheme::HighAttention => self.swing_high_attention,
        };
        explicit.or_else(|| {
            let campaign = self.effective_campaign()?;
            is_swing(campaign, self.state.as_deref()?, scheme)
        })
    }

    /// Checks sentence indices are unique and contiguous and that a named
    /// campaign agrees with the speech date.
    pub fn validate(&self) -> Result<()> {
        for (expected, s) in self.sentences.iter().enumerate() {
            if s.index != expected {
                return Err(Error::IndexGap {
                    speech_id: self.id.clone(),
                    expected,
                    found: s.index,
                });
            }
        }
        if let (Some(c), Some(d)) = (self.campaign, self.date) {
            if c != Campaign::Other && !c.contains(d) {
                return Err(Error::CampaignMismatch {
                    speech_id: self.id.clone(),
                    campaign: c.to_string(),
                    date: d.to_string(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub name: String,
    pub speeches: Vec<Speech>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, speeches: Vec<Speech>) -> Result<Self> {
        let corpus = Corpus {
            name: name.into(),
            speeches,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for sp in &self.speeches {
            if !seen.insert(sp.id.as_str()) {
                return Err(Error::DuplicateSpeech(sp.id.clone()));
            }
            sp.validate()?;
        }
        Ok(())
    }

    pub fn sentence_count(&self) -> usize {
        self.speeches.iter().map(|s| s.sentences.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.sentence_count() == 0
    }

    pub fn speech(&self, id: &str) -> Option<&Speech> {
        self.speeches.iter().find(|s| s.id == id)
    }

    /// All sentences in corpus order with their speech.
    pub fn sentences(&self) -> impl Iterator<Item = (&Speech, &Sentence)> {
        self.speeches
            .iter()
            .flat_map(|sp| sp.sentences.iter().map(move |s| (sp, s)))
    }

    /// Gold labels in corpus order; errors on the first speech with an
    /// unlabeled sentence.
    pub fn gold_labels(&self) -> Result<Vec<LabelSet>> {
        let mut out = Vec::with_capacity(self.sentence_count());
        for sp in &self.speeches {
            for s in &sp.sentences {
                out.push(s.gold.ok_or_else(|| Error::MissingGold(sp.id.clone()))?);
            }
        }
        Ok(out)
    }
}

/// Result of the pre-scoring sentence filter.
#[derive(Debug, Clone, Default)]
pub struct Filtered<'a> {
    pub kept: Vec<&'a Sentence>,
    pub dropped: Vec<&'a Sentence>,
    /// Dropped-looking sentences that start with a case variant of
    /// "Thank " (e.g. "THANK you all"). They are kept.
    pub thank_case_variants: usize,
}

pub const MIN_SCORED_WORDS: usize = 3;
const THANK_PREFIX: &str = "Thank ";
const LEADING_QUOTES: [char; 4] = ['"', '\'', '\u{2018}', '\u{201C}'];

fn strip_leading(text: &str) -> &str {
    text.trim_start_matches(|c: char| c.is_whitespace() || LEADING_QUOTES.contains(&c))
}

/// Whether a sentence begins with the exact, case-sensitive prefix "Thank ".
pub fn starts_with_thank(text: &str) -> bool {
    strip_leading(text).starts_with(THANK_PREFIX)
}

/// Whether a sentence survives the scoring filters: at least three words
/// and no leading "Thank ".
pub fn keep_for_scoring(sentence: &Sentence) -> bool {
    sentence.word_count >= MIN_SCORED_WORDS && !starts_with_thank(&sentence.text)
}

/// Splits a speech into sentences kept for scoring and the dropped rest,
/// preserving order and original indices.
pub fn filter_for_scoring(speech: &Speech) -> Filtered<'_> {
    let mut out = Filtered::default();
    for s in &speech.sentences {
        if keep_for_scoring(s) {
            let head = strip_leading(&s.text);
            if head.len() >= THANK_PREFIX.len()
                && head.is_char_boundary(THANK_PREFIX.len())
                && head[..THANK_PREFIX.len()].eq_ignore_ascii_case(THANK_PREFIX)
            {
                out.thank_case_variants += 1;
                log::debug!(
                    "speech {} sentence {}: case variant of Thank-prefix kept: {:?}",
                    speech.id,
                    s.index,
                    s.text
                );
            }
            out.kept.push(s);
        } else {
            out.dropped.push(s);
        }
    }
    out
}

/// Counts of the label distribution; fully-populist sentences are counted
/// under both AE and PC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct LabelDistribution {
    pub total: usize,
    pub neutral: usize,
    pub anti_elitism: usize,
    pub people_centrism: usize,
    pub fully_populist: usize,
}

impl LabelDistribution {
    pub fn from_labels(labels: impl IntoIterator<Item = LabelSet>) -> Self {
        let mut d = LabelDistribution::default();
        for l in labels {
            d.total += 1;
            d.neutral += usize::from(l.is_neutral());
            d.anti_elitism += usize::from(l.anti_elitism);
            d.people_centrism += usize::from(l.people_centrism);
            d.fully_populist += usize::from(l.is_fully_populist());
        }
        d
    }

    /// Sentences carrying at least one populist label.
    pub fn populist(&self) -> usize {
        self.anti_elitism + self.people_centrism - self.fully_populist
    }

    pub fn percent(&self, count: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * count as f64 / self.total as f64
        }
    }

    /// Empirical frequencies of the four joint states (N, AE, PC, both).
    pub fn joint_frequencies(&self) -> [f64; 4] {
        let n = self.total.max(1) as f64;
        let both = self.fully_populist;
        [
            self.neutral as f64 / n,
            (self.anti_elitism - both) as f64 / n,
            (self.people_centrism - both) as f64 / n,
            both as f64 / n,
        ]
    }
}

impl fmt::Display for LabelDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "category           count  percent")?;
        for (name, c) in [
            ("Neutral (N)", self.neutral),
            ("Anti-elitism (AE)", self.anti_elitism),
            ("People-centrism (PC)", self.people_centrism),
            ("Fully populist", self.fully_populist),
        ] {
            writeln!(f, "{name:<20} {c:>6}  {:>5.1}%", self.percent(c))?;
        }
        write!(f, "{:<20} {:>6}", "Total", self.total)
    }
}

/// Label distribution over gold labels.
pub fn corpus_stats(corpus: &Corpus) -> Result<LabelDistribution> {
    Ok(LabelDistribution::from_labels(corpus.gold_labels()?))
}
