//! Sentence scores, the speech-level discourse indices (PDI, WPDI) and the
//! positional populist volume.

use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::classify::PredictionSet;
use crate::corpus::{filter_for_scoring, Campaign, Corpus, LabelSet, Sentence, Speech, SwingScheme};
use crate::error::{Error, Result};

const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreConfig {
    pub full_boost: f64,
    pub adjacency_multiplier: f64,
    pub scale: f64,
    /// Bin widths as fractions of the speech; must sum to 1.
    pub bin_scheme: Vec<f64>,
    /// Let fully populist sentences take part in adjacency pairs.
    pub pair_fully_populist: bool,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            full_boost: 3.0,
            adjacency_multiplier: 1.5,
            scale: 100.0,
            bin_scheme: vec![0.2, 0.6, 0.2],
            pair_fully_populist: false,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.full_boost >= 1.0) {
            return Err(Error::InvalidConfig(format!("full_boost must be >= 1, got {}", self.full_boost)));
        }
        if !(self.adjacency_multiplier >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "adjacency_multiplier must be >= 1, got {}",
                self.adjacency_multiplier
            )));
        }
        if !self.scale.is_finite() {
            return Err(Error::InvalidConfig("scale must be finite".into()));
        }
        if self.bin_scheme.is_empty() || self.bin_scheme.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::InvalidConfig("bin fractions must be positive".into()));
        }
        let total: f64 = self.bin_scheme.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("bin fractions sum to {total}, not 1")));
        }
        Ok(())
    }

    /// Lower cumulative boundaries of every bin after the first.
    fn boundaries(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.bin_scheme.len().saturating_sub(1));
        for f in &self.bin_scheme[..self.bin_scheme.len() - 1] {
            acc += f;
            out.push(acc);
        }
        out
    }

    /// Bin of position `index` in a speech of `n` sentences. A position on a
    /// boundary belongs to the later bin.
    pub fn bin_of(&self, index: usize, n: usize) -> usize {
        let frac = index as f64 / n as f64;
        self.boundaries().iter().filter(|&&b| frac >= b - BOUNDARY_EPS).count()
    }
}

pub fn sentence_score(label: LabelSet, config: &ScoreConfig) -> f64 {
    if label.is_fully_populist() {
        config.full_boost
    } else if label.is_populist() {
        1.0
    } else {
        0.0
    }
}

fn pairable(a: LabelSet, b: LabelSet, config: &ScoreConfig) -> bool {
    if config.pair_fully_populist {
        a.is_populist() && b.is_populist() && (a.is_fully_populist() || b.is_fully_populist() || a != b)
    } else {
        a.is_single() && b.is_single() && a != b
    }
}

/// Start indices of the adjacency pairs, chosen greedily left to right
/// without overlap.
pub fn adjacency_pairs(labels: &[LabelSet], config: &ScoreConfig) -> Vec<usize> {
    let mut pairs = Vec::new();
    let mut i = 0;
    while i + 1 < labels.len() {
        if pairable(labels[i], labels[i + 1], config) {
            pairs.push(i);
            i += 2;
        } else {
            i += 1;
        }
    }
    pairs
}

/// Per-sentence scores with the adjacency multiplier applied.
pub fn adjusted_scores(labels: &[LabelSet], config: &ScoreConfig) -> Vec<f64> {
    let mut scores: Vec<f64> = labels.iter().map(|l| sentence_score(*l, config)).collect();
    for i in adjacency_pairs(labels, config) {
        scores[i] *= config.adjacency_multiplier;
        scores[i + 1] *= config.adjacency_multiplier;
    }
    scores
}

/// Where sentence labels are read from.
#[derive(Debug, Clone, Copy)]
pub enum LabelSource<'a> {
    Gold,
    Predicted,
    Set(&'a PredictionSet),
}

impl LabelSource<'_> {
    pub fn label(&self, speech: &Speech, sentence: &Sentence) -> Option<LabelSet> {
        match self {
            LabelSource::Gold => sentence.gold,
            LabelSource::Predicted => sentence.predicted,
            LabelSource::Set(set) => set.get(&speech.id, sentence.index),
        }
    }

    fn require(&self, speech: &Speech, sentence: &Sentence) -> Result<LabelSet> {
        self.label(speech, sentence).ok_or_else(|| Error::Unlabeled {
            speech_id: speech.id.clone(),
            index: sentence.index,
        })
    }
}

/// Share of populist sentences per bin, for all populist sentences and
/// separately for each dimension. `None` when a speech has no positives of
/// that kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PopulistVolume {
    pub overall: Option<Vec<f64>>,
    pub anti_elitism: Option<Vec<f64>>,
    pub people_centrism: Option<Vec<f64>>,
}

fn shares(counts: &[usize]) -> Option<Vec<f64>> {
    let total: usize = counts.iter().sum();
    (total > 0).then(|| counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Populist volume over a positional sequence of labels (no filtering).
pub fn populist_volume_of(labels: &[LabelSet], config: &ScoreConfig) -> PopulistVolume {
    let bins = config.bin_scheme.len();
    let mut overall = vec![0usize; bins];
    let mut ae = vec![0usize; bins];
    let mut pc = vec![0usize; bins];
    for (i, l) in labels.iter().enumerate() {
        if !l.is_populist() {
            continue;
        }
        let b = config.bin_of(i, labels.len());
        overall[b] += 1;
        if l.anti_elitism {
            ae[b] += 1;
        }
        if l.people_centrism {
            pc[b] += 1;
        }
    }
    PopulistVolume {
        overall: shares(&overall),
        anti_elitism: shares(&ae),
        people_centrism: shares(&pc),
    }
}

/// Populist volume of a speech over all of its sentences.
pub fn populist_volume(speech: &Speech, source: LabelSource<'_>, config: &ScoreConfig) -> Result<PopulistVolume> {
    let labels = speech
        .sentences
        .iter()
        .map(|s| source.require(speech, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(populist_volume_of(&labels, config))
}

/// PV divided by bin width; a uniform spread gives 1 in every bin.
pub fn density_reweight(pv: &[f64], config: &ScoreConfig) -> Vec<f64> {
    pv.iter().zip(&config.bin_scheme).map(|(v, f)| v / f).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechScore {
    pub speech_id: String,
    pub date: Option<NaiveDate>,
    pub campaign: Option<Campaign>,
    pub state: Option<String>,
    pub swing_ballotpedia: Option<bool>,
    pub swing_high_attention: Option<bool>,
    pub n_sentences: usize,
    pub n_scored: usize,
    pub raw_sum: f64,
    pub pdi: f64,
    pub wpdi: f64,
    pub mean_len_populist: Option<f64>,
    pub mean_len_neutral: Option<f64>,
    pub pv: PopulistVolume,
    pub adjacency_pairs: usize,
    /// Kept sentences whose score was multiplied by the adjacency bonus.
    pub adjacency_sentences: usize,
}

fn mean(xs: &[usize]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<usize>() as f64 / xs.len() as f64)
}

/// Scores one speech: filter, adjacency-adjusted sum, PDI, WPDI and PV.
pub fn pdi(speech: &Speech, source: LabelSource<'_>, config: &ScoreConfig) -> Result<SpeechScore> {
    let filtered = filter_for_scoring(speech);
    let labels = filtered
        .kept
        .iter()
        .map(|s| source.require(speech, s))
        .collect::<Result<Vec<_>>>()?;
    let scores = adjusted_scores(&labels, config);
    let pairs = adjacency_pairs(&labels, config);
    let raw_sum: f64 = scores.iter().sum();
    let n_scored = labels.len();
    let pdi = if n_scored == 0 {
        0.0
    } else {
        config.scale * raw_sum / n_scored as f64
    };

    let (mut pop_len, mut neu_len) = (Vec::new(), Vec::new());
    for (s, l) in filtered.kept.iter().zip(&labels) {
        if l.is_populist() {
            pop_len.push(s.word_count);
        } else {
            neu_len.push(s.word_count);
        }
    }
    let mean_len_populist = mean(&pop_len);
    let mean_len_neutral = mean(&neu_len);
    let wpdi = match (mean_len_populist, mean_len_neutral) {
        (Some(p), Some(n)) if n > 0.0 => pdi * p / n,
        _ => {
            if n_scored > 0 {
                log::debug!("speech {}: length ratio undefined, wpdi = pdi", speech.id);
            }
            pdi
        }
    };

    Ok(SpeechScore {
        speech_id: speech.id.clone(),
        date: speech.date,
        campaign: speech.effective_campaign(),
        state: speech.state.clone(),
        swing_ballotpedia: speech.swing(SwingScheme::Ballotpedia),
        swing_high_attention: speech.swing(SwingScheme::HighAttention),
        n_sentences: speech.sentences.len(),
        n_scored,
        raw_sum,
        pdi,
        wpdi,
        mean_len_populist,
        mean_len_neutral,
        pv: populist_volume(speech, source, config)?,
        adjacency_pairs: pairs.len(),
        adjacency_sentences: 2 * pairs.len(),
    })
}

pub fn score_corpus(corpus: &Corpus, source: LabelSource<'_>, config: &ScoreConfig) -> Result<Vec<SpeechScore>> {
    config.validate()?;
    corpus.speeches.iter().map(|sp| pdi(sp, source, config)).collect()
}

/// One CSV row of the score table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub speech_id: String,
    pub date: Option<NaiveDate>,
    pub campaign: Option<String>,
    pub state: Option<String>,
    pub n_scored: usize,
    pub pdi: f64,
    pub wpdi: f64,
    pub pv_open: Option<f64>,
    pub pv_body: Option<f64>,
    pub pv_close: Option<f64>,
    pub adjacency_pairs: usize,
    pub swing_ballotpedia: Option<bool>,
    pub swing_attention: Option<bool>,
    pub pv_ae_open: Option<f64>,
    pub pv_ae_body: Option<f64>,
    pub pv_ae_close: Option<f64>,
    pub pv_pc_open: Option<f64>,
    pub pv_pc_body: Option<f64>,
    pub pv_pc_close: Option<f64>,
    pub adjacency_sentences: usize,
    pub n_sentences: usize,
}

fn split3(v: &Option<Vec<f64>>) -> Result<(Option<f64>, Option<f64>, Option<f64>)> {
    match v {
        None => Ok((None, None, None)),
        Some(v) if v.len() == 3 => Ok((Some(v[0]), Some(v[1]), Some(v[2]))),
        Some(v) => Err(Error::InvalidConfig(format!(
            "score table needs a 3-bin scheme, got {} bins",
            v.len()
        ))),
    }
}

impl ScoreRow {
    pub fn from_score(s: &SpeechScore) -> Result<Self> {
        let (pv_open, pv_body, pv_close) = split3(&s.pv.overall)?;
        let (pv_ae_open, pv_ae_body, pv_ae_close) = split3(&s.pv.anti_elitism)?;
        let (pv_pc_open, pv_pc_body, pv_pc_close) = split3(&s.pv.people_centrism)?;
        Ok(ScoreRow {
            speech_id: s.speech_id.clone(),
            date: s.date,
            campaign: s.campaign.map(|c| c.as_str().to_string()),
            state: s.state.clone(),
            n_scored: s.n_scored,
            pdi: s.pdi,
            wpdi: s.wpdi,
            pv_open,
            pv_body,
            pv_close,
            adjacency_pairs: s.adjacency_pairs,
            swing_ballotpedia: s.swing_ballotpedia,
            swing_attention: s.swing_high_attention,
            pv_ae_open,
            pv_ae_body,
            pv_ae_close,
            pv_pc_open,
            pv_pc_body,
            pv_pc_close,
            adjacency_sentences: s.adjacency_sentences,
            n_sentences: s.n_sentences,
        })
    }

    pub fn campaign(&self) -> Option<Campaign> {
        self.campaign.as_deref().and_then(|c| c.parse().ok())
    }

    pub fn pv(&self) -> Option<[f64; 3]> {
        Some([self.pv_open?, self.pv_body?, self.pv_close?])
    }

    pub fn pv_ae(&self) -> Option<[f64; 3]> {
        Some([self.pv_ae_open?, self.pv_ae_body?, self.pv_ae_close?])
    }

    pub fn pv_pc(&self) -> Option<[f64; 3]> {
        Some([self.pv_pc_open?, self.pv_pc_body?, self.pv_pc_close?])
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

pub fn write_scores_csv<W: Write>(scores: &[SpeechScore], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in scores {
        w.serialize(ScoreRow::from_score(s)?).map_err(csv_error)?;
    }
    if scores.is_empty() {
        // Header only.
        let header = csv::StringRecord::from(SCORE_COLUMNS.to_vec());
        w.write_record(&header).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

pub const SCORE_COLUMNS: [&str; 21] = [
    "speech_id",
    "date",
    "campaign",
    "state",
    "n_scored",
    "pdi",
    "wpdi",
    "pv_open",
    "pv_body",
    "pv_close",
    "adjacency_pairs",
    "swing_ballotpedia",
    "swing_attention",
    "pv_ae_open",
    "pv_ae_body",
    "pv_ae_close",
    "pv_pc_open",
    "pv_pc_body",
    "pv_pc_close",
    "adjacency_sentences",
    "n_sentences",
];

pub fn read_scores_csv<R: Read>(input: R) -> Result<Vec<ScoreRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}
