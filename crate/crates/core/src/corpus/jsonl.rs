//! JSONL ingestion and serialization for sentence and raw-speech records.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;
use serde_json::{Map, Value};

use super::{segment, Campaign, Corpus, LabelSet, Sentence, Speech};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    /// One pre-segmented sentence per line.
    Sentences,
    /// One full transcript per line, segmented on ingest.
    RawSpeeches,
}

const SPEECH_KEYS: [&str; 7] = [
    "date",
    "location",
    "state",
    "campaign",
    "swing_ballotpedia",
    "swing_high_attention",
    "speech_id",
];

/// Reads a JSONL file into a corpus named after the file stem.
pub fn ingest_jsonl(path: impl AsRef<Path>, schema: Schema) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_jsonl_str(&text, schema, name)
}

struct Builder {
    speech: Speech,
    sentences: BTreeMap<usize, Sentence>,
}

/// Parses JSONL text. Blank lines are skipped; line numbers are 1-based.
pub fn read_jsonl_str(text: &str, schema: Schema, name: impl Into<String>) -> Result<Corpus> {
    let mut order: Vec<String> = Vec::new();
    let mut builders: HashMap<String, Builder> = HashMap::new();

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let value: Value = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        let Value::Object(mut obj) = value else {
            return Err(parse_err("record is not a JSON object".into()));
        };
        let speech_id = take_string(&mut obj, "speech_id", lineno)?
            .ok_or_else(|| parse_err("missing speech_id".into()))?;

        let builder = builders.entry(speech_id.clone()).or_insert_with(|| {
            order.push(speech_id.clone());
            Builder {
                speech: Speech::new(speech_id.clone(), Vec::new()),
                sentences: BTreeMap::new(),
            }
        });
        if schema == Schema::RawSpeeches && !builder.sentences.is_empty() {
            return Err(Error::DuplicateSpeech(speech_id));
        }
        merge_speech_metadata(&mut builder.speech, &mut obj, lineno)?;

        match schema {
            Schema::Sentences => {
                let index = take_index(&mut obj, lineno)?;
                let text = take_string(&mut obj, "text", lineno)?
                    .ok_or_else(|| parse_err("missing text".into()))?;
                let gold = take_labels(&mut obj, lineno)?;
                let mut sentence = Sentence::new(index, text);
                sentence.gold = gold;
                sentence.extra = obj.into_iter().collect();
                if builder.sentences.insert(index, sentence).is_some() {
                    return Err(Error::DuplicateSentence { speech_id, index });
                }
            }
            Schema::RawSpeeches => {
                let text = take_string(&mut obj, "text", lineno)?
                    .ok_or_else(|| parse_err("missing text".into()))?;
                for s in segment(&text) {
                    builder.sentences.insert(s.index, s);
                }
                builder.speech.extra = obj.into_iter().collect();
            }
        }
    }

    let speeches = order
        .into_iter()
        .map(|id| {
            let b = builders.remove(&id).expect("builder exists");
            let mut speech = b.speech;
            speech.sentences = b.sentences.into_values().collect();
            speech
        })
        .collect();
    Corpus::new(name, speeches)
}

fn take_string(obj: &mut Map<String, Value>, key: &str, line: usize) -> Result<Option<String>> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(Value::Number(n)) if key == "speech_id" => Ok(Some(n.to_string())),
        Some(other) => Err(Error::Parse {
            line,
            message: format!("field {key} must be a string, got {other}"),
        }),
    }
}

fn take_bool(obj: &mut Map<String, Value>, key: &str, line: usize) -> Result<Option<bool>> {
    match obj.remove(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Bool(b)) => Ok(Some(b)),
        Some(other) => Err(Error::Parse {
            line,
            message: format!("field {key} must be a boolean, got {other}"),
        }),
    }
}

fn take_index(obj: &mut Map<String, Value>, line: usize) -> Result<usize> {
    match obj.remove("index") {
        Some(Value::Number(n)) => n.as_u64().map(|v| v as usize).ok_or_else(|| Error::Parse {
            line,
            message: format!("index must be a non-negative integer, got {n}"),
        }),
        Some(other) => Err(Error::Parse {
            line,
            message: format!("index must be an integer, got {other}"),
        }),
        None => Err(Error::Parse {
            line,
            message: "missing index".into(),
        }),
    }
}

fn take_labels(obj: &mut Map<String, Value>, line: usize) -> Result<Option<LabelSet>> {
    match obj.remove("labels") {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(items)) => {
            let mut tokens = Vec::with_capacity(items.len());
            for it in items {
                match it {
                    Value::String(s) => tokens.push(s),
                    other => {
                        return Err(Error::Parse {
                            line,
                            message: format!("label must be a string, got {other}"),
                        })
                    }
                }
            }
            LabelSet::from_tokens(&tokens).map(Some)
        }
        Some(other) => Err(Error::Parse {
            line,
            message: format!("labels must be an array, got {other}"),
        }),
    }
}

fn merge_speech_metadata(speech: &mut Speech, obj: &mut Map<String, Value>, line: usize) -> Result<()> {
    if let Some(d) = take_string(obj, "date", line)? {
        let date = NaiveDate::parse_from_str(&d, "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            message: format!("bad date {d:?}: {e}"),
        })?;
        speech.date.get_or_insert(date);
    }
    if let Some(loc) = take_string(obj, "location", line)? {
        speech.location.get_or_insert(loc);
    }
    if let Some(st) = take_string(obj, "state", line)? {
        speech.state.get_or_insert(st);
    }
    if let Some(c) = take_string(obj, "campaign", line)? {
        let c: Campaign = c.parse().map_err(|e: Error| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        speech.campaign.get_or_insert(c);
    }
    if let Some(b) = take_bool(obj, "swing_ballotpedia", line)? {
        speech.swing_ballotpedia.get_or_insert(b);
    }
    if let Some(b) = take_bool(obj, "swing_high_attention", line)? {
        speech.swing_high_attention.get_or_insert(b);
    }
    Ok(())
}

#[derive(Serialize)]
struct SentenceRecord<'a> {
    speech_id: &'a str,
    index: usize,
    text: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<LabelSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    date: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    location: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    campaign: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    swing_ballotpedia: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    swing_high_attention: Option<bool>,
    #[serde(flatten)]
    extra: BTreeMap<&'a str, &'a Value>,
}

/// Writes the corpus as sentence JSONL. Speech-level pass-through fields
/// are repeated on each line; sentence-level ones win on key clashes.
pub fn write_sentences_jsonl<W: Write>(corpus: &Corpus, mut out: W) -> Result<()> {
    for sp in &corpus.speeches {
        let date = sp.date.map(|d| d.format("%Y-%m-%d").to_string());
        for s in &sp.sentences {
            let mut extra: BTreeMap<&str, &Value> = BTreeMap::new();
            for (k, v) in sp.extra.iter().chain(s.extra.iter()) {
                if !SPEECH_KEYS.contains(&k.as_str())
                    && !matches!(k.as_str(), "index" | "text" | "labels")
                {
                    extra.insert(k.as_str(), v);
                }
            }
            let rec = SentenceRecord {
                speech_id: &sp.id,
                index: s.index,
                text: &s.text,
                labels: s.gold,
                date: date.clone(),
                location: sp.location.as_deref(),
                state: sp.state.as_deref(),
                campaign: sp.campaign.map(Campaign::as_str),
                swing_ballotpedia: sp.swing_ballotpedia,
                swing_high_attention: sp.swing_high_attention,
                extra,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_record() {
        let c = read_jsonl_str(
            r#"{"speech_id":"s1","index":0,"text":"Hello there.","labels":[]}"#,
            Schema::Sentences,
            "t",
        )
        .unwrap();
        assert_eq!(c.speeches.len(), 1);
        assert_eq!(c.sentence_count(), 1);
        assert_eq!(c.speeches[0].sentences[0].gold, Some(LabelSet::NEUTRAL));
    }

    #[test]
    fn fully_populist_record_and_metadata() {
        let text = concat!(
            r#"{"speech_id":"s1","index":1,"text":"They betrayed you, the people.","labels":["AE","PC"],"speaker":"x"}"#,
            "\n\n",
            r#"{"speech_id":"s1","index":0,"text":"Hello Ohio.","date":"2016-09-01","state":"OH","campaign":"Election2016"}"#,
            "\n"
        );
        let c = read_jsonl_str(text, Schema::Sentences, "t").unwrap();
        let sp = &c.speeches[0];
        assert_eq!(sp.sentences[1].gold, Some(LabelSet::BOTH));
        assert_eq!(sp.sentences[0].gold, None);
        assert_eq!(sp.campaign, Some(Campaign::Election2016));
        assert_eq!(sp.state.as_deref(), Some("OH"));
        assert_eq!(sp.sentences[1].extra.get("speaker"), Some(&Value::from("x")));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"speech_id\":\"s\",\"index\":0,\"text\":\"ok\"}\n{not json\n";
        match read_jsonl_str(text, Schema::Sentences, "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let text = "{\"speech_id\":\"s\",\"index\":0,\"text\":\"ok\",\"labels\":[\"ZZ\"]}";
        assert!(matches!(
            read_jsonl_str(text, Schema::Sentences, "t"),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn duplicate_sentence_rejected() {
        let text = "{\"speech_id\":\"s\",\"index\":0,\"text\":\"a\"}\n{\"speech_id\":\"s\",\"index\":0,\"text\":\"b\"}";
        assert!(matches!(
            read_jsonl_str(text, Schema::Sentences, "t"),
            Err(Error::DuplicateSentence { index: 0, .. })
        ));
    }

    #[test]
    fn raw_speech_is_segmented() {
        let text = r#"{"speech_id":"r1","text":"The system is rigged. The people must rise up.","date":"2020-10-01","venue":"arena"}"#;
        let c = read_jsonl_str(text, Schema::RawSpeeches, "raw").unwrap();
        let sp = &c.speeches[0];
        assert_eq!(sp.sentences.len(), 2);
        assert_eq!(sp.effective_campaign(), Some(Campaign::Election2020));
        assert_eq!(sp.extra.get("venue"), Some(&Value::from("arena")));
    }

    #[test]
    fn round_trip() {
        let text = concat!(
            r#"{"speech_id":"a","index":0,"text":"One two three.","labels":["PC"],"date":"2016-08-01","location":"Erie, PA","state":"PA","campaign":"Election2016","speaker":"x"}"#,
            "\n",
            r#"{"speech_id":"a","index":1,"text":"Four.","labels":[],"date":"2016-08-01"}"#,
            "\n",
            r#"{"speech_id":"b","index":0,"text":"Five six seven.","swing_ballotpedia":true}"#,
            "\n"
        );
        let c = read_jsonl_str(text, Schema::Sentences, "t").unwrap();
        let mut buf = Vec::new();
        write_sentences_jsonl(&c, &mut buf).unwrap();
        let back = read_jsonl_str(std::str::from_utf8(&buf).unwrap(), Schema::Sentences, "t").unwrap();
        assert_eq!(c, back);
    }
}
