#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_popdisc"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn popdisc")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "popdisc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

const AE_WORDS: [&str; 10] = [
    "corrupt", "establishment", "insiders", "rigged", "donors", "lobbyists", "special", "interests", "elites", "media",
];
const PC_WORDS: [&str; 8] = [
    "people", "workers", "families", "americans", "hardworking", "citizens", "forgotten", "voters",
];
const FILLER: [&str; 24] = [
    "we", "will", "build", "the", "new", "roads", "and", "schools", "tonight", "in", "this", "great", "state", "jobs",
    "trade", "energy", "plan", "today", "many", "years", "very", "big", "crowd", "again",
];
const STATES: [&str; 12] = ["PA", "MI", "WI", "AZ", "GA", "NV", "NC", "FL", "OH", "TX", "CA", "NY"];
const WINDOWS: [((i32, u32, u32), i64, &str); 4] = [
    ((2015, 6, 16), 390, "Primaries2016"),
    ((2016, 7, 21), 110, "Election2016"),
    ((2019, 6, 18), 500, "Election2020"),
    ((2022, 11, 15), 720, "Election2024"),
];

/// Joint label code: 0 neutral, 1 AE, 2 PC, 3 both.
fn draw_code(rng: &mut ChaCha8Rng, p: [f64; 4]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    0
}

fn sentence(rng: &mut ChaCha8Rng, code: usize) -> String {
    if code == 0 && rng.gen_bool(0.04) {
        return "Thank you very much everybody.".into();
    }
    if code == 0 && rng.gen_bool(0.03) {
        return "Great crowd.".into();
    }
    let len = rng.gen_range(4..12);
    let mut words: Vec<&str> = (0..len).map(|_| FILLER[rng.gen_range(0..FILLER.len())]).collect();
    if code & 1 == 1 {
        for _ in 0..2 {
            let at = rng.gen_range(0..=words.len());
            words.insert(at, AE_WORDS[rng.gen_range(0..AE_WORDS.len())]);
        }
    }
    if code & 2 == 2 {
        for _ in 0..2 {
            let at = rng.gen_range(0..=words.len());
            words.insert(at, PC_WORDS[rng.gen_range(0..PC_WORDS.len())]);
        }
    }
    let mut s = words.join(" ");
    s[..1].make_ascii_uppercase();
    s.push('.');
    s
}

fn labels_json(code: usize) -> &'static str {
    match code {
        0 => "[]",
        1 => "[\"AE\"]",
        2 => "[\"PC\"]",
        _ => "[\"AE\",\"PC\"]",
    }
}

/// Seeded synthetic sentence JSONL. Campaigns cycle with the speech index
/// and later campaigns are slightly more populist.
pub fn synth_corpus(seed: u64, speeches: usize, sentences: impl Fn(usize) -> usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for sp in 0..speeches {
        let ((y, m, d), span, campaign) = WINDOWS[sp % 4];
        let date = NaiveDate::from_ymd_opt(y, m, d).unwrap() + Duration::days(rng.gen_range(0..span));
        let state = STATES[rng.gen_range(0..STATES.len())];
        let lift = 0.02 * (sp % 4) as f64;
        let p = [0.76 - 3.0 * lift, 0.11 + lift, 0.09 + lift, 0.04 + lift];
        for i in 0..sentences(sp) {
            let code = draw_code(&mut rng, p);
            writeln!(
                out,
                r#"{{"speech_id":"sp{sp:04}","index":{i},"text":"{}","labels":{},"date":"{date}","state":"{state}","campaign":"{campaign}"}}"#,
                sentence(&mut rng, code),
                labels_json(code)
            )
            .unwrap();
        }
    }
    out
}

pub fn write_corpus(dir: &Path, name: &str, seed: u64, speeches: usize, per: usize) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, synth_corpus(seed, speeches, |_| per)).unwrap();
    p
}
