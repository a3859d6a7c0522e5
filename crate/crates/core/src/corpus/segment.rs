//! Rule-based sentence splitter for raw transcripts.
//!
//! A boundary is placed after a run of terminal punctuation (`.`, `!`, `?`,
//! optionally followed by closing quotes or brackets) when the run is followed
//! by whitespace and then an upper-case letter or an opening quote. A period
//! that closes a known abbreviation or a single-letter initial never splits.

use super::Sentence;

/// Abbreviations that never end a sentence. Matched case-sensitively
/// against the whitespace token that carries the period.
pub const ABBREVIATIONS: &[&str] = &[
    "Mr.", "Mrs.", "Ms.", "Dr.", "Jr.", "Sr.", "St.", "Mt.", "Ft.", "vs.", "Gen.", "Sen.",
    "Rep.", "Gov.", "Lt.", "Col.", "Sgt.", "Capt.", "Cmdr.", "Adm.", "Prof.", "Rev.", "Hon.",
    "Pres.", "U.S.", "U.S.A.", "D.C.", "U.K.", "U.N.", "a.m.", "p.m.", "e.g.", "i.e.", "No.",
    "Inc.", "Corp.", "Ltd.", "Co.", "Ave.", "Jan.", "Feb.", "Apr.", "Aug.", "Sept.", "Sep.",
    "Oct.", "Nov.", "Dec.",
];

const TERMINALS: [char; 3] = ['.', '!', '?'];
const CLOSERS: [char; 6] = ['"', '\'', '\u{201D}', '\u{2019}', ')', ']'];
const OPENERS: [char; 5] = ['"', '\'', '\u{201C}', '\u{2018}', '('];

/// Splits `raw` into sentences with contiguous 0-based indices.
pub fn segment(raw: &str) -> Vec<Sentence> {
    split_spans(raw)
        .into_iter()
        .enumerate()
        .map(|(i, text)| Sentence::new(i, text))
        .collect()
}

/// Sentence texts, trimmed, in order.
pub fn split_spans(raw: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = raw.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;

    while i < chars.len() {
        let (_, c) = chars[i];
        if !TERMINALS.contains(&c) {
            i += 1;
            continue;
        }
        let run_start = i;
        let mut j = i + 1;
        while j < chars.len() && TERMINALS.contains(&chars[j].1) {
            j += 1;
        }
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        let end_byte = chars.get(j).map_or(raw.len(), |&(b, _)| b);

        if is_boundary(raw, &chars, run_start, j) {
            push_trimmed(&mut out, &raw[start..end_byte]);
            start = end_byte;
        }
        i = j;
    }
    push_trimmed(&mut out, &raw[start..]);
    out
}

fn push_trimmed<'a>(out: &mut Vec<&'a str>, span: &'a str) {
    let t = span.trim();
    if !t.is_empty() {
        out.push(t);
    }
}

fn is_boundary(raw: &str, chars: &[(usize, char)], run_start: usize, run_end: usize) -> bool {
    // Must be followed by whitespace, then a capital or an opening quote.
    if run_end >= chars.len() || !chars[run_end].1.is_whitespace() {
        return false;
    }
    let next = chars[run_end..].iter().map(|&(_, c)| c).find(|c| !c.is_whitespace());
    match next {
        Some(c) if c.is_uppercase() || OPENERS.contains(&c) => {}
        _ => return false,
    }

    // A lone period may belong to an abbreviation or an initial.
    let run: String = chars[run_start..run_end].iter().map(|&(_, c)| c).collect();
    let terminal_count = run.chars().filter(|c| TERMINALS.contains(c)).count();
    if terminal_count == 1 && run.starts_with('.') {
        let period_byte = chars[run_start].0;
        let token_start = raw[..period_byte]
            .rfind(char::is_whitespace)
            .map_or(0, |p| p + raw[p..].chars().next().unwrap().len_utf8());
        let token = raw[token_start..=period_byte].trim_start_matches(|c| OPENERS.contains(&c));
        if is_abbreviation(token) {
            return false;
        }
    }
    true
}

fn is_abbreviation(token: &str) -> bool {
    if ABBREVIATIONS.contains(&token) {
        return true;
    }
    // Single-letter initials such as "J."
    let mut it = token.chars();
    matches!((it.next(), it.next(), it.next()), (Some(c), Some('.'), None) if c.is_uppercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sentences() {
        let s = segment("The system is rigged. The people must rise up.");
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].text, "The system is rigged.");
        assert_eq!(s[1].text, "The people must rise up.");
        assert_eq!(s[1].index, 1);
        assert_eq!(s[1].word_count, 5);
    }

    #[test]
    fn empty_input() {
        assert!(segment("").is_empty());
        assert!(segment("   \n ").is_empty());
    }

    #[test]
    fn abbreviation_does_not_split() {
        assert_eq!(segment("Mr. Smith won.").len(), 1);
        assert_eq!(segment("We love the U.S. Army and D.C. is a swamp.").len(), 1);
        assert_eq!(segment("Donald J. Trump spoke.").len(), 1);
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(segment("It costs 3.5 billion. that is a lot.").len(), 1);
    }

    #[test]
    fn quotes_and_exclamations() {
        let s = segment("He said \"we will win!\" Then he left. Wow! \"Amazing,\" they said.");
        let texts: Vec<&str> = s.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(
            texts,
            vec!["He said \"we will win!\"", "Then he left.", "Wow!", "\"Amazing,\" they said."]
        );
    }

    #[test]
    fn trailing_fragment_is_kept() {
        let s = segment("First one. and then a fragment without end");
        assert_eq!(s.len(), 1);
        let s = segment("First one. Second without end");
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].text, "Second without end");
    }

    #[test]
    fn ellipsis_and_question() {
        let s = segment("Guess what... Right? They lost.");
        assert_eq!(s.len(), 3);
    }
}
