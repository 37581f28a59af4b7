//! Rule-based sentence splitting and tokenization.
//!
//! Sentences end at `.`, `!` or `?` (runs of them count once) followed by
//! whitespace or end of text, unless the word carrying the period is a known
//! abbreviation. Tokens are lowercased words; every other punctuation
//! character becomes its own token. Apostrophes and hyphens between letters
//! stay inside words.

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "approx", "inc", "ltd", "co",
    "mt", "no", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Splits raw text into sentence strings (trimmed, non-empty).
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if is_terminal(chars[i]) {
            let mut end = i + 1;
            while end < chars.len() && (is_terminal(chars[end]) || matches!(chars[end], '"' | '\'' | ')')) {
                end += 1;
            }
            let at_boundary = end >= chars.len() || chars[end].is_whitespace();
            if at_boundary && !(chars[i] == '.' && end == i + 1 && ends_with_abbreviation(&chars[start..i])) {
                push_trimmed(&mut out, &chars[start..end]);
                start = end;
            }
            i = end;
        } else {
            i += 1;
        }
    }
    if start < chars.len() {
        push_trimmed(&mut out, &chars[start..]);
    }
    out
}

fn ends_with_abbreviation(prefix: &[char]) -> bool {
    let word: String = prefix
        .iter()
        .rev()
        .take_while(|c| !c.is_whitespace())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    let word = word.trim_start_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
    ABBREVIATIONS.contains(&word.as_str()) || (word.chars().count() == 1 && word.chars().all(char::is_alphabetic))
}

fn push_trimmed(out: &mut Vec<String>, chars: &[char]) {
    let s: String = chars.iter().collect();
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

/// Lowercases and splits one sentence into word and punctuation tokens.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let chars: Vec<char> = sentence.chars().collect();
    let mut tokens = Vec::new();
    let mut word = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let inner_joiner = matches!(c, '\'' | '-')
            && !word.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || inner_joiner {
            word.extend(c.to_lowercase());
        } else {
            if !word.is_empty() {
                tokens.push(std::mem::take(&mut word));
            }
            if !c.is_whitespace() {
                tokens.push(c.to_lowercase().collect());
            }
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

/// Joins tokens with single spaces; `tokenize` recovers the same tokens.
pub fn detokenize(tokens: &[String]) -> String {
    tokens.join(" ")
}

/// Splits and tokenizes a text, dropping sentences without tokens.
pub fn tokenize_text(text: &str) -> Vec<Vec<String>> {
    split_sentences(text)
        .iter()
        .map(|s| tokenize(s))
        .filter(|t| !t.is_empty())
        .collect()
}
