//! Sentence segmentation, tokenization, and the normalization used for
//! heading and tag matching.

/// Words that end in a period without ending a sentence. Compared without
/// the trailing dot, case-insensitively.
const ABBREVIATIONS: &[&str] = &[
    "al", "cf", "dr", "e.g", "eg", "eq", "eqs", "etc", "fig", "figs", "i.e", "ie", "mr", "mrs",
    "ms", "no", "prof", "resp", "sec", "secs", "st", "tab", "vs",
];

/// Characters split off token edges. `+` is exempt so names like `C++`
/// survive whole.
fn is_edge_punct(c: char) -> bool {
    !c.is_alphanumeric() && c != '+'
}

/// Lowercases and strips edge punctuation; the comparison form for tag
/// matching. Returns an empty string for pure-punctuation tokens.
pub fn normalize_token(token: &str) -> String {
    token.trim_matches(is_edge_punct).to_lowercase()
}

/// Normalizes a multi-token surface to a single comparison key.
pub fn normalize_phrase<S: AsRef<str>>(tokens: &[S]) -> String {
    tokens
        .iter()
        .map(|t| normalize_token(t.as_ref()))
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Normalizes a section heading for rule-based lookup: lowercase, punctuation
/// collapsed to spaces, and leading numbering (digits or roman numerals)
/// dropped.
pub fn normalize_heading(heading: &str) -> String {
    let lowered: String = heading
        .chars()
        .map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { ' ' })
        .collect();
    let mut words: Vec<&str> = lowered.split_whitespace().collect();
    while let Some(first) = words.first() {
        if is_numbering(first) {
            words.remove(0);
        } else {
            break;
        }
    }
    words.join(" ")
}

fn is_numbering(word: &str) -> bool {
    !word.is_empty()
        && (word.chars().all(|c| c.is_ascii_digit())
            || word.chars().all(|c| matches!(c, 'i' | 'v' | 'x' | 'l' | 'c' | 'd' | 'm')) && word.len() > 1)
}

/// Splits a text block into sentences.
///
/// A boundary is a `.`, `!`, or `?` followed by whitespace and an uppercase
/// letter, unless the period terminates a known abbreviation or a single
/// initial. Delimiters stay attached to their sentence, so concatenating the
/// output reproduces the input up to the whitespace removed between
/// sentences.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if matches!(c, '.' | '!' | '?') && is_boundary(&chars, i, start) {
            push_trimmed(&mut sentences, &chars[start..=i]);
            start = i + 1;
        }
        i += 1;
    }
    if start < chars.len() {
        push_trimmed(&mut sentences, &chars[start..]);
    }
    sentences
}

fn push_trimmed(sentences: &mut Vec<String>, chars: &[char]) {
    let s: String = chars.iter().collect();
    let trimmed = s.trim();
    if !trimmed.is_empty() {
        sentences.push(trimmed.to_string());
    }
}

fn is_boundary(chars: &[char], i: usize, sentence_start: usize) -> bool {
    // Whitespace then an uppercase letter must follow.
    let mut j = i + 1;
    if j >= chars.len() || !chars[j].is_whitespace() {
        return false;
    }
    while j < chars.len() && chars[j].is_whitespace() {
        j += 1;
    }
    if j >= chars.len() || !chars[j].is_uppercase() {
        return false;
    }
    if chars[i] != '.' {
        return true;
    }
    // Word ending at the period, e.g. "al" in "et al." or "e.g" in "e.g.".
    let mut w = i;
    while w > sentence_start && (chars[w - 1].is_alphanumeric() || chars[w - 1] == '.') && w > 0 {
        if chars[w - 1].is_whitespace() {
            break;
        }
        w -= 1;
    }
    let word: String = chars[w..i].iter().collect();
    let word = word.trim_matches('.');
    if word.len() == 1 && word.chars().all(char::is_alphabetic) {
        return false; // initials such as "J."
    }
    let lowered = word.to_lowercase();
    !ABBREVIATIONS.contains(&lowered.as_str())
}

/// Splits a sentence into tokens: whitespace first, then edge punctuation
/// peeled into single-character tokens. Internal hyphens, digits, apostrophes
/// and `+` stay inside their token, so `GPT-2` and `C++` survive whole.
pub fn tokenize(sentence: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in sentence.split_whitespace() {
        let mut chars: Vec<char> = chunk.chars().collect();
        let mut leading = Vec::new();
        while let Some(&first) = chars.first() {
            if is_edge_punct(first) {
                leading.push(first.to_string());
                chars.remove(0);
            } else {
                break;
            }
        }
        let mut trailing = Vec::new();
        while let Some(&last) = chars.last() {
            if is_edge_punct(last) {
                trailing.push(last.to_string());
                chars.pop();
            } else {
                break;
            }
        }
        tokens.extend(leading);
        if !chars.is_empty() {
            tokens.push(chars.into_iter().collect());
        }
        tokens.extend(trailing.into_iter().rev());
    }
    tokens
}
