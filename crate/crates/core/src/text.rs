//! Tokenization and case-folding shared by induction, generation and metrics.

const SPLIT_TRAILING: &[char] = &['?', '!', '.', ',', ';', ':', '"', '\'', ')', '»', '”'];
const SPLIT_LEADING: &[char] = &['"', '\'', '(', '«', '“'];

/// Whitespace tokenization that also detaches leading quotes/brackets and
/// trailing sentence punctuation (`graduate?` becomes `graduate ?`).
pub fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in s.split_whitespace() {
        let mut rest = word;
        while let Some(c) = rest.chars().next() {
            if SPLIT_LEADING.contains(&c) && rest.len() > c.len_utf8() {
                out.push(c.to_string());
                rest = &rest[c.len_utf8()..];
            } else {
                break;
            }
        }
        let mut trailing = Vec::new();
        while let Some(c) = rest.chars().next_back() {
            if SPLIT_TRAILING.contains(&c) && rest.len() > c.len_utf8() {
                trailing.push(c.to_string());
                rest = &rest[..rest.len() - c.len_utf8()];
            } else {
                break;
            }
        }
        out.push(rest.to_string());
        out.extend(trailing.into_iter().rev());
    }
    out
}

pub fn fold(s: &str) -> String {
    s.to_lowercase()
}

/// True for tokens made only of punctuation or symbols.
pub fn is_punct(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric())
}

/// Tokenization used by the automatic metrics: case-folded whitespace split
/// with punctuation stripped from token ends; punctuation-only tokens vanish.
pub fn metric_tokens(s: &str) -> Vec<String> {
    s.split_whitespace()
        .map(|w| {
            w.trim_end_matches(|c: char| c.is_ascii_punctuation())
                .to_lowercase()
        })
        .filter(|w| !w.is_empty())
        .collect()
}
