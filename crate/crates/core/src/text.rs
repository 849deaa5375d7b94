//! Word segmentation shared by augmentation and featurization.

use alloc::string::String;
use alloc::vec::Vec;

/// Characters kept when they sit between two word characters.
fn is_joiner(c: char) -> bool {
    matches!(c, '-' | '\'' | '\u{2019}' | '\u{2010}' | '\u{2011}')
}

/// Lowercases `text` and splits it into word tokens.
///
/// Letters and digits form words. Hyphens and apostrophes survive only
/// inside a word (`guarda-chuva`, `d'água`); every other punctuation or
/// symbol character separates tokens, as does whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().flat_map(char::to_lowercase).collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let joins = is_joiner(c) && !current.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || joins {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Joins tokens with single spaces.
pub fn detokenize(tokens: &[String]) -> String {
    tokens.join(" ")
}

/// Collapses runs of whitespace and trims the ends.
pub fn normalize_whitespace(text: &str) -> String {
    let parts: Vec<&str> = text.split_whitespace().collect();
    parts.join(" ")
}
