//! Hashtag token grammar: `#` followed by one or more word characters,
//! matched case-insensitively and reported lowercase.

use regex::Regex;
use std::sync::OnceLock;

fn tag_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"#\w+").expect("static regex"))
}

/// All maximal `#word` tokens in `text`, lowercased, deduplicated, in order
/// of first occurrence. Empty text yields an empty list.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    let mut seen = Vec::new();
    for m in tag_regex().find_iter(text) {
        let tag = m.as_str().to_lowercase();
        if !seen.contains(&tag) {
            seen.push(tag);
        }
    }
    seen
}

/// Lowercase a single hashtag token; `None` if it is not one.
pub fn normalize_hashtag(raw: &str) -> Option<String> {
    let trimmed = raw.trim();
    let m = tag_regex().find(trimmed)?;
    if m.start() == 0 && m.end() == trimmed.len() {
        Some(trimmed.to_lowercase())
    } else {
        None
    }
}
