//! Genre string tokenization.
//!
//! Raw genre strings look like `"Death/Thrash Metal (early), Groove Metal (later)"`.
//! Top-level commas separate segments, parenthesized qualifiers are dropped,
//! and slash alternatives inherit the shared terminal word of their segment
//! so that `"Death/Thrash Metal"` yields both `death metal` and `thrash metal`.

use std::collections::BTreeSet;

/// Splits `text` into a set of normalized genre tags.
pub fn parse_genre_string(text: &str) -> BTreeSet<String> {
    let mut tags = BTreeSet::new();
    for segment in split_top_level_commas(text) {
        let segment = strip_qualifiers(&segment);
        let alternatives: Vec<Vec<&str>> = segment
            .split('/')
            .map(|tok| tok.split_whitespace().collect::<Vec<_>>())
            .filter(|words| !words.is_empty())
            .collect();
        let terminal = match alternatives.last() {
            Some(last) if alternatives.len() > 1 && last.len() > 1 => last.last().copied(),
            _ => None,
        };
        for words in &alternatives {
            let mut tag = words.join(" ");
            if let Some(term) = terminal {
                let has_term = words
                    .last()
                    .is_some_and(|w| w.to_lowercase() == term.to_lowercase());
                if !has_term {
                    tag.push(' ');
                    tag.push_str(term);
                }
            }
            let tag = normalize_tag(&tag);
            if !tag.is_empty() {
                tags.insert(tag);
            }
        }
    }
    tags
}

/// Lowercases, trims and collapses internal whitespace.
pub fn normalize_tag(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn split_top_level_commas(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out
}

/// Removes every parenthesized group (nested groups included). An unmatched
/// opening parenthesis swallows the rest of the segment; stray closing
/// parentheses and commas left inside groups are dropped with them.
fn strip_qualifiers(segment: &str) -> String {
    let mut out = String::with_capacity(segment.len());
    let mut depth = 0usize;
    for ch in segment.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' => {}
            _ if depth == 0 => out.push(ch),
            _ => {}
        }
    }
    out
}
