//! Tokenization and stopword policies.
//!
//! A token is a maximal run of unicode letters in the lowercased text, so
//! digits, punctuation and whitespace only ever act as separators. Markup
//! (`<tag ...>` spans and `&entity;` references) is blanked out first.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ENGLISH: &str = include_str!("../../presets/english.txt");
const AQAP_S3: &str = include_str!("../../presets/aqap_s3.txt");
const AQAP_S3_ROBUST: &str = include_str!("../../presets/aqap_s3_robust.txt");

/// Names of the presets compiled into the crate.
pub const BUILTIN_PRESETS: [&str; 2] = ["aqap_s3", "aqap_s3_robust"];

/// Parses a one-term-per-line list. Blank lines and `#` comments are skipped;
/// terms are lowercased and deduplicated.
pub fn parse_term_list(text: &str) -> Vec<String> {
    let set: BTreeSet<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StopwordPolicy {
    pub standard_list: BTreeSet<String>,
    pub custom_list: BTreeSet<String>,
    pub named_presets: BTreeMap<String, Vec<String>>,
}

impl StopwordPolicy {
    /// No stopwords at all.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Standard English stopwords plus the built-in presets (none active).
    pub fn english() -> Self {
        let mut named_presets = BTreeMap::new();
        named_presets.insert("aqap_s3".to_string(), parse_term_list(AQAP_S3));
        named_presets.insert("aqap_s3_robust".to_string(), parse_term_list(AQAP_S3_ROBUST));
        Self {
            standard_list: parse_term_list(ENGLISH).into_iter().collect(),
            custom_list: BTreeSet::new(),
            named_presets,
        }
    }

    /// English stopwords with the named preset activated.
    pub fn with_preset(name: &str) -> Result<Self> {
        let mut policy = Self::english();
        policy.activate(name)?;
        Ok(policy)
    }

    /// Adds a named preset's terms to the custom list.
    pub fn activate(&mut self, name: &str) -> Result<()> {
        let terms = self.named_presets.get(name).cloned().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown stopword preset `{name}` (known: {})",
                self.named_presets.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })?;
        self.custom_list.extend(terms);
        Ok(())
    }

    /// Registers a preset from a plain-text file; the preset name is the file stem.
    pub fn register_preset_file(&mut self, path: &Path) -> Result<String> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::InvalidParameter(format!("bad preset path {}", path.display())))?
            .to_string();
        self.named_presets.insert(name.clone(), parse_term_list(&text));
        Ok(name)
    }

    pub fn add_custom<I, S>(&mut self, terms: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.custom_list
            .extend(terms.into_iter().map(|t| t.as_ref().to_lowercase()));
    }

    fn is_stopword(&self, token: &str) -> bool {
        self.standard_list.contains(token) || self.custom_list.contains(token)
    }

    /// Hyphenated custom entries, split into their letter runs.
    fn compounds(&self) -> Vec<Vec<String>> {
        self.standard_list
            .iter()
            .chain(&self.custom_list)
            .filter(|t| t.contains(['-', '\u{2010}', '\u{2011}']))
            .map(|t| raw_tokens(t).into_iter().map(|r| r.text).collect::<Vec<_>>())
            .filter(|parts: &Vec<String>| parts.len() > 1)
            .collect()
    }
}

#[derive(Debug)]
struct RawToken {
    text: String,
    /// Joined to the previous token by exactly one hyphen.
    hyphen_joined: bool,
}

fn is_hyphen(c: char) -> bool {
    matches!(c, '-' | '\u{2010}' | '\u{2011}')
}

/// Replaces `<...>` tags and `&...;` entities with spaces.
pub fn strip_markup(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '<' => {
                let rest = &text[i + 1..];
                let looks_like_tag = rest
                    .chars()
                    .next()
                    .is_some_and(|n| n.is_ascii_alphabetic() || n == '/' || n == '!' || n == '?');
                match rest.find('>') {
                    Some(end) if looks_like_tag => {
                        out.push(' ');
                        let stop = i + 1 + end;
                        while chars.peek().is_some_and(|&(j, _)| j <= stop) {
                            chars.next();
                        }
                    }
                    _ => out.push(' '),
                }
            }
            '&' => {
                let rest = &text[i + 1..];
                let entity_len = rest
                    .char_indices()
                    .take_while(|&(_, ch)| ch.is_ascii_alphanumeric() || ch == '#')
                    .count();
                if entity_len > 0 && entity_len <= 10 && rest[entity_len..].starts_with(';') {
                    out.push(' ');
                    let stop = i + 1 + entity_len;
                    while chars.peek().is_some_and(|&(j, _)| j <= stop) {
                        chars.next();
                    }
                } else {
                    out.push(' ');
                }
            }
            _ => out.push(c),
        }
    }
    out
}

fn raw_tokens(text: &str) -> Vec<RawToken> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    // Separator characters seen since the last token ended.
    let mut gap = String::new();
    let flush = |current: &mut String, gap: &mut String, tokens: &mut Vec<RawToken>| {
        if !current.is_empty() {
            let mut g = gap.chars();
            let hyphen_joined = !tokens.is_empty() && matches!((g.next(), g.next()), (Some(h), None) if is_hyphen(h));
            tokens.push(RawToken {
                text: std::mem::take(current),
                hyphen_joined,
            });
            gap.clear();
        }
    };
    for c in text.chars() {
        if c.is_alphabetic() {
            for lc in c.to_lowercase() {
                if lc.is_alphabetic() {
                    current.push(lc);
                } else {
                    flush(&mut current, &mut gap, &mut tokens);
                    gap.push(lc);
                }
            }
        } else {
            if !current.is_empty() {
                flush(&mut current, &mut gap, &mut tokens);
            }
            gap.push(c);
        }
    }
    flush(&mut current, &mut gap, &mut tokens);
    tokens
}

/// Lowercase alphabetic tokens of `text` with markup, numbers and stopwords
/// removed, in original order.
///
/// Hyphenated stopword entries such as `yemen-based` remove the matching
/// hyphen-joined token sequence.
pub fn tokenize(text: &str, policy: &StopwordPolicy) -> Vec<String> {
    let raw = raw_tokens(&strip_markup(text));
    let compounds = policy.compounds();
    let mut out = Vec::with_capacity(raw.len());
    let mut i = 0;
    'outer: while i < raw.len() {
        for parts in &compounds {
            let n = parts.len();
            if i + n <= raw.len()
                && parts
                    .iter()
                    .enumerate()
                    .all(|(j, p)| raw[i + j].text == *p && (j == 0 || raw[i + j].hyphen_joined))
            {
                i += n;
                continue 'outer;
            }
        }
        let t = &raw[i].text;
        if !policy.is_stopword(t) {
            out.push(t.clone());
        }
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn s3_preset_removes_group_names() {
        let policy = StopwordPolicy::with_preset("aqap_s3").unwrap();
        assert_eq!(tokenize("Qaeda rebels attacked", &policy), vec!["rebels", "attacked"]);
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("", &StopwordPolicy::english()).is_empty());
    }

    #[test]
    fn markup_and_numbers_are_stripped() {
        let policy = StopwordPolicy::english();
        assert_eq!(tokenize("<p>123 Sanaa</p>", &policy), vec!["sanaa"]);
        assert_eq!(
            tokenize("Aden&nbsp;port <a href=\"x\">link</a> 4x4", &policy),
            vec!["aden", "port", "link", "x"]
        );
        // A bare comparison is not a tag.
        assert_eq!(tokenize("a < b", &StopwordPolicy::empty()), vec!["a", "b"]);
    }

    #[test]
    fn hyphens_split_tokens() {
        let policy = StopwordPolicy::empty();
        assert_eq!(
            tokenize("Yemen-based fighters", &policy),
            vec!["yemen", "based", "fighters"]
        );
    }

    #[test]
    fn hyphenated_preset_entry_removes_compound_only() {
        let policy = StopwordPolicy::with_preset("aqap_s3").unwrap();
        assert_eq!(
            tokenize("Yemen-based fighters left Yemen based on orders; yemenbased", &policy),
            vec!["fighters", "left", "yemen", "based", "orders"]
        );
    }

    #[test]
    fn standard_stopwords_removed() {
        let policy = StopwordPolicy::english();
        assert_eq!(tokenize("The attack on the port", &policy), vec!["attack", "port"]);
    }

    #[test]
    fn robust_preset_adds_alshariah() {
        let base = StopwordPolicy::with_preset("aqap_s3").unwrap();
        let robust = StopwordPolicy::with_preset("aqap_s3_robust").unwrap();
        assert_eq!(tokenize("alshariah", &base), vec!["alshariah"]);
        assert!(tokenize("alshariah", &robust).is_empty());
        assert!(robust.custom_list.is_superset(&base.custom_list));
    }

    #[test]
    fn unknown_preset_is_rejected() {
        assert!(StopwordPolicy::with_preset("nope").is_err());
    }

    #[test]
    fn preset_lists_are_lowercase_and_unique() {
        let policy = StopwordPolicy::english();
        for terms in policy.named_presets.values() {
            let set: BTreeSet<_> = terms.iter().collect();
            assert_eq!(set.len(), terms.len());
            assert!(terms.iter().all(|t| *t == t.to_lowercase()));
        }
        assert_eq!(policy.named_presets["aqap_s3"].len(), 23);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "[a-zA-Z0-9 \\-<>&;.,éÉßñÑ]{0,80}") {
            let policy = StopwordPolicy::with_preset("aqap_s3").unwrap();
            let once = tokenize(&text, &policy);
            let twice = tokenize(&once.join(" "), &policy);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokens_are_lowercase_letters(text in "\\PC{0,60}") {
            for t in tokenize(&text, &StopwordPolicy::empty()) {
                prop_assert!(!t.is_empty());
                prop_assert!(t.chars().all(char::is_alphabetic));
            }
        }
    }
}
