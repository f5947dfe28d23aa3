//! Documents, vocabularies and term-weight matrices.

mod ingest;
mod matrix;
mod tokenize;
mod vocab;

use std::collections::HashSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ingest::{ingest_corpus, write_corpus, InputFormat, Schema};
pub use matrix::{intersect_features, weight_counts, weight_tfidf, WeightKind, WeightMatrix};
pub use tokenize::{parse_term_list, strip_markup, tokenize, StopwordPolicy, BUILTIN_PRESETS};
pub use vocab::{build_vocabulary, Vocabulary};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

pub fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FORMAT).map_err(|_| Error::InvalidDate(s.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Option<String>,
    pub date: Option<NaiveDate>,
    pub source_tag: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label: None,
            date: None,
            source_tag: String::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_date(mut self, date: NaiveDate) -> Self {
        self.date = Some(date);
        self
    }

    pub fn with_source(mut self, tag: impl Into<String>) -> Self {
        self.source_tag = tag.into();
        self
    }
}

/// An ordered, validated document collection.
///
/// When documents are dated, `day_index` holds the running day counter: the
/// oldest document is day 1 and every other document counts the days elapsed
/// since it, plus one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    documents: Vec<Document>,
    day_index: Option<Vec<u32>>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for d in &documents {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::DuplicateId(d.id.clone()));
            }
        }
        let dated = documents.iter().filter(|d| d.date.is_some()).count();
        let undated = documents.len() - dated;
        let day_index = if dated == 0 {
            None
        } else if undated > 0 {
            return Err(Error::MixedDating { dated, undated });
        } else {
            let oldest = documents.iter().filter_map(|d| d.date).min().expect("dated");
            Some(
                documents
                    .iter()
                    .map(|d| (d.date.expect("dated") - oldest).num_days() as u32 + 1)
                    .collect(),
            )
        };
        Ok(Self { documents, day_index })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.id.clone()).collect()
    }

    pub fn day_index(&self) -> Option<&[u32]> {
        self.day_index.as_deref()
    }

    pub fn oldest_date(&self) -> Option<NaiveDate> {
        self.documents.iter().filter_map(|d| d.date).min()
    }

    /// Labels in document order; errors if any document is unlabeled.
    pub fn labels(&self) -> Result<Vec<String>> {
        self.documents
            .iter()
            .map(|d| {
                d.label
                    .clone()
                    .ok_or_else(|| Error::InvalidInput(format!("document `{}` has no label", d.id)))
            })
            .collect()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<String> {
        let mut classes: Vec<String> = self
            .documents
            .iter()
            .filter_map(|d| d.label.clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        classes.dedup();
        classes
    }

    /// Sub-corpus with the given positions, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        Corpus::new(rows.iter().map(|&i| self.documents[i].clone()).collect())
    }

    pub fn tokenize(&self, policy: &StopwordPolicy) -> TokenizedCorpus {
        TokenizedCorpus {
            ids: self.ids(),
            tokens: crate::par::map_slice(&self.documents, |d| tokenize(&d.text, policy)),
        }
    }
}

/// Token lists aligned with a corpus' documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizedCorpus {
    pub ids: Vec<String>,
    pub tokens: Vec<Vec<String>>,
}

impl TokenizedCorpus {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}
