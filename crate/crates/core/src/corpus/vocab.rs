use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::TokenizedCorpus;
use crate::error::{Error, Result};

/// Sorted, duplicate-free terms with their document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub terms: Vec<String>,
    pub doc_frequency: Vec<usize>,
    /// Size of the corpus the frequencies were counted on.
    pub n_docs: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn position(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }
}

/// Keeps terms appearing in at least `min_doc_count` documents and in at most
/// `max_doc_fraction` of them.
pub fn build_vocabulary(corpus: &TokenizedCorpus, min_doc_count: usize, max_doc_fraction: f64) -> Result<Vocabulary> {
    if min_doc_count < 1 {
        return Err(Error::InvalidParameter("min_doc_count must be >= 1".into()));
    }
    if !(max_doc_fraction > 0.0 && max_doc_fraction <= 1.0) {
        return Err(Error::InvalidParameter("max_doc_fraction must lie in (0, 1]".into()));
    }
    let n = corpus.len();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for tokens in &corpus.tokens {
        let distinct: HashSet<&str> = tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let (terms, doc_frequency): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, c)| c >= min_doc_count && c as f64 <= max_doc_fraction * n as f64)
        .map(|(t, c)| (t.to_string(), c))
        .unzip();
    if terms.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_doc_count,
            max_doc_fraction,
        });
    }
    Ok(Vocabulary {
        terms,
        doc_frequency,
        n_docs: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn toy(docs: &[&str]) -> TokenizedCorpus {
        TokenizedCorpus {
            ids: (0..docs.len()).map(|i| format!("d{i}")).collect(),
            tokens: docs
                .iter()
                .map(|d| d.split_whitespace().map(str::to_string).collect())
                .collect(),
        }
    }

    #[test]
    fn rare_terms_dropped() {
        let mut docs = vec!["common word"; 9];
        docs.push("common rare");
        let v = build_vocabulary(&toy(&docs), 2, 1.0).unwrap();
        assert_eq!(v.terms, vec!["common", "word"]);
        assert_eq!(v.doc_frequency, vec![10, 9]);
    }

    #[test]
    fn ubiquitous_terms_dropped() {
        let mut docs = vec!["everywhere often"; 6];
        docs.extend(["everywhere", "everywhere", "everywhere", "everywhere"]);
        let v = build_vocabulary(&toy(&docs), 2, 0.7).unwrap();
        assert_eq!(v.terms, vec!["often"]);
    }

    #[test]
    fn identity_thresholds_keep_everything() {
        let v = build_vocabulary(&toy(&["b a", "c a a"]), 1, 1.0).unwrap();
        assert_eq!(v.terms, vec!["a", "b", "c"]);
        assert_eq!(v.doc_frequency, vec![2, 1, 1]);
        assert_eq!(v.position("c"), Some(2));
        assert_eq!(v.position("z"), None);
    }

    #[test]
    fn empty_result_is_an_error() {
        let err = build_vocabulary(&toy(&["a", "b"]), 2, 1.0).unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary { .. }));
        assert!(err.to_string().contains("lower min_doc_count"));
    }

    #[test]
    fn bad_thresholds() {
        assert!(build_vocabulary(&toy(&["a"]), 0, 1.0).is_err());
        assert!(build_vocabulary(&toy(&["a"]), 1, 0.0).is_err());
        assert!(build_vocabulary(&toy(&["a"]), 1, 1.5).is_err());
    }

    proptest! {
        #[test]
        fn identity_thresholds_return_distinct_tokens(
            docs in prop::collection::vec(prop::collection::vec("[a-e]{1,2}", 1..6), 1..8)
        ) {
            let corpus = TokenizedCorpus {
                ids: (0..docs.len()).map(|i| i.to_string()).collect(),
                tokens: docs.clone(),
            };
            let v = build_vocabulary(&corpus, 1, 1.0).unwrap();
            let distinct: BTreeSet<String> = docs.into_iter().flatten().collect();
            prop_assert_eq!(v.terms, distinct.into_iter().collect::<Vec<_>>());
            for &df in &v.doc_frequency {
                prop_assert!(df >= 1 && df <= corpus.len());
            }
        }
    }
}
