use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{TokenizedCorpus, Vocabulary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Tfidf,
    Counts,
}

/// Dense document × term matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    rows: Vec<String>,
    cols: Vec<String>,
    values: Vec<f64>,
    kind: WeightKind,
}

impl WeightMatrix {
    pub fn new(rows: Vec<String>, cols: Vec<String>, values: Vec<f64>, kind: WeightKind) -> Result<Self> {
        if values.len() != rows.len() * cols.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len() * cols.len(),
                found: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidInput(format!("weight {v} is not a nonnegative number")));
        }
        if kind == WeightKind::Counts && values.iter().any(|v| v.fract() != 0.0) {
            return Err(Error::InvalidInput("count matrix holds non-integer values".into()));
        }
        Ok(Self {
            rows,
            cols,
            values,
            kind,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.cols.len();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols.len() + j]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows.len()).map(move |i| self.get(i, j))
    }

    /// Copies the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols());
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        Self {
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
            cols: self.cols.clone(),
            values,
            kind: self.kind,
        }
    }

    /// Copies the given columns, in order.
    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.n_rows() * cols.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            values.extend(cols.iter().map(|&j| row[j]));
        }
        Self {
            rows: self.rows.clone(),
            cols: cols.iter().map(|&j| self.cols[j].clone()).collect(),
            values,
            kind: self.kind,
        }
    }

    /// Total weight per row (token count for count matrices).
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.row(i).iter().sum()).collect()
    }
}

fn count_rows(corpus: &TokenizedCorpus, vocab: &Vocabulary) -> Vec<f64> {
    let p = vocab.len();
    let mut values = vec![0.0; corpus.len() * p];
    for (i, tokens) in corpus.tokens.iter().enumerate() {
        for t in tokens {
            if let Some(j) = vocab.position(t) {
                values[i * p + j] += 1.0;
            }
        }
    }
    values
}

/// Raw term counts restricted to the vocabulary.
pub fn weight_counts(corpus: &TokenizedCorpus, vocab: &Vocabulary) -> WeightMatrix {
    WeightMatrix {
        rows: corpus.ids.clone(),
        cols: vocab.terms.clone(),
        values: count_rows(corpus, vocab),
        kind: WeightKind::Counts,
    }
}

/// `count(t, d) * log2(N / df(t))`, where `N` and `df` come from the corpus
/// the vocabulary was built on. No length normalization.
pub fn weight_tfidf(corpus: &TokenizedCorpus, vocab: &Vocabulary) -> WeightMatrix {
    let n = vocab.n_docs as f64;
    let idf: Vec<f64> = vocab.doc_frequency.iter().map(|&df| (n / df as f64).log2()).collect();
    let p = vocab.len();
    let mut values = count_rows(corpus, vocab);
    for (k, v) in values.iter_mut().enumerate() {
        *v *= idf[k % p];
    }
    WeightMatrix {
        rows: corpus.ids.clone(),
        cols: vocab.terms.clone(),
        values,
        kind: WeightKind::Tfidf,
    }
}

/// Restricts both matrices to their shared terms, in lexicographic order.
pub fn intersect_features(a: &WeightMatrix, b: &WeightMatrix) -> Result<(WeightMatrix, WeightMatrix)> {
    if a.kind != b.kind {
        return Err(Error::InvalidInput(format!(
            "cannot intersect {:?} with {:?} matrices",
            a.kind, b.kind
        )));
    }
    let in_b: HashMap<&str, usize> = b.cols.iter().enumerate().map(|(j, c)| (c.as_str(), j)).collect();
    let shared: BTreeSet<&str> = a
        .cols
        .iter()
        .map(String::as_str)
        .filter(|c| in_b.contains_key(c))
        .collect();
    if shared.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let in_a: HashMap<&str, usize> = a.cols.iter().enumerate().map(|(j, c)| (c.as_str(), j)).collect();
    let a_idx: Vec<usize> = shared.iter().map(|c| in_a[c]).collect();
    let b_idx: Vec<usize> = shared.iter().map(|c| in_b[c]).collect();
    Ok((a.select_cols(&a_idx), b.select_cols(&b_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocabulary;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn toy(docs: &[&str]) -> TokenizedCorpus {
        TokenizedCorpus {
            ids: (0..docs.len()).map(|i| format!("d{i}")).collect(),
            tokens: docs
                .iter()
                .map(|d| d.split_whitespace().map(str::to_string).collect())
                .collect(),
        }
    }

    fn matrix(cols: &[&str]) -> WeightMatrix {
        let values = (0..2 * cols.len()).map(|v| v as f64).collect();
        WeightMatrix::new(
            vec!["r0".into(), "r1".into()],
            cols.iter().map(|c| c.to_string()).collect(),
            values,
            WeightKind::Tfidf,
        )
        .unwrap()
    }

    #[test]
    fn tfidf_hand_values() {
        let c = toy(&["a a a b", "b"]);
        let v = build_vocabulary(&c, 1, 1.0).unwrap();
        let m = weight_tfidf(&c, &v);
        assert_eq!(m.get(0, 0), 3.0);
        // term in every document
        assert_eq!(m.column(1).collect::<Vec<_>>(), vec![0.0, 0.0]);
    }

    #[test]
    fn empty_document_gives_zero_row() {
        let c = toy(&["a b", "", "b c"]);
        let v = build_vocabulary(&c, 1, 1.0).unwrap();
        let m = weight_tfidf(&c, &v);
        assert!(m.row(1).iter().all(|&x| x == 0.0));
        let counts = weight_counts(&c, &v);
        assert_eq!(counts.row_sums(), vec![2.0, 0.0, 2.0]);
        assert_eq!(counts.kind(), WeightKind::Counts);
    }

    #[test]
    fn intersection_of_columns() {
        let (a, b) = intersect_features(&matrix(&["a", "b", "c"]), &matrix(&["b", "c", "d"])).unwrap();
        assert_eq!(a.cols(), ["b", "c"]);
        assert_eq!(b.cols(), ["b", "c"]);
        assert_eq!(a.row(0), &[1.0, 2.0]);
        assert_eq!(b.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn intersection_identity_up_to_order() {
        let (a, b) = intersect_features(&matrix(&["c", "a", "b"]), &matrix(&["a", "b", "c"])).unwrap();
        assert_eq!(a.cols(), b.cols());
        assert_eq!(a.row(0), &[1.0, 2.0, 0.0]);
    }

    #[test]
    fn intersection_errors() {
        assert!(matches!(
            intersect_features(&matrix(&["a"]), &matrix(&["b"])),
            Err(Error::EmptyIntersection)
        ));
        let mut counts = matrix(&["a"]);
        counts.kind = WeightKind::Counts;
        assert!(intersect_features(&counts, &matrix(&["a"])).is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(WeightMatrix::new(vec!["r".into()], vec!["a".into()], vec![-1.0], WeightKind::Tfidf).is_err());
        assert!(WeightMatrix::new(vec!["r".into()], vec!["a".into()], vec![0.5], WeightKind::Counts).is_err());
        assert!(WeightMatrix::new(vec!["r".into()], vec!["a".into()], vec![], WeightKind::Counts).is_err());
    }

    #[test]
    fn split_corpus_intersection_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let words: Vec<String> = (0..2500).map(|i| format!("w{i}")).collect();
        let docs: Vec<String> = (0..300)
            .map(|_| {
                (0..40)
                    .map(|_| words[rng.random_range(0..words.len())].as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        let train = toy(&refs[..200]);
        let test = toy(&refs[200..]);
        let vt = build_vocabulary(&train, 1, 1.0).unwrap();
        let vs = build_vocabulary(&test, 1, 1.0).unwrap();
        let (a, b) = intersect_features(&weight_tfidf(&train, &vt), &weight_tfidf(&test, &vs)).unwrap();
        let brute: Vec<&String> = vt.terms.iter().filter(|t| vs.terms.contains(t)).collect();
        assert_eq!(a.n_cols(), brute.len());
        assert!(a.n_cols() <= vt.len().min(vs.len()));
        assert_eq!(a.cols(), b.cols());
    }

    proptest! {
        #[test]
        fn zero_column_iff_term_everywhere(
            docs in prop::collection::vec(prop::collection::vec("[a-d]", 1..5), 1..7)
        ) {
            let c = TokenizedCorpus {
                ids: (0..docs.len()).map(|i| i.to_string()).collect(),
                tokens: docs,
            };
            let v = build_vocabulary(&c, 1, 1.0).unwrap();
            let m = weight_tfidf(&c, &v);
            for j in 0..v.len() {
                let zero = m.column(j).all(|x| x == 0.0);
                prop_assert_eq!(zero, v.doc_frequency[j] == c.len());
            }
        }
    }
}
