use serde::{Deserialize, Serialize};

use super::TopicModel;
use crate::corpus::WeightMatrix;
use crate::error::{Error, Result};

/// Indices of the `m` most probable terms of `topic`, ties by term.
pub fn top_word_indices(model: &TopicModel, topic: usize, m: usize) -> Result<Vec<usize>> {
    let row = model.phi.get(topic).ok_or(Error::UnknownTopic { topic, k: model.k })?;
    if m > row.len() {
        return Err(Error::InvalidParameter(format!(
            "asked for {m} top words of a {}-term vocabulary",
            row.len()
        )));
    }
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        row[b]
            .total_cmp(&row[a])
            .then_with(|| model.terms[a].cmp(&model.terms[b]))
    });
    order.truncate(m);
    Ok(order)
}

pub fn top_words(model: &TopicModel, topic: usize, m: usize) -> Result<Vec<String>> {
    Ok(top_word_indices(model, topic, m)?
        .into_iter()
        .map(|w| model.terms[w].clone())
        .collect())
}

/// Log co-document coherence of each topic's top `m` words:
/// `Σ_{i=2..m} Σ_{j<i} ln((D(v_i, v_j) + 1) / D(v_j))`.
///
/// `D` counts documents of `counts` containing a word (or both words).
pub fn semantic_coherence(model: &TopicModel, counts: &WeightMatrix, m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::InvalidParameter("coherence needs at least two top words".into()));
    }
    if counts.cols() != model.terms.as_slice() {
        return Err(Error::InvalidInput(
            "count matrix and topic model have different vocabularies".into(),
        ));
    }
    (0..model.k)
        .map(|t| {
            let top = top_word_indices(model, t, m)?;
            let present: Vec<Vec<bool>> = top
                .iter()
                .map(|&w| counts.column(w).map(|c| c > 0.0).collect())
                .collect();
            let mut score = 0.0;
            for i in 1..top.len() {
                for j in 0..i {
                    let dj = present[j].iter().filter(|&&p| p).count();
                    if dj == 0 {
                        return Err(Error::Numeric(format!(
                            "term `{}` occurs in no document",
                            model.terms[top[j]]
                        )));
                    }
                    let both = present[i].iter().zip(&present[j]).filter(|(a, b)| **a && **b).count();
                    score += ((both as f64 + 1.0) / dj as f64).ln();
                }
            }
            Ok(score)
        })
        .collect()
}

/// Mean share `φ_kw / Σ_j φ_jw` of each topic's top `m` words.
pub fn exclusivity(model: &TopicModel, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "exclusivity needs at least one top word".into(),
        ));
    }
    let totals: Vec<f64> = (0..model.terms.len())
        .map(|w| model.phi.iter().map(|row| row[w]).sum())
        .collect();
    (0..model.k)
        .map(|t| {
            let top = top_word_indices(model, t, m)?;
            let share: f64 = top
                .iter()
                .map(|&w| {
                    if totals[w] > 0.0 {
                        model.phi[t][w] / totals[w]
                    } else {
                        0.0
                    }
                })
                .sum();
            Ok(share / top.len() as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    pub coherence: Vec<f64>,
    pub exclusivity: Vec<f64>,
    pub mean_coherence: f64,
    pub mean_exclusivity: f64,
    /// Standardized combination; only meaningful within a sweep, 0 otherwise.
    pub weighted_score: f64,
}

impl QualityScore {
    pub fn compute(model: &TopicModel, counts: &WeightMatrix, m: usize) -> Result<Self> {
        let coherence = semantic_coherence(model, counts, m)?;
        let exclusivity = exclusivity(model, m)?;
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        Ok(Self {
            mean_coherence: mean(&coherence),
            mean_exclusivity: mean(&exclusivity),
            coherence,
            exclusivity,
            weighted_score: 0.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::WeightKind;
    use proptest::prelude::*;

    fn terms(v: usize) -> Vec<String> {
        (0..v).map(|w| format!("v{}", w + 1)).collect()
    }

    fn counts(docs: &[&[f64]]) -> WeightMatrix {
        WeightMatrix::new(
            (0..docs.len()).map(|d| format!("d{}", d + 1)).collect(),
            terms(docs[0].len()),
            docs.iter().flat_map(|r| r.iter().copied()).collect(),
            WeightKind::Counts,
        )
        .unwrap()
    }

    /// One topic whose top words are v1 then v2.
    fn model(v: usize) -> TopicModel {
        let mut phi = vec![0.0; v];
        phi[0] = 0.6;
        phi[1] = 0.4;
        TopicModel::from_parts(terms(v), vec![phi], vec![]).unwrap()
    }

    #[test]
    fn top_word_ties_are_lexicographic() {
        let m = TopicModel::from_parts(vec!["c".into(), "a".into(), "b".into()], vec![vec![1.0; 3]], vec![]).unwrap();
        assert_eq!(top_words(&m, 0, 2).unwrap(), vec!["a", "b"]);
        let delta = TopicModel::from_parts(
            vec!["c".into(), "a".into(), "b".into()],
            vec![vec![0.0, 0.0, 1.0]],
            vec![],
        )
        .unwrap();
        assert_eq!(top_words(&delta, 0, 1).unwrap(), vec!["b"]);
        assert!(top_words(&m, 0, 4).is_err());
        assert!(top_words(&m, 1, 1).is_err());
    }

    #[test]
    fn coherence_partial_overlap_is_zero() {
        // v1 in d1,d2; v2 in d1
        let c = counts(&[&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(semantic_coherence(&model(3), &c, 2).unwrap(), vec![0.0]);
    }

    #[test]
    fn coherence_always_together_is_ln2() {
        let c = counts(&[&[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(semantic_coherence(&model(3), &c, 2).unwrap(), vec![2f64.ln()]);
    }

    #[test]
    fn coherence_never_together_is_ln_one_fifth() {
        let mut docs: Vec<&[f64]> = vec![&[1.0, 0.0]; 5];
        docs.push(&[0.0, 1.0]);
        let c = counts(&docs);
        assert_eq!(semantic_coherence(&model(2), &c, 2).unwrap(), vec![(1.0f64 / 5.0).ln()]);
        assert!(semantic_coherence(&model(2), &c, 1).is_err());
    }

    #[test]
    fn exclusivity_examples() {
        let disjoint = TopicModel::from_parts(
            terms(4),
            vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]],
            vec![],
        )
        .unwrap();
        assert_eq!(exclusivity(&disjoint, 2).unwrap(), vec![1.0, 1.0]);
        let same = TopicModel::from_parts(terms(2), vec![vec![0.7, 0.3]; 2], vec![]).unwrap();
        assert_eq!(exclusivity(&same, 2).unwrap(), vec![0.5, 0.5]);
        let shared = TopicModel::from_parts(
            terms(4),
            vec![
                vec![0.5, 0.5, 0.0, 0.0],
                vec![0.5, 0.0, 0.5, 0.0],
                vec![0.5, 0.0, 0.0, 0.5],
            ],
            vec![],
        )
        .unwrap();
        for e in exclusivity(&shared, 1).unwrap() {
            assert!((e - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    fn random_model(phi: Vec<Vec<f64>>) -> TopicModel {
        let v = phi[0].len();
        TopicModel::from_parts(terms(v), phi, vec![]).unwrap()
    }

    proptest! {
        #[test]
        fn exclusivity_in_unit_interval(phi in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 6), 1..5), m in 1usize..6) {
            for e in exclusivity(&random_model(phi), m).unwrap() {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
            }
        }

        #[test]
        fn coherence_invariant_under_topic_relabeling(
            phi in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 5), 2..4),
            docs in prop::collection::vec(prop::collection::vec(0u8..2, 5), 3..8),
        ) {
            let mut rows: Vec<Vec<f64>> = docs.iter().map(|d| d.iter().map(|&c| c as f64).collect()).collect();
            rows.push(vec![1.0; 5]);
            let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
            let c = counts(&refs);
            let a = random_model(phi.clone());
            let mut reversed = phi;
            reversed.reverse();
            let b = random_model(reversed);
            let sa = semantic_coherence(&a, &c, 3).unwrap();
            let mut sb = semantic_coherence(&b, &c, 3).unwrap();
            sb.reverse();
            prop_assert_eq!(sa, sb);
        }

        #[test]
        fn exclusivity_invariant_under_word_permutation(phi in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 4), 2..4)) {
            let a = random_model(phi.clone());
            let permuted: Vec<Vec<f64>> = phi.iter().map(|r| vec![r[2], r[0], r[3], r[1]]).collect();
            let names = vec!["v3".to_string(), "v1".into(), "v4".into(), "v2".into()];
            let b = TopicModel::from_parts(names, permuted, vec![]).unwrap();
            let (ea, eb) = (exclusivity(&a, 2).unwrap(), exclusivity(&b, 2).unwrap());
            for (x, y) in ea.iter().zip(&eb) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
