use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{WeightKind, WeightMatrix};
use crate::error::{Error, Result};
use crate::rng::{self, Domain, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LdaConfig {
    pub k: usize,
    /// Document-topic concentration; `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    /// Sweeps discarded before counts are averaged.
    pub burn_in: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            k: 18,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            burn_in: 500,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("topic count k must be >= 1".into()));
        }
        if !(self.alpha() > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidParameter("alpha and beta must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidParameter(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        Ok(())
    }
}

/// Collapsed Gibbs sampler state for LDA.
///
/// The full conditional of a token's topic is
/// `(n_dk + α) (n_kw + β) / (n_k + Vβ)` with the token itself removed.
pub struct GibbsSampler {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    docs: Vec<Vec<u32>>,
    z: Vec<Vec<u32>>,
    n_dk: Vec<u32>,
    n_kw: Vec<u32>,
    n_k: Vec<u32>,
    rng: StreamRng,
    weights: Vec<f64>,
}

impl GibbsSampler {
    /// Expands `counts` into token streams and draws uniform initial topics.
    pub fn new(counts: &WeightMatrix, k: usize, alpha: f64, beta: f64, seed: u64) -> Result<Self> {
        if counts.kind() != WeightKind::Counts {
            return Err(Error::InvalidInput("topic models need a count matrix".into()));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("topic count k must be >= 1".into()));
        }
        let empty: Vec<String> = (0..counts.n_rows())
            .filter(|&d| counts.row(d).iter().all(|&c| c == 0.0))
            .map(|d| counts.rows()[d].clone())
            .collect();
        if !empty.is_empty() {
            return Err(Error::EmptyDocuments(empty));
        }
        let v = counts.n_cols();
        let docs: Vec<Vec<u32>> = (0..counts.n_rows())
            .map(|d| {
                counts
                    .row(d)
                    .iter()
                    .enumerate()
                    .flat_map(|(w, &c)| std::iter::repeat_n(w as u32, c as usize))
                    .collect()
            })
            .collect();
        let mut rng = rng::stream(seed, Domain::Gibbs, 0);
        let mut n_dk = vec![0u32; docs.len() * k];
        let mut n_kw = vec![0u32; k * v];
        let mut n_k = vec![0u32; k];
        let z = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let t = rng.random_range(0..k);
                        n_dk[d * k + t] += 1;
                        n_kw[t * v + w as usize] += 1;
                        n_k[t] += 1;
                        t as u32
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            k,
            v,
            alpha,
            beta,
            docs,
            z,
            n_dk,
            n_kw,
            n_k,
            rng,
            weights: vec![0.0; k],
        })
    }

    /// Resamples every token once, in document then position order.
    pub fn sweep(&mut self) {
        let (k, v) = (self.k, self.v);
        let vbeta = v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i] as usize;
                let old = self.z[d][i] as usize;
                self.n_dk[d * k + old] -= 1;
                self.n_kw[old * v + w] -= 1;
                self.n_k[old] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += (self.n_dk[d * k + t] as f64 + self.alpha) * (self.n_kw[t * v + w] as f64 + self.beta)
                        / (self.n_k[t] as f64 + vbeta);
                    self.weights[t] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = self.weights.iter().position(|&c| u < c).unwrap_or(k - 1);
                self.z[d][i] = new as u32;
                self.n_dk[d * k + new] += 1;
                self.n_kw[new * v + w] += 1;
                self.n_k[new] += 1;
            }
        }
    }

    /// Checks that the count tables agree with the assignments:
    /// `Σ_k n_dk` is each document's length and `Σ_w n_kw = Σ_d n_dk = n_k`.
    pub fn check_conservation(&self) -> Result<()> {
        let (k, v) = (self.k, self.v);
        for (d, words) in self.docs.iter().enumerate() {
            let row: u64 = self.n_dk[d * k..(d + 1) * k].iter().map(|&c| c as u64).sum();
            if row != words.len() as u64 {
                return Err(Error::Numeric(format!(
                    "document {d} holds {row} assignments for {} tokens",
                    words.len()
                )));
            }
        }
        for t in 0..k {
            let by_word: u64 = self.n_kw[t * v..(t + 1) * v].iter().map(|&c| c as u64).sum();
            let by_doc: u64 = (0..self.docs.len()).map(|d| self.n_dk[d * k + t] as u64).sum();
            if by_word != by_doc || by_doc != self.n_k[t] as u64 {
                return Err(Error::Numeric(format!(
                    "topic {t}: word counts {by_word}, document counts {by_doc}, total {}",
                    self.n_k[t]
                )));
            }
        }
        Ok(())
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.z
    }

    pub fn n_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub terms: Vec<String>,
    pub doc_ids: Vec<String>,
    /// `k × V` topic-word distributions.
    pub phi: Vec<Vec<f64>>,
    /// `D × k` document-topic distributions.
    pub theta: Vec<Vec<f64>>,
    /// Final token-topic labels; not serialized.
    #[serde(skip)]
    pub assignments: Vec<Vec<u32>>,
}

fn normalize(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= s);
}

impl TopicModel {
    /// Builds a model from given distributions, renormalizing every row.
    pub fn from_parts(terms: Vec<String>, mut phi: Vec<Vec<f64>>, mut theta: Vec<Vec<f64>>) -> Result<Self> {
        let k = phi.len();
        if k == 0 {
            return Err(Error::InvalidParameter("a topic model needs at least one topic".into()));
        }
        for row in &phi {
            if row.len() != terms.len() {
                return Err(Error::DimensionMismatch {
                    expected: terms.len(),
                    found: row.len(),
                });
            }
        }
        if let Some(row) = theta.iter().find(|r| r.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: row.len(),
            });
        }
        for row in phi.iter_mut().chain(theta.iter_mut()) {
            if row.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || row.iter().sum::<f64>() <= 0.0 {
                return Err(Error::InvalidInput(
                    "distribution rows must be nonnegative with positive mass".into(),
                ));
            }
            normalize(row);
        }
        Ok(Self {
            k,
            alpha: 0.0,
            beta: 0.0,
            seed: 0,
            terms,
            doc_ids: (0..theta.len()).map(|d| d.to_string()).collect(),
            phi,
            theta,
            assignments: Vec::new(),
        })
    }

    pub fn n_docs(&self) -> usize {
        self.theta.len()
    }

    pub fn save_json(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Fits LDA by collapsed Gibbs sampling.
///
/// `theta` and `phi` come from the count tables averaged over the sweeps after
/// burn-in, smoothed by `α` and `β`.
pub fn fit_lda(counts: &WeightMatrix, config: &LdaConfig) -> Result<TopicModel> {
    fit_lda_observed(counts, config, |_| Ok(()))
}

/// Like [`fit_lda`], calling `observe` after every sweep.
pub fn fit_lda_observed<F>(counts: &WeightMatrix, config: &LdaConfig, mut observe: F) -> Result<TopicModel>
where
    F: FnMut(&GibbsSampler) -> Result<()>,
{
    config.validate()?;
    let (k, alpha, beta) = (config.k, config.alpha(), config.beta);
    let mut s = GibbsSampler::new(counts, k, alpha, beta, config.seed)?;
    let v = s.v;
    let mut sum_dk = vec![0u64; s.n_dk.len()];
    let mut sum_kw = vec![0u64; s.n_kw.len()];
    for it in 0..config.iterations {
        s.sweep();
        observe(&s)?;
        if it >= config.burn_in {
            sum_dk.iter_mut().zip(&s.n_dk).for_each(|(a, &b)| *a += b as u64);
            sum_kw.iter_mut().zip(&s.n_kw).for_each(|(a, &b)| *a += b as u64);
        }
    }
    let samples = (config.iterations - config.burn_in) as f64;
    let theta = (0..s.docs.len())
        .map(|d| {
            let mut row: Vec<f64> = (0..k).map(|t| sum_dk[d * k + t] as f64 / samples + alpha).collect();
            normalize(&mut row);
            row
        })
        .collect();
    let phi = (0..k)
        .map(|t| {
            let mut row: Vec<f64> = (0..v).map(|w| sum_kw[t * v + w] as f64 / samples + beta).collect();
            normalize(&mut row);
            row
        })
        .collect();
    Ok(TopicModel {
        k,
        alpha,
        beta,
        seed: config.seed,
        terms: counts.cols().to_vec(),
        doc_ids: counts.rows().to_vec(),
        phi,
        theta,
        assignments: s.z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(rows: &[&[f64]]) -> WeightMatrix {
        let p = rows[0].len();
        WeightMatrix::new(
            (0..rows.len()).map(|d| format!("d{d}")).collect(),
            (0..p).map(|w| format!("w{w}")).collect(),
            rows.iter().flat_map(|r| r.iter().copied()).collect(),
            WeightKind::Counts,
        )
        .unwrap()
    }

    fn config(k: usize) -> LdaConfig {
        LdaConfig {
            k,
            iterations: 50,
            burn_in: 25,
            ..LdaConfig::default()
        }
    }

    #[test]
    fn single_topic_theta_is_one() {
        let m = fit_lda(&counts(&[&[1.0, 2.0], &[3.0, 0.0]]), &config(1)).unwrap();
        assert!(m.theta.iter().flatten().all(|&x| x == 1.0));
        assert_eq!(m.alpha, 50.0);
    }

    #[test]
    fn empty_documents_are_listed() {
        let err = fit_lda(&counts(&[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]]), &config(2)).unwrap_err();
        assert!(matches!(err, Error::EmptyDocuments(ids) if ids == ["d1", "d2"]));
    }

    #[test]
    fn rejects_tfidf_and_bad_config() {
        let tfidf = WeightMatrix::new(vec!["d".into()], vec!["w".into()], vec![0.5], WeightKind::Tfidf).unwrap();
        assert!(fit_lda(&tfidf, &config(2)).is_err());
        let c = counts(&[&[1.0]]);
        assert!(fit_lda(&c, &config(0)).is_err());
        let bad = LdaConfig {
            burn_in: 50,
            ..config(2)
        };
        assert!(fit_lda(&c, &bad).is_err());
    }

    #[test]
    fn rows_are_distributions_and_tokens_conserved() {
        let c = counts(&[&[3.0, 1.0, 0.0, 2.0], &[0.0, 4.0, 4.0, 0.0], &[1.0, 1.0, 1.0, 1.0]]);
        let mut sweeps = 0;
        let m = fit_lda_observed(&c, &config(3), |s| {
            sweeps += 1;
            assert_eq!(s.n_tokens(), 18);
            s.check_conservation()
        })
        .unwrap();
        assert_eq!(sweeps, 50);
        for row in m.phi.iter().chain(&m.theta) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(m.assignments.iter().map(Vec::len).collect::<Vec<_>>(), vec![6, 8, 4]);
    }

    #[test]
    fn same_seed_same_assignments() {
        let c = counts(&[&[3.0, 1.0, 0.0, 2.0], &[0.0, 4.0, 4.0, 0.0]]);
        let a = fit_lda(&c, &config(2)).unwrap();
        let b = fit_lda(&c, &config(2)).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a, b);
        let json = serde_json::to_string(&a).unwrap();
        assert!(!json.contains("assignments"));
    }

    #[test]
    fn from_parts_normalizes() {
        let m = TopicModel::from_parts(vec!["a".into(), "b".into()], vec![vec![1.0, 3.0]], vec![vec![2.0]]).unwrap();
        assert_eq!(m.phi[0], vec![0.25, 0.75]);
        assert!(TopicModel::from_parts(vec!["a".into()], vec![vec![1.0, 1.0]], vec![]).is_err());
    }
}
