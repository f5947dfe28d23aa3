use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{fit_lda, LdaConfig, QualityScore, TopicModel};
use crate::corpus::WeightMatrix;
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub k_values: Vec<usize>,
    pub runs_per_k: usize,
    /// Weight of standardized mean coherence; exclusivity gets the rest.
    pub coherence_weight: f64,
    pub top_m: usize,
    /// Sampler settings shared by every fit; `k` and `seed` are overridden.
    pub lda: LdaConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            k_values: (10..=30).collect(),
            runs_per_k: 10,
            coherence_weight: 0.7,
            top_m: 10,
            lda: LdaConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub k: usize,
    pub run: usize,
    pub seed: u64,
    pub quality: QualityScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub coherence_weight: f64,
    pub entries: Vec<SweepEntry>,
    /// Index into `entries`.
    pub selected: usize,
}

impl SweepResult {
    pub fn selected_entry(&self) -> &SweepEntry {
        &self.entries[self.selected]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,run,seed,mean_coherence,mean_exclusivity,weighted_score,selected\n");
        for (i, e) in self.entries.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{}",
                e.k,
                e.run,
                e.seed,
                e.quality.mean_coherence,
                e.quality.mean_exclusivity,
                e.quality.weighted_score,
                u8::from(i == self.selected)
            );
        }
        out
    }
}

/// Z-scores with the population standard deviation; all zeros when constant.
pub fn standardize(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd > 0.0 {
        values.iter().map(|v| (v - mean) / sd).collect()
    } else {
        vec![0.0; values.len()]
    }
}

/// Fills in `weighted_score` for every entry.
pub fn score_entries(entries: &mut [SweepEntry], coherence_weight: f64) {
    let coh: Vec<f64> = entries.iter().map(|e| e.quality.mean_coherence).collect();
    let exc: Vec<f64> = entries.iter().map(|e| e.quality.mean_exclusivity).collect();
    let (zc, ze) = (standardize(&coh), standardize(&exc));
    for (i, e) in entries.iter_mut().enumerate() {
        e.quality.weighted_score = coherence_weight * zc[i] + (1.0 - coherence_weight) * ze[i];
    }
}

/// Entry with the highest weighted score; ties to smaller `k`, then smaller run.
pub fn select_entry(entries: &[SweepEntry]) -> usize {
    let mut best = 0;
    for (i, e) in entries.iter().enumerate().skip(1) {
        let b = &entries[best];
        let better = e.quality.weighted_score > b.quality.weighted_score
            || (e.quality.weighted_score == b.quality.weighted_score && (e.k, e.run) < (b.k, b.run));
        if better {
            best = i;
        }
    }
    best
}

/// Seed of run `run` at topic count `k`.
pub fn run_seed(seed: u64, k: usize, run: usize) -> u64 {
    rng::derive_seed(seed, Domain::Sweep, ((k as u64) << 32) | run as u64)
}

/// Fits `runs_per_k` models for every `k`, scores them and returns the table
/// together with the selected model.
///
/// Selection only looks at the quality scores; the chosen model is refitted
/// from its recorded seed rather than kept in memory during the sweep.
pub fn sweep(counts: &WeightMatrix, config: &SweepConfig) -> Result<(SweepResult, TopicModel)> {
    if config.k_values.is_empty() || config.runs_per_k == 0 {
        return Err(Error::InvalidParameter("sweep needs at least one k and one run".into()));
    }
    if !(0.0..=1.0).contains(&config.coherence_weight) {
        return Err(Error::InvalidParameter("coherence_weight must lie in [0, 1]".into()));
    }
    let jobs: Vec<(usize, usize)> = config
        .k_values
        .iter()
        .flat_map(|&k| (0..config.runs_per_k).map(move |run| (k, run)))
        .collect();
    let lda_for = |k: usize, run: usize| LdaConfig {
        k,
        seed: run_seed(config.lda.seed, k, run),
        ..config.lda
    };
    let mut entries = par::try_map_range(jobs.len(), |j| -> Result<SweepEntry> {
        let (k, run) = jobs[j];
        let cfg = lda_for(k, run);
        let annotate = |e: Error| e.context(format!("topic sweep k={k} run={run}"));
        let model = fit_lda(counts, &cfg).map_err(annotate)?;
        let quality = QualityScore::compute(&model, counts, config.top_m).map_err(annotate)?;
        Ok(SweepEntry {
            k,
            run,
            seed: cfg.seed,
            quality,
        })
    })?;
    score_entries(&mut entries, config.coherence_weight);
    let selected = select_entry(&entries);
    let chosen = &entries[selected];
    let model = fit_lda(counts, &lda_for(chosen.k, chosen.run))?;
    Ok((
        SweepResult {
            coherence_weight: config.coherence_weight,
            entries,
            selected,
        },
        model,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entry(k: usize, run: usize, coh: f64, exc: f64) -> SweepEntry {
        SweepEntry {
            k,
            run,
            seed: 0,
            quality: QualityScore {
                coherence: vec![],
                exclusivity: vec![],
                mean_coherence: coh,
                mean_exclusivity: exc,
                weighted_score: 0.0,
            },
        }
    }

    #[test]
    fn standardize_uses_population_sd() {
        assert_eq!(standardize(&[1.0, 3.0]), vec![-1.0, 1.0]);
        assert_eq!(standardize(&[2.0, 2.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn coherence_weight_dominates() {
        let mut e = vec![entry(5, 0, -10.0, 0.9), entry(6, 0, -5.0, 0.5)];
        score_entries(&mut e, 0.7);
        assert_eq!(select_entry(&e), 1);
        score_entries(&mut e, 0.3);
        assert_eq!(select_entry(&e), 0);
    }

    #[test]
    fn ties_prefer_small_k_then_run() {
        let mut e = vec![entry(6, 0, -1.0, 0.5), entry(4, 1, -1.0, 0.5), entry(4, 0, -1.0, 0.5)];
        score_entries(&mut e, 0.7);
        assert_eq!(select_entry(&e), 2);
        let mut single = vec![entry(9, 3, -2.0, 0.1)];
        score_entries(&mut single, 0.7);
        assert_eq!(select_entry(&single), 0);
    }

    #[test]
    fn run_seeds_differ() {
        assert_ne!(run_seed(1, 4, 0), run_seed(1, 4, 1));
        assert_ne!(run_seed(1, 4, 0), run_seed(1, 5, 0));
    }

    proptest! {
        #[test]
        fn selection_is_a_function_of_scores(scores in prop::collection::vec((-20.0f64..0.0, 0.0f64..1.0), 1..12)) {
            let mut e: Vec<SweepEntry> = scores.iter().enumerate().map(|(i, &(c, x))| entry(2 + i % 3, i / 3, c, x)).collect();
            score_entries(&mut e, 0.7);
            let chosen = select_entry(&e);
            // brute force: maximal score, smallest (k, run) among maxima
            let max = e.iter().map(|x| x.quality.weighted_score).fold(f64::NEG_INFINITY, f64::max);
            let brute = e.iter().enumerate()
                .filter(|(_, x)| x.quality.weighted_score == max)
                .min_by_key(|(_, x)| (x.k, x.run))
                .map(|(i, _)| i)
                .unwrap();
            prop_assert_eq!(chosen, brute);
        }
    }
}
