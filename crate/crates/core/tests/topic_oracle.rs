mod common;

use std::collections::BTreeMap;

use trimeasure::corpus::WeightMatrix;
use trimeasure::scenario::{align_topics, gen_drift_corpus, DriftConfig, DriftCorpus, TopicGroup};
use trimeasure::topics::{
    cluster_prevalence, fit_lda, fit_lda_observed, prevalence_trend, score_entries, select_entry, sweep, ClusterMap,
    ClusterMapSpec, LdaConfig, SweepConfig, TrendConfig,
};

fn planted(seed: u64, docs_per_period: usize) -> DriftCorpus {
    planted_with(seed, docs_per_period, DriftConfig::default().concentration)
}

fn planted_with(seed: u64, docs_per_period: usize, concentration: f64) -> DriftCorpus {
    let groups = (0..4)
        .map(|i| TopicGroup {
            name: format!("g{i}"),
            topics: 1,
            start: 0.25,
            end: 0.25,
        })
        .collect();
    gen_drift_corpus(&DriftConfig {
        groups,
        residual_topics: 0,
        docs_per_period,
        concentration,
        seed,
        ..DriftConfig::default()
    })
    .unwrap()
}

fn assert_rows_sum_to_one(rows: &[Vec<f64>]) {
    for r in rows {
        assert!((r.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn planted_topics_are_recovered() {
    let mut exact = 0;
    for seed in 0..10 {
        let d = planted(seed, 200);
        assert_eq!(d.corpus.len(), 2000);
        let x = common::counts(&d.corpus);
        let cfg = LdaConfig {
            k: 4,
            seed,
            ..LdaConfig::default()
        };
        let mut sweeps = 0;
        let model = fit_lda_observed(&x, &cfg, |s| {
            sweeps += 1;
            s.check_conservation()
        })
        .unwrap();
        assert_eq!(sweeps, cfg.iterations);
        assert_rows_sum_to_one(&model.phi);
        assert_rows_sum_to_one(&model.theta);
        let aligned = align_topics(&model, &d.topic_words, 10).unwrap();
        exact += usize::from(aligned.iter().all(|&(_, overlap)| overlap == 10));
    }
    assert!(exact >= 9, "{exact}/10");
}

#[test]
fn fit_is_reproducible() {
    let d = planted(1, 30);
    let x = common::counts(&d.corpus);
    let cfg = LdaConfig {
        k: 4,
        iterations: 60,
        burn_in: 30,
        seed: 9,
        ..LdaConfig::default()
    };
    let a = fit_lda(&x, &cfg).unwrap();
    assert_eq!(a.phi, fit_lda(&x, &cfg).unwrap().phi);
    assert_ne!(a.phi, fit_lda(&x, &LdaConfig { seed: 10, ..cfg }).unwrap().phi);
}

fn drift_clusters(d: &DriftCorpus, x: &WeightMatrix, seed: u64) -> Vec<trimeasure::topics::TrendSeries> {
    let cfg = LdaConfig {
        k: 5,
        alpha: Some(0.5),
        seed,
        ..LdaConfig::default()
    };
    let model = fit_lda(x, &cfg).unwrap();
    let trends = prevalence_trend(&model, d.corpus.day_index().unwrap(), &TrendConfig::default()).unwrap();
    let mut spec = ClusterMapSpec {
        min_anchor_mass: 0.1,
        clusters: BTreeMap::new(),
    };
    for group in ["local", "transnational"] {
        let anchors: Vec<String> = d
            .topic_groups
            .iter()
            .zip(&d.topic_words)
            .filter(|(g, _)| *g == group)
            .flat_map(|(_, w)| w[..5].to_vec())
            .collect();
        spec.clusters.insert(
            group.to_string(),
            trimeasure::topics::ClusterSource {
                topics: None,
                anchors: Some(anchors),
            },
        );
    }
    cluster_prevalence(&trends, &spec.resolve(&model).unwrap()).unwrap()
}

#[test]
fn drift_directions_and_endpoints() {
    for seed in 0..10 {
        let d = gen_drift_corpus(&DriftConfig {
            seed,
            ..DriftConfig::default()
        })
        .unwrap();
        let x = common::counts(&d.corpus);
        let clusters = drift_clusters(&d, &x, seed);
        let (first, last) = (&d.truth[0], d.truth.last().unwrap());
        for (g, series) in clusters.iter().enumerate() {
            let expected_sign = if series.name == "local" { 1 } else { -1 };
            let gi = usize::from(series.name != "local");
            assert_eq!(series.slope_sign, expected_sign, "seed {seed} {}", series.name);
            for (day, truth) in [first, last] {
                let err = (series.evaluate(*day as f64) - truth[gi]).abs();
                assert!(err <= 0.05, "seed {seed} {} cluster {g}: error {err}", series.name);
            }
        }
    }
}

#[test]
fn explicit_cluster_map_matches_anchor_map() {
    let d = gen_drift_corpus(&DriftConfig {
        docs_per_period: 60,
        ..DriftConfig::default()
    })
    .unwrap();
    let x = common::counts(&d.corpus);
    let anchored = drift_clusters(&d, &x, 2);
    let model = fit_lda(
        &x,
        &LdaConfig {
            k: 5,
            alpha: Some(0.5),
            seed: 2,
            ..LdaConfig::default()
        },
    )
    .unwrap();
    let aligned = align_topics(&model, &d.topic_words, 10).unwrap();
    let mut clusters = BTreeMap::<String, Vec<usize>>::new();
    for (p, g) in d.topic_groups.iter().enumerate().filter(|(_, g)| *g != "residual") {
        clusters.entry(g.clone()).or_default().push(aligned[p].0);
    }
    clusters.values_mut().for_each(|v| v.sort_unstable());
    let trends = prevalence_trend(&model, d.corpus.day_index().unwrap(), &TrendConfig::default()).unwrap();
    let explicit = cluster_prevalence(&trends, &ClusterMap { clusters }).unwrap();
    assert_eq!(anchored, explicit);
}

#[test]
fn sweep_prefers_planted_k() {
    let mut near = 0;
    for seed in 0..10 {
        // nearly single-topic documents
        let d = planted_with(seed, 40, 0.2);
        let x = common::counts(&d.corpus);
        let cfg = SweepConfig {
            k_values: (2..=8).collect(),
            runs_per_k: 2,
            lda: LdaConfig {
                iterations: 200,
                burn_in: 100,
                seed,
                ..LdaConfig::default()
            },
            ..SweepConfig::default()
        };
        let (result, model) = sweep(&x, &cfg).unwrap();
        assert_eq!(result.entries.len(), 14);
        assert_eq!(model.k, result.selected_entry().k);
        let mut rescored = result.entries.clone();
        score_entries(&mut rescored, cfg.coherence_weight);
        assert_eq!(select_entry(&rescored), result.selected);
        near += usize::from((3..=5).contains(&model.k));
    }
    assert!(near >= 8, "{near}/10");
}
