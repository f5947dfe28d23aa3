#![allow(dead_code)]

use trimeasure::corpus::{build_vocabulary, weight_counts, weight_tfidf, Corpus, StopwordPolicy, WeightMatrix};
use trimeasure::forest::{evaluate, train_forest_encoded, EvalMode, Forest, ForestConfig};
use trimeasure::model_selection::stratified_holdout;

pub fn tfidf(corpus: &Corpus) -> WeightMatrix {
    let tok = corpus.tokenize(&StopwordPolicy::english());
    weight_tfidf(&tok, &build_vocabulary(&tok, 2, 1.0).unwrap())
}

pub fn counts(corpus: &Corpus) -> WeightMatrix {
    let tok = corpus.tokenize(&StopwordPolicy::english());
    weight_counts(&tok, &build_vocabulary(&tok, 1, 1.0).unwrap())
}

pub fn encoded(corpus: &Corpus) -> (Vec<String>, Vec<usize>) {
    let classes = corpus.classes();
    let y = corpus
        .labels()
        .unwrap()
        .iter()
        .map(|l| classes.iter().position(|c| c == l).unwrap())
        .collect();
    (classes, y)
}

/// Holdout sensitivities of a default forest trained on 70% of `corpus`.
pub fn holdout_sensitivities(corpus: &Corpus, seed: u64) -> Vec<f64> {
    let x = tfidf(corpus);
    let (classes, y) = encoded(corpus);
    let (train, test) = stratified_holdout(&y, &classes, 0.3, seed).unwrap();
    let pick = |rows: &[usize]| rows.iter().map(|&r| y[r]).collect::<Vec<_>>();
    let cfg = ForestConfig {
        seed,
        ..ForestConfig::default()
    };
    let forest = train_forest_encoded(&x.select_rows(&train), &classes, &pick(&train), &cfg).unwrap();
    let truth: Vec<&str> = test.iter().map(|&r| classes[y[r]].as_str()).collect();
    let (_, report) = evaluate(&forest, &x.select_rows(&test), &truth, EvalMode::Holdout).unwrap();
    report.sensitivity.iter().map(|s| s.unwrap()).collect()
}

pub fn forest_on_all(corpus: &Corpus, seed: u64) -> (Forest, WeightMatrix) {
    let x = tfidf(corpus);
    let (classes, y) = encoded(corpus);
    let forest = train_forest_encoded(
        &x,
        &classes,
        &y,
        &ForestConfig {
            seed,
            ..ForestConfig::default()
        },
    )
    .unwrap();
    (forest, x)
}
