mod common;

use trimeasure::forest::ForestConfig;
use trimeasure::model_selection::{grid_search, Criterion, Grid, GridPoint};
use trimeasure::scenario::{gen_convergence_corpus, ConvergenceConfig};

fn table(threads: Option<usize>) -> String {
    let corpus = gen_convergence_corpus(&ConvergenceConfig::default()).unwrap();
    let x = common::tfidf(&corpus);
    let (classes, y) = common::encoded(&corpus);
    let base = ForestConfig {
        n_trees: 60,
        seed: 11,
        ..ForestConfig::default()
    };
    let run = || {
        grid_search(&x, &classes, &y, &Grid::standard(), 5, &base, Criterion::MeanOobError)
            .unwrap()
            .to_csv()
    };
    match threads {
        #[cfg(feature = "parallel")]
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(run),
        _ => run(),
    }
}

#[test]
fn default_grid_has_fifteen_points() {
    let points = Grid::standard().points();
    assert_eq!(points.len(), 15);
    let mut expected = Vec::new();
    for mtry in [3, 5, 10, 15, 20] {
        for nodesize in [1, 5, 10] {
            expected.push(GridPoint { mtry, nodesize });
        }
    }
    assert_eq!(points, expected);
}

#[test]
fn cv_table_is_reproducible() {
    let a = table(None);
    assert_eq!(a.lines().count(), 16);
    assert_eq!(a, table(None));
    #[cfg(feature = "parallel")]
    {
        assert_eq!(a, table(Some(1)));
        assert_eq!(a, table(Some(3)));
    }
}
