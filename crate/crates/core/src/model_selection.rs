//! Stratified k-fold cross-validation and hyperparameter grid search.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::WeightMatrix;
use crate::error::{Error, Result};
use crate::forest::{evaluate_predictions, train_forest_encoded, EvalMode, ForestConfig};
use crate::par;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub mtry_values: Vec<usize>,
    pub nodesize_values: Vec<usize>,
}

impl Grid {
    /// `mtry ∈ {3, 5, 10, 15, 20}` × `nodesize ∈ {1, 5, 10}`, 15 points.
    ///
    /// The nodesize values are a reconstruction; CV results record it via
    /// [`Grid::is_interpreted_default`].
    pub fn standard() -> Self {
        Self {
            mtry_values: vec![3, 5, 10, 15, 20],
            nodesize_values: vec![1, 5, 10],
        }
    }

    pub fn is_interpreted_default(&self) -> bool {
        *self == Self::standard()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mtry_values.is_empty() || self.nodesize_values.is_empty() {
            return Err(Error::InvalidParameter("grid lists must be nonempty".into()));
        }
        if self.mtry_values.iter().chain(&self.nodesize_values).any(|&v| v == 0) {
            return Err(Error::InvalidParameter("grid values must be positive".into()));
        }
        Ok(())
    }

    /// Grid points in mtry-major order.
    pub fn points(&self) -> Vec<GridPoint> {
        self.mtry_values
            .iter()
            .flat_map(|&mtry| {
                self.nodesize_values
                    .iter()
                    .map(move |&nodesize| GridPoint { mtry, nodesize })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPoint {
    pub mtry: usize,
    pub nodesize: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Mean OOB error of the forests trained on each fold's training part.
    #[default]
    MeanOobError,
    /// Mean misclassification rate on the held-out folds.
    MeanCvError,
}

/// Assigns each row to one of `k` folds, preserving class proportions.
///
/// Rows of each class are shuffled and dealt round-robin, continuing the deal
/// across classes, so every fold gets within one row of its share of every
/// class and fold sizes differ by at most one.
pub fn stratified_kfold<R: Rng>(labels: &[usize], classes: &[String], k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidParameter("k must be >= 2".into()));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
    for (row, &c) in labels.iter().enumerate() {
        members[c].push(row);
    }
    for (c, rows) in members.iter().enumerate() {
        if rows.len() < k {
            return Err(Error::ClassTooSmall {
                class: classes[c].clone(),
                size: rows.len(),
                k,
            });
        }
    }
    let mut folds = vec![0usize; labels.len()];
    let mut next = 0usize;
    for rows in &mut members {
        rows.shuffle(rng);
        for &r in rows.iter() {
            folds[r] = next % k;
            next += 1;
        }
    }
    Ok(folds)
}

/// Splits rows into `(train, test)` with about `test_fraction` of every class
/// in the test part, at least one row of each class on each side.
pub fn stratified_holdout(
    labels: &[usize],
    classes: &[String],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter("test_fraction must lie in (0, 1)".into()));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
    for (row, &c) in labels.iter().enumerate() {
        members[c].push(row);
    }
    let mut rng = rng::stream(seed, Domain::Split, 0);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (c, rows) in members.iter_mut().enumerate() {
        if rows.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: classes[c].clone(),
                size: rows.len(),
                k: 2,
            });
        }
        rows.shuffle(&mut rng);
        let n_test = ((rows.len() as f64 * test_fraction).round() as usize).clamp(1, rows.len() - 1);
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub oob_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub sd: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub point: GridPoint,
    pub folds: Vec<FoldMetrics>,
    pub accuracy: Moments,
    pub balanced_accuracy: Moments,
    pub oob_error: Moments,
}

impl PointResult {
    fn criterion_value(&self, criterion: Criterion) -> f64 {
        match criterion {
            Criterion::MeanOobError => self.oob_error.mean,
            Criterion::MeanCvError => 1.0 - self.accuracy.mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub k: usize,
    pub criterion: Criterion,
    pub points: Vec<PointResult>,
    /// Index into `points`.
    pub chosen: usize,
    /// True when the grid is the default with the interpreted nodesize set.
    pub nodesize_interpreted: bool,
}

impl CvResult {
    pub fn chosen_point(&self) -> GridPoint {
        self.points[self.chosen].point
    }

    pub fn chosen_result(&self) -> &PointResult {
        &self.points[self.chosen]
    }

    /// One row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "mtry,nodesize,mean_accuracy,sd_accuracy,mean_balanced_accuracy,sd_balanced_accuracy,mean_oob_error,sd_oob_error,chosen\n",
        );
        for (i, p) in self.points.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                p.point.mtry,
                p.point.nodesize,
                p.accuracy.mean,
                p.accuracy.sd,
                p.balanced_accuracy.mean,
                p.balanced_accuracy.sd,
                p.oob_error.mean,
                p.oob_error.sd,
                u8::from(i == self.chosen)
            );
        }
        out
    }
}

/// Index minimizing the criterion; ties go to smaller mtry, then smaller nodesize.
pub fn select_point(points: &[PointResult], criterion: Criterion) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate().skip(1) {
        let (a, b) = (p.criterion_value(criterion), points[best].criterion_value(criterion));
        if a < b || (a == b && p.point < points[best].point) {
            best = i;
        }
    }
    best
}

/// Cross-validates every grid point on the same stratified folds.
///
/// The fold assignment comes from `base.seed`; the forest for fold `f` uses
/// the same derived seed at every grid point.
pub fn grid_search(
    x: &WeightMatrix,
    classes: &[String],
    labels: &[usize],
    grid: &Grid,
    k: usize,
    base: &ForestConfig,
    criterion: Criterion,
) -> Result<CvResult> {
    grid.validate()?;
    if labels.len() != x.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: x.n_rows(),
            found: labels.len(),
        });
    }
    let folds = stratified_kfold(labels, classes, k, &mut rng::stream(base.seed, Domain::Folds, 0))?;
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..k)
        .map(|f| {
            let train = (0..labels.len()).filter(|&r| folds[r] != f).collect();
            let test = (0..labels.len()).filter(|&r| folds[r] == f).collect();
            (train, test)
        })
        .collect();
    let train_x: Vec<WeightMatrix> = splits.iter().map(|(tr, _)| x.select_rows(tr)).collect();
    let points = grid.points();
    let jobs = points.len() * k;
    let metrics = par::try_map_range(jobs, |job| -> Result<FoldMetrics> {
        let (pi, f) = (job / k, job % k);
        let point = points[pi];
        let (train, test) = &splits[f];
        let config = ForestConfig {
            mtry: point.mtry,
            nodesize: point.nodesize,
            seed: rng::derive_seed(base.seed, Domain::Folds, f as u64 + 1),
            ..*base
        };
        let y_train: Vec<usize> = train.iter().map(|&r| labels[r]).collect();
        let annotate = |e: Error| {
            e.context(format!(
                "grid point mtry={} nodesize={}, fold {f}",
                point.mtry, point.nodesize
            ))
        };
        let forest = train_forest_encoded(&train_x[f], classes, &y_train, &config).map_err(annotate)?;
        let test_x = x.select_rows(test);
        let predicted = forest.predict_matrix(&test_x).map_err(annotate)?;
        let truth: Vec<usize> = test.iter().map(|&r| labels[r]).collect();
        let (_, report) = evaluate_predictions(classes, &truth, &predicted, EvalMode::Holdout, None);
        let oob_error = forest
            .oob_error()
            .ok_or_else(|| annotate(Error::Numeric("no out-of-bag rows".into())))?;
        Ok(FoldMetrics {
            accuracy: report.accuracy,
            balanced_accuracy: report.balanced_accuracy,
            oob_error,
        })
    })?;
    let results: Vec<PointResult> = points
        .iter()
        .enumerate()
        .map(|(pi, &point)| {
            let folds = metrics[pi * k..(pi + 1) * k].to_vec();
            let pick = |f: fn(&FoldMetrics) -> f64| Moments::of(&folds.iter().map(f).collect::<Vec<_>>());
            PointResult {
                point,
                accuracy: pick(|m| m.accuracy),
                balanced_accuracy: pick(|m| m.balanced_accuracy),
                oob_error: pick(|m| m.oob_error),
                folds,
            }
        })
        .collect();
    Ok(CvResult {
        k,
        criterion,
        chosen: select_point(&results, criterion),
        nodesize_interpreted: grid.is_interpreted_default(),
        points: results,
    })
}
