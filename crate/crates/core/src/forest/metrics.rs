use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Forest;
use crate::corpus::WeightMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Score the training rows with their out-of-bag votes.
    Oob,
    /// Score any rows with the full ensemble.
    Holdout,
}

/// Rows are the true class, columns the predicted class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_pairs(classes: &[String], truth: &[usize], predicted: &[usize]) -> Self {
        let k = classes.len();
        let mut counts = vec![vec![0u64; k]; k];
        for (&t, &p) in truth.iter().zip(predicted) {
            counts[t][p] += 1;
        }
        Self {
            classes: classes.to_vec(),
            counts,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        self.counts.iter().map(|r| r[j]).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("truth");
        for c in &self.classes {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(&self.counts) {
            out.push_str(c);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Per-class sensitivity (recall) and precision plus summary accuracies.
///
/// `None` marks an undefined ratio: sensitivity of a class absent from the
/// evaluated rows, or precision of a class the model never predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub mode: EvalMode,
    pub classes: Vec<String>,
    pub n: Vec<u64>,
    pub sensitivity: Vec<Option<f64>>,
    pub precision: Vec<Option<f64>>,
    pub accuracy: f64,
    /// Unweighted mean of the defined sensitivities.
    pub balanced_accuracy: f64,
    /// The forest's own out-of-bag error.
    pub oob_error: Option<f64>,
    /// Rows left out because they had no out-of-bag vote.
    pub unevaluated: usize,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl ClassReport {
    pub fn from_confusion(cm: &ConfusionMatrix, mode: EvalMode, oob_error: Option<f64>, unevaluated: usize) -> Self {
        let k = cm.classes.len();
        let n: Vec<u64> = (0..k).map(|i| cm.row_sum(i)).collect();
        let sensitivity: Vec<Option<f64>> = (0..k).map(|i| ratio(cm.counts[i][i], n[i])).collect();
        let precision = (0..k).map(|i| ratio(cm.counts[i][i], cm.col_sum(i))).collect();
        let defined: Vec<f64> = sensitivity.iter().flatten().copied().collect();
        let balanced_accuracy = if defined.is_empty() {
            0.0
        } else {
            defined.iter().sum::<f64>() / defined.len() as f64
        };
        Self {
            mode,
            classes: cm.classes.clone(),
            n,
            sensitivity,
            precision,
            accuracy: ratio(cm.trace(), cm.total()).unwrap_or(0.0),
            balanced_accuracy,
            oob_error,
            unevaluated,
        }
    }

    pub fn sensitivity_of(&self, class: &str) -> Option<f64> {
        let i = self.classes.iter().position(|c| c == class)?;
        self.sensitivity[i]
    }

    /// Markdown table with the Class / N / Sensitivity / Precision columns.
    pub fn render_table(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.2}"));
        let mut out = String::from("| Class | N | Sensitivity | Precision |\n|---|---|---|---|\n");
        for i in 0..self.classes.len() {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                self.classes[i],
                self.n[i],
                fmt(self.sensitivity[i]),
                fmt(self.precision[i])
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"));
        let mut out = String::from("class,n,sensitivity,precision\n");
        for i in 0..self.classes.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.classes[i],
                self.n[i],
                fmt(self.sensitivity[i]),
                fmt(self.precision[i])
            );
        }
        out
    }
}

/// Scores arbitrary predictions.
pub fn evaluate_predictions(
    classes: &[String],
    truth: &[usize],
    predicted: &[usize],
    mode: EvalMode,
    oob_error: Option<f64>,
) -> (ConfusionMatrix, ClassReport) {
    let cm = ConfusionMatrix::from_pairs(classes, truth, predicted);
    let report = ClassReport::from_confusion(&cm, mode, oob_error, 0);
    (cm, report)
}

fn encode_against<S: AsRef<str>>(classes: &[String], labels: &[S]) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|l| {
            classes
                .iter()
                .position(|c| c == l.as_ref())
                .ok_or_else(|| Error::InvalidInput(format!("label `{}` unknown to the forest", l.as_ref())))
        })
        .collect()
}

/// Confusion matrix and class report for `x` and its true `labels`.
///
/// In OOB mode `x` must be the training matrix; each row is scored only with
/// the trees that did not draw it.
pub fn evaluate<S: AsRef<str>>(
    forest: &Forest,
    x: &WeightMatrix,
    labels: &[S],
    mode: EvalMode,
) -> Result<(ConfusionMatrix, ClassReport)> {
    if labels.len() != x.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: x.n_rows(),
            found: labels.len(),
        });
    }
    let truth = encode_against(&forest.classes, labels)?;
    let oob_error = forest.oob_error();
    match mode {
        EvalMode::Holdout => {
            let predicted = forest.predict_matrix(x)?;
            Ok(evaluate_predictions(
                &forest.classes,
                &truth,
                &predicted,
                mode,
                oob_error,
            ))
        }
        EvalMode::Oob => {
            if x.n_rows() != forest.oob_votes.len() {
                return Err(Error::DimensionMismatch {
                    expected: forest.oob_votes.len(),
                    found: x.n_rows(),
                });
            }
            let oob = forest.oob_predictions();
            let (mut t, mut p) = (Vec::new(), Vec::new());
            for (&y, pred) in truth.iter().zip(&oob) {
                if let Some(pred) = pred {
                    t.push(y);
                    p.push(*pred);
                }
            }
            let cm = ConfusionMatrix::from_pairs(&forest.classes, &t, &p);
            let report = ClassReport::from_confusion(&cm, mode, oob_error, truth.len() - t.len());
            Ok((cm, report))
        }
    }
}
