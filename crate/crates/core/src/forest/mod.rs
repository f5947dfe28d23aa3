//! Balanced-subsample random forest classifier.
//!
//! Each tree is grown on a stratified bootstrap that draws the same number of
//! rows from every class, which keeps small classes visible to every tree.
//! Out-of-bag votes, Gini importance and proximities come from the same
//! ensemble, so the diagnostics always describe the model that was trained.

mod metrics;
mod tree;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::WeightMatrix;
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{self, Domain};

pub use metrics::{evaluate, evaluate_predictions, ClassReport, ConfusionMatrix, EvalMode};
pub use tree::{gini, Node, Tree};

use tree::{Grower, TrainingData};

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried at each split.
    pub mtry: usize,
    /// Nodes with at most this many in-bag rows become leaves.
    pub nodesize: usize,
    /// Rows drawn (with replacement) from every class for each tree.
    pub per_class_sample: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 500,
            mtry: 10,
            nodesize: 1,
            per_class_sample: 20,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be positive".into()));
        }
        if self.mtry == 0 || self.mtry > n_features {
            return Err(Error::InvalidParameter(format!(
                "mtry={} must lie in 1..={n_features}",
                self.mtry
            )));
        }
        if self.nodesize == 0 {
            return Err(Error::InvalidParameter("nodesize must be >= 1".into()));
        }
        if self.per_class_sample == 0 {
            return Err(Error::InvalidParameter("per_class_sample must be >= 1".into()));
        }
        Ok(())
    }
}

/// Maps class names to indices in sorted order.
pub fn encode_labels<S: AsRef<str>>(labels: &[S]) -> (Vec<String>, Vec<usize>) {
    let classes: Vec<String> = labels
        .iter()
        .map(|l| l.as_ref().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let encoded = labels.iter().map(|l| index[l.as_ref()]).collect();
    (classes, encoded)
}

/// Draws `per_class` rows with replacement from every class.
///
/// Returns the in-bag draws (class by class, in draw order) and the sorted
/// rows that were never drawn.
pub fn stratified_bootstrap<R: Rng>(
    labels: &[usize],
    classes: &[String],
    per_class: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
    for (row, &c) in labels.iter().enumerate() {
        members
            .get_mut(c)
            .ok_or_else(|| Error::InvalidInput(format!("label index {c} out of range")))?
            .push(row);
    }
    let mut inbag = Vec::with_capacity(per_class * classes.len());
    let mut drawn = vec![false; labels.len()];
    for (class, rows) in members.iter().enumerate() {
        if rows.is_empty() {
            return Err(Error::EmptyClass(classes[class].clone()));
        }
        for _ in 0..per_class {
            let r = rows[rng.random_range(0..rows.len())];
            drawn[r] = true;
            inbag.push(r);
        }
    }
    let oob = (0..labels.len()).filter(|&r| !drawn[r]).collect();
    Ok((inbag, oob))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub version: u32,
    pub config: ForestConfig,
    pub classes: Vec<String>,
    pub features: Vec<String>,
    pub trees: Vec<Tree>,
    /// Encoded training labels, needed to score the OOB votes.
    pub train_labels: Vec<usize>,
    /// Per training row, votes per class from trees where the row was out-of-bag.
    pub oob_votes: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub class_name: String,
    /// Fraction of trees voting for each class.
    pub fractions: Vec<f64>,
}

/// Index of the largest count, ties to the lowest index.
pub(crate) fn argmax(counts: &[u32]) -> usize {
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    best
}

/// Trains a forest on string labels.
pub fn train_forest<S: AsRef<str>>(x: &WeightMatrix, labels: &[S], config: &ForestConfig) -> Result<Forest> {
    let (classes, y) = encode_labels(labels);
    train_forest_encoded(x, &classes, &y, config)
}

/// Trains a forest on labels already encoded against `classes`.
pub fn train_forest_encoded(
    x: &WeightMatrix,
    classes: &[String],
    labels: &[usize],
    config: &ForestConfig,
) -> Result<Forest> {
    if labels.len() != x.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: x.n_rows(),
            found: labels.len(),
        });
    }
    if classes.len() < 2 {
        return Err(Error::InvalidInput("need at least two classes".into()));
    }
    config.validate(x.n_cols())?;
    let data = TrainingData {
        values: x.values(),
        n_features: x.n_cols(),
        labels,
        n_classes: classes.len(),
    };
    let trees = par::try_map_range(config.n_trees, |t| -> Result<Tree> {
        let mut rng = rng::stream(config.seed, Domain::Tree, t as u64);
        let (inbag, _) = stratified_bootstrap(labels, classes, config.per_class_sample, &mut rng)?;
        let mut grower = Grower::new(&data, config.mtry, config.nodesize, &mut rng);
        grower.grow(inbag.clone());
        Ok(Tree {
            nodes: grower.nodes,
            inbag,
        })
    })?;

    let oob_preds: Vec<Vec<(usize, usize)>> = par::map_slice(&trees, |tree| {
        oob_rows(tree, x.n_rows())
            .into_iter()
            .map(|r| (r, tree.predict(x.row(r))))
            .collect()
    });
    let mut oob_votes = vec![vec![0u32; classes.len()]; x.n_rows()];
    for preds in oob_preds {
        for (r, c) in preds {
            oob_votes[r][c] += 1;
        }
    }
    Ok(Forest {
        version: FOREST_FORMAT_VERSION,
        config: *config,
        classes: classes.to_vec(),
        features: x.cols().to_vec(),
        trees,
        train_labels: labels.to_vec(),
        oob_votes,
    })
}

fn oob_rows(tree: &Tree, n_rows: usize) -> Vec<usize> {
    let mut inbag = vec![false; n_rows];
    for &r in &tree.inbag {
        inbag[r] = true;
    }
    (0..n_rows).filter(|&r| !inbag[r]).collect()
}

impl Forest {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.features.len() {
            return Err(Error::DimensionMismatch {
                expected: self.features.len(),
                found: row.len(),
            });
        }
        Ok(())
    }

    pub fn votes(&self, row: &[f64]) -> Result<Vec<u32>> {
        self.check_row(row)?;
        let mut votes = vec![0u32; self.classes.len()];
        for tree in &self.trees {
            votes[tree.predict(row)] += 1;
        }
        Ok(votes)
    }

    /// Majority vote over all trees; ties go to the earlier class.
    pub fn predict(&self, row: &[f64]) -> Result<Prediction> {
        let votes = self.votes(row)?;
        let class = argmax(&votes);
        let n = self.trees.len() as f64;
        Ok(Prediction {
            class,
            class_name: self.classes[class].clone(),
            fractions: votes.iter().map(|&v| v as f64 / n).collect(),
        })
    }

    /// Predicted class index for every row of `x`.
    pub fn predict_matrix(&self, x: &WeightMatrix) -> Result<Vec<usize>> {
        if x.n_cols() != self.features.len() {
            return Err(Error::DimensionMismatch {
                expected: self.features.len(),
                found: x.n_cols(),
            });
        }
        Ok(par::map_range(x.n_rows(), |i| {
            let row = x.row(i);
            let mut votes = vec![0u32; self.classes.len()];
            for tree in &self.trees {
                votes[tree.predict(row)] += 1;
            }
            argmax(&votes)
        }))
    }

    /// OOB prediction per training row; `None` if the row was in-bag for every tree.
    pub fn oob_predictions(&self) -> Vec<Option<usize>> {
        self.oob_votes
            .iter()
            .map(|v| (v.iter().any(|&c| c > 0)).then(|| argmax(v)))
            .collect()
    }

    /// `1 - OOB accuracy` over rows with at least one OOB vote.
    pub fn oob_error(&self) -> Option<f64> {
        let preds = self.oob_predictions();
        let (mut n, mut wrong) = (0usize, 0usize);
        for (p, &y) in preds.iter().zip(&self.train_labels) {
            if let Some(p) = p {
                n += 1;
                wrong += usize::from(*p != y);
            }
        }
        (n > 0).then(|| wrong as f64 / n as f64)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self).map_err(|e| Error::io(path, e.into()))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let forest: Forest = serde_json::from_reader(std::io::BufReader::new(file))
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        if forest.version != FOREST_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "{}: unsupported forest format version {}",
                path.display(),
                forest.version
            )));
        }
        Ok(forest)
    }
}

/// Mean decrease in Gini per feature, sorted descending (ties by name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRanking {
    pub entries: Vec<(String, f64)>,
}

impl ImportanceRanking {
    pub fn top(&self, n: usize) -> Vec<&str> {
        self.entries.iter().take(n).map(|(t, _)| t.as_str()).collect()
    }

    pub fn get(&self, feature: &str) -> Option<f64> {
        self.entries.iter().find(|(t, _)| t == feature).map(|&(_, v)| v)
    }
}

/// Sums each split's weighted impurity decrease per feature and averages over trees.
pub fn importance(forest: &Forest) -> ImportanceRanking {
    let mut totals = vec![0.0; forest.features.len()];
    for tree in &forest.trees {
        for node in &tree.nodes {
            if let Node::Split {
                feature, gini_decrease, ..
            } = node
            {
                totals[*feature as usize] += gini_decrease;
            }
        }
    }
    let n = forest.trees.len() as f64;
    let mut entries: Vec<(String, f64)> = forest
        .features
        .iter()
        .cloned()
        .zip(totals.into_iter().map(|t| t / n))
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ImportanceRanking { entries }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProximityMode {
    /// Count co-terminal pairs over every tree.
    #[default]
    AllTrees,
    /// Count only trees where both rows were out-of-bag (training rows only).
    OobPairs,
}

/// Symmetric matrix of the fraction of trees in which two rows share a leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximityMatrix {
    pub ids: Vec<String>,
    pub values: Vec<f64>,
}

impl ProximityMatrix {
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }
}

pub fn proximity(forest: &Forest, x: &WeightMatrix, mode: ProximityMode) -> Result<ProximityMatrix> {
    if x.n_cols() != forest.features.len() {
        return Err(Error::DimensionMismatch {
            expected: forest.features.len(),
            found: x.n_cols(),
        });
    }
    let n = x.n_rows();
    if mode == ProximityMode::OobPairs && n != forest.train_labels.len() {
        return Err(Error::DimensionMismatch {
            expected: forest.train_labels.len(),
            found: n,
        });
    }
    // leaves[t][i]: terminal node of row i in tree t; u32::MAX marks in-bag rows in OOB mode.
    let leaves: Vec<Vec<u32>> = par::map_slice(&forest.trees, |tree| {
        let mut ids: Vec<u32> = (0..n).map(|i| tree.leaf_index(x.row(i)) as u32).collect();
        if mode == ProximityMode::OobPairs {
            for &r in &tree.inbag {
                ids[r] = u32::MAX;
            }
        }
        ids
    });
    let rows: Vec<Vec<f64>> = par::map_range(n, |i| {
        let mut same = vec![0u32; n];
        let mut both = vec![0u32; n];
        for tl in &leaves {
            let li = tl[i];
            if li == u32::MAX {
                continue;
            }
            for j in i..n {
                if tl[j] == u32::MAX {
                    continue;
                }
                both[j] += 1;
                same[j] += u32::from(tl[j] == li);
            }
        }
        (0..n)
            .map(|j| {
                if j < i {
                    0.0
                } else if j == i {
                    1.0
                } else if mode == ProximityMode::AllTrees {
                    same[j] as f64 / forest.trees.len() as f64
                } else if both[j] == 0 {
                    0.0
                } else {
                    same[j] as f64 / both[j] as f64
                }
            })
            .collect()
    });
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            values[i * n + j] = rows[i][j];
            values[j * n + i] = rows[i][j];
        }
    }
    Ok(ProximityMatrix {
        ids: x.rows().to_vec(),
        values,
    })
}
