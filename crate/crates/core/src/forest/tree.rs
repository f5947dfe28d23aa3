use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gini impurity `1 - Σ p_k²`.
pub fn gini(class_counts: &[u64]) -> Result<f64> {
    let total: u64 = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidInput("gini of an empty node".into()));
    }
    let n = total as f64;
    Ok(1.0 - class_counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
        /// In-bag sample count times the impurity decrease of this split.
        gini_decrease: f64,
    },
    Leaf {
        class_counts: Vec<u32>,
        /// Majority class, ties to the lower class index.
        class: u32,
    },
}

/// One ensemble member. Rows with `x <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    /// Training rows drawn for this tree, with repetitions.
    pub inbag: Vec<usize>,
}

impl Tree {
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if row[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                Node::Leaf { .. } => return i,
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        match &self.nodes[self.leaf_index(row)] {
            Node::Leaf { class, .. } => *class as usize,
            Node::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

/// Read-only view of the training data shared by all trees.
pub(crate) struct TrainingData<'a> {
    pub values: &'a [f64],
    pub n_features: usize,
    pub labels: &'a [usize],
    pub n_classes: usize,
}

impl TrainingData<'_> {
    fn value(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.n_features + feature]
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    /// `Σ l_k²/n_l + Σ r_k²/n_r`; larger means purer children.
    score: f64,
}

pub(crate) struct Grower<'a, R: Rng> {
    pub data: &'a TrainingData<'a>,
    pub mtry: usize,
    pub nodesize: usize,
    pub rng: &'a mut R,
    pub nodes: Vec<Node>,
    pairs: Vec<(f64, usize)>,
}

impl<'a, R: Rng> Grower<'a, R> {
    pub fn new(data: &'a TrainingData<'a>, mtry: usize, nodesize: usize, rng: &'a mut R) -> Self {
        Self {
            data,
            mtry,
            nodesize,
            rng,
            nodes: Vec::new(),
            pairs: Vec::new(),
        }
    }

    fn counts(&self, samples: &[usize]) -> Vec<u64> {
        let mut counts = vec![0u64; self.data.n_classes];
        for &r in samples {
            counts[self.data.labels[r]] += 1;
        }
        counts
    }

    fn leaf(counts: &[u64]) -> Node {
        let mut class = 0;
        for (k, &c) in counts.iter().enumerate() {
            if c > counts[class] {
                class = k;
            }
        }
        Node::Leaf {
            class_counts: counts.iter().map(|&c| c as u32).collect(),
            class: class as u32,
        }
    }

    fn best_split(&mut self, samples: &[usize], counts: &[u64]) -> Option<Candidate> {
        let n = samples.len();
        let parent_sumsq: u64 = counts.iter().map(|c| c * c).sum();
        let parent_score = parent_sumsq as f64 / n as f64;
        let features = index::sample(self.rng, self.data.n_features, self.mtry);
        let mut best: Option<Candidate> = None;
        let mut left = vec![0u64; counts.len()];
        for feature in features.iter() {
            self.pairs.clear();
            self.pairs.extend(
                samples
                    .iter()
                    .map(|&r| (self.data.value(r, feature), self.data.labels[r])),
            );
            self.pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if self.pairs[0].0 == self.pairs[n - 1].0 {
                continue;
            }
            left.iter_mut().for_each(|c| *c = 0);
            let mut left_sumsq = 0u64;
            let mut right_sumsq = parent_sumsq;
            for i in 0..n - 1 {
                let class = self.pairs[i].1;
                let right_c = counts[class] - left[class];
                left_sumsq += 2 * left[class] + 1;
                right_sumsq -= 2 * right_c - 1;
                left[class] += 1;
                let (v, next) = (self.pairs[i].0, self.pairs[i + 1].0);
                if v == next {
                    continue;
                }
                let nl = (i + 1) as f64;
                let nr = (n - i - 1) as f64;
                let score = left_sumsq as f64 / nl + right_sumsq as f64 / nr;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let mid = v + (next - v) / 2.0;
                    let threshold = if mid < next { mid } else { v };
                    best = Some(Candidate {
                        feature,
                        threshold,
                        score,
                    });
                }
            }
        }
        // Only splits that strictly lower the weighted child impurity count.
        best.filter(|b| b.score - parent_score > 1e-9)
    }

    /// Grows the subtree for `samples` and returns its root index.
    pub fn grow(&mut self, samples: Vec<usize>) -> usize {
        let counts = self.counts(&samples);
        let id = self.nodes.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if samples.len() <= self.nodesize || pure {
            self.nodes.push(Self::leaf(&counts));
            return id;
        }
        let Some(split) = self.best_split(&samples, &counts) else {
            self.nodes.push(Self::leaf(&counts));
            return id;
        };
        let parent_score = counts.iter().map(|c| c * c).sum::<u64>() as f64 / samples.len() as f64;
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&r| self.data.value(r, split.feature) <= split.threshold);
        debug_assert!(!left.is_empty() && !right.is_empty());
        self.nodes.push(Node::Split {
            feature: split.feature as u32,
            threshold: split.threshold,
            left: 0,
            right: 0,
            gini_decrease: split.score - parent_score,
        });
        let l = self.grow(left) as u32;
        let r = self.grow(right) as u32;
        if let Node::Split { left, right, .. } = &mut self.nodes[id] {
            *left = l;
            *right = r;
        }
        id
    }
}
