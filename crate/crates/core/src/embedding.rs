//! Classical (metric, Torgerson) multidimensional scaling.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::ProximityMatrix;
use crate::linalg;

/// Symmetric, zero-diagonal dissimilarities, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityMatrix {
    pub ids: Vec<String>,
    pub values: Vec<f64>,
}

impl DissimilarityMatrix {
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: values.len(),
            });
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal at row {i}")));
            }
            for j in 0..i {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(Error::InvalidInput(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(Self { ids, values })
    }

    /// Euclidean distances between the given points.
    pub fn euclidean(ids: Vec<String>, points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let d = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        Self::new(ids, values)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }
}

/// `d(i, j) = 1 - prox(i, j)`.
pub fn proximity_to_dissimilarity(p: &ProximityMatrix) -> DissimilarityMatrix {
    let n = p.n();
    let mut values: Vec<f64> = p.values.iter().map(|v| 1.0 - v).collect();
    for i in 0..n {
        values[i * n + i] = 0.0;
    }
    DissimilarityMatrix {
        ids: p.ids.clone(),
        values,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdsEmbedding {
    pub ids: Vec<String>,
    /// One row per point, `dims` columns ordered by eigenvalue.
    pub coordinates: Vec<Vec<f64>>,
    /// All eigenvalues of the centered Gram matrix, nonincreasing, unclamped.
    pub eigenvalues: Vec<f64>,
    /// Kruskal stress-1 of the reconstructed distances.
    pub stress: f64,
    pub notes: Vec<String>,
}

impl MdsEmbedding {
    pub fn dims(&self) -> usize {
        self.coordinates.first().map_or(0, Vec::len)
    }

    /// Euclidean distance between two embedded points.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.coordinates[i]
            .iter()
            .zip(&self.coordinates[j])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `id,x,y,label` rows; `y` is 0 for one-dimensional embeddings.
    pub fn to_csv(&self, labels: Option<&[String]>) -> String {
        let mut out = String::from("id,x,y,label\n");
        for (i, id) in self.ids.iter().enumerate() {
            let c = &self.coordinates[i];
            let x = c.first().copied().unwrap_or(0.0);
            let y = c.get(1).copied().unwrap_or(0.0);
            let label = labels.map_or("", |l| l[i].as_str());
            let _ = writeln!(out, "{id},{x:.9},{y:.9},{label}");
        }
        out
    }
}

/// Embeds `d` in `dims` dimensions.
///
/// Negative eigenvalues are clamped to zero and noted; if fewer than `dims`
/// eigenvalues are positive, the remaining columns are zero and a note says so.
pub fn classical_mds(d: &DissimilarityMatrix, dims: usize) -> Result<MdsEmbedding> {
    if dims == 0 {
        return Err(Error::InvalidParameter("dims must be >= 1".into()));
    }
    let n = d.n();
    let mut b: Vec<f64> = d.values.iter().map(|v| v * v).collect();
    let row_means: Vec<f64> = (0..n)
        .map(|i| b[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    let grand = row_means.iter().sum::<f64>() / n.max(1) as f64;
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = -0.5 * (b[i * n + j] - row_means[i] - row_means[j] + grand);
        }
    }
    let eig = linalg::symmetric_eigen(&b, n)?;
    let mut notes = Vec::new();
    let scale = eig.values.first().map_or(0.0, |v| v.abs()).max(1.0);
    let negative = eig.values.iter().filter(|&&v| v < -1e-9 * scale).count();
    if negative > 0 {
        notes.push(format!(
            "{negative} negative eigenvalue(s) clamped to zero (dissimilarities are not Euclidean)"
        ));
    }
    let positive = eig.values.iter().filter(|&&v| v > 1e-12 * scale).count();
    if positive < dims {
        notes.push(format!(
            "only {positive} positive eigenvalue(s); {} dimension(s) zero-filled",
            dims - positive
        ));
    }
    let mut coordinates = vec![vec![0.0; dims]; n];
    for k in 0..dims.min(positive) {
        let s = eig.values[k].sqrt();
        for (i, row) in coordinates.iter_mut().enumerate() {
            row[k] = s * eig.vectors[k][i];
        }
    }
    let mut emb = MdsEmbedding {
        ids: d.ids.clone(),
        coordinates,
        eigenvalues: eig.values,
        stress: 0.0,
        notes,
    };
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..i {
            let dij = d.get(i, j);
            num += (dij - emb.distance(i, j)).powi(2);
            den += dij * dij;
        }
    }
    emb.stress = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
    Ok(emb)
}
