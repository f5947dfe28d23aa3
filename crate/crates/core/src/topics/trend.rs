use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::TopicModel;
use crate::error::{Error, Result};
use crate::linalg::Qr;

/// Changes in prevalence smaller than this count as flat.
pub const SLOPE_TOLERANCE: f64 = 1e-10;

/// Regression basis over the day index, rescaled to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    Polynomial {
        degree: usize,
    },
    /// Clamped cubic B-spline with evenly spaced interior knots.
    Bspline {
        interior_knots: usize,
    },
}

impl Default for Basis {
    fn default() -> Self {
        Basis::Bspline { interior_knots: 3 }
    }
}

impl Basis {
    pub fn dimension(&self) -> usize {
        match *self {
            Basis::Polynomial { degree } => degree + 1,
            Basis::Bspline { interior_knots } => interior_knots + 4,
        }
    }

    pub fn eval(&self, u: f64) -> Vec<f64> {
        match *self {
            Basis::Polynomial { degree } => (0..=degree).map(|p| u.powi(p as i32)).collect(),
            Basis::Bspline { interior_knots } => bspline(u, interior_knots),
        }
    }
}

fn bspline(u: f64, interior: usize) -> Vec<f64> {
    const DEGREE: usize = 3;
    let mut knots = vec![0.0; DEGREE + 1];
    knots.extend((1..=interior).map(|i| i as f64 / (interior + 1) as f64));
    knots.extend([1.0; DEGREE + 1]);
    let m = interior + DEGREE + 1;
    if u >= 1.0 {
        let mut out = vec![0.0; m];
        out[m - 1] = 1.0;
        return out;
    }
    let u = u.max(0.0);
    let mut n: Vec<f64> = (0..knots.len() - 1)
        .map(|i| f64::from(knots[i] <= u && u < knots[i + 1]))
        .collect();
    for d in 1..=DEGREE {
        n = (0..n.len() - 1)
            .map(|i| {
                let mut v = 0.0;
                let a = knots[i + d] - knots[i];
                if a > 0.0 {
                    v += (u - knots[i]) / a * n[i];
                }
                let b = knots[i + d + 1] - knots[i + 1];
                if b > 0.0 {
                    v += (knots[i + d + 1] - u) / b * n[i + 1];
                }
                v
            })
            .collect();
    }
    n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrendConfig {
    pub basis: Basis,
    pub grid_points: usize,
    /// Day-index interval for the slope; the full data range when unset.
    pub window: Option<(f64, f64)>,
}

impl Default for TrendConfig {
    fn default() -> Self {
        Self {
            basis: Basis::default(),
            grid_points: 100,
            window: None,
        }
    }
}

/// Fitted prevalence curve of one topic or cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub name: String,
    pub basis: Basis,
    /// Day-index range mapped onto `[0, 1]` by the basis.
    pub day_range: (f64, f64),
    pub coefficients: Vec<f64>,
    /// Strictly increasing day indices.
    pub grid: Vec<f64>,
    /// Unclipped fitted prevalence on `grid`.
    pub fitted: Vec<f64>,
    pub window: (f64, f64),
    /// Average change per day over `window`.
    pub slope: f64,
    pub slope_sign: i8,
}

impl TrendSeries {
    pub fn evaluate(&self, day: f64) -> f64 {
        let (lo, hi) = self.day_range;
        let b = self.basis.eval((day - lo) / (hi - lo));
        b.iter().zip(&self.coefficients).map(|(x, c)| x * c).sum()
    }

    /// Fitted values clipped to `[0, 1]`.
    pub fn clipped(&self) -> Vec<f64> {
        self.fitted.iter().map(|v| v.clamp(0.0, 1.0)).collect()
    }

    fn set_slope(&mut self) {
        let (a, b) = self.window;
        let change = self.evaluate(b) - self.evaluate(a);
        self.slope = change / (b - a);
        self.slope_sign = if change.abs() <= SLOPE_TOLERANCE {
            0
        } else {
            change.signum() as i8
        };
    }
}

/// Regresses each topic's document proportions on the day-index basis.
///
/// `days[d]` is the day index of document `d` of the model.
pub fn prevalence_trend(model: &TopicModel, days: &[u32], config: &TrendConfig) -> Result<Vec<TrendSeries>> {
    if days.len() != model.n_docs() {
        return Err(Error::DimensionMismatch {
            expected: model.n_docs(),
            found: days.len(),
        });
    }
    if config.grid_points < 2 {
        return Err(Error::InvalidParameter("grid_points must be >= 2".into()));
    }
    let lo = days.iter().copied().min().unwrap_or(0) as f64;
    let hi = days.iter().copied().max().unwrap_or(0) as f64;
    if hi <= lo {
        return Err(Error::InvalidInput("documents must span more than one day".into()));
    }
    let p = config.basis.dimension();
    let n = days.len();
    if n < p {
        return Err(Error::InvalidInput(format!(
            "{n} documents cannot fit a basis of dimension {p}"
        )));
    }
    let design: Vec<f64> = days
        .iter()
        .flat_map(|&t| config.basis.eval((t as f64 - lo) / (hi - lo)))
        .collect();
    let qr = Qr::new(&design, n, p).map_err(|e| e.context("trend regression"))?;
    let window = match config.window {
        Some((a, b)) => {
            let (a, b) = (a.max(lo), b.min(hi));
            if b <= a {
                return Err(Error::InvalidParameter(format!(
                    "slope window does not overlap days {lo}..{hi}"
                )));
            }
            (a, b)
        }
        None => (lo, hi),
    };
    let steps = (config.grid_points - 1) as f64;
    let grid: Vec<f64> = (0..config.grid_points)
        .map(|i| lo + (hi - lo) * i as f64 / steps)
        .collect();
    Ok((0..model.k)
        .map(|k| {
            let y: Vec<f64> = model.theta.iter().map(|row| row[k]).collect();
            let mut series = TrendSeries {
                name: format!("topic_{k}"),
                basis: config.basis,
                day_range: (lo, hi),
                coefficients: qr.solve(&y),
                grid: grid.clone(),
                fitted: Vec::new(),
                window,
                slope: 0.0,
                slope_sign: 0,
            };
            series.fitted = grid.iter().map(|&t| series.evaluate(t)).collect();
            series.set_slope();
            series
        })
        .collect())
}

/// Analyst grouping of topics. Topics in no cluster are residual.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterMap {
    pub clusters: BTreeMap<String, Vec<usize>>,
}

impl ClusterMap {
    pub fn validate(&self, k: usize) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (name, topics) in &self.clusters {
            for &t in topics {
                if t >= k {
                    return Err(Error::UnknownTopic { topic: t, k });
                }
                if !seen.insert(t) {
                    return Err(Error::Spec(format!(
                        "topic {t} appears in more than one cluster (last: {name})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One cluster in a cluster-map file: explicit topic ids or anchor words.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSource {
    #[serde(default)]
    pub topics: Option<Vec<usize>>,
    #[serde(default)]
    pub anchors: Option<Vec<String>>,
}

/// Cluster-map file contents.
///
/// Anchor clusters claim each topic whose probability mass on the cluster's
/// anchor words is largest among anchor clusters and at least `min_anchor_mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterMapSpec {
    #[serde(default = "default_anchor_mass")]
    pub min_anchor_mass: f64,
    pub clusters: BTreeMap<String, ClusterSource>,
}

fn default_anchor_mass() -> f64 {
    0.1
}

impl ClusterMapSpec {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Spec(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| Error::Spec(format!("{}: {e}", path.display())))
        }
    }

    pub fn resolve(&self, model: &TopicModel) -> Result<ClusterMap> {
        let mut clusters: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut anchored: Vec<(&str, Vec<usize>)> = Vec::new();
        for (name, src) in &self.clusters {
            match (&src.topics, &src.anchors) {
                (Some(ids), None) => {
                    clusters.insert(name.clone(), ids.clone());
                }
                (None, Some(words)) => {
                    let cols: Vec<usize> = words
                        .iter()
                        .filter_map(|w| model.terms.iter().position(|t| t == w))
                        .collect();
                    if cols.is_empty() {
                        return Err(Error::Spec(format!(
                            "no anchor of cluster `{name}` is in the vocabulary"
                        )));
                    }
                    clusters.insert(name.clone(), Vec::new());
                    anchored.push((name, cols));
                }
                _ => {
                    return Err(Error::Spec(format!(
                        "cluster `{name}` must give exactly one of `topics` or `anchors`"
                    )))
                }
            }
        }
        let claimed: BTreeSet<usize> = clusters.values().flatten().copied().collect();
        for k in (0..model.k).filter(|k| !claimed.contains(k)) {
            let mut best: Option<(&str, f64)> = None;
            for (name, cols) in &anchored {
                let mass: f64 = cols.iter().map(|&w| model.phi[k][w]).sum();
                if mass >= self.min_anchor_mass && best.is_none_or(|(_, m)| mass > m) {
                    best = Some((name, mass));
                }
            }
            if let Some((name, _)) = best {
                clusters.get_mut(name).expect("anchor cluster registered").push(k);
            }
        }
        let map = ClusterMap { clusters };
        map.validate(model.k)?;
        Ok(map)
    }
}

/// Pointwise sums of member-topic curves, one series per cluster.
///
/// `trends[k]` must be the series of topic `k`.
pub fn cluster_prevalence(trends: &[TrendSeries], map: &ClusterMap) -> Result<Vec<TrendSeries>> {
    map.validate(trends.len())?;
    map.clusters
        .iter()
        .map(|(name, topics)| {
            let first = trends
                .first()
                .ok_or_else(|| Error::InvalidInput("no topic trends".into()))?;
            let mut series = TrendSeries {
                name: name.clone(),
                coefficients: vec![0.0; first.coefficients.len()],
                fitted: vec![0.0; first.grid.len()],
                slope: 0.0,
                slope_sign: 0,
                ..first.clone()
            };
            for &t in topics {
                let member = &trends[t];
                series
                    .coefficients
                    .iter_mut()
                    .zip(&member.coefficients)
                    .for_each(|(a, b)| *a += b);
                series.fitted.iter_mut().zip(&member.fitted).for_each(|(a, b)| *a += b);
            }
            series.set_slope();
            Ok(series)
        })
        .collect()
}

/// `date,day,series,prevalence` rows with prevalence clipped to `[0, 1]`.
///
/// Day index 1 is `origin`; the date column is empty without one.
pub fn trends_to_csv(series: &[TrendSeries], origin: Option<NaiveDate>) -> String {
    let mut out = String::from("date,day,series,prevalence\n");
    for s in series {
        for (day, v) in s.grid.iter().zip(s.clipped()) {
            let date = origin
                .map(|o| {
                    (o + Duration::days(day.round() as i64 - 1))
                        .format("%Y-%m-%d")
                        .to_string()
                })
                .unwrap_or_default();
            let _ = writeln!(out, "{date},{day:.3},{},{v:.6}", s.name);
        }
    }
    out
}
