//! Declarative hypothesis specs and the verdict engine.
//!
//! A hypothesis is a set of predicates over named scalar metrics. Evaluating
//! a spec against a [`MetricsBag`] yields one [`Outcome`]: a single supported
//! hypothesis, a contested result when several hold, an indeterminate result,
//! or `data_too_thin` when too few of the referenced metrics are present.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Built-in spec names and their sources.
pub const BUILTIN_SPECS: &[(&str, &str)] = &[("aqap_h1h2", include_str!("../specs/aqap_h1h2.toml"))];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub value: Option<f64>,
    /// Producing stage, e.g. `rf` or `topics`.
    pub source: String,
    pub dataset: String,
}

/// Named scalar metrics with provenance. Missing values are explicit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsBag {
    pub metrics: BTreeMap<String, Metric>,
}

impl MetricsBag {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a metric; `None` or a non-finite value is stored as missing.
    pub fn insert(&mut self, name: &str, value: Option<f64>, source: &str, dataset: &str) -> Result<()> {
        check_metric_name(name)?;
        if self.metrics.contains_key(name) {
            return Err(Error::InvalidInput(format!("metric `{name}` is already in the bag")));
        }
        self.metrics.insert(
            name.to_string(),
            Metric {
                value: value.filter(|v| v.is_finite()),
                source: source.to_string(),
                dataset: dataset.to_string(),
            },
        );
        Ok(())
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).and_then(|m| m.value)
    }

    pub fn len(&self) -> usize {
        self.metrics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metrics.is_empty()
    }

    /// Reads a serialized bag, or a flat `{"name": value}` object whose
    /// entries get source `external`.
    pub fn from_json(text: &str) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::InvalidInput(format!("metrics bag: {e}"));
        let value: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
        if value.get("metrics").is_some_and(|m| m.is_object()) {
            let bag: Self = serde_json::from_value(value).map_err(bad)?;
            for name in bag.metrics.keys() {
                check_metric_name(name)?;
            }
            return Ok(bag);
        }
        let flat: BTreeMap<String, Option<f64>> = serde_json::from_value(value).map_err(bad)?;
        let mut bag = Self::new();
        for (name, v) in flat {
            bag.insert(&name, v, "external", "metrics file")?;
        }
        Ok(bag)
    }
}

fn check_metric_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .split('.')
            .all(|seg| !seg.is_empty() && seg.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'));
    if ok {
        Ok(())
    } else {
        Err(Error::Spec(format!("malformed metric name `{name}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Comparator {
    Lt,
    Gt,
    Le,
    Ge,
    /// Holds when the value has the sign of the threshold (zero for zero).
    Sign,
}

impl TryFrom<String> for Comparator {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        Ok(match s.as_str() {
            "<" => Comparator::Lt,
            ">" => Comparator::Gt,
            "<=" | "≤" => Comparator::Le,
            ">=" | "≥" => Comparator::Ge,
            "sign" => Comparator::Sign,
            other => return Err(format!("unknown comparator `{other}`")),
        })
    }
}

impl From<Comparator> for String {
    fn from(c: Comparator) -> String {
        c.to_string()
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Lt => "<",
            Comparator::Gt => ">",
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
            Comparator::Sign => "sign",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Predicate {
    pub metric: String,
    pub op: Comparator,
    pub threshold: f64,
}

impl Predicate {
    /// Signed distance from the threshold, positive on the satisfying side.
    pub fn margin(&self, value: f64) -> f64 {
        match self.op {
            Comparator::Gt | Comparator::Ge => value - self.threshold,
            Comparator::Lt | Comparator::Le => self.threshold - value,
            Comparator::Sign if self.threshold == 0.0 => -value.abs(),
            Comparator::Sign => self.threshold.signum() * value,
        }
    }

    pub fn holds(&self, value: f64) -> bool {
        let m = self.margin(value);
        match self.op {
            Comparator::Ge | Comparator::Le => m >= 0.0,
            Comparator::Sign if self.threshold == 0.0 => m >= 0.0,
            _ => m > 0.0,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.op == Comparator::Sign {
            let s = match self.threshold.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => "+",
                Some(std::cmp::Ordering::Less) => "-",
                _ => "0",
            };
            write!(f, "sign({}) = {s}", self.metric)
        } else {
            write!(f, "{} {} {}", self.metric, self.op, self.threshold)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hypothesis {
    pub name: String,
    #[serde(default)]
    pub label: String,
    pub predicates: Vec<Predicate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisSpec {
    #[serde(default)]
    pub name: String,
    /// Present referenced metrics needed before any adjudication.
    pub min_signals: usize,
    pub hypotheses: Vec<Hypothesis>,
}

impl HypothesisSpec {
    pub fn validate(&self) -> Result<()> {
        if self.hypotheses.len() < 2 {
            return Err(Error::Spec(format!(
                "a spec needs at least two rival hypotheses, found {}",
                self.hypotheses.len()
            )));
        }
        let mut names = BTreeSet::new();
        for h in &self.hypotheses {
            if !names.insert(h.name.as_str()) {
                return Err(Error::Spec(format!("duplicate hypothesis name `{}`", h.name)));
            }
            if h.predicates.is_empty() {
                return Err(Error::Spec(format!("hypothesis `{}` has no predicates", h.name)));
            }
            for p in &h.predicates {
                check_metric_name(&p.metric)?;
                if !p.threshold.is_finite() {
                    return Err(Error::Spec(format!("threshold of `{}` is not finite", p.metric)));
                }
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let (_, text) = BUILTIN_SPECS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Spec(format!("no built-in spec named `{name}`")))?;
        Self::from_toml(text)
    }

    /// Every distinct metric referenced by a predicate.
    pub fn metrics(&self) -> BTreeSet<&str> {
        self.hypotheses
            .iter()
            .flat_map(|h| h.predicates.iter().map(|p| p.metric.as_str()))
            .collect()
    }

    pub fn n_predicates(&self) -> usize {
        self.hypotheses.iter().map(|h| h.predicates.len()).sum()
    }
}

/// Reads a toml or json spec (json by extension), or a built-in by name.
pub fn parse_spec(path: &Path) -> Result<HypothesisSpec> {
    if !path.exists() && BUILTIN_SPECS.iter().any(|(n, _)| Path::new(n) == path) {
        return HypothesisSpec::builtin(&path.to_string_lossy());
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let spec = if path.extension().is_some_and(|e| e == "json") {
        HypothesisSpec::from_json(&text)
    } else {
        HypothesisSpec::from_toml(&text)
    };
    spec.map_err(|e| e.context(path.display().to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Satisfied,
    Violated,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateResult {
    pub predicate: Predicate,
    pub value: Option<f64>,
    pub margin: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub name: String,
    pub label: String,
    pub satisfied: usize,
    pub violated: usize,
    pub missing: usize,
    pub predicates: Vec<PredicateResult>,
}

impl HypothesisResult {
    pub fn fully_satisfied(&self) -> bool {
        self.violated == 0 && self.missing == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Supported(String),
    Contested,
    Indeterminate,
    DataTooThin,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Supported(h) => write!(f, "supported({h})"),
            Outcome::Contested => f.write_str("contested"),
            Outcome::Indeterminate => f.write_str("indeterminate"),
            Outcome::DataTooThin => f.write_str("data_too_thin"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub spec: String,
    pub min_signals: usize,
    /// Referenced metrics present in the bag.
    pub signals: usize,
    pub hypotheses: Vec<HypothesisResult>,
    pub outcome: Outcome,
    pub rationale: String,
}

/// Adjudicates `spec` against `bag`.
///
/// A hypothesis is supported only when all of its predicates hold and every
/// rival has at least one violated predicate.
pub fn evaluate(spec: &HypothesisSpec, bag: &MetricsBag) -> Verdict {
    let signals = spec.metrics().iter().filter(|m| bag.value(m).is_some()).count();
    let hypotheses: Vec<HypothesisResult> = spec
        .hypotheses
        .iter()
        .map(|h| {
            let predicates: Vec<PredicateResult> = h
                .predicates
                .iter()
                .map(|p| {
                    let value = bag.value(&p.metric);
                    let status = match value {
                        None => Status::Missing,
                        Some(v) if p.holds(v) => Status::Satisfied,
                        Some(_) => Status::Violated,
                    };
                    PredicateResult {
                        predicate: p.clone(),
                        value,
                        margin: value.map(|v| p.margin(v)),
                        status,
                    }
                })
                .collect();
            let count = |s| predicates.iter().filter(|r| r.status == s).count();
            HypothesisResult {
                name: h.name.clone(),
                label: h.label.clone(),
                satisfied: count(Status::Satisfied),
                violated: count(Status::Violated),
                missing: count(Status::Missing),
                predicates,
            }
        })
        .collect();
    let holding: Vec<&HypothesisResult> = hypotheses.iter().filter(|h| h.fully_satisfied()).collect();
    let outcome = if signals < spec.min_signals {
        Outcome::DataTooThin
    } else if holding.len() >= 2 {
        Outcome::Contested
    } else if let [winner] = holding.as_slice() {
        let rivals_fail = hypotheses
            .iter()
            .filter(|h| h.name != winner.name)
            .all(|h| h.violated > 0);
        if rivals_fail {
            Outcome::Supported(winner.name.clone())
        } else {
            Outcome::Indeterminate
        }
    } else {
        Outcome::Indeterminate
    };
    let rationale = rationale(spec, signals, &hypotheses, &outcome);
    Verdict {
        spec: spec.name.clone(),
        min_signals: spec.min_signals,
        signals,
        hypotheses,
        outcome,
        rationale,
    }
}

fn rationale(spec: &HypothesisSpec, signals: usize, hypotheses: &[HypothesisResult], outcome: &Outcome) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{signals} of {} referenced metrics present (minimum {}).",
        spec.metrics().len(),
        spec.min_signals
    );
    for h in hypotheses {
        let title = if h.label.is_empty() {
            h.name.clone()
        } else {
            format!("{} ({})", h.name, h.label)
        };
        let _ = writeln!(
            out,
            "{title}: {} satisfied, {} violated, {} missing.",
            h.satisfied, h.violated, h.missing
        );
        for r in &h.predicates {
            let detail = match (r.value, r.margin) {
                (Some(v), Some(m)) => format!("value {v:.4}, margin {m:+.4}"),
                _ => "metric missing".to_string(),
            };
            let status = match r.status {
                Status::Satisfied => "holds",
                Status::Violated => "fails",
                Status::Missing => "n/a",
            };
            let _ = writeln!(out, "  - {} {status} ({detail})", r.predicate);
        }
    }
    let conclusion = match outcome {
        Outcome::Supported(h) => format!("Observed patterns support {h}; every rival has a failing predicate."),
        Outcome::Contested => "More than one hypothesis holds in full; the evidence does not discriminate.".into(),
        Outcome::Indeterminate => "No hypothesis holds in full against failing rivals.".into(),
        Outcome::DataTooThin => "The data regime remains too thin to support inference.".into(),
    };
    let _ = writeln!(out, "Verdict: {outcome}. {conclusion}");
    out
}
