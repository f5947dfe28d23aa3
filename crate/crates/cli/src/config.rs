//! Pipeline configuration: one toml file describing inputs and every stage.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use trimeasure::corpus::{InputFormat, Schema, StopwordPolicy};
use trimeasure::events::Period;
use trimeasure::forest::{ForestConfig, ProximityMode};
use trimeasure::model_selection::{Criterion, Grid};
use trimeasure::topics::{Basis, LdaConfig, SweepConfig};
use trimeasure::triangulate::BUILTIN_SPECS;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub stopwords: StopwordConfig,
    /// Labeled documents for the classifier.
    pub news: Option<CorpusInput>,
    pub forest: ForestSection,
    pub cv: CvSection,
    pub mds: MdsSection,
    /// Dated documents for the topic model.
    pub statements: Option<CorpusInput>,
    pub topics: TopicsSection,
    pub trend: TrendSection,
    pub events: Option<EventsInput>,
    pub triangulate: TriangulateSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopwordConfig {
    pub preset: Option<String>,
    /// Extra preset files, one term per line; all are activated.
    pub preset_files: Vec<PathBuf>,
    pub custom: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusInput {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Option<InputFormat>,
    #[serde(default)]
    pub schema: Schema,
    #[serde(default = "default_min_doc_count")]
    pub min_doc_count: usize,
    #[serde(default = "default_max_doc_fraction")]
    pub max_doc_fraction: f64,
}

fn default_min_doc_count() -> usize {
    2
}

fn default_max_doc_fraction() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestSection {
    pub n_trees: usize,
    pub mtry: usize,
    pub nodesize: usize,
    pub per_class_sample: usize,
    /// Share of each class held out for evaluation; 0 scores out-of-bag.
    pub holdout_fraction: f64,
    /// Train with the grid point chosen by `rf-cv` when its table exists.
    pub use_cv_selection: bool,
}

impl Default for ForestSection {
    fn default() -> Self {
        let f = ForestConfig::default();
        Self {
            n_trees: f.n_trees,
            mtry: f.mtry,
            nodesize: f.nodesize,
            per_class_sample: f.per_class_sample,
            holdout_fraction: 0.3,
            use_cv_selection: true,
        }
    }
}

impl ForestSection {
    pub fn forest_config(&self, seed: u64) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            mtry: self.mtry,
            nodesize: self.nodesize,
            per_class_sample: self.per_class_sample,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSection {
    pub enabled: bool,
    pub folds: usize,
    pub mtry_values: Vec<usize>,
    pub nodesize_values: Vec<usize>,
    pub criterion: Criterion,
    /// Trees per fold forest; the forest section's count when unset.
    pub n_trees: Option<usize>,
}

impl Default for CvSection {
    fn default() -> Self {
        let g = Grid::standard();
        Self {
            enabled: true,
            folds: 5,
            mtry_values: g.mtry_values,
            nodesize_values: g.nodesize_values,
            criterion: Criterion::default(),
            n_trees: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdsSection {
    pub dims: usize,
    pub proximity: ProximityMode,
}

impl Default for MdsSection {
    fn default() -> Self {
        Self {
            dims: 2,
            proximity: ProximityMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicsSection {
    pub k_values: Vec<usize>,
    pub runs_per_k: usize,
    pub coherence_weight: f64,
    pub top_m: usize,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
}

impl Default for TopicsSection {
    fn default() -> Self {
        let s = SweepConfig::default();
        Self {
            k_values: s.k_values,
            runs_per_k: s.runs_per_k,
            coherence_weight: s.coherence_weight,
            top_m: s.top_m,
            alpha: s.lda.alpha,
            beta: s.lda.beta,
            iterations: s.lda.iterations,
            burn_in: s.lda.burn_in,
        }
    }
}

impl TopicsSection {
    pub fn sweep_config(&self, seed: u64) -> SweepConfig {
        SweepConfig {
            k_values: self.k_values.clone(),
            runs_per_k: self.runs_per_k,
            coherence_weight: self.coherence_weight,
            top_m: self.top_m,
            lda: LdaConfig {
                k: self.k_values.first().copied().unwrap_or(1),
                alpha: self.alpha,
                beta: self.beta,
                iterations: self.iterations,
                burn_in: self.burn_in,
                seed,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrendSection {
    pub basis: Basis,
    pub grid_points: usize,
    /// Slope window; defaults to the full date range.
    #[serde(deserialize_with = "date::optional")]
    pub window_start: Option<NaiveDate>,
    #[serde(deserialize_with = "date::optional")]
    pub window_end: Option<NaiveDate>,
    /// Topic clusters (explicit ids or anchor words), toml or json.
    pub cluster_map: Option<PathBuf>,
}

impl Default for TrendSection {
    fn default() -> Self {
        Self {
            basis: Basis::default(),
            grid_points: 100,
            window_start: None,
            window_end: None,
            cluster_map: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventsInput {
    pub path: PathBuf,
    #[serde(default)]
    pub category_map: Option<PathBuf>,
    #[serde(default)]
    pub period: Period,
    #[serde(deserialize_with = "date::required")]
    pub breakpoint: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriangulateSection {
    /// Built-in spec name or path to a toml/json spec.
    pub spec: String,
    /// Extra metrics (json bag) merged with the stage outputs.
    pub metrics: Option<PathBuf>,
}

impl Default for TriangulateSection {
    fn default() -> Self {
        Self {
            spec: BUILTIN_SPECS[0].0.to_string(),
            metrics: None,
        }
    }
}

/// Dates may be toml dates (`2011-01-01`) or strings (`"2011-01-01"`).
mod date {
    use chrono::NaiveDate;
    use serde::{de::Error, Deserialize, Deserializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Toml(toml::value::Datetime),
        Text(String),
    }

    pub fn required<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDate, D::Error> {
        let text = match Repr::deserialize(d)? {
            Repr::Toml(dt) => match (dt.date, dt.time) {
                (Some(date), None) => date.to_string(),
                _ => return Err(D::Error::custom(format!("expected a date without time, got {dt}"))),
            },
            Repr::Text(s) => s,
        };
        NaiveDate::parse_from_str(&text, "%Y-%m-%d").map_err(|e| D::Error::custom(format!("date `{text}`: {e}")))
    }

    pub fn optional<'de, D: Deserializer<'de>>(d: D) -> Result<Option<NaiveDate>, D::Error> {
        required(d).map(Some)
    }
}

fn is_builtin_spec(name: &str) -> bool {
    BUILTIN_SPECS.iter().any(|(n, _)| *n == name)
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::missing_file("config file", path),
            _ => CliError::io(path, e),
        })?;
        let mut cfg: PipelineConfig = toml::from_str(&text).map_err(|e| CliError::Config {
            message: format!("{}: {e}", path.display()),
            path: Some(path.to_path_buf()),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    /// Makes every relative path relative to `base` instead.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.stopwords.preset_files.iter_mut().for_each(fix);
        if let Some(out) = &mut self.out {
            fix(out);
        }
        for input in [&mut self.news, &mut self.statements].into_iter().flatten() {
            fix(&mut input.path);
        }
        if let Some(p) = &mut self.trend.cluster_map {
            fix(p);
        }
        if let Some(e) = &mut self.events {
            fix(&mut e.path);
            if let Some(p) = &mut e.category_map {
                fix(p);
            }
        }
        if let Some(p) = &mut self.triangulate.metrics {
            fix(p);
        }
        if !is_builtin_spec(&self.triangulate.spec) && Path::new(&self.triangulate.spec).is_relative() {
            self.triangulate.spec = base.join(&self.triangulate.spec).display().to_string();
        }
    }

    /// Checks that every referenced file exists.
    pub fn check_files(&self) -> Result<()> {
        let mut files: Vec<(&str, &Path)> = Vec::new();
        files.extend(
            self.stopwords
                .preset_files
                .iter()
                .map(|p| ("stopword preset file", p.as_path())),
        );
        if let Some(n) = &self.news {
            files.push(("news corpus", &n.path));
        }
        if let Some(s) = &self.statements {
            files.push(("statements corpus", &s.path));
        }
        if let Some(p) = &self.trend.cluster_map {
            files.push(("cluster map", p));
        }
        if let Some(e) = &self.events {
            files.push(("events file", &e.path));
            if let Some(p) = &e.category_map {
                files.push(("category map", p));
            }
        }
        if let Some(p) = &self.triangulate.metrics {
            files.push(("metrics file", p));
        }
        if !is_builtin_spec(&self.triangulate.spec) {
            files.push(("hypothesis spec", Path::new(&self.triangulate.spec)));
        }
        match files.into_iter().find(|(_, p)| !p.is_file()) {
            Some((what, p)) => Err(CliError::missing_file(what, p)),
            None => Ok(()),
        }
    }

    pub fn require_seed(&self, command: &str) -> Result<u64> {
        self.seed.ok_or_else(|| {
            CliError::config(format!(
                "`{command}` is stochastic and needs a seed (--seed or `seed` in the config)"
            ))
        })
    }

    pub fn stopword_policy(&self) -> Result<StopwordPolicy> {
        let mut policy = StopwordPolicy::english();
        for file in &self.stopwords.preset_files {
            let name = policy.register_preset_file(file)?;
            policy.activate(&name)?;
        }
        if let Some(p) = &self.stopwords.preset {
            policy.activate(p)?;
        }
        policy.add_custom(&self.stopwords.custom);
        Ok(policy)
    }

    /// Short digest of everything that affects results.
    ///
    /// The output directory is left out, as are input paths above the
    /// file name, so the same inputs give the same hash wherever they live.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let strip = |p: &mut PathBuf| {
            if let Some(name) = p.file_name() {
                *p = PathBuf::from(name);
            }
        };
        c.stopwords.preset_files.iter_mut().for_each(strip);
        for input in [&mut c.news, &mut c.statements].into_iter().flatten() {
            strip(&mut input.path);
        }
        if let Some(p) = &mut c.trend.cluster_map {
            strip(p);
        }
        if let Some(e) = &mut c.events {
            strip(&mut e.path);
            if let Some(p) = &mut e.category_map {
                strip(p);
            }
        }
        if let Some(p) = &mut c.triangulate.metrics {
            strip(p);
        }
        if !is_builtin_spec(&c.triangulate.spec) {
            let mut p = PathBuf::from(&c.triangulate.spec);
            strip(&mut p);
            c.triangulate.spec = p.display().to_string();
        }
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }

    pub fn grid(&self) -> Grid {
        Grid {
            mtry_values: self.cv.mtry_values.clone(),
            nodesize_values: self.cv.nodesize_values.clone(),
        }
    }
}

/// Reads the format from the config or the file extension.
pub fn input_format(input: &CorpusInput) -> Result<InputFormat> {
    input
        .format
        .or_else(|| InputFormat::from_path(&input.path))
        .ok_or_else(|| CliError::Config {
            message: format!("cannot tell the format of {}; set `format`", input.path.display()),
            path: Some(input.path.clone()),
        })
}
