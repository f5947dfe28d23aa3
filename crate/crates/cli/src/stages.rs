//! One function per subcommand. Each reads its inputs, writes its artifacts
//! and prints a one-line summary.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use trimeasure::corpus::{
    build_vocabulary, ingest_corpus, weight_counts, weight_tfidf, Corpus, StopwordPolicy, WeightMatrix,
};
use trimeasure::embedding::{classical_mds, proximity_to_dissimilarity};
use trimeasure::events::{dyad_proportions, read_events_csv, shift_statistic, CategoryMap, Period};
use trimeasure::forest::{
    evaluate, importance, proximity, train_forest_encoded, ClassReport, ConfusionMatrix, EvalMode, Forest,
    ProximityMode,
};
use trimeasure::model_selection::{grid_search, stratified_holdout, CvResult};
use trimeasure::topics::{
    cluster_prevalence, prevalence_trend, sweep, top_words, trends_to_csv, ClusterMap, ClusterMapSpec, SweepResult,
    TopicModel, TrendConfig,
};
use trimeasure::triangulate::{evaluate as adjudicate, parse_spec, MetricsBag, Verdict};

use crate::config::{input_format, CorpusInput, PipelineConfig};
use crate::error::{CliError, Result};
use crate::output::Output;

pub const INGEST: &str = "ingest.json";
pub const RF_CV_CSV: &str = "rf_cv.csv";
pub const RF_CV: &str = "rf_cv.json";
pub const FOREST: &str = "forest.json";
pub const RF_REPORT: &str = "rf_report.json";
pub const MDS_CSV: &str = "mds.csv";
pub const MDS: &str = "mds.json";
pub const SWEEP_CSV: &str = "topics_sweep.csv";
pub const SWEEP: &str = "topics_sweep.json";
pub const TOPIC_MODEL: &str = "topic_model.json";
pub const TREND_CSV: &str = "topics_trend.csv";
pub const TREND: &str = "topics_trend.json";
pub const EVENTS_CSV: &str = "events_dyads.csv";
pub const EVENTS: &str = "events.json";
pub const METRICS: &str = "metrics.json";
pub const VERDICT: &str = "verdict.json";

const TOP_TERMS: usize = 20;

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Metric-name-safe form of a class or cluster name.
pub fn metric_key(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

struct Featurized {
    corpus: Corpus,
    x: WeightMatrix,
}

fn featurize(input: &CorpusInput, policy: &StopwordPolicy, counts: bool) -> Result<Featurized> {
    let corpus = ingest_corpus(&input.path, input_format(input)?, &input.schema)
        .map_err(|e| e.context(file_name(&input.path)))?;
    let tok = corpus.tokenize(policy);
    let vocab = build_vocabulary(&tok, input.min_doc_count, input.max_doc_fraction)?;
    let x = if counts {
        weight_counts(&tok, &vocab)
    } else {
        weight_tfidf(&tok, &vocab)
    };
    Ok(Featurized { corpus, x })
}

fn news_input(cfg: &PipelineConfig) -> Result<&CorpusInput> {
    cfg.news
        .as_ref()
        .ok_or_else(|| CliError::config("no [news] corpus configured"))
}

fn statements_input(cfg: &PipelineConfig) -> Result<&CorpusInput> {
    cfg.statements
        .as_ref()
        .ok_or_else(|| CliError::config("no [statements] corpus configured"))
}

struct Labeled {
    f: Featurized,
    classes: Vec<String>,
    y: Vec<usize>,
    train: Vec<usize>,
    test: Vec<usize>,
}

fn labeled_news(cfg: &PipelineConfig, seed: u64) -> Result<Labeled> {
    let f = featurize(news_input(cfg)?, &cfg.stopword_policy()?, false)?;
    let labels = f.corpus.labels()?;
    let classes = f.corpus.classes();
    let y: Vec<usize> = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label among classes"))
        .collect();
    let frac = cfg.forest.holdout_fraction;
    let (train, test) = if frac == 0.0 {
        ((0..y.len()).collect(), Vec::new())
    } else {
        stratified_holdout(&y, &classes, frac, seed)?
    };
    Ok(Labeled {
        f,
        classes,
        y,
        train,
        test,
    })
}

fn pick<T: Clone>(v: &[T], rows: &[usize]) -> Vec<T> {
    rows.iter().map(|&r| v[r].clone()).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub role: String,
    pub file: String,
    pub documents: usize,
    pub classes: BTreeMap<String, usize>,
    pub first_date: Option<NaiveDate>,
    pub last_date: Option<NaiveDate>,
    pub vocabulary: usize,
}

pub fn ingest(cfg: &PipelineConfig, out: &mut Output) -> Result<()> {
    let policy = cfg.stopword_policy()?;
    let mut summaries = Vec::new();
    for (role, input, counts) in [("news", &cfg.news, false), ("statements", &cfg.statements, true)] {
        let Some(input) = input else { continue };
        let f = featurize(input, &policy, counts)?;
        let mut classes = BTreeMap::new();
        for d in f.corpus.documents() {
            if let Some(l) = &d.label {
                *classes.entry(l.clone()).or_insert(0) += 1;
            }
        }
        let dates: Vec<NaiveDate> = f.corpus.documents().iter().filter_map(|d| d.date).collect();
        summaries.push(CorpusSummary {
            role: role.to_string(),
            file: file_name(&input.path),
            documents: f.corpus.len(),
            classes,
            first_date: dates.iter().min().copied(),
            last_date: dates.iter().max().copied(),
            vocabulary: f.x.n_cols(),
        });
    }
    if summaries.is_empty() {
        return Err(CliError::config(
            "nothing to ingest: configure [news] and/or [statements]",
        ));
    }
    for s in &summaries {
        println!("ingest: {} {} documents, {} terms", s.role, s.documents, s.vocabulary);
    }
    out.write_json(INGEST, "ingest", &summaries)
}

pub fn rf_cv(cfg: &PipelineConfig, out: &mut Output) -> Result<()> {
    let seed = cfg.require_seed("rf-cv")?;
    let data = labeled_news(cfg, seed)?;
    let x = data.f.x.select_rows(&data.train);
    let mut base = cfg.forest.forest_config(seed);
    if let Some(n) = cfg.cv.n_trees {
        base.n_trees = n;
    }
    let result = grid_search(
        &x,
        &data.classes,
        &pick(&data.y, &data.train),
        &cfg.grid(),
        cfg.cv.folds,
        &base,
        cfg.cv.criterion,
    )?;
    let chosen = result.chosen_point();
    println!(
        "rf-cv: {} grid points x {} folds, chose mtry={} nodesize={}",
        result.points.len(),
        result.k,
        chosen.mtry,
        chosen.nodesize
    );
    out.write_csv(RF_CV_CSV, "rf-cv", &result.to_csv())?;
    out.write_json(RF_CV, "rf-cv", &result)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RfReport {
    pub file: String,
    pub params_from: String,
    pub mtry: usize,
    pub nodesize: usize,
    pub n_trees: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub report: ClassReport,
    pub confusion: ConfusionMatrix,
    pub oob_error: Option<f64>,
    pub top_terms: Vec<(String, f64)>,
}

pub fn rf_train(cfg: &PipelineConfig, out: &mut Output) -> Result<()> {
    let seed = cfg.require_seed("rf-train")?;
    let data = labeled_news(cfg, seed)?;
    let mut fc = cfg.forest.forest_config(seed);
    let mut params_from = "config".to_string();
    if cfg.forest.use_cv_selection {
        if let Some(cv) = out.read_json::<CvResult>(RF_CV)? {
            let p = cv.chosen_point();
            (fc.mtry, fc.nodesize) = (p.mtry, p.nodesize);
            params_from = "rf-cv".to_string();
        }
    }
    let train_y = pick(&data.y, &data.train);
    let train_x = data.f.x.select_rows(&data.train);
    let forest = train_forest_encoded(&train_x, &data.classes, &train_y, &fc)?;
    let (confusion, report) = if data.test.is_empty() {
        let truth: Vec<&str> = train_y.iter().map(|&c| data.classes[c].as_str()).collect();
        evaluate(&forest, &train_x, &truth, EvalMode::Oob)?
    } else {
        let truth: Vec<&str> = data.test.iter().map(|&r| data.classes[data.y[r]].as_str()).collect();
        evaluate(&forest, &data.f.x.select_rows(&data.test), &truth, EvalMode::Holdout)?
    };
    let ranking = importance(&forest);
    let mut imp = String::from("term,mean_decrease_gini\n");
    for (t, v) in &ranking.entries {
        imp.push_str(&format!("{t},{v:.9}\n"));
    }
    let rf = RfReport {
        file: file_name(&news_input(cfg)?.path),
        params_from,
        mtry: fc.mtry,
        nodesize: fc.nodesize,
        n_trees: fc.n_trees,
        train_rows: data.train.len(),
        test_rows: data.test.len(),
        oob_error: forest.oob_error(),
        top_terms: ranking.entries.iter().take(TOP_TERMS).cloned().collect(),
        report,
        confusion,
    };
    println!(
        "rf-train: {} trees, mtry={} nodesize={}, balanced accuracy {:.3}",
        fc.n_trees, fc.mtry, fc.nodesize, rf.report.balanced_accuracy
    );
    out.write_json(FOREST, "rf-train", &forest)?;
    out.write_csv("rf_class_report.csv", "rf-train", &rf.report.to_csv())?;
    out.write_csv("rf_confusion.csv", "rf-train", &rf.confusion.to_csv())?;
    out.write_csv("rf_importance.csv", "rf-train", &imp)?;
    out.write_json(RF_REPORT, "rf-train", &rf)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdsReport {
    pub dims: usize,
    pub proximity: ProximityMode,
    pub stress: f64,
    pub leading_eigenvalues: Vec<f64>,
    pub notes: Vec<String>,
    pub centroids: BTreeMap<String, Vec<f64>>,
}

pub fn mds(cfg: &PipelineConfig, out: &mut Output) -> Result<()> {
    let forest: Forest = out.read_json(FOREST)?.ok_or_else(|| {
        CliError::config(format!(
            "{} not found in the output directory; run rf-train first",
            FOREST
        ))
    })?;
    let f = featurize(news_input(cfg)?, &cfg.stopword_policy()?, false)?;
    if f.x.cols() != forest.features.as_slice() {
        return Err(trimeasure::Error::InvalidInput(
            "news features differ from the trained forest's; rerun rf-train".into(),
        )
        .into());
    }
    let p = proximity(&forest, &f.x, cfg.mds.proximity)?;
    let e = classical_mds(&proximity_to_dissimilarity(&p), cfg.mds.dims)?;
    let labels: Vec<String> = f
        .corpus
        .documents()
        .iter()
        .map(|d| d.label.clone().unwrap_or_default())
        .collect();
    let mut sums: BTreeMap<String, (Vec<f64>, usize)> = BTreeMap::new();
    for (row, label) in e.coordinates.iter().zip(&labels) {
        let entry = sums.entry(label.clone()).or_insert_with(|| (vec![0.0; e.dims()], 0));
        entry.0.iter_mut().zip(row).for_each(|(s, v)| *s += v);
        entry.1 += 1;
    }
    let centroids = sums
        .into_iter()
        .map(|(k, (s, n))| (k, s.into_iter().map(|v| v / n as f64).collect()))
        .collect();
    let report = MdsReport {
        dims: e.dims(),
        proximity: cfg.mds.proximity,
        stress: e.stress,
        leading_eigenvalues: e.eigenvalues.iter().take(10).copied().collect(),
        notes: e.notes.clone(),
        centroids,
    };
    println!(
        "mds: {} points in {} dimensions, stress {:.3}",
        e.ids.len(),
        e.dims(),
        e.stress
    );
    out.write_csv(MDS_CSV, "mds", &e.to_csv(Some(&labels)))?;
    out.write_json(MDS, "mds", &report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub file: String,
    pub dropped_empty_documents: Vec<String>,
    pub selected_k: usize,
    pub sweep: SweepResult,
}

/// Count matrix of the statements without documents left empty by the
/// vocabulary filter, plus the ids of the dropped ones.
fn statement_counts(cfg: &PipelineConfig) -> Result<(Featurized, Vec<String>)> {
    let f = featurize(statements_input(cfg)?, &cfg.stopword_policy()?, true)?;
    let sums = f.x.row_sums();
    let keep: Vec<usize> = (0..sums.len()).filter(|&i| sums[i] > 0.0).collect();
    let dropped: Vec<String> = (0..sums.len())
        .filter(|&i| sums[i] == 0.0)
        .map(|i| f.x.rows()[i].clone())
        .collect();
    if dropped.is_empty() {
        return Ok((f, dropped));
    }
    let corpus = f.corpus.subset(&keep)?;
    let x = f.x.select_rows(&keep);
    Ok((Featurized { corpus, x }, dropped))
}

pub fn topics_sweep(cfg: &PipelineConfig, out: &mut Output) -> Result<()> {
    let seed = cfg.require_seed("topics-sweep")?;
    let (f, dropped) = statement_counts(cfg)?;
    let (result, model) = sweep(&f.x, &cfg.topics.sweep_config(seed))?;
    let mut words = String::from("topic,rank,term\n");
    for t in 0..model.k {
        for (rank, term) in top_words(&model, t, cfg.topics.top_m)?.into_iter().enumerate() {
            words.push_str(&format!("{t},{},{term}\n", rank + 1));
        }
    }
    println!(
        "topics-sweep: {} fits, selected k={} run={}",
        result.entries.len(),
        model.k,
        result.selected_entry().run
    );
    let report = SweepReport {
        file: file_name(&statements_input(cfg)?.path),
        dropped_empty_documents: dropped,
        selected_k: model.k,
        sweep: result,
    };
    out.write_csv(SWEEP_CSV, "topics-sweep", &report.sweep.to_csv())?;
    out.write_csv("topics_top_words.csv", "topics-sweep", &words)?;
    out.write_json(TOPIC_MODEL, "topics-sweep", &model)?;
    out.write_json(SWEEP, "topics-sweep", &report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub name: String,
    pub cluster: bool,
    pub slope: f64,
    pub slope_sign: i8,
    /// Fitted prevalence at the window ends.
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrendReport {
    pub origin: NaiveDate,
    pub window: (NaiveDate, NaiveDate),
    pub clusters: BTreeMap<String, Vec<usize>>,
    pub series: Vec<SeriesSummary>,
}

fn day_of(origin: NaiveDate, date: NaiveDate) -> f64 {
    ((date - origin).num_days() + 1) as f64
}

fn date_of(origin: NaiveDate, day: f64) -> NaiveDate {
    origin + Duration::days(day.round() as i64 - 1)
}

pub fn topics_trend(cfg: &PipelineConfig, out: &mut Output) -> Result<()> {
    let model: TopicModel = out.read_json(TOPIC_MODEL)?.ok_or_else(|| {
        CliError::config(format!(
            "{TOPIC_MODEL} not found in the output directory; run topics-sweep first"
        ))
    })?;
    let (f, _) = statement_counts(cfg)?;
    let origin = f
        .corpus
        .oldest_date()
        .ok_or_else(|| trimeasure::Error::InvalidInput("statements need dates for trends".into()))?;
    let day_by_id: BTreeMap<&str, u32> = f
        .corpus
        .documents()
        .iter()
        .zip(f.corpus.day_index().expect("dated corpus"))
        .map(|(d, &t)| (d.id.as_str(), t))
        .collect();
    let days: Vec<u32> = model
        .doc_ids
        .iter()
        .map(|id| {
            day_by_id.get(id.as_str()).copied().ok_or_else(|| {
                trimeasure::Error::InvalidInput(format!("topic model document `{id}` is not in the statements corpus"))
            })
        })
        .collect::<std::result::Result<_, _>>()?;
    let window = match (cfg.trend.window_start, cfg.trend.window_end) {
        (None, None) => None,
        (a, b) => Some((
            a.map_or(f64::NEG_INFINITY, |d| day_of(origin, d)),
            b.map_or(f64::INFINITY, |d| day_of(origin, d)),
        )),
    };
    let tc = TrendConfig {
        basis: cfg.trend.basis,
        grid_points: cfg.trend.grid_points,
        window,
    };
    let topics = prevalence_trend(&model, &days, &tc)?;
    let map = match &cfg.trend.cluster_map {
        Some(p) => ClusterMapSpec::from_path(p)?.resolve(&model)?,
        None => ClusterMap {
            clusters: BTreeMap::new(),
        },
    };
    let clusters = if map.clusters.is_empty() {
        Vec::new()
    } else {
        cluster_prevalence(&topics, &map)?
    };
    let summary = |s: &trimeasure::topics::TrendSeries, cluster| SeriesSummary {
        name: s.name.clone(),
        cluster,
        slope: s.slope,
        slope_sign: s.slope_sign,
        start: s.evaluate(s.window.0),
        end: s.evaluate(s.window.1),
    };
    let win = topics.first().map_or((0.0, 0.0), |s| s.window);
    let report = TrendReport {
        origin,
        window: (date_of(origin, win.0), date_of(origin, win.1)),
        clusters: map.clusters.clone(),
        series: clusters
            .iter()
            .map(|s| summary(s, true))
            .chain(topics.iter().map(|s| summary(s, false)))
            .collect(),
    };
    for s in report.series.iter().filter(|s| s.cluster) {
        println!(
            "topics-trend: {} {:.3} -> {:.3} (slope sign {:+})",
            s.name, s.start, s.end, s.slope_sign
        );
    }
    let mut all = clusters;
    all.extend(topics);
    out.write_csv(TREND_CSV, "topics-trend", &trends_to_csv(&all, Some(origin)))?;
    out.write_json(TREND, "topics-trend", &report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventsReport {
    pub file: String,
    pub period: Period,
    pub breakpoint: NaiveDate,
    pub total: u64,
    pub deltas: BTreeMap<String, f64>,
}

pub fn events(cfg: &PipelineConfig, out: &mut Output) -> Result<()> {
    let input = cfg
        .events
        .as_ref()
        .ok_or_else(|| CliError::config("no [events] input configured"))?;
    let map = match &input.category_map {
        Some(p) => CategoryMap::from_path(p)?,
        None => CategoryMap::default(),
    };
    let records = read_events_csv(&input.path, &map).map_err(|e| e.context(file_name(&input.path)))?;
    let series = dyad_proportions(&records, input.period, &map)?;
    let deltas = map
        .categories
        .iter()
        .map(|c| Ok((c.clone(), shift_statistic(&series, input.breakpoint, c)?)))
        .collect::<trimeasure::Result<BTreeMap<_, _>>>()?;
    let report = EventsReport {
        file: file_name(&input.path),
        period: input.period,
        breakpoint: input.breakpoint,
        total: series.total(),
        deltas,
    };
    println!("events: {} events in {} periods", report.total, series.rows.len());
    out.write_csv(EVENTS_CSV, "events", &series.to_csv())?;
    out.write_json(EVENTS, "events", &report)
}

/// Collects every metric the stage artifacts in `dir` provide.
pub fn collect_metrics(dir: &Path) -> Result<MetricsBag> {
    use crate::output::read_artifact;
    let mut bag = MetricsBag::new();
    if let Some((_, rf)) = read_artifact::<RfReport>(dir, RF_REPORT)? {
        let r = &rf.report;
        for (i, c) in r.classes.iter().enumerate() {
            bag.insert(
                &format!("rf.sensitivity.{}", metric_key(c)),
                r.sensitivity[i],
                "rf",
                &rf.file,
            )?;
            bag.insert(
                &format!("rf.precision.{}", metric_key(c)),
                r.precision[i],
                "rf",
                &rf.file,
            )?;
        }
        bag.insert("rf.accuracy", Some(r.accuracy), "rf", &rf.file)?;
        bag.insert("rf.balanced_accuracy", Some(r.balanced_accuracy), "rf", &rf.file)?;
        bag.insert("rf.oob_error", rf.oob_error, "rf", &rf.file)?;
    }
    if let Some((_, cv)) = read_artifact::<CvResult>(dir, RF_CV)? {
        let p = cv.chosen_result();
        bag.insert("rf.cv_accuracy", Some(p.accuracy.mean), "rf", "news")?;
    }
    if let Some((_, t)) = read_artifact::<TrendReport>(dir, TREND)? {
        let dataset =
            read_artifact::<SweepReport>(dir, SWEEP)?.map_or_else(|| "statements".to_string(), |(_, s)| s.file);
        for s in t.series.iter().filter(|s| s.cluster) {
            bag.insert(
                &format!("topics.slope.{}", metric_key(&s.name)),
                Some(s.slope),
                "topics",
                &dataset,
            )?;
        }
    }
    if let Some((_, e)) = read_artifact::<EventsReport>(dir, EVENTS)? {
        for (c, d) in &e.deltas {
            bag.insert(&format!("events.delta.{}", metric_key(c)), Some(*d), "events", &e.file)?;
        }
    }
    Ok(bag)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub metrics: MetricsBag,
}

pub fn triangulate(
    cfg: &PipelineConfig,
    out: &mut Output,
    spec: Option<&str>,
    metrics: Option<&Path>,
) -> Result<Verdict> {
    let spec_ref = spec.unwrap_or(&cfg.triangulate.spec);
    let spec_path = Path::new(spec_ref);
    let is_builtin = trimeasure::triangulate::BUILTIN_SPECS
        .iter()
        .any(|(n, _)| *n == spec_ref);
    if !is_builtin && !spec_path.is_file() {
        return Err(CliError::missing_file("hypothesis spec", spec_path));
    }
    let spec = parse_spec(spec_path)?;
    let mut bag = collect_metrics(out.dir())?;
    if let Some(extra) = metrics.or(cfg.triangulate.metrics.as_deref()) {
        let text = std::fs::read_to_string(extra).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::missing_file("metrics file", extra),
            _ => CliError::io(extra, e),
        })?;
        for (name, m) in MetricsBag::from_json(&text)?.metrics {
            bag.metrics.insert(name, m);
        }
    }
    let verdict = adjudicate(&spec, &bag);
    println!("triangulate: {} ({} signals)", verdict.outcome, verdict.signals);
    out.write_json(METRICS, "triangulate", &bag)?;
    let report = VerdictReport {
        verdict: verdict.clone(),
        metrics: bag,
    };
    out.write_json(VERDICT, "triangulate", &report)?;
    Ok(verdict)
}
