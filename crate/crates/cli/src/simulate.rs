//! Writes a synthetic study with planted ground truth and a ready pipeline
//! config that points at it.

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::NaiveDate;
use serde::Serialize;

use trimeasure::corpus::{write_corpus, InputFormat};
use trimeasure::events::write_events_csv;
use trimeasure::scenario::{
    gen_convergence_corpus, gen_drift_corpus, gen_event_stream, ConvergenceConfig, DriftConfig, EventStreamConfig,
};
use trimeasure::topics::{ClusterMapSpec, ClusterSource};

use crate::config::{CorpusInput, EventsInput, PipelineConfig};
use crate::error::{CliError, Result};
use crate::output::Output;

pub const CLASS_NAMES: [&str; 3] = ["AAS", "AQAP", "Houthi"];
const ANCHORS_PER_TOPIC: usize = 5;

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub gamma: f64,
    pub statements_per_period: usize,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            statements_per_period: 80,
        }
    }
}

#[derive(Serialize)]
struct Truth {
    seed: u64,
    news: ConvergenceConfig,
    statements: DriftConfig,
    topic_groups: Vec<String>,
    /// Period midpoint dates and planted group prevalences.
    prevalence: Vec<(NaiveDate, Vec<f64>)>,
    events: EventStreamConfig,
    breakpoint: NaiveDate,
}

fn io_err(path: PathBuf) -> impl FnOnce(trimeasure::Error) -> CliError {
    move |e| e.context(path.display().to_string()).into()
}

pub fn simulate(seed: u64, opts: &SimulateOptions, out: &mut Output) -> Result<PipelineConfig> {
    let news_cfg = ConvergenceConfig {
        class_names: CLASS_NAMES.map(String::from),
        gamma: opts.gamma,
        seed,
        ..ConvergenceConfig::default()
    };
    let news = gen_convergence_corpus(&news_cfg)?;
    let path = out.path("news.jsonl");
    write_corpus(&news, &path, InputFormat::Jsonl).map_err(io_err(path))?;

    let drift_cfg = DriftConfig {
        docs_per_period: opts.statements_per_period,
        seed,
        ..DriftConfig::default()
    };
    let drift = gen_drift_corpus(&drift_cfg)?;
    let path = out.path("statements.jsonl");
    write_corpus(&drift.corpus, &path, InputFormat::Jsonl).map_err(io_err(path))?;

    let events_cfg = EventStreamConfig {
        seed,
        ..EventStreamConfig::default()
    };
    let events = gen_event_stream(&events_cfg)?;
    let path = out.path("events.csv");
    write_events_csv(&events, &path).map_err(io_err(path))?;

    let mut clusters = BTreeMap::new();
    for g in &drift_cfg.groups {
        let anchors = drift
            .topic_groups
            .iter()
            .zip(&drift.topic_words)
            .filter(|(name, _)| *name == &g.name)
            .flat_map(|(_, words)| words.iter().take(ANCHORS_PER_TOPIC).cloned())
            .collect();
        clusters.insert(
            g.name.clone(),
            ClusterSource {
                topics: None,
                anchors: Some(anchors),
            },
        );
    }
    let spec = ClusterMapSpec {
        min_anchor_mass: 0.1,
        clusters,
    };
    out.write_csv(
        "clusters.toml",
        "simulate",
        &toml::to_string(&spec).expect("cluster map serializes"),
    )?;

    let truth = Truth {
        seed,
        prevalence: drift
            .truth
            .iter()
            .map(|(day, p)| {
                (
                    drift_cfg.start_date + chrono::Duration::days(*day as i64 - 1),
                    p.clone(),
                )
            })
            .collect(),
        topic_groups: drift.topic_groups.clone(),
        breakpoint: events_cfg.breakpoint(),
        news: news_cfg,
        statements: drift_cfg,
        events: events_cfg.clone(),
    };
    out.write_json("scenario.json", "simulate", &truth)?;

    let mut cfg = PipelineConfig {
        seed: Some(seed),
        out: Some("results".into()),
        news: Some(corpus_input("news.jsonl")),
        statements: Some(corpus_input("statements.jsonl")),
        events: Some(EventsInput {
            path: "events.csv".into(),
            category_map: None,
            period: Default::default(),
            breakpoint: events_cfg.breakpoint(),
        }),
        ..PipelineConfig::default()
    };
    cfg.cv.n_trees = Some(100);
    cfg.topics.k_values = vec![4, 5, 6];
    cfg.topics.runs_per_k = 2;
    cfg.topics.iterations = 300;
    cfg.topics.burn_in = 150;
    cfg.topics.alpha = Some(0.5);
    cfg.trend.window_start = Some(events_cfg.breakpoint());
    cfg.trend.cluster_map = Some("clusters.toml".into());
    out.write_csv(
        "pipeline.toml",
        "simulate",
        &toml::to_string(&cfg).expect("config serializes"),
    )?;
    println!(
        "simulate: {} news, {} statements, {} events in {}",
        news.len(),
        drift.corpus.len(),
        events.len(),
        out.dir().display()
    );
    Ok(cfg)
}

fn corpus_input(path: &str) -> CorpusInput {
    CorpusInput {
        path: path.into(),
        format: None,
        schema: Default::default(),
        min_doc_count: 2,
        max_doc_fraction: 1.0,
    }
}
