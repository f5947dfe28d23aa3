//! `trimeasure`: run the measurement stages from a pipeline config.

mod config;
mod error;
mod output;
mod report;
mod simulate;
mod stages;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use config::PipelineConfig;
use error::{CliError, Result};
use output::Output;

#[derive(Parser)]
#[command(
    name = "trimeasure",
    version,
    about = "Triangulated measurement of hard-to-observe actors from text and event data"
)]
struct Cli {
    /// Pipeline config (toml).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every stochastic stage; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, env = "TRIMEASURE_OUT")]
    out: Option<PathBuf>,
    /// Stopword preset to activate on top of the English list.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read the corpora and summarize them.
    Ingest,
    /// Train the forest and score it on a holdout or out-of-bag.
    RfTrain,
    /// Grid search over mtry and nodesize with stratified k-fold CV.
    RfCv,
    /// Embed forest proximities with classical MDS.
    Mds,
    /// Fit topic models over the configured K values and keep the best.
    TopicsSweep,
    /// Regress topic prevalence on time.
    TopicsTrend,
    /// Dyad proportions per period and shifts at the breakpoint.
    Events,
    /// Adjudicate the hypotheses against every metric produced so far.
    Triangulate {
        /// Built-in spec name or spec file; overrides the config.
        #[arg(long)]
        spec: Option<String>,
        /// Extra metrics (json) merged with the stage outputs.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Write a synthetic study with planted truth and its pipeline config.
    Simulate {
        /// Vocabulary overlap of the convergent class pair, in [0, 1].
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        #[arg(long, default_value_t = 80)]
        statements_per_period: usize,
    },
    /// Every stage the config has inputs for, then the report.
    Pipeline,
    /// Render summary.md from the artifacts in the output directory.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::RfTrain => "rf-train",
            Command::RfCv => "rf-cv",
            Command::Mds => "mds",
            Command::TopicsSweep => "topics-sweep",
            Command::TopicsTrend => "topics-trend",
            Command::Events => "events",
            Command::Triangulate { .. } => "triangulate",
            Command::Simulate { .. } => "simulate",
            Command::Pipeline => "pipeline",
            Command::Report => "report",
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config(format!("`{}` needs --config", cli.command.name())))?;
    let mut cfg = PipelineConfig::load(path)?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.preset.is_some() {
        cfg.stopwords.preset = cli.preset.clone();
    }
    cfg.check_files()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&PipelineConfig>) -> Result<PathBuf> {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.out.clone()))
        .ok_or_else(|| CliError::config("no output directory: pass --out or set `out` in the config"))
}

fn write_report(out: &mut Output, command: &str) -> Result<()> {
    let text = report::render_report(out.dir(), command)?;
    out.write_text(report::SUMMARY, &text)?;
    println!("report: {}", out.path(report::SUMMARY).display());
    Ok(())
}

fn pipeline(cfg: &PipelineConfig, out: &mut Output) -> Result<()> {
    stages::ingest(cfg, out)?;
    if cfg.news.is_some() {
        if cfg.cv.enabled {
            stages::rf_cv(cfg, out)?;
        }
        stages::rf_train(cfg, out)?;
        stages::mds(cfg, out)?;
    }
    if cfg.statements.is_some() {
        stages::topics_sweep(cfg, out)?;
        stages::topics_trend(cfg, out)?;
    }
    if cfg.events.is_some() {
        stages::events(cfg, out)?;
    }
    stages::triangulate(cfg, out, None, None)?;
    write_report(out, "pipeline")
}

fn simulate_hash(seed: u64, opts: &simulate::SimulateOptions) -> String {
    let key = format!(
        "simulate seed={seed} gamma={} statements_per_period={}",
        opts.gamma, opts.statements_per_period
    );
    hex::encode(&Sha256::digest(key.as_bytes())[..8])
}

fn execute(cli: &Cli, slot: &mut Option<Output>) -> Result<()> {
    let open = |dir: &Path, hash: String, seed| Output::open(dir, hash, seed);
    match &cli.command {
        Command::Simulate {
            gamma,
            statements_per_period,
        } => {
            let seed = cli.seed.ok_or_else(|| CliError::config("`simulate` needs --seed"))?;
            let opts = simulate::SimulateOptions {
                gamma: *gamma,
                statements_per_period: *statements_per_period,
            };
            let dir = out_dir(cli, None)?;
            let out = slot.insert(open(&dir, simulate_hash(seed, &opts), Some(seed))?);
            simulate::simulate(seed, &opts, out)?;
            Ok(())
        }
        Command::Report => {
            let cfg = cli.config.as_ref().map(|_| load_config(cli)).transpose()?;
            let dir = out_dir(cli, cfg.as_ref())?;
            let hash = cfg.as_ref().map_or_else(|| "none".to_string(), |c| c.hash());
            let out = slot.insert(open(&dir, hash, cfg.as_ref().and_then(|c| c.seed))?);
            write_report(out, "report")
        }
        cmd => {
            let cfg = load_config(cli)?;
            let dir = out_dir(cli, Some(&cfg))?;
            let out = slot.insert(open(&dir, cfg.hash(), cfg.seed)?);
            match cmd {
                Command::Ingest => stages::ingest(&cfg, out),
                Command::RfTrain => stages::rf_train(&cfg, out),
                Command::RfCv => stages::rf_cv(&cfg, out),
                Command::Mds => stages::mds(&cfg, out),
                Command::TopicsSweep => stages::topics_sweep(&cfg, out),
                Command::TopicsTrend => stages::topics_trend(&cfg, out),
                Command::Events => stages::events(&cfg, out),
                Command::Triangulate { spec, metrics } => {
                    stages::triangulate(&cfg, out, spec.as_deref(), metrics.as_deref()).map(|_| ())
                }
                Command::Pipeline => pipeline(&cfg, out),
                Command::Simulate { .. } | Command::Report => unreachable!("handled above"),
            }
        }
    }
}

fn main() -> ExitCode {
    let started = SystemTime::now();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", CliError::config(format!("--threads: {e}")).to_json());
            return ExitCode::from(2);
        }
    }
    let mut slot = None;
    let result = execute(&cli, &mut slot);
    if let Some(out) = &mut slot {
        if let Err(e) = out.write_run_meta(cli.command.name(), rayon::current_num_threads(), started) {
            eprintln!("warning: {e}");
        }
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
