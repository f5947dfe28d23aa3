use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn trimeasure(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trimeasure"))
        .current_dir(dir)
        .env_remove("TRIMEASURE_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr)
        .unwrap_or_else(|_| panic!("stderr is json: {}", String::from_utf8_lossy(&out.stderr)))
}

/// Simulated inputs plus a fast news-only config.
fn news_only(dir: &Path) {
    let sim = trimeasure(dir, &["simulate", "--seed", "3", "--out", "."]);
    assert!(sim.status.success());
    fs::write(
        dir.join("rf.toml"),
        "seed = 3\nout = \"rf\"\n[news]\npath = \"news.jsonl\"\n[forest]\nn_trees = 60\n[cv]\nn_trees = 20\n",
    )
    .unwrap();
}

#[test]
fn simulated_study_supports_h1() {
    let dir = tempfile::tempdir().unwrap();
    assert!(trimeasure(dir.path(), &["simulate", "--seed", "11", "--out", "."])
        .status
        .success());
    let run = trimeasure(dir.path(), &["pipeline", "--config", "pipeline.toml"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("triangulate: supported(H1)"), "{stdout}");
    let summary = fs::read_to_string(dir.path().join("results/summary.md")).unwrap();
    assert!(summary.contains("**supported(H1)**"));
    assert!(!summary.contains("not run"));
    assert!(!dir.path().join("results/.trimeasure.lock").exists());
}

#[test]
fn missing_spec_is_a_config_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "[triangulate]\nspec = \"specs/nope.toml\"\n",
    )
    .unwrap();
    let run = trimeasure(dir.path(), &["triangulate", "--config", "run.toml", "--out", "o"]);
    assert_eq!(run.status.code(), Some(2));
    let err = stderr_json(&run);
    assert_eq!(err["error"]["kind"], "config");
    assert_eq!(err["error"]["exit_code"], 2);
    assert!(err["error"]["path"].as_str().unwrap().ends_with("specs/nope.toml"));

    let run = trimeasure(
        dir.path(),
        &[
            "triangulate",
            "--config",
            "run.toml",
            "--out",
            "o",
            "--spec",
            "aqap_h1h2",
        ],
    );
    assert_eq!(run.status.code(), Some(2), "the config still names a missing file");
}

#[test]
fn spec_override_and_thin_data() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "").unwrap();
    let run = trimeasure(dir.path(), &["triangulate", "--config", "run.toml", "--out", "o"]);
    assert!(run.status.success());
    assert!(String::from_utf8_lossy(&run.stdout).contains("data_too_thin"));
    let run = trimeasure(
        dir.path(),
        &[
            "triangulate",
            "--config",
            "run.toml",
            "--out",
            "o",
            "--spec",
            "missing.toml",
        ],
    );
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr_json(&run)["error"]["path"]
        .as_str()
        .unwrap()
        .ends_with("missing.toml"));
}

#[test]
fn extra_metrics_feed_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "").unwrap();
    fs::write(
        dir.path().join("published.json"),
        r#"{"rf.sensitivity.AAS": 0.42, "rf.sensitivity.AQAP": 0.86, "rf.sensitivity.Houthi": 0.98,
            "topics.slope.local": 0.001, "topics.slope.transnational": -0.001, "events.delta.sectarian": 0.1}"#,
    )
    .unwrap();
    let run = trimeasure(
        dir.path(),
        &[
            "triangulate",
            "--config",
            "run.toml",
            "--out",
            "o",
            "--metrics",
            "published.json",
        ],
    );
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).contains("supported(H1)"));
}

#[test]
fn rf_cv_lists_every_grid_point_and_report_marks_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    news_only(dir.path());
    let run = trimeasure(dir.path(), &["rf-cv", "--config", "rf.toml"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(dir.path().join("rf/rf_cv.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# trimeasure rf-cv config_hash="));
    assert_eq!(lines.len(), 2 + 15);

    assert!(trimeasure(dir.path(), &["rf-train", "--config", "rf.toml"])
        .status
        .success());
    assert!(trimeasure(dir.path(), &["report", "--out", "rf"]).status.success());
    let summary = fs::read_to_string(dir.path().join("rf/summary.md")).unwrap();
    assert!(summary.contains("| Class | N | Sensitivity | Precision |"));
    assert!(summary.contains("CV accuracy (5 folds)"));
    assert_eq!(summary.matches("_not run_").count(), 3, "{summary}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("rf/rf_report.json")).unwrap()).unwrap();
    assert_eq!(report["data"]["params_from"], "rf-cv");
    assert_eq!(report["meta"]["seed"], 3);
}

#[test]
fn stochastic_stages_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    news_only(dir.path());
    fs::write(dir.path().join("noseed.toml"), "[news]\npath = \"news.jsonl\"\n").unwrap();
    let run = trimeasure(dir.path(), &["rf-train", "--config", "noseed.toml", "--out", "x"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr_json(&run)["error"]["message"].as_str().unwrap().contains("seed"));
    // ingest is deterministic
    assert!(
        trimeasure(dir.path(), &["ingest", "--config", "noseed.toml", "--out", "x"])
            .status
            .success()
    );
}

#[test]
fn missing_inputs_and_locks_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "seed = 1\n[news]\npath = \"gone.jsonl\"\n").unwrap();
    let run = trimeasure(dir.path(), &["ingest", "--config", "run.toml", "--out", "o"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr_json(&run)["error"]["path"]
        .as_str()
        .unwrap()
        .ends_with("gone.jsonl"));

    news_only(dir.path());
    fs::create_dir_all(dir.path().join("rf")).unwrap();
    fs::write(dir.path().join("rf/.trimeasure.lock"), "1").unwrap();
    let run = trimeasure(dir.path(), &["ingest", "--config", "rf.toml"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("locked"));
}

#[test]
fn malformed_corpus_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.jsonl"),
        "{\"id\": \"a\", \"text\": \"x\"}\nnot json\n",
    )
    .unwrap();
    fs::write(dir.path().join("run.toml"), "[news]\npath = \"bad.jsonl\"\n").unwrap();
    let run = trimeasure(dir.path(), &["ingest", "--config", "run.toml", "--out", "o"]);
    assert_eq!(run.status.code(), Some(3));
    assert_eq!(stderr_json(&run)["error"]["kind"], "data");
    assert!(dir.path().join("o/run_meta.json").exists());
}
