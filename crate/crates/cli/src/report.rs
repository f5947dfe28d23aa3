//! Markdown summary assembled from whatever artifacts a directory holds.

use std::collections::BTreeSet;
use std::fmt::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use trimeasure::model_selection::CvResult;
use trimeasure::triangulate::Status;

use crate::error::Result;
use crate::output::read_artifact;
use crate::stages::{EventsReport, RfReport, TrendReport, VerdictReport, EVENTS, RF_CV, RF_REPORT, TREND, VERDICT};

pub const SUMMARY: &str = "summary.md";

const NOT_RUN: &str = "_not run_";

fn num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.3e}")
    } else {
        format!("{v:.3}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), num)
}

fn load<T: DeserializeOwned>(dir: &Path, name: &str, metas: &mut BTreeSet<(String, String)>) -> Result<Option<T>> {
    Ok(read_artifact(dir, name)?.map(|(m, d)| {
        metas.insert((
            m.config_hash,
            m.seed.map_or_else(|| "none".to_string(), |s| s.to_string()),
        ));
        d
    }))
}

/// Summary of the artifacts in `dir`, headed by the producing command and
/// the config hashes and seeds of the artifacts it draws on.
pub fn render_report(dir: &Path, command: &str) -> Result<String> {
    let mut metas = BTreeSet::new();
    let rf: Option<RfReport> = load(dir, RF_REPORT, &mut metas)?;
    let cv: Option<CvResult> = load(dir, RF_CV, &mut metas)?;
    let trend: Option<TrendReport> = load(dir, TREND, &mut metas)?;
    let events: Option<EventsReport> = load(dir, EVENTS, &mut metas)?;
    let verdict: Option<VerdictReport> = load(dir, VERDICT, &mut metas)?;

    let mut s = String::from("# Measurement summary\n\n");
    let sources: Vec<String> = metas
        .iter()
        .map(|(h, seed)| format!("config hash `{h}` seed {seed}"))
        .collect();
    let _ = writeln!(
        s,
        "Rendered by `trimeasure {command}` from {}.\n",
        if sources.is_empty() {
            "no artifacts".to_string()
        } else {
            sources.join(", ")
        }
    );

    s.push_str("## Classifier by class\n\n");
    match &rf {
        Some(rf) => {
            let _ = writeln!(
                s,
                "Scored on {} ({} rows), mtry={} nodesize={} from {}.\n",
                match rf.report.mode {
                    trimeasure::forest::EvalMode::Oob => "out-of-bag votes",
                    trimeasure::forest::EvalMode::Holdout => "a stratified holdout",
                },
                rf.report.n.iter().sum::<u64>(),
                rf.mtry,
                rf.nodesize,
                rf.params_from
            );
            s.push_str(&rf.report.render_table());
        }
        None => s.push_str(NOT_RUN),
    }
    s.push_str("\n\n## Summary metrics\n\n");
    match (&rf, &cv) {
        (None, None) => s.push_str(NOT_RUN),
        _ => {
            s.push_str("| Metric | Value |\n|---|---|\n");
            if let Some(rf) = &rf {
                let _ = writeln!(s, "| OOB error | {} |", opt(rf.oob_error));
                let _ = writeln!(s, "| Accuracy | {:.3} |", rf.report.accuracy);
                let _ = writeln!(s, "| Balanced accuracy | {:.3} |", rf.report.balanced_accuracy);
            }
            match &cv {
                Some(cv) => {
                    let r = cv.chosen_result();
                    let _ = writeln!(
                        s,
                        "| CV accuracy ({} folds) | {:.3} ± {:.3} |",
                        cv.k, r.accuracy.mean, r.accuracy.sd
                    );
                }
                None => {
                    let _ = writeln!(s, "| CV accuracy | {NOT_RUN} |");
                }
            }
        }
    }
    s.push_str("\n\n## Most important terms\n\n");
    match &rf {
        Some(rf) => {
            s.push_str("| Rank | Term | Mean decrease in Gini |\n|---|---|---|\n");
            for (i, (t, v)) in rf.top_terms.iter().enumerate() {
                let _ = writeln!(s, "| {} | {t} | {v:.4} |", i + 1);
            }
        }
        None => s.push_str(NOT_RUN),
    }
    s.push_str("\n\n## Topic trends\n\n");
    match &trend {
        Some(t) => {
            let _ = writeln!(s, "Window {} to {}.\n", t.window.0, t.window.1);
            s.push_str("| Series | Start | End | Slope sign |\n|---|---|---|---|\n");
            let clusters: Vec<_> = t.series.iter().filter(|x| x.cluster).collect();
            let shown = if clusters.is_empty() {
                t.series.iter().collect()
            } else {
                clusters
            };
            for x in shown {
                let _ = writeln!(s, "| {} | {:.3} | {:.3} | {:+} |", x.name, x.start, x.end, x.slope_sign);
            }
        }
        None => s.push_str(NOT_RUN),
    }
    s.push_str("\n\n## Event shifts\n\n");
    match &events {
        Some(e) => {
            let _ = writeln!(s, "{} events, breakpoint {}.\n", e.total, e.breakpoint);
            s.push_str("| Category | Change in share |\n|---|---|\n");
            for (c, d) in &e.deltas {
                let _ = writeln!(s, "| {c} | {d:+.3} |");
            }
        }
        None => s.push_str(NOT_RUN),
    }
    s.push_str("\n\n## Verdict\n\n");
    match &verdict {
        Some(v) => {
            let v = &v.verdict;
            let _ = writeln!(
                s,
                "**{}** under `{}` ({} signals, {} required).\n",
                v.outcome, v.spec, v.signals, v.min_signals
            );
            s.push_str("| Hypothesis | Metric | Test | Value | Margin | Status |\n|---|---|---|---|---|---|\n");
            for h in &v.hypotheses {
                for p in &h.predicates {
                    let status = match p.status {
                        Status::Satisfied => "holds",
                        Status::Violated => "fails",
                        Status::Missing => "missing",
                    };
                    let _ = writeln!(
                        s,
                        "| {} | {} | {} {} | {} | {} | {status} |",
                        h.name,
                        p.predicate.metric,
                        p.predicate.op,
                        p.predicate.threshold,
                        opt(p.value),
                        p.margin.map_or_else(
                            || "n/a".to_string(),
                            |m| if m >= 0.0 { format!("+{}", num(m)) } else { num(m) }
                        ),
                    );
                }
            }
        }
        None => s.push_str(NOT_RUN),
    }
    s.push('\n');
    Ok(s)
}
