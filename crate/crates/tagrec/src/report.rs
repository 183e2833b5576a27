//! Rendering of predictions, evaluation reports and drift tables.

use std::fmt::Write as _;

use serde_json::{json, Value};
use tagrec_core::evaluation::{DriftRow, EvalReport, MAX_K, MRR_NOTE};
use tagrec_core::{Folksonomy, Post, RankedTags};

use crate::formats::header_block;

pub type Pairs = [(String, String)];

/// `user resource rank tag score`, one line per recommended tag.
pub fn predictions_tsv(header: &Pairs, f: &Folksonomy, rows: &[(&Post, RankedTags)]) -> String {
    let mut out = header_block(Some("tagrec-predictions v1"), header);
    out.push_str("user\tresource\trank\ttag\tscore\n");
    for (post, ranked) in rows {
        for (i, &(tag, score)) in ranked.entries().iter().enumerate() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                f.user_name(post.user()),
                f.resource_name(post.resource()),
                i + 1,
                f.tag_name(tag),
                score
            );
        }
    }
    out
}

pub fn report_json(header: &Pairs, report: &EvalReport) -> String {
    let config: serde_json::Map<String, Value> =
        header.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
    let algorithms: Vec<Value> = report
        .algorithms
        .iter()
        .map(|a| {
            json!({
                "name": a.name,
                "notes": a.notes,
                "n_cases": a.n_cases,
                "n_failures": a.n_failures,
                "f1_at_5": a.f1_at_5,
                "mrr": a.mrr,
                "map": a.map,
                "precision_at_k": a.precision.to_vec(),
                "recall_at_k": a.recall.to_vec(),
            })
        })
        .collect();
    let significance: Vec<Value> = report
        .significance
        .iter()
        .map(|s| {
            json!({
                "metric": s.metric.as_str(),
                "a": s.a,
                "b": s.b,
                "p_value": s.p_value,
                "stars": s.stars(),
            })
        })
        .collect();
    let doc = json!({
        "format": "tagrec-report v1",
        "config": config,
        "precision_mode": report.precision_mode.as_str(),
        "mrr_definition": MRR_NOTE,
        "algorithms": algorithms,
        "significance": significance,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json values always serialize");
    text.push('\n');
    text
}

pub fn report_tsv(header: &Pairs, report: &EvalReport) -> String {
    let mut out = header_block(Some("tagrec-report v1"), header);
    let _ = writeln!(out, "# precision_mode={}", report.precision_mode.as_str());
    let _ = writeln!(out, "# {MRR_NOTE}");
    for a in &report.algorithms {
        if let Some(note) = &a.notes {
            let _ = writeln!(out, "# {note}");
        }
    }
    out.push_str("algorithm\tf1_at_5\tmrr\tmap\tp_at_5\tr_at_5\tn_cases\tn_failures\n");
    for a in &report.algorithms {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            a.name, a.f1_at_5, a.mrr, a.map, a.precision[4], a.recall[4], a.n_cases, a.n_failures
        );
    }
    out
}

/// Recall/precision pairs for k = 1..10.
pub fn curves_tsv(header: &Pairs, report: &EvalReport) -> String {
    let mut out = header_block(Some("tagrec-curves v1"), header);
    out.push_str("algorithm\tk\trecall\tprecision\n");
    for a in &report.algorithms {
        for k in 0..MAX_K {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", a.name, k + 1, a.recall[k], a.precision[k]);
        }
    }
    out
}

pub fn significance_tsv(header: &Pairs, report: &EvalReport) -> String {
    let mut out = header_block(Some("tagrec-significance v1"), header);
    out.push_str("metric\ta\tb\tp_value\tstars\n");
    for s in &report.significance {
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", s.metric.as_str(), s.a, s.b, s.p_value, s.stars());
    }
    out
}

pub fn drift_tsv(header: &Pairs, unit: &str, rows: &[DriftRow]) -> String {
    let mut out = header_block(Some("tagrec-drift v1"), header);
    let _ = writeln!(out, "# lag_unit={unit}");
    out.push_str("lag\tmean_gist_sim\tmean_verbatim_sim\tn_users\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", r.lag, r.mean_gist, r.mean_verbatim, r.n_users);
    }
    out
}
