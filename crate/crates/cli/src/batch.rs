use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use gdg_core::checkers::Variant;
use gdg_core::ring::DynClass;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{simulate, RunConfig};

/// Row order of the summary matrix, weakest class first.
pub const CLASS_ORDER: [&str; 5] = ["cot", "ac", "re", "bre", "st"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The expected variant for the class was satisfied.
    Ok,
    /// The run completed without the expected variant.
    Failed,
    /// The entry could not be run.
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub index: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<DynClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub satisfied: BTreeSet<Variant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination_round: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub class: &'static str,
    pub runs: usize,
    pub g: usize,
    pub g_e: usize,
    pub g_w: usize,
    pub g_ew: usize,
    /// Strongest variant every run of the class satisfied.
    pub achieved: Option<Variant>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchReport {
    pub entries: Vec<Entry>,
    pub errors: usize,
    pub matrix: Vec<Row>,
}

impl BatchReport {
    pub fn failed(&self) -> usize {
        self.entries.iter().filter(|e| e.status == Status::Failed).count()
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<6}{:>6}{:>6}{:>6}{:>6}{:>6}  achieved", "class", "runs", "G", "G_E", "G_W", "G_EW");
        for r in &self.matrix {
            let achieved = r.achieved.map_or("-", Variant::name);
            let _ = writeln!(
                out,
                "{:<6}{:>6}{:>6}{:>6}{:>6}{:>6}  {achieved}",
                r.class, r.runs, r.g, r.g_e, r.g_w, r.g_ew
            );
        }
        for e in self.entries.iter().filter(|e| e.status == Status::Error) {
            let _ = writeln!(out, "entry {}: {}", e.index, e.error.as_deref().unwrap_or("error"));
        }
        out
    }
}

fn error_entry(index: usize, message: String) -> Entry {
    Entry {
        index,
        status: Status::Error,
        class: None,
        seed: None,
        satisfied: BTreeSet::new(),
        termination_round: None,
        error: Some(message),
    }
}

fn run_entry(index: usize, raw: &Value, base_dir: &Path) -> Entry {
    let mut cfg: RunConfig = match serde_json::from_value(raw.clone()) {
        Ok(cfg) => cfg,
        Err(e) => return error_entry(index, format!("malformed entry: {e}")),
    };
    if let Some(p) = cfg.schedule.take() {
        cfg.schedule = Some(if p.is_relative() { base_dir.join(p) } else { p });
    }
    let resolved = match cfg.resolve() {
        Ok(r) => r,
        Err(e) => return error_entry(index, e.to_string()),
    };
    let report = simulate(resolved);
    Entry {
        index,
        status: if report.ok() { Status::Ok } else { Status::Failed },
        class: Some(report.resolved.class),
        seed: Some(report.resolved.seed),
        termination_round: report.verdict.termination_round,
        satisfied: report.verdict.satisfied,
        error: None,
    }
}

fn matrix(entries: &[Entry]) -> Vec<Row> {
    CLASS_ORDER
        .iter()
        .map(|&tag| {
            let runs: Vec<&Entry> = entries
                .iter()
                .filter(|e| e.status != Status::Error && e.class.is_some_and(|c| c.tag() == tag))
                .collect();
            let count = |v: Variant| runs.iter().filter(|e| e.satisfied.contains(&v)).count();
            let achieved = if runs.is_empty() {
                None
            } else {
                Variant::ALL.into_iter().find(|v| runs.iter().all(|e| e.satisfied.contains(v)))
            };
            Row {
                class: tag,
                runs: runs.len(),
                g: count(Variant::G),
                g_e: count(Variant::GE),
                g_w: count(Variant::GW),
                g_ew: count(Variant::GEW),
                achieved,
            }
        })
        .filter(|r| r.runs > 0)
        .collect()
}

/// Run every entry of a batch document. `base_dir` anchors relative
/// schedule paths.
pub fn run_batch(doc: &Value, base_dir: &Path) -> Result<BatchReport, String> {
    let items = doc.as_array().ok_or("batch spec must be a JSON array of run configs")?;
    let entries: Vec<Entry> = items.par_iter().enumerate().map(|(i, raw)| run_entry(i, raw, base_dir)).collect();
    let errors = entries.iter().filter(|e| e.status == Status::Error).count();
    let matrix = matrix(&entries);
    Ok(BatchReport { entries, errors, matrix })
}
