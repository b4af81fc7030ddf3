use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::metrics::{ConfusionMatrix, Scores};
use crate::corpus::LanguageTag;
use crate::error::{Error, Result};
use crate::rng::sha256_hex;
use crate::scoring::{PredictionRecord, TaskRun};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateScores {
    pub template: usize,
    pub n: usize,
    #[serde(flatten)]
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub task: String,
    /// Hash of the full run configuration.
    pub config_hash: String,
    /// Hash of what makes two runs comparable: task, template kind and
    /// indices, and the query-id set.
    pub protocol_hash: String,
    pub per_template: Vec<TemplateScores>,
    pub averaged: Scores,
    pub per_language: BTreeMap<LanguageTag, Scores>,
    pub excluded: usize,
}

fn scores_of(records: &[&PredictionRecord]) -> Result<Scores> {
    let gold: Vec<&str> = records.iter().map(|r| r.gold.as_str()).collect();
    let pred: Vec<&str> = records.iter().map(|r| r.predicted.as_str()).collect();
    Ok(ConfusionMatrix::new(&gold, &pred)?.scores())
}

fn protocol_hash(run: &TaskRun) -> String {
    let mut ids: BTreeSet<&str> = run.excluded.iter().map(|e| e.query_id.as_str()).collect();
    for t in &run.per_template {
        ids.extend(t.records.iter().map(|r| r.query_id.as_str()));
    }
    let templates: Vec<usize> = run.per_template.iter().map(|t| t.template_idx).collect();
    let canonical = serde_json::json!({
        "task": run.task,
        "template_kind": run.template_kind,
        "templates": templates,
        "queries": ids,
    });
    sha256_hex(canonical.to_string())
}

/// Per-template metrics, their mean, and the same per language.
pub fn aggregate(run: &TaskRun, config_hash: &str) -> Result<MetricReport> {
    let first = run.per_template.first().ok_or(Error::NoScoredQueries)?;
    let expected: BTreeSet<&str> = first.records.iter().map(|r| r.query_id.as_str()).collect();
    for t in &run.per_template[1..] {
        let ids: BTreeSet<&str> = t.records.iter().map(|r| r.query_id.as_str()).collect();
        if ids != expected || ids.len() != t.records.len() {
            return Err(Error::invalid(format!(
                "template {} does not cover the same queries as template {}",
                t.template_idx, first.template_idx
            )));
        }
    }

    let mut per_template = Vec::with_capacity(run.per_template.len());
    let mut by_lang: BTreeMap<LanguageTag, Vec<Scores>> = BTreeMap::new();
    for t in &run.per_template {
        let all: Vec<&PredictionRecord> = t.records.iter().collect();
        per_template.push(TemplateScores {
            template: t.template_idx,
            n: all.len(),
            scores: scores_of(&all)?,
        });
        let mut groups: BTreeMap<&LanguageTag, Vec<&PredictionRecord>> = BTreeMap::new();
        for r in &t.records {
            groups.entry(&r.lang).or_default().push(r);
        }
        for (lang, recs) in groups {
            by_lang.entry(lang.clone()).or_default().push(scores_of(&recs)?);
        }
    }
    let averaged =
        Scores::mean(&per_template.iter().map(|t| t.scores).collect::<Vec<_>>()).expect("at least one template");
    let per_language = by_lang
        .into_iter()
        .map(|(lang, s)| (lang, Scores::mean(&s).expect("non-empty")))
        .collect();
    Ok(MetricReport {
        task: run.task.clone(),
        config_hash: config_hash.to_owned(),
        protocol_hash: protocol_hash(run),
        per_template,
        averaged,
        per_language,
        excluded: run.excluded.len(),
    })
}

/// Treatment minus baseline on averaged weighted F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub task: String,
    pub baseline_config_hash: String,
    pub treatment_config_hash: String,
    pub overall: f64,
    pub per_language: BTreeMap<LanguageTag, f64>,
}

pub fn delta_report(baseline: &MetricReport, treatment: &MetricReport) -> Result<DeltaReport> {
    if baseline.task != treatment.task {
        return Err(Error::invalid(format!(
            "task mismatch: {} vs {}",
            baseline.task, treatment.task
        )));
    }
    if baseline.protocol_hash != treatment.protocol_hash {
        return Err(Error::invalid(
            "reports use different templates or query sets; refusing to compare",
        ));
    }
    let b: BTreeSet<&LanguageTag> = baseline.per_language.keys().collect();
    let t: BTreeSet<&LanguageTag> = treatment.per_language.keys().collect();
    if b != t {
        let fmt = |s: BTreeSet<&&LanguageTag>| s.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ");
        return Err(Error::invalid(format!(
            "language coverage differs: only in baseline [{}], only in treatment [{}]",
            fmt(b.difference(&t).collect()),
            fmt(t.difference(&b).collect()),
        )));
    }
    let per_language = treatment
        .per_language
        .iter()
        .map(|(lang, s)| (lang.clone(), s.weighted_f1 - baseline.per_language[lang].weighted_f1))
        .collect();
    Ok(DeltaReport {
        task: baseline.task.clone(),
        baseline_config_hash: baseline.config_hash.clone(),
        treatment_config_hash: treatment.config_hash.clone(),
        overall: treatment.averaged.weighted_f1 - baseline.averaged.weighted_f1,
        per_language,
    })
}
