//! Accuracy grid, per-classifier metric blocks and per-level means.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::crossval::{ClassEntry, EvalReport};
use super::metrics::WeightedMetrics;
use super::EvalError;
use crate::dataset::FeatureLevel;

/// One (classifier, feature level) result. Metrics are fractions in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub classifier: String,
    pub level: FeatureLevel,
    pub accuracy: f64,
    pub per_class: Vec<ClassEntry>,
    pub weighted: WeightedMetrics,
}

impl ReportEntry {
    pub fn from_eval(classifier: impl Into<String>, r: &EvalReport) -> Self {
        ReportEntry {
            classifier: classifier.into(),
            level: r.level,
            accuracy: r.overall_accuracy,
            per_class: r.per_class.clone(),
            weighted: r.weighted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub classifier: String,
    pub packet: Option<f64>,
    pub uniflow: Option<f64>,
    pub biflow: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelBlock {
    pub level: FeatureLevel,
    pub per_class: Vec<ClassEntry>,
    pub weighted: WeightedMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierBlock {
    pub classifier: String,
    pub levels: Vec<LevelBlock>,
}

/// Unweighted mean across classifiers at one feature level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelAggregate {
    pub level: FeatureLevel,
    pub classifiers: usize,
    pub accuracy: f64,
    pub weighted: WeightedMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub accuracy: Vec<AccuracyRow>,
    pub blocks: Vec<ClassifierBlock>,
    pub aggregates: Vec<LevelAggregate>,
}

/// Groups entries by classifier (first-appearance order) and level.
pub fn render_report(entries: &[ReportEntry]) -> Result<ReportDocument, EvalError> {
    if entries.is_empty() {
        return Err(EvalError::NoReports);
    }
    let mut names: Vec<&str> = Vec::new();
    for e in entries {
        if !names.contains(&e.classifier.as_str()) {
            names.push(&e.classifier);
        }
    }
    let mut accuracy = Vec::new();
    let mut blocks = Vec::new();
    for name in &names {
        let mut row = AccuracyRow { classifier: name.to_string(), packet: None, uniflow: None, biflow: None };
        let mut levels = Vec::new();
        for level in FeatureLevel::ALL {
            let mut found = entries.iter().filter(|e| e.classifier == *name && e.level == level);
            let Some(e) = found.next() else { continue };
            if found.next().is_some() {
                return Err(EvalError::DuplicateEntry { classifier: name.to_string(), level: level.to_string() });
            }
            let slot = match level {
                FeatureLevel::Packet => &mut row.packet,
                FeatureLevel::Uniflow => &mut row.uniflow,
                FeatureLevel::Biflow => &mut row.biflow,
            };
            *slot = Some(e.accuracy);
            levels.push(LevelBlock { level, per_class: e.per_class.clone(), weighted: e.weighted });
        }
        accuracy.push(row);
        blocks.push(ClassifierBlock { classifier: name.to_string(), levels });
    }
    let aggregates = FeatureLevel::ALL
        .into_iter()
        .filter_map(|level| {
            let at: Vec<&ReportEntry> = entries.iter().filter(|e| e.level == level).collect();
            if at.is_empty() {
                return None;
            }
            let n = at.len() as f64;
            let mean = |f: fn(&ReportEntry) -> f64| at.iter().map(|e| f(e)).sum::<f64>() / n;
            Some(LevelAggregate {
                level,
                classifiers: at.len(),
                accuracy: mean(|e| e.accuracy),
                weighted: WeightedMetrics {
                    precision: mean(|e| e.weighted.precision),
                    recall: mean(|e| e.weighted.recall),
                    f1: mean(|e| e.weighted.f1),
                },
            })
        })
        .collect();
    Ok(ReportDocument { accuracy, blocks, aggregates })
}

fn pct(v: f64) -> String {
    format!("{:.2}%", v * 100.0)
}

fn opt_pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), pct)
}

/// Plain-text tables, percentages to two decimals.
pub fn render_text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let w = doc.accuracy.iter().map(|r| r.classifier.len()).max().unwrap_or(0).max(10);
    let _ = writeln!(out, "Overall accuracy");
    let _ = writeln!(out, "{:<w$}  {:>10}  {:>10}  {:>10}", "Classifier", "Packet", "Uniflow", "Biflow");
    for r in &doc.accuracy {
        let _ = writeln!(
            out,
            "{:<w$}  {:>10}  {:>10}  {:>10}",
            r.classifier,
            opt_pct(r.packet),
            opt_pct(r.uniflow),
            opt_pct(r.biflow)
        );
    }
    for b in &doc.blocks {
        let _ = writeln!(out, "\n{}", b.classifier);
        let _ = writeln!(out, "{:<8}  {:<16}  {:>10}  {:>10}  {:>10}  {:>8}", "Level", "Class", "Recall", "Precision", "F1", "Support");
        for l in &b.levels {
            for e in &l.per_class {
                let m = &e.metrics;
                let _ = writeln!(
                    out,
                    "{:<8}  {:<16}  {:>10}  {:>10}  {:>10}  {:>8}",
                    l.level,
                    e.class.as_str(),
                    pct(m.recall),
                    pct(m.precision),
                    pct(m.f1),
                    m.support
                );
            }
            let _ = writeln!(
                out,
                "{:<8}  {:<16}  {:>10}  {:>10}  {:>10}",
                l.level,
                "Weighted avg",
                pct(l.weighted.recall),
                pct(l.weighted.precision),
                pct(l.weighted.f1)
            );
        }
    }
    let _ = writeln!(out, "\nMean across classifiers");
    let _ = writeln!(out, "{:<8}  {:>11}  {:>10}  {:>10}  {:>10}  {:>10}", "Level", "Classifiers", "Accuracy", "Recall", "Precision", "F1");
    for a in &doc.aggregates {
        let _ = writeln!(
            out,
            "{:<8}  {:>11}  {:>10}  {:>10}  {:>10}  {:>10}",
            a.level,
            a.classifiers,
            pct(a.accuracy),
            pct(a.weighted.recall),
            pct(a.weighted.precision),
            pct(a.weighted.f1)
        );
    }
    out
}
