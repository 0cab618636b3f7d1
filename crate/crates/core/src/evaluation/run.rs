//! Scoring one or more systems' outputs against target Dockerfiles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::adherence::{adherence, mean_adherence, AdherenceReport, FieldScores};
use super::bleu::bleu4_text;
use super::stats::{benjamini_hochberg, cliffs_delta, mann_whitney_u, Magnitude};
use super::ted::{distance_report, DistanceReport};
use crate::corpus::normalize_for_training;
use crate::inference::{infer_generated_spec, infer_spec};
use crate::syntax::{build_ast, parse_dockerfile};
use crate::wordlists::WordLists;

/// A named Dockerfile, usually keyed by file name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedFile {
    pub name: String,
    pub text: String,
}

impl NamedFile {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemOutputs {
    pub system: String,
    pub files: Vec<NamedFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub name: String,
    pub adherence: AdherenceReport,
    pub distance: DistanceReport,
    pub bleu4: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFailure {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
    pub std_dev: f64,
}

impl DistributionSummary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        };
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        Some(Self {
            min: v[0],
            median,
            mean,
            max: v[n - 1],
            std_dev: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub system: String,
    pub pairs: usize,
    pub evaluated: usize,
    pub adherence_mean: Option<FieldScores>,
    pub distance: Option<DistributionSummary>,
    pub bleu4_mean: Option<f64>,
    pub results: Vec<PairResult>,
    pub failures: Vec<PairFailure>,
}

impl SystemReport {
    pub fn metric_values(&self, metric: Metric) -> Vec<f64> {
        self.results.iter().map(|r| metric.of(r)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    DependencyRecall,
    NormalizedDistance,
    Bleu4,
}

impl Metric {
    pub const ALL: [Metric; 3] = [
        Metric::DependencyRecall,
        Metric::NormalizedDistance,
        Metric::Bleu4,
    ];

    fn of(self, r: &PairResult) -> f64 {
        match self {
            Metric::DependencyRecall => r.adherence.dependency_recall(),
            Metric::NormalizedDistance => r.distance.normalized,
            Metric::Bleu4 => r.bleu4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub metric: Metric,
    pub system_a: String,
    pub system_b: String,
    pub u: f64,
    pub p: f64,
    pub p_adjusted: f64,
    pub delta: f64,
    pub magnitude: Magnitude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub systems: Vec<SystemReport>,
    pub comparisons: Vec<Comparison>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationError {
    #[error("nothing to evaluate")]
    EmptyInput,
}

/// Score one target/output pair.
pub fn evaluate_pair(
    target: &NamedFile,
    output: &NamedFile,
    lists: &WordLists,
) -> Result<PairResult, String> {
    let tdoc = parse_dockerfile(&target.text).map_err(|e| format!("target: {e}"))?;
    let tspec = infer_spec(&tdoc, lists).map_err(|e| format!("target: {e}"))?;
    let odoc = parse_dockerfile(&output.text).map_err(|e| format!("output: {e}"))?;
    let ospec = infer_generated_spec(&odoc, lists, &tspec).map_err(|e| format!("output: {e}"))?;
    let tast = build_ast(&tdoc).map_err(|e| format!("target: {e}"))?;
    let oast = build_ast(&odoc).map_err(|e| format!("output: {e}"))?;
    let bleu = bleu4_text(&normalize_for_training(&odoc), &normalize_for_training(&tdoc))
        .map_err(|e| format!("output: {e}"))?;
    Ok(PairResult {
        name: target.name.clone(),
        adherence: adherence(&tspec, &ospec),
        distance: distance_report(&tast, &oast),
        bleu4: bleu,
    })
}

fn evaluate_system(targets: &[NamedFile], outputs: &SystemOutputs, lists: &WordLists) -> SystemReport {
    let outcomes: Vec<Result<PairResult, PairFailure>> = targets
        .par_iter()
        .map(|t| {
            let fail = |reason: String| PairFailure {
                name: t.name.clone(),
                reason,
            };
            let output = outputs
                .files
                .iter()
                .find(|o| o.name == t.name)
                .ok_or_else(|| fail("no output with this name".to_string()))?;
            evaluate_pair(t, output, lists).map_err(fail)
        })
        .collect();
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(f) => failures.push(f),
        }
    }
    let adherences: Vec<AdherenceReport> = results.iter().map(|r| r.adherence).collect();
    let distances: Vec<f64> = results.iter().map(|r| r.distance.normalized).collect();
    let bleu4_mean = (!results.is_empty())
        .then(|| results.iter().map(|r| r.bleu4).sum::<f64>() / results.len() as f64);
    SystemReport {
        system: outputs.system.clone(),
        pairs: targets.len(),
        evaluated: results.len(),
        adherence_mean: mean_adherence(&adherences),
        distance: DistributionSummary::of(&distances),
        bleu4_mean,
        results,
        failures,
    }
}

/// Evaluate every system against the targets, then compare systems pairwise
/// on each [`Metric`] with BH-adjusted p-values.
pub fn evaluate_run(
    targets: &[NamedFile],
    systems: &[SystemOutputs],
    lists: &WordLists,
) -> Result<EvaluationReport, EvaluationError> {
    if targets.is_empty() || systems.is_empty() {
        return Err(EvaluationError::EmptyInput);
    }
    let reports: Vec<SystemReport> = systems
        .iter()
        .map(|s| evaluate_system(targets, s, lists))
        .collect();

    let mut comparisons = Vec::new();
    for (i, a) in reports.iter().enumerate() {
        for b in &reports[i + 1..] {
            for metric in Metric::ALL {
                let xa = a.metric_values(metric);
                let xb = b.metric_values(metric);
                let (Ok(mw), Ok((delta, magnitude))) =
                    (mann_whitney_u(&xa, &xb), cliffs_delta(&xa, &xb))
                else {
                    continue;
                };
                comparisons.push(Comparison {
                    metric,
                    system_a: a.system.clone(),
                    system_b: b.system.clone(),
                    u: mw.u,
                    p: mw.p,
                    p_adjusted: mw.p,
                    delta,
                    magnitude,
                });
            }
        }
    }
    let raw: Vec<f64> = comparisons.iter().map(|c| c.p).collect();
    for (c, adj) in comparisons.iter_mut().zip(benjamini_hochberg(&raw)) {
        c.p_adjusted = adj;
    }
    Ok(EvaluationReport {
        systems: reports,
        comparisons,
    })
}
