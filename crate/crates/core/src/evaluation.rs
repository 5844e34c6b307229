//! Precision, recall and coverage of an enriched corpus against gold labels.
//!
//! Metrics are computed over (article, category) pairs:
//!
//! - precision = tp / (tp + fp), reported as 1.0 and flagged vacuous when
//!   nothing was assigned
//! - recall = tp / number of gold pairs
//! - coverage = articles with at least one assignment / all articles
//!
//! Stored assignments carry their support, so a stricter threshold is
//! evaluated by dropping assignments below it. Thresholds below the one the
//! corpus was enriched with cannot recover the categories that were cut.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::fold_label;
use crate::corpus::EnrichedArticle;

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    MalformedLine {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("gold labels reference articles missing from the corpus: {}", .0.join(", "))]
    MissingArticles(Vec<String>),
    #[error("gold article {0:?} is listed more than once")]
    DuplicateGold(String),
    #[error("gold article {0:?} has no correct categories")]
    EmptyGold(String),
    #[error("threshold {0} is below 2")]
    InvalidThreshold(usize),
    #[error("invalid threshold range {0}..{1}")]
    InvalidRange(usize, usize),
    #[error("no thresholds given")]
    NoThresholds,
    #[error("corpus mixes results from different configurations: {}", .0.join(", "))]
    MixedConfigurations(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldLabel {
    pub article_id: String,
    pub correct_categories: Vec<String>,
}

/// Reads a JSON Lines gold file.
pub fn load_gold(path: &Path) -> Result<Vec<GoldLabel>, EvaluationError> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| EvaluationError::Io {
        path: origin.clone(),
        source,
    })?;
    let mut labels = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let label: GoldLabel =
            serde_json::from_str(line).map_err(|e| EvaluationError::MalformedLine {
                path: origin.clone(),
                line: index + 1,
                reason: e.to_string(),
            })?;
        labels.push(label);
    }
    Ok(labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub true_positive: usize,
    pub false_positive: usize,
    pub gold_total: usize,
    pub covered_articles: usize,
    pub total_articles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub min_support: usize,
    pub precision: f64,
    /// No pair was assigned at this threshold.
    pub precision_vacuous: bool,
    pub recall: f64,
    /// The gold set is empty.
    pub recall_vacuous: bool,
    pub coverage: f64,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub config_fingerprint: String,
    pub per_threshold: Vec<ThresholdRow>,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (1.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn gold_index(gold: &[GoldLabel]) -> Result<HashMap<&str, HashSet<String>>, EvaluationError> {
    let mut index = HashMap::new();
    for label in gold {
        let folded: HashSet<String> = label
            .correct_categories
            .iter()
            .map(|c| fold_label(c.trim()))
            .filter(|c| !c.is_empty())
            .collect();
        if folded.is_empty() {
            return Err(EvaluationError::EmptyGold(label.article_id.clone()));
        }
        if index.insert(label.article_id.as_str(), folded).is_some() {
            return Err(EvaluationError::DuplicateGold(label.article_id.clone()));
        }
    }
    Ok(index)
}

fn fingerprint(enriched: &[EnrichedArticle]) -> Result<String, EvaluationError> {
    let prints: BTreeSet<&str> = enriched.iter().map(|r| r.config_fingerprint.as_str()).collect();
    match prints.len() {
        0 => Ok(String::new()),
        1 => Ok(prints.into_iter().next().unwrap().to_string()),
        _ => Err(EvaluationError::MixedConfigurations(
            prints.into_iter().map(String::from).collect(),
        )),
    }
}

/// Evaluates the corpus at each threshold, in the order given.
pub fn evaluate(
    enriched: &[EnrichedArticle],
    gold: &[GoldLabel],
    thresholds: &[usize],
) -> Result<EvaluationReport, EvaluationError> {
    if thresholds.is_empty() {
        return Err(EvaluationError::NoThresholds);
    }
    if let Some(&t) = thresholds.iter().find(|&&t| t < 2) {
        return Err(EvaluationError::InvalidThreshold(t));
    }
    let config_fingerprint = fingerprint(enriched)?;
    let gold = gold_index(gold)?;

    let ids: HashSet<&str> = enriched.iter().map(|r| r.article.id.as_str()).collect();
    let mut missing: Vec<String> = gold
        .keys()
        .filter(|id| !ids.contains(*id))
        .map(|id| id.to_string())
        .collect();
    if !missing.is_empty() {
        missing.sort();
        return Err(EvaluationError::MissingArticles(missing));
    }

    let gold_total: usize = gold.values().map(HashSet::len).sum();
    let empty = HashSet::new();
    let per_threshold = thresholds
        .iter()
        .map(|&t| {
            let mut tp = 0;
            let mut fp = 0;
            let mut covered = 0;
            for record in enriched {
                let correct = gold.get(record.article.id.as_str()).unwrap_or(&empty);
                let mut any = false;
                for a in record.assignments.iter().filter(|a| a.support >= t) {
                    any = true;
                    if correct.contains(&fold_label(&a.category)) {
                        tp += 1;
                    } else {
                        fp += 1;
                    }
                }
                covered += usize::from(any);
            }
            let (precision, precision_vacuous) = ratio(tp, tp + fp);
            let (recall, recall_vacuous) = ratio(tp, gold_total);
            let coverage = if enriched.is_empty() {
                0.0
            } else {
                covered as f64 / enriched.len() as f64
            };
            ThresholdRow {
                min_support: t,
                precision,
                precision_vacuous,
                recall,
                recall_vacuous,
                coverage,
                counts: Counts {
                    true_positive: tp,
                    false_positive: fp,
                    gold_total,
                    covered_articles: covered,
                    total_articles: enriched.len(),
                },
            }
        })
        .collect();

    Ok(EvaluationReport {
        config_fingerprint,
        per_threshold,
    })
}

/// [`evaluate`] over every threshold in `t_min..=t_max`.
pub fn threshold_sweep(
    enriched: &[EnrichedArticle],
    gold: &[GoldLabel],
    t_min: usize,
    t_max: usize,
) -> Result<EvaluationReport, EvaluationError> {
    if t_min < 2 || t_min > t_max {
        return Err(EvaluationError::InvalidRange(t_min, t_max));
    }
    let thresholds: Vec<usize> = (t_min..=t_max).collect();
    evaluate(enriched, gold, &thresholds)
}

/// One report per journal; articles without a journal are grouped under
/// `"(none)"`. Gold labels follow their article.
pub fn evaluate_by_journal(
    enriched: &[EnrichedArticle],
    gold: &[GoldLabel],
    thresholds: &[usize],
) -> Result<BTreeMap<String, EvaluationReport>, EvaluationError> {
    // reject bad gold before splitting, so errors name every missing id
    evaluate(enriched, gold, thresholds)?;

    let mut groups: BTreeMap<String, Vec<EnrichedArticle>> = BTreeMap::new();
    for record in enriched {
        let journal = record.article.journal.clone().unwrap_or_else(|| "(none)".into());
        groups.entry(journal).or_default().push(record.clone());
    }
    groups
        .into_iter()
        .map(|(journal, records)| {
            let ids: HashSet<&str> = records.iter().map(|r| r.article.id.as_str()).collect();
            let group_gold: Vec<GoldLabel> = gold
                .iter()
                .filter(|g| ids.contains(g.article_id.as_str()))
                .cloned()
                .collect();
            evaluate(&records, &group_gold, thresholds).map(|report| (journal, report))
        })
        .collect()
}

impl EvaluationReport {
    /// Fixed-width table for terminals.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        if !self.config_fingerprint.is_empty() {
            let _ = writeln!(out, "config {}", self.config_fingerprint);
        }
        let _ = writeln!(
            out,
            "{:>11}  {:>9}  {:>7}  {:>8}  {:>5}  {:>5}  {:>5}  {:>7}  {:>5}",
            "min_support", "precision", "recall", "coverage", "tp", "fp", "gold", "covered", "total"
        );
        let mut vacuous = false;
        for row in &self.per_threshold {
            let mark = if row.precision_vacuous || row.recall_vacuous {
                vacuous = true;
                "*"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "{:>11}  {:>9.4}  {:>7.4}  {:>8.4}  {:>5}  {:>5}  {:>5}  {:>7}  {:>5}{mark}",
                row.min_support,
                row.precision,
                row.recall,
                row.coverage,
                row.counts.true_positive,
                row.counts.false_positive,
                row.counts.gold_total,
                row.counts.covered_articles,
                row.counts.total_articles,
            );
        }
        if vacuous {
            out.push_str("* vacuous: nothing assigned or no gold pairs; ratio reported as 1.0\n");
        }
        out
    }

    /// Tab-separated export, one row per threshold.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "min_support\tprecision\tprecision_vacuous\trecall\trecall_vacuous\tcoverage\ttp\tfp\tgold_total\tcovered_articles\ttotal_articles\n",
        );
        for row in &self.per_threshold {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                row.min_support,
                row.precision,
                row.precision_vacuous,
                row.recall,
                row.recall_vacuous,
                row.coverage,
                row.counts.true_positive,
                row.counts.false_positive,
                row.counts.gold_total,
                row.counts.covered_articles,
                row.counts.total_articles,
            );
        }
        out
    }
}
