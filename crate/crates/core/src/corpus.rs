//! Article ingestion, enriched-corpus persistence and queries.
//!
//! Both input and output are JSON Lines files. Enriched output is written to
//! a temporary file next to the target and renamed into place, so readers
//! never observe a partial corpus.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::{fold_label, CategorySet};
use crate::config::config_fingerprint;
use crate::inference::{
    infer_article, normalize_keywords, CategoryAssignment, InferenceConfig, InferenceError,
    KeywordProfile, ProfileSource, Tier,
};
use crate::kb::SynsetProvider;

#[derive(Debug, Error)]
pub enum CorpusError {
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
    #[error("{path}: duplicate article id {id:?} on lines {first} and {second}")]
    DuplicateId {
        path: String,
        id: String,
        first: usize,
        second: usize,
    },
    #[error("refusing to write article {id:?}: {reason}")]
    InvalidRecord { id: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArticleRecord {
    pub id: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal: Option<String>,
    #[serde(default)]
    pub keywords: Vec<String>,
}

impl ArticleRecord {
    /// Keywords as used by inference: normalized, non-empty, deduplicated.
    pub fn normalized_keywords(&self) -> Vec<String> {
        normalize_keywords(&self.keywords)
    }

    /// Records without any usable keyword are kept but never inferred.
    pub fn is_inferable(&self) -> bool {
        !self.normalized_keywords().is_empty()
    }
}

/// Persisted provenance for one keyword; synsets are referenced by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileRecord {
    pub keyword: String,
    pub source: ProfileSource,
    pub supported_categories: CategorySet,
    pub synset_ids: Vec<String>,
}

impl From<&KeywordProfile> for ProfileRecord {
    fn from(p: &KeywordProfile) -> Self {
        ProfileRecord {
            keyword: p.keyword.clone(),
            source: p.source,
            supported_categories: p.supported_categories.clone(),
            synset_ids: p.synsets.iter().map(|s| s.id.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnrichedArticle {
    pub article: ArticleRecord,
    pub assignments: Vec<CategoryAssignment>,
    pub profiles: Vec<ProfileRecord>,
    pub config_fingerprint: String,
    pub enriched_at: String,
}

impl EnrichedArticle {
    /// Checks that every assignment is internally consistent and only cites
    /// keywords of the article.
    pub fn validate(&self) -> Result<(), String> {
        let keywords = self.article.normalized_keywords();
        for a in &self.assignments {
            if a.category.is_empty() {
                return Err("assignment with an empty category".into());
            }
            if a.support != a.supporting_keywords.len() {
                return Err(format!(
                    "{:?}: support {} but {} supporting keywords",
                    a.category,
                    a.support,
                    a.supporting_keywords.len()
                ));
            }
            if a.support < 2 {
                return Err(format!("{:?}: support {} below 2", a.category, a.support));
            }
            if a.tier != Tier::from_support(a.support) {
                return Err(format!("{:?}: tier does not match support", a.category));
            }
            if let Some(k) = a.supporting_keywords.iter().find(|k| !keywords.contains(k)) {
                return Err(format!(
                    "{:?} cites keyword {k:?}, which is not a keyword of the article",
                    a.category
                ));
            }
        }
        if let Some(p) = self.profiles.iter().find(|p| !keywords.contains(&p.keyword)) {
            return Err(format!("profile for unknown keyword {:?}", p.keyword));
        }
        Ok(())
    }
}

/// Reads a JSON Lines article file. Blank lines are skipped.
pub fn ingest(path: &Path) -> Result<Vec<ArticleRecord>, CorpusError> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: origin.clone(),
        source,
    })?;

    let mut records = Vec::new();
    let mut first_seen: HashMap<String, usize> = HashMap::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: ArticleRecord =
            serde_json::from_str(line).map_err(|e| CorpusError::MalformedLine {
                path: origin.clone(),
                line: line_no,
                reason: e.to_string(),
            })?;
        if record.id.is_empty() {
            return Err(CorpusError::MalformedLine {
                path: origin.clone(),
                line: line_no,
                reason: "empty article id".into(),
            });
        }
        if let Some(&first) = first_seen.get(&record.id) {
            return Err(CorpusError::DuplicateId {
                path: origin.clone(),
                id: record.id,
                first,
                second: line_no,
            });
        }
        if !record.is_inferable() {
            log::warn!("{origin}:{line_no}: article {:?} has no keywords", record.id);
        }
        first_seen.insert(record.id.clone(), line_no);
        records.push(record);
    }
    Ok(records)
}

/// Runs inference over every inferable record; the rest are carried through
/// with no assignments.
pub fn enrich_records<P: SynsetProvider + ?Sized>(
    records: &[ArticleRecord],
    provider: &P,
    config: &InferenceConfig,
    enriched_at: &str,
) -> Result<Vec<EnrichedArticle>, InferenceError> {
    config.validate()?;
    let fingerprint = config_fingerprint(config);
    records
        .iter()
        .map(|article| {
            let (assignments, profiles) = if article.is_inferable() {
                let inference = infer_article(&article.keywords, provider, config)?;
                let profiles = inference.profiles.iter().map(ProfileRecord::from).collect();
                (inference.assignments, profiles)
            } else {
                (Vec::new(), Vec::new())
            };
            Ok(EnrichedArticle {
                article: article.clone(),
                assignments,
                profiles,
                config_fingerprint: fingerprint.clone(),
                enriched_at: enriched_at.to_string(),
            })
        })
        .collect()
}

/// Writes `records` as JSON Lines to `path`, atomically. Nothing is written
/// if any record fails validation.
pub fn persist_enriched(records: &[EnrichedArticle], path: &Path) -> Result<(), CorpusError> {
    let mut body = String::new();
    for record in records {
        record.validate().map_err(|reason| CorpusError::InvalidRecord {
            id: record.article.id.clone(),
            reason,
        })?;
        body.push_str(&serde_json::to_string(record).expect("enriched record serializes"));
        body.push('\n');
    }

    let origin = path.display().to_string();
    let io_err = |source| CorpusError::Io {
        path: origin.clone(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(body.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn load_enriched(path: &Path) -> Result<Vec<EnrichedArticle>, CorpusError> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: origin.clone(),
        source,
    })?;
    let mut records = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| CorpusError::MalformedLine {
            path: origin.clone(),
            line: index + 1,
            reason: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryHit {
    pub id: String,
    pub support: usize,
}

/// Articles carrying `category` (case-insensitive), strongest support first,
/// then by id.
pub fn query_by_category(category: &str, store: &[EnrichedArticle]) -> Vec<QueryHit> {
    let wanted = fold_label(category);
    let mut hits: Vec<QueryHit> = store
        .iter()
        .filter_map(|record| {
            record
                .assignments
                .iter()
                .filter(|a| fold_label(&a.category) == wanted)
                .map(|a| a.support)
                .max()
                .map(|support| QueryHit {
                    id: record.article.id.clone(),
                    support,
                })
        })
        .collect();
    hits.sort_by(|a, b| b.support.cmp(&a.support).then_with(|| a.id.cmp(&b.id)));
    hits
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub total_articles: usize,
    pub covered_articles: usize,
    pub coverage: f64,
    /// Set when the corpus has no articles; coverage is then reported as 0.
    pub empty: bool,
    /// Number of assignments → number of articles with that many.
    pub assignment_histogram: BTreeMap<usize, usize>,
    pub distinct_categories: usize,
}

pub fn corpus_stats(store: &[EnrichedArticle]) -> CorpusStats {
    let total_articles = store.len();
    let covered_articles = store.iter().filter(|r| !r.assignments.is_empty()).count();
    let mut assignment_histogram = BTreeMap::new();
    let mut categories = CategorySet::new();
    for record in store {
        *assignment_histogram.entry(record.assignments.len()).or_insert(0) += 1;
        for a in &record.assignments {
            categories.insert(&a.category);
        }
    }
    CorpusStats {
        total_articles,
        covered_articles,
        coverage: if total_articles == 0 {
            0.0
        } else {
            covered_articles as f64 / total_articles as f64
        },
        empty: total_articles == 0,
        assignment_histogram,
        distinct_categories: categories.len(),
    }
}
