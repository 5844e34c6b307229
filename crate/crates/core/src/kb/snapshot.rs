//! Offline snapshot backend.
//!
//! A snapshot is one JSON object mapping normalized keyword to an array of
//! synset records, with an optional `_meta` object:
//!
//! ```json
//! {
//!   "_meta": { "source": "fixture", "created": "2017-06-23T00:00:00Z" },
//!   "flapping": [ { "id": "bn:1", "categories": ["Aerodynamics"], "domains": [], "synonyms": [] } ]
//! }
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{normalize_keyword, validate_response, KbError, Synset, SynsetProvider};

const META_KEY: &str = "_meta";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created: Option<String>,
}

/// On-disk shape of one synset; the lemma is implied by the enclosing key.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct SynsetRecord {
    pub id: String,
    pub categories: Vec<String>,
    #[serde(default)]
    pub domains: Vec<String>,
    #[serde(default)]
    pub synonyms: Vec<String>,
}

impl SynsetRecord {
    pub(crate) fn into_synset(self, lemma: &str) -> Synset {
        Synset {
            id: self.id,
            lemma: lemma.to_string(),
            categories: self.categories,
            domains: self.domains,
            synonyms: self.synonyms,
        }
    }
}

impl From<&Synset> for SynsetRecord {
    fn from(s: &Synset) -> Self {
        SynsetRecord {
            id: s.id.clone(),
            categories: s.categories.clone(),
            domains: s.domains.clone(),
            synonyms: s.synonyms.clone(),
        }
    }
}

/// One invariant violation found while loading a snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotViolation {
    pub keyword: String,
    /// Position of the offending record in the keyword's array, if any.
    pub record: Option<usize>,
    pub reason: String,
}

impl fmt::Display for SnapshotViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.record {
            Some(i) => write!(f, "keyword {:?}, record {i}: {}", self.keyword, self.reason),
            None => write!(f, "keyword {:?}: {}", self.keyword, self.reason),
        }
    }
}

/// Immutable keyword → synsets map loaded from a snapshot document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SnapshotStore {
    entries: BTreeMap<String, Vec<Synset>>,
    meta: SnapshotMeta,
}

impl SnapshotStore {
    /// Builds a store from already-validated entries.
    pub fn from_entries(
        meta: SnapshotMeta,
        entries: BTreeMap<String, Vec<Synset>>,
    ) -> Result<Self, Vec<SnapshotViolation>> {
        let violations: Vec<_> = entries
            .iter()
            .flat_map(|(keyword, synsets)| entry_violations(keyword, synsets))
            .collect();
        if violations.is_empty() {
            Ok(SnapshotStore { entries, meta })
        } else {
            Err(violations)
        }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, KbError> {
        let root: Value = serde_json::from_str(text).map_err(|e| KbError::SnapshotParse {
            path: origin.to_string(),
            reason: e.to_string(),
        })?;
        let Value::Object(map) = root else {
            return Err(KbError::SnapshotParse {
                path: origin.to_string(),
                reason: "top level is not an object".into(),
            });
        };

        let mut meta = SnapshotMeta::default();
        let mut entries = BTreeMap::new();
        let mut violations = Vec::new();
        for (keyword, value) in map {
            if keyword == META_KEY {
                meta = serde_json::from_value(value).map_err(|e| KbError::SnapshotParse {
                    path: origin.to_string(),
                    reason: format!("bad {META_KEY} object: {e}"),
                })?;
                continue;
            }
            let Value::Array(items) = value else {
                violations.push(SnapshotViolation {
                    keyword,
                    record: None,
                    reason: "entry is not an array".into(),
                });
                continue;
            };
            let mut synsets = Vec::with_capacity(items.len());
            let mut decoded = true;
            for (index, item) in items.into_iter().enumerate() {
                match serde_json::from_value::<SynsetRecord>(item) {
                    Ok(record) => synsets.push(record.into_synset(&keyword)),
                    Err(e) => {
                        decoded = false;
                        violations.push(SnapshotViolation {
                            keyword: keyword.clone(),
                            record: Some(index),
                            reason: e.to_string(),
                        });
                    }
                }
            }
            if decoded {
                violations.extend(entry_violations(&keyword, &synsets));
            }
            entries.insert(keyword, synsets);
        }

        if !violations.is_empty() {
            return Err(KbError::SnapshotInvalid {
                path: origin.to_string(),
                violations,
            });
        }
        Ok(SnapshotStore { entries, meta })
    }

    /// Synsets for `keyword`; empty when the snapshot has no entry.
    pub fn get(&self, keyword: &str) -> &[Synset] {
        self.entries.get(keyword).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn meta(&self) -> &SnapshotMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Pretty-printed snapshot document.
    pub fn to_json(&self) -> String {
        let mut root = serde_json::Map::new();
        if self.meta != SnapshotMeta::default() {
            root.insert(META_KEY.into(), serde_json::to_value(&self.meta).unwrap());
        }
        for (keyword, synsets) in &self.entries {
            let records: Vec<SynsetRecord> = synsets.iter().map(SynsetRecord::from).collect();
            root.insert(keyword.clone(), serde_json::to_value(records).unwrap());
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(root)).unwrap();
        text.push('\n');
        text
    }
}

fn entry_violations(keyword: &str, synsets: &[Synset]) -> Vec<SnapshotViolation> {
    let mut out = Vec::new();
    if keyword.is_empty() || normalize_keyword(keyword) != keyword {
        out.push(SnapshotViolation {
            keyword: keyword.to_string(),
            record: None,
            reason: "key is not a normalized keyword".into(),
        });
    }
    if let Err((index, reason)) = validate_response(keyword, synsets) {
        out.push(SnapshotViolation {
            keyword: keyword.to_string(),
            record: Some(index),
            reason,
        });
    }
    out
}

/// Reads and validates a snapshot file.
pub fn load_snapshot(path: &Path) -> Result<SnapshotStore, KbError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| KbError::SnapshotIo {
        path: origin.clone(),
        source,
    })?;
    SnapshotStore::parse(&text, &origin)
}

impl SynsetProvider for SnapshotStore {
    fn fetch_synsets(&self, keyword: &str) -> Result<Vec<Synset>, KbError> {
        if keyword.is_empty() || normalize_keyword(keyword) != keyword {
            return Err(KbError::InvalidKeyword(keyword.to_string()));
        }
        Ok(self.get(keyword).to_vec())
    }

    fn backend_tag(&self) -> String {
        match &self.meta.source {
            Some(source) => format!("snapshot:{source}"),
            None => "snapshot".into(),
        }
    }
}
