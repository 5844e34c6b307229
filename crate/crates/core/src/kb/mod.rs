//! Knowledge-base access: the synset type, the provider abstraction and its
//! backends.
//!
//! A provider maps a normalized keyword to the list of synsets the backend
//! knows for it, in backend order. An empty list means "no data" and is never
//! an error; transport problems are reported separately so callers can tell
//! the two apart.

mod cache;
mod remote;
mod snapshot;

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{CacheEntry, CacheLookup, CachedProvider, DiskCache};
pub use remote::{
    HttpTransport, RateLimiter, RemoteBackend, RemoteSettings, Transport, TransportError, KB_KEY_ENV,
};
pub use snapshot::{load_snapshot, SnapshotMeta, SnapshotStore, SnapshotViolation};

/// One knowledge-base sense of a keyword.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synset {
    pub id: String,
    /// The normalized keyword that produced this synset.
    pub lemma: String,
    pub categories: Vec<String>,
    pub domains: Vec<String>,
    pub synonyms: Vec<String>,
}

impl Synset {
    /// Checks the per-synset invariants: non-empty id, no empty or duplicate
    /// labels in any of the three label lists.
    pub fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("synset id is empty".into());
        }
        for (field, values) in [
            ("categories", &self.categories),
            ("domains", &self.domains),
            ("synonyms", &self.synonyms),
        ] {
            let mut seen = HashSet::new();
            for value in values {
                if value.is_empty() {
                    return Err(format!("synset {}: empty string in {field}", self.id));
                }
                if !seen.insert(value.as_str()) {
                    return Err(format!("synset {}: duplicate {field} entry {value:?}", self.id));
                }
            }
        }
        Ok(())
    }
}

/// Validates a whole provider response: every synset valid, ids unique, and
/// every lemma equal to the queried keyword.
pub fn validate_response(keyword: &str, synsets: &[Synset]) -> Result<(), (usize, String)> {
    let mut ids = HashSet::new();
    for (index, synset) in synsets.iter().enumerate() {
        synset.validate().map_err(|reason| (index, reason))?;
        if !ids.insert(synset.id.as_str()) {
            return Err((index, format!("duplicate synset id {:?}", synset.id)));
        }
        if synset.lemma != keyword {
            return Err((
                index,
                format!("lemma {:?} does not match keyword {keyword:?}", synset.lemma),
            ));
        }
    }
    Ok(())
}

/// Trims, collapses internal whitespace runs to one space and lowercases.
///
/// An empty result means the keyword is unusable.
pub fn normalize_keyword(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Error)]
pub enum KbError {
    /// The backend could not be reached or answered with a non-success
    /// status. Retriable.
    #[error("transport failure: {0}")]
    Transport(String),
    /// The backend answered, but a record could not be decoded.
    #[error("malformed backend payload for {keyword:?} (record {record}): {reason}")]
    Decode {
        keyword: String,
        record: String,
        reason: String,
    },
    #[error("keyword {0:?} is not normalized")]
    InvalidKeyword(String),
    #[error("snapshot {path}: {source}")]
    SnapshotIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("snapshot {path} is not a valid document: {reason}")]
    SnapshotParse { path: String, reason: String },
    #[error("snapshot {path} violates synset invariants:\n{}", format_violations(.violations))]
    SnapshotInvalid {
        path: String,
        violations: Vec<SnapshotViolation>,
    },
    #[error("cache {path}: {source}")]
    CacheIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn format_violations(violations: &[SnapshotViolation]) -> String {
    violations
        .iter()
        .map(|v| format!("  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl KbError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, KbError::Transport(_))
    }
}

/// A source of synsets for normalized keywords.
pub trait SynsetProvider: Send + Sync {
    /// All synsets known for `keyword`, in backend order.
    fn fetch_synsets(&self, keyword: &str) -> Result<Vec<Synset>, KbError>;

    /// Identifies the backend in cache records, e.g. `snapshot:<source>`.
    fn backend_tag(&self) -> String;

    /// Upper bound on concurrent fetches this provider wants.
    fn parallelism(&self) -> usize {
        1
    }
}

impl<P: SynsetProvider + ?Sized> SynsetProvider for &P {
    fn fetch_synsets(&self, keyword: &str) -> Result<Vec<Synset>, KbError> {
        (**self).fetch_synsets(keyword)
    }

    fn backend_tag(&self) -> String {
        (**self).backend_tag()
    }

    fn parallelism(&self) -> usize {
        (**self).parallelism()
    }
}

impl<P: SynsetProvider + ?Sized> SynsetProvider for Box<P> {
    fn fetch_synsets(&self, keyword: &str) -> Result<Vec<Synset>, KbError> {
        (**self).fetch_synsets(keyword)
    }

    fn backend_tag(&self) -> String {
        (**self).backend_tag()
    }

    fn parallelism(&self) -> usize {
        (**self).parallelism()
    }
}

/// Fetches every keyword, running up to `provider.parallelism()` fetches at
/// once. Results come back in input order; the first error wins.
pub fn fetch_all<P: SynsetProvider + ?Sized>(
    provider: &P,
    keywords: &[String],
) -> Result<Vec<Vec<Synset>>, KbError> {
    let workers = provider.parallelism().clamp(1, keywords.len().max(1));
    if workers == 1 {
        return keywords.iter().map(|k| provider.fetch_synsets(k)).collect();
    }

    let next = AtomicUsize::new(0);
    type Slot = Mutex<Option<Result<Vec<Synset>, KbError>>>;
    let slots: Vec<Slot> = keywords.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= keywords.len() {
                    break;
                }
                let result = provider.fetch_synsets(&keywords[i]);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("every slot is filled"))
        .collect()
}
