//! Persistent per-keyword synset cache.
//!
//! One JSON file per keyword, named by the SHA-256 of the normalized keyword.
//! Files are replaced atomically, so concurrent writers of the same key end
//! with whichever rename landed last.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::snapshot::SynsetRecord;
use super::{validate_response, KbError, Synset, SynsetProvider};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub keyword: String,
    pub synsets: Vec<Synset>,
    pub fetched_at: DateTime<Utc>,
    pub backend_tag: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheRecord {
    keyword: String,
    synsets: Vec<SynsetRecord>,
    fetched_at: String,
    backend_tag: String,
}

impl CacheEntry {
    fn to_record(&self) -> CacheRecord {
        CacheRecord {
            keyword: self.keyword.clone(),
            synsets: self.synsets.iter().map(SynsetRecord::from).collect(),
            fetched_at: self.fetched_at.to_rfc3339_opts(SecondsFormat::Secs, true),
            backend_tag: self.backend_tag.clone(),
        }
    }

    fn from_record(record: CacheRecord) -> Result<Self, String> {
        let fetched_at = DateTime::parse_from_rfc3339(&record.fetched_at)
            .map_err(|e| format!("bad fetched_at: {e}"))?
            .with_timezone(&Utc);
        let synsets: Vec<Synset> = record
            .synsets
            .into_iter()
            .map(|r| r.into_synset(&record.keyword))
            .collect();
        validate_response(&record.keyword, &synsets)
            .map_err(|(i, reason)| format!("record {i}: {reason}"))?;
        Ok(CacheEntry {
            keyword: record.keyword,
            synsets,
            fetched_at,
            backend_tag: record.backend_tag,
        })
    }
}

/// Result of one cached fetch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheLookup {
    pub synsets: Vec<Synset>,
    pub hit: bool,
    /// Set when an existing record was unreadable and got overwritten.
    pub warning: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    /// Opens (creating if needed) a cache directory.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, KbError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| KbError::CacheIo {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(DiskCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, keyword: &str) -> PathBuf {
        let digest = Sha256::digest(keyword.as_bytes());
        self.dir.join(format!("{}.json", hex::encode(digest)))
    }

    /// `Ok(None)` when no record exists, `Err(reason)` when it is corrupt.
    pub fn read(&self, keyword: &str) -> Result<Option<CacheEntry>, String> {
        let path = self.path_for(keyword);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(format!("{}: {e}", path.display())),
        };
        let record: CacheRecord = serde_json::from_str(&text)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        if record.keyword != keyword {
            return Err(format!(
                "{}: holds keyword {:?}, expected {keyword:?}",
                path.display(),
                record.keyword
            ));
        }
        CacheEntry::from_record(record)
            .map(Some)
            .map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn write(&self, entry: &CacheEntry) -> Result<(), KbError> {
        let path = self.path_for(&entry.keyword);
        let io_err = |source| KbError::CacheIo {
            path: path.display().to_string(),
            source,
        };
        let mut json = serde_json::to_string(&entry.to_record()).expect("cache record serializes");
        json.push('\n');
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io_err)?;
        tmp.write_all(json.as_bytes()).map_err(io_err)?;
        tmp.persist(&path).map_err(|e| io_err(e.error))?;
        Ok(())
    }

    /// Removes every cache record.
    pub fn clear(&self) -> Result<usize, KbError> {
        let mut removed = 0;
        for path in self.record_paths()? {
            fs::remove_file(&path).map_err(|source| KbError::CacheIo {
                path: path.display().to_string(),
                source,
            })?;
            removed += 1;
        }
        Ok(removed)
    }

    /// All readable records, ordered by keyword, plus one message per corrupt
    /// file.
    pub fn entries(&self) -> Result<(Vec<CacheEntry>, Vec<String>), KbError> {
        let mut entries = Vec::new();
        let mut problems = Vec::new();
        for path in self.record_paths()? {
            let parsed = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<CacheRecord>(&t).map_err(|e| e.to_string()))
                .and_then(CacheEntry::from_record);
            match parsed {
                Ok(entry) => entries.push(entry),
                Err(e) => problems.push(format!("{}: {e}", path.display())),
            }
        }
        entries.sort_by(|a, b| a.keyword.cmp(&b.keyword));
        Ok((entries, problems))
    }

    fn record_paths(&self) -> Result<Vec<PathBuf>, KbError> {
        let listing = fs::read_dir(&self.dir).map_err(|source| KbError::CacheIo {
            path: self.dir.display().to_string(),
            source,
        })?;
        let mut paths: Vec<PathBuf> = listing
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        Ok(paths)
    }

    /// Returns the cached synsets for `keyword`, fetching and storing them on
    /// a miss. Empty results are cached like any other.
    ///
    /// A record written by a different backend, or older than `ttl`, counts
    /// as a miss.
    pub fn cached_fetch<P: SynsetProvider + ?Sized>(
        &self,
        keyword: &str,
        provider: &P,
        ttl: Option<Duration>,
    ) -> Result<CacheLookup, KbError> {
        let tag = provider.backend_tag();
        let mut warning = None;
        match self.read(keyword) {
            Ok(Some(entry)) if entry.backend_tag == tag && !expired(&entry, ttl) => {
                return Ok(CacheLookup {
                    synsets: entry.synsets,
                    hit: true,
                    warning: None,
                });
            }
            Ok(_) => {}
            Err(reason) => warning = Some(format!("corrupt cache record overwritten: {reason}")),
        }

        let synsets = provider.fetch_synsets(keyword)?;
        self.write(&CacheEntry {
            keyword: keyword.to_string(),
            synsets: synsets.clone(),
            fetched_at: Utc::now(),
            backend_tag: tag,
        })?;
        Ok(CacheLookup {
            synsets,
            hit: false,
            warning,
        })
    }
}

fn expired(entry: &CacheEntry, ttl: Option<Duration>) -> bool {
    let Some(ttl) = ttl else { return false };
    let age = Utc::now().signed_duration_since(entry.fetched_at);
    age.to_std().map(|age| age > ttl).unwrap_or(false)
}

/// A provider that answers from a [`DiskCache`] before asking `inner`.
pub struct CachedProvider<P> {
    inner: P,
    cache: DiskCache,
    ttl: Option<Duration>,
    warnings: Mutex<Vec<String>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl<P: SynsetProvider> CachedProvider<P> {
    /// `ttl = None` keeps records forever.
    pub fn new(inner: P, cache: DiskCache, ttl: Option<Duration>) -> Self {
        CachedProvider {
            inner,
            cache,
            ttl,
            warnings: Mutex::new(Vec::new()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn cache(&self) -> &DiskCache {
        &self.cache
    }

    pub fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut *self.warnings.lock().unwrap())
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}

impl<P: SynsetProvider> SynsetProvider for CachedProvider<P> {
    fn fetch_synsets(&self, keyword: &str) -> Result<Vec<Synset>, KbError> {
        let lookup = self.cache.cached_fetch(keyword, &self.inner, self.ttl)?;
        if lookup.hit {
            self.hits.fetch_add(1, Ordering::Relaxed);
        } else {
            self.misses.fetch_add(1, Ordering::Relaxed);
        }
        if let Some(warning) = lookup.warning {
            log::warn!("{warning}");
            self.warnings.lock().unwrap().push(warning);
        }
        Ok(lookup.synsets)
    }

    fn backend_tag(&self) -> String {
        self.inner.backend_tag()
    }

    fn parallelism(&self) -> usize {
        self.inner.parallelism()
    }
}
