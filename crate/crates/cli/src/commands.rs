use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};

use synsem_core::config::ConfigFile;
use synsem_core::evaluation::{evaluate_by_journal, load_gold, threshold_sweep};
use synsem_core::kb::{
    load_snapshot, CachedProvider, DiskCache, KbError, RemoteBackend, SnapshotMeta, SnapshotStore,
    SynsetProvider,
};
use synsem_core::{
    corpus_stats, enrich_records, ingest, load_enriched, persist_enriched, query_by_category,
    CategorySet,
};

use crate::exit::Failure;

const DEFAULT_REMOTE_CACHE: &str = ".synsem-cache";
const EPOCH: &str = "1970-01-01T00:00:00Z";

pub enum BackendChoice {
    Snapshot(PathBuf),
    Remote,
}

pub struct EnrichArgs {
    pub articles: PathBuf,
    pub config: Option<PathBuf>,
    pub backend: BackendChoice,
    pub out: PathBuf,
    pub language: Option<String>,
    pub kb_url: Option<String>,
    pub cache_dir: Option<PathBuf>,
}

fn rfc3339(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// `SOURCE_DATE_EPOCH` as an RFC 3339 timestamp, when set and valid.
fn source_date_epoch() -> Option<String> {
    let secs: i64 = std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()?;
    DateTime::from_timestamp(secs, 0).map(|t| rfc3339(&t))
}

pub fn enrich(args: EnrichArgs) -> Result<(), Failure> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut config = file.inference();
    let mut remote = file.remote();
    if let Some(language) = &args.language {
        config.language = language.clone();
        remote.language = language.clone();
    }
    if let Some(url) = &args.kb_url {
        remote.base_url = url.clone();
    }

    let records = ingest(&args.articles)?;

    let (provider, enriched_at): (Box<dyn SynsetProvider>, String) = match &args.backend {
        BackendChoice::Snapshot(path) => {
            let store = load_snapshot(path)?;
            let stamp = store.meta().created.clone().unwrap_or_else(|| EPOCH.into());
            let provider: Box<dyn SynsetProvider> = match &args.cache_dir {
                Some(dir) => Box::new(CachedProvider::new(store, DiskCache::open(dir)?, None)),
                None => Box::new(store),
            };
            (provider, stamp)
        }
        BackendChoice::Remote => {
            let settings = remote.with_env_key();
            let ttl = settings.cache_ttl();
            let dir = args
                .cache_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_REMOTE_CACHE));
            let backend = RemoteBackend::http(settings);
            let provider = CachedProvider::new(backend, DiskCache::open(dir)?, ttl);
            (Box::new(provider), rfc3339(&Utc::now()))
        }
    };
    let enriched_at = source_date_epoch().unwrap_or(enriched_at);

    let enriched = enrich_records(&records, &*provider, &config, &enriched_at)?;
    persist_enriched(&enriched, &args.out)?;

    let stats = corpus_stats(&enriched);
    let mut counts: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for record in &enriched {
        for a in &record.assignments {
            let slot = counts
                .entry(synsem_core::fold_label(&a.category))
                .or_insert_with(|| (a.category.clone(), 0));
            slot.1 += 1;
        }
    }
    let mut top: Vec<(String, usize)> = counts.into_values().collect();
    top.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let listed: Vec<String> = top
        .iter()
        .take(5)
        .map(|(label, n)| format!("{label} ({n})"))
        .collect();
    let mut line = format!(
        "enriched {} articles: {} covered, {} distinct categories",
        stats.total_articles, stats.covered_articles, stats.distinct_categories
    );
    if !listed.is_empty() {
        line.push_str(&format!("; top: {}", listed.join(", ")));
    }
    println!("{line}");
    Ok(())
}

pub fn evaluate(
    enriched: &Path,
    gold: &Path,
    t_min: usize,
    t_max: usize,
    tsv: Option<&Path>,
    by_journal: bool,
) -> Result<(), Failure> {
    let corpus = load_enriched(enriched)?;
    let labels = load_gold(gold)?;
    let report = threshold_sweep(&corpus, &labels, t_min, t_max)?;
    print!("{}", report.render_table());

    if by_journal {
        let thresholds: Vec<usize> = (t_min..=t_max).collect();
        for (journal, report) in evaluate_by_journal(&corpus, &labels, &thresholds)? {
            println!();
            println!("journal: {journal}");
            print!("{}", report.render_table());
        }
    }
    if let Some(path) = tsv {
        write_atomic(path, report.to_tsv().as_bytes())?;
    }
    Ok(())
}

pub fn query(enriched: &Path, category: &str) -> Result<(), Failure> {
    let corpus = load_enriched(enriched)?;
    for hit in query_by_category(category, &corpus) {
        println!("{}\t{}", hit.id, hit.support);
    }
    Ok(())
}

pub fn stats(enriched: &Path) -> Result<(), Failure> {
    let corpus = load_enriched(enriched)?;
    let stats = corpus_stats(&corpus);
    println!("articles\t{}", stats.total_articles);
    println!("covered\t{}", stats.covered_articles);
    if stats.empty {
        println!("coverage\t0 (empty corpus)");
    } else {
        println!("coverage\t{:.4}", stats.coverage);
    }
    println!("distinct_categories\t{}", stats.distinct_categories);
    for (assignments, articles) in &stats.assignment_histogram {
        println!("articles_with_{assignments}_assignments\t{articles}");
    }
    Ok(())
}

pub fn snapshot_from_cache(cache_dir: &Path, out: &Path) -> Result<(), Failure> {
    if !cache_dir.is_dir() {
        return Err(Failure::input(format!(
            "cache directory {} does not exist",
            cache_dir.display()
        )));
    }
    let cache = DiskCache::open(cache_dir)?;
    let (entries, problems) = cache.entries()?;
    for problem in &problems {
        log::warn!("skipping unreadable cache record {problem}");
    }
    let created = entries
        .iter()
        .map(|e| e.fetched_at)
        .max()
        .map(|t| rfc3339(&t));
    let count = entries.len();
    let map = entries.into_iter().map(|e| (e.keyword, e.synsets)).collect();
    let meta = SnapshotMeta {
        source: Some("cache".into()),
        created,
    };
    let store = SnapshotStore::from_entries(meta, map).map_err(|violations| {
        Failure::input(
            KbError::SnapshotInvalid {
                path: cache_dir.display().to_string(),
                violations,
            }
            .to_string(),
        )
    })?;
    write_atomic(out, store.to_json().as_bytes())?;
    println!("wrote {} keywords to {}", count, out.display());
    Ok(())
}

pub fn snapshot_validate(path: &Path) -> Result<(), Failure> {
    let store = load_snapshot(path)?;
    let synsets: usize = store.keywords().map(|k| store.get(k).len()).sum();
    let categories: CategorySet = store
        .keywords()
        .flat_map(|k| store.get(k))
        .flat_map(|s| s.categories.iter())
        .collect();
    println!(
        "ok: {} keywords, {} synsets, {} distinct categories",
        store.len(),
        synsets,
        categories.len()
    );
    Ok(())
}

pub fn clear_cache(cache_dir: &Path) -> Result<(), Failure> {
    if !cache_dir.is_dir() {
        println!("removed 0 cache records");
        return Ok(());
    }
    let removed = DiskCache::open(cache_dir)?.clear()?;
    println!("removed {removed} cache records");
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let fail = |e: std::io::Error| Failure::input(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
