//! Category-overlap inference for scientific articles.
//!
//! Each keyword of an article is resolved to knowledge-base synsets. The
//! categories carried by those synsets are pooled per keyword, scrubbed of
//! known noise labels, and then connected across keywords: a category is
//! assigned to the article when at least `min_support` distinct keywords
//! carry it. Multi-word keywords that resolve to nothing can be split into
//! tokens whose shared categories stand in for the original keyword.
//!
//! The crate is organised bottom-up:
//!
//! - [`kb`]: synset data type, snapshot/remote backends and the disk cache
//! - [`noise`]: glob-based noise filtering of category labels
//! - [`inference`]: per-keyword profiles and the category connection
//! - [`composed`]: the split-on-spaces fallback for composed keywords
//! - [`corpus`]: article ingestion, enrichment persistence and queries
//! - [`evaluation`]: precision / recall / coverage against gold labels

pub mod category;
pub mod composed;
pub mod config;
pub mod corpus;
pub mod evaluation;
pub mod inference;
pub mod kb;
pub mod noise;

pub use category::{fold_label, CategorySet};
pub use composed::{promote_to_profile, resolve_composed, tokenize_keyword, ComposedResolution};
pub use config::{config_fingerprint, ConfigError, ConfigFile};
pub use corpus::{
    corpus_stats, enrich_records, ingest, load_enriched, persist_enriched, query_by_category,
    ArticleRecord, CorpusError, CorpusStats, EnrichedArticle, ProfileRecord, QueryHit,
};
pub use evaluation::{evaluate, load_gold, threshold_sweep, EvaluationError, EvaluationReport, GoldLabel};
pub use inference::{
    build_profile, connect_categories, disambiguate_synsets, infer_article, ArticleInference,
    CategoryAssignment, InferenceConfig, InferenceError, KeywordProfile, ProfileSource, Tier,
};
pub use kb::{normalize_keyword, KbError, Synset, SynsetProvider};
pub use noise::{apply_noise_filter, NoisePolicy};
