//! Category-overlap connection between the keywords of one article.
//!
//! Every keyword contributes the union of its synsets' categories (minus
//! noise). A category is assigned to the article when it is carried by at
//! least `min_support` distinct keywords; the more keywords share it, the
//! higher the confidence. Synsets of a keyword can afterwards be narrowed to
//! those that carry one of the winning categories.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::CategorySet;
use crate::composed::{promote_to_profile, resolve_composed};
use crate::kb::{fetch_all, normalize_keyword, KbError, Synset, SynsetProvider};
use crate::noise::{apply_noise_filter, NoisePolicy};

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("keyword {0:?} appears more than once in one article")]
    DuplicateKeyword(String),
    #[error("min_support must be at least 2, got {0}")]
    InvalidMinSupport(usize),
    #[error("article has no usable keywords")]
    NoKeywords,
    #[error("composed keyword {0:?} derived no categories and cannot be promoted")]
    EmptyDerivation(String),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileSource {
    Direct,
    ComposedFallback,
}

/// A keyword together with its synsets and the categories it supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordProfile {
    pub keyword: String,
    pub synsets: Vec<Synset>,
    pub supported_categories: CategorySet,
    pub source: ProfileSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceConfig {
    /// Minimum number of distinct keywords that must share a category.
    pub min_support: usize,
    pub noise: NoisePolicy,
    pub composed_fallback: bool,
    pub language: String,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            min_support: 2,
            noise: NoisePolicy::default(),
            composed_fallback: true,
            language: "EN".into(),
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<(), InferenceError> {
        if self.min_support < 2 {
            return Err(InferenceError::InvalidMinSupport(self.min_support));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    /// Shared by three keywords or more.
    High,
    /// Shared by exactly two keywords.
    Standard,
}

impl Tier {
    pub fn from_support(support: usize) -> Tier {
        if support >= 3 {
            Tier::High
        } else {
            Tier::Standard
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryAssignment {
    pub category: String,
    pub supporting_keywords: BTreeSet<String>,
    pub support: usize,
    pub tier: Tier,
}

impl CategoryAssignment {
    pub fn new(category: impl Into<String>, supporting_keywords: BTreeSet<String>) -> Self {
        let support = supporting_keywords.len();
        CategoryAssignment {
            category: category.into(),
            supporting_keywords,
            support,
            tier: Tier::from_support(support),
        }
    }
}

/// Pools the categories of `synsets`, dropping noise when the policy is on.
pub fn build_profile(keyword: &str, synsets: Vec<Synset>, noise: &NoisePolicy) -> KeywordProfile {
    let pooled: CategorySet = synsets
        .iter()
        .flat_map(|s| s.categories.iter())
        .collect();
    KeywordProfile {
        keyword: keyword.to_string(),
        synsets,
        supported_categories: apply_noise_filter(&pooled, noise),
        source: ProfileSource::Direct,
    }
}

/// Folded category → (reported label, distinct supporters).
pub(crate) fn tally<'a>(
    members: impl IntoIterator<Item = (&'a str, &'a CategorySet)>,
) -> BTreeMap<String, (String, BTreeSet<String>)> {
    let mut counts: BTreeMap<String, (String, BTreeSet<String>)> = BTreeMap::new();
    for (name, categories) in members {
        for (folded, label) in categories.entries() {
            let slot = counts
                .entry(folded.to_string())
                .or_insert_with(|| (label.to_string(), BTreeSet::new()));
            if label < slot.0.as_str() {
                slot.0 = label.to_string();
            }
            slot.1.insert(name.to_string());
        }
    }
    counts
}

/// Assigns every category carried by at least `config.min_support` distinct
/// keywords, ordered by support (descending) then folded label.
pub fn connect_categories(
    profiles: &[KeywordProfile],
    config: &InferenceConfig,
) -> Result<Vec<CategoryAssignment>, InferenceError> {
    config.validate()?;
    let mut seen = HashSet::new();
    for profile in profiles {
        if !seen.insert(profile.keyword.as_str()) {
            return Err(InferenceError::DuplicateKeyword(profile.keyword.clone()));
        }
    }

    let counts = tally(
        profiles
            .iter()
            .map(|p| (p.keyword.as_str(), &p.supported_categories)),
    );
    let mut assignments: Vec<(String, CategoryAssignment)> = counts
        .into_iter()
        .filter(|(_, (_, keywords))| keywords.len() >= config.min_support)
        .map(|(folded, (label, keywords))| (folded, CategoryAssignment::new(label, keywords)))
        .collect();
    assignments.sort_by(|(fa, a), (fb, b)| b.support.cmp(&a.support).then_with(|| fa.cmp(fb)));
    Ok(assignments.into_iter().map(|(_, a)| a).collect())
}

/// Keeps the synsets of `profile` that carry at least one winning category,
/// in their original order.
pub fn disambiguate_synsets(profile: &KeywordProfile, winning: &CategorySet) -> Vec<Synset> {
    profile
        .synsets
        .iter()
        .filter(|s| winning.intersects(&s.categories))
        .cloned()
        .collect()
}

/// Categories of a list of assignments, as a set.
pub fn winning_categories(assignments: &[CategoryAssignment]) -> CategorySet {
    assignments.iter().map(|a| a.category.as_str()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleInference {
    pub assignments: Vec<CategoryAssignment>,
    pub profiles: Vec<KeywordProfile>,
}

/// Normalized, non-empty, first-occurrence-deduplicated keywords.
pub fn normalize_keywords<S: AsRef<str>>(raw: &[S]) -> Vec<String> {
    let mut seen = HashSet::new();
    raw.iter()
        .map(|k| normalize_keyword(k.as_ref()))
        .filter(|k| !k.is_empty() && seen.insert(k.clone()))
        .collect()
}

/// Runs the whole pipeline for one article: normalize, fetch, profile, fall
/// back on composed keywords that returned nothing, connect.
pub fn infer_article<S, P>(
    keywords: &[S],
    provider: &P,
    config: &InferenceConfig,
) -> Result<ArticleInference, InferenceError>
where
    S: AsRef<str>,
    P: SynsetProvider + ?Sized,
{
    config.validate()?;
    let keywords = normalize_keywords(keywords);
    if keywords.is_empty() {
        return Err(InferenceError::NoKeywords);
    }

    let fetched = fetch_all(provider, &keywords)?;
    let mut profiles = Vec::with_capacity(keywords.len());
    for (keyword, synsets) in keywords.iter().zip(fetched) {
        if synsets.is_empty() && config.composed_fallback {
            if let Some(resolution) = resolve_composed(keyword, provider, config)? {
                profiles.push(promote_to_profile(&resolution)?);
                continue;
            }
        }
        profiles.push(build_profile(keyword, synsets, &config.noise));
    }

    let assignments = connect_categories(&profiles, config)?;
    Ok(ArticleInference {
        assignments,
        profiles,
    })
}
