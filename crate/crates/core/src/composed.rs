//! Fallback for composed (multi-word) keywords that resolve to nothing.
//!
//! The keyword is split on spaces, every token is looked up on its own, and
//! the categories shared by at least two distinct tokens are kept. Unrelated
//! senses of the tokens drop out the same way they do at article level. The
//! surviving categories then stand in for the original keyword as a single
//! profile.

use crate::category::CategorySet;
use crate::inference::{tally, InferenceConfig, InferenceError, KeywordProfile, ProfileSource};
use crate::kb::{fetch_all, SynsetProvider};
use crate::noise::apply_noise_filter;

/// Distinct tokens that must share a category for it to be derived.
pub const TOKEN_MIN_SUPPORT: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedResolution {
    pub original: String,
    pub tokens: Vec<String>,
    /// Synsets returned per token, aligned with `tokens`.
    pub token_synset_counts: Vec<usize>,
    pub derived_categories: CategorySet,
}

/// Splits a normalized keyword on spaces, dropping one-character tokens and
/// repeats. Returns an empty list when fewer than two tokens remain.
pub fn tokenize_keyword(keyword: &str) -> Vec<String> {
    let mut tokens: Vec<String> = Vec::new();
    for token in keyword.split(' ') {
        if token.chars().count() >= 2 && !tokens.iter().any(|t| t == token) {
            tokens.push(token.to_string());
        }
    }
    if tokens.len() < 2 {
        tokens.clear();
    }
    tokens
}

/// Derives categories for `keyword` from its tokens. `Ok(None)` when the
/// fallback is disabled, the keyword has fewer than two usable tokens, or no
/// category is shared by two tokens.
pub fn resolve_composed<P: SynsetProvider + ?Sized>(
    keyword: &str,
    provider: &P,
    config: &InferenceConfig,
) -> Result<Option<ComposedResolution>, InferenceError> {
    if !config.composed_fallback {
        return Ok(None);
    }
    let tokens = tokenize_keyword(keyword);
    if tokens.is_empty() {
        return Ok(None);
    }

    let fetched = fetch_all(provider, &tokens)?;
    let token_synset_counts = fetched.iter().map(Vec::len).collect();
    let token_categories: Vec<CategorySet> = fetched
        .iter()
        .map(|synsets| {
            let pooled: CategorySet = synsets.iter().flat_map(|s| s.categories.iter()).collect();
            apply_noise_filter(&pooled, &config.noise)
        })
        .collect();

    let mut derived_categories = CategorySet::new();
    let counts = tally(tokens.iter().map(String::as_str).zip(&token_categories));
    for (label, supporters) in counts.values() {
        if supporters.len() >= TOKEN_MIN_SUPPORT {
            derived_categories.insert(label);
        }
    }
    if derived_categories.is_empty() {
        return Ok(None);
    }

    Ok(Some(ComposedResolution {
        original: keyword.to_string(),
        tokens,
        token_synset_counts,
        derived_categories,
    }))
}

/// Turns a resolution into a profile that counts as one keyword in the
/// article-level connection.
pub fn promote_to_profile(resolution: &ComposedResolution) -> Result<KeywordProfile, InferenceError> {
    if resolution.derived_categories.is_empty() {
        return Err(InferenceError::EmptyDerivation(resolution.original.clone()));
    }
    Ok(KeywordProfile {
        keyword: resolution.original.clone(),
        synsets: Vec::new(),
        supported_categories: resolution.derived_categories.clone(),
        source: ProfileSource::ComposedFallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{connect_categories, infer_article};
    use crate::kb::{SnapshotMeta, SnapshotStore, Synset};
    use crate::noise::NoisePolicy;

    fn synset(id: &str, lemma: &str, categories: &[&str]) -> Synset {
        Synset {
            id: id.into(),
            lemma: lemma.into(),
            categories: categories.iter().map(|s| s.to_string()).collect(),
            domains: vec![],
            synonyms: vec![],
        }
    }

    fn store(entries: &[(&str, &[&[&str]])]) -> SnapshotStore {
        let entries = entries
            .iter()
            .map(|(keyword, synsets)| {
                let synsets = synsets
                    .iter()
                    .enumerate()
                    .map(|(i, cats)| synset(&format!("bn:{keyword}:{i}"), keyword, cats))
                    .collect();
                (keyword.to_string(), synsets)
            })
            .collect();
        SnapshotStore::from_entries(SnapshotMeta::default(), entries).unwrap()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize_keyword("flapping flight"), vec!["flapping", "flight"]);
        assert!(tokenize_keyword("gravity").is_empty());
        assert_eq!(tokenize_keyword("x ray diffraction"), vec!["ray", "diffraction"]);
        assert!(tokenize_keyword("x ray").is_empty());
        assert!(tokenize_keyword("flight flight").is_empty());
        assert_eq!(tokenize_keyword("of mice of men"), vec!["of", "mice", "men"]);
    }

    #[test]
    fn shared_token_category_is_derived() {
        let s = store(&[
            ("flapping", &[&["Aerodynamics", "Wing design"], &["Phonetics"]]),
            ("flight", &[&["Aviation"], &["Aerodynamics"], &["Stairs"]]),
        ]);
        let r = resolve_composed("flapping flight", &s, &InferenceConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(r.tokens, vec!["flapping", "flight"]);
        assert_eq!(r.token_synset_counts, vec![2, 3]);
        assert_eq!(r.derived_categories.iter().collect::<Vec<_>>(), vec!["Aerodynamics"]);
    }

    #[test]
    fn disjoint_tokens_are_not_applicable() {
        let s = store(&[("flapping", &[&["Phonetics"]]), ("flight", &[&["Aviation"]])]);
        assert!(resolve_composed("flapping flight", &s, &InferenceConfig::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn any_two_of_three_tokens_suffice() {
        let s = store(&[
            ("insect", &[&["Entomology", "Animal locomotion"]]),
            ("flight", &[&["Aviation"], &["animal locomotion"]]),
            ("dynamics", &[&["Classical mechanics", "Entomology"]]),
        ]);
        let r = resolve_composed("insect flight dynamics", &s, &InferenceConfig::default())
            .unwrap()
            .unwrap();
        // Entomology: tokens 1 and 3; Animal locomotion: tokens 1 and 2
        assert_eq!(
            r.derived_categories.iter().collect::<Vec<_>>(),
            vec!["Animal locomotion", "Entomology"]
        );
    }

    #[test]
    fn noise_is_filtered_at_token_level() {
        let s = store(&[
            ("dark", &[&["Living people", "2012_album"]]),
            ("matter", &[&["Living people", "2012_album"]]),
        ]);
        let cfg = InferenceConfig::default();
        assert!(resolve_composed("dark matter", &s, &cfg).unwrap().is_none());
        let cfg = InferenceConfig {
            noise: NoisePolicy::disabled(),
            ..cfg
        };
        let r = resolve_composed("dark matter", &s, &cfg).unwrap().unwrap();
        assert_eq!(r.derived_categories.len(), 2);
    }

    #[test]
    fn disabled_fallback_resolves_nothing() {
        let s = store(&[("flapping", &[&["A"]]), ("flight", &[&["A"]])]);
        let cfg = InferenceConfig {
            composed_fallback: false,
            ..InferenceConfig::default()
        };
        assert!(resolve_composed("flapping flight", &s, &cfg).unwrap().is_none());
    }

    #[test]
    fn promotion() {
        let r = ComposedResolution {
            original: "flapping flight".into(),
            tokens: vec!["flapping".into(), "flight".into()],
            token_synset_counts: vec![3, 25],
            derived_categories: ["Aerodynamics"].into_iter().collect(),
        };
        let p = promote_to_profile(&r).unwrap();
        assert_eq!(p.keyword, "flapping flight");
        assert!(p.synsets.is_empty());
        assert_eq!(p.source, ProfileSource::ComposedFallback);
        assert!(p.supported_categories.contains("Aerodynamics"));

        let empty = ComposedResolution {
            derived_categories: CategorySet::new(),
            ..r
        };
        assert!(matches!(
            promote_to_profile(&empty),
            Err(InferenceError::EmptyDerivation(_))
        ));
    }

    #[test]
    fn two_composed_keywords_reach_support_two() {
        let s = store(&[
            ("flapping", &[&["Aerodynamics"]]),
            ("flight", &[&["Aerodynamics"]]),
            ("wing", &[&["Aerodynamics"]]),
            ("loading", &[&["Aerodynamics"]]),
        ]);
        let out = infer_article(&["flapping flight", "wing loading"], &s, &InferenceConfig::default())
            .unwrap();
        assert_eq!(out.assignments.len(), 1);
        assert_eq!(out.assignments[0].category, "Aerodynamics");
        assert_eq!(out.assignments[0].support, 2);
        assert!(out
            .profiles
            .iter()
            .all(|p| p.source == ProfileSource::ComposedFallback));
    }

    #[test]
    fn fallback_profile_counts_once() {
        // three tokens all carry X, but the composed keyword is one supporter
        let s = store(&[
            ("aa", &[&["X"]]),
            ("bb", &[&["X"]]),
            ("cc", &[&["X"]]),
            ("dd", &[&["X"]]),
        ]);
        let r = resolve_composed("aa bb cc", &s, &InferenceConfig::default())
            .unwrap()
            .unwrap();
        let profiles = [promote_to_profile(&r).unwrap()];
        let cfg = InferenceConfig::default();
        assert!(connect_categories(&profiles, &cfg).unwrap().is_empty());
        let out = infer_article(&["aa bb cc", "dd"], &s, &cfg).unwrap();
        assert_eq!(out.assignments[0].support, 2);
    }

    #[test]
    fn fallback_only_triggers_on_empty_direct_lookup() {
        let s = store(&[
            ("flapping flight", &[&["Ornithology"]]),
            ("flapping", &[&["Aerodynamics"]]),
            ("flight", &[&["Aerodynamics"]]),
            ("vortex shedding", &[&["Aerodynamics"]]),
        ]);
        let out = infer_article(
            &["flapping flight", "vortex shedding"],
            &s,
            &InferenceConfig::default(),
        )
        .unwrap();
        assert!(out.assignments.is_empty());
        assert_eq!(out.profiles[0].source, ProfileSource::Direct);
    }
}
