mod common;

use common::{bundled_snapshot, fixture};
use synsem_core::inference::winning_categories;
use synsem_core::kb::SynsetProvider;
use synsem_core::{
    build_profile, connect_categories, disambiguate_synsets, infer_article, ingest,
    promote_to_profile, resolve_composed, CategorySet, InferenceConfig, NoisePolicy,
    ProfileSource, Tier,
};

const GRAVITY: [&str; 3] = ["nonlocal gravity", "celestial mechanics", "dark matter"];
const FLIGHT: [&str; 3] = ["vortex shedding", "flapping flight", "insect flight dynamics"];

fn categories(assignments: &[synsem_core::CategoryAssignment]) -> Vec<&str> {
    assignments.iter().map(|a| a.category.as_str()).collect()
}

#[test]
fn flapping_and_flight_synset_counts() {
    let store = bundled_snapshot();
    assert_eq!(store.fetch_synsets("flapping").unwrap().len(), 3);
    assert_eq!(store.fetch_synsets("flight").unwrap().len(), 25);
    assert!(store.fetch_synsets("flapping flight").unwrap().is_empty());
}

#[test]
fn flapping_and_flight_share_exactly_aerodynamics() {
    let store = bundled_snapshot();
    let pool = |k: &str| -> CategorySet {
        store.get(k).iter().flat_map(|s| s.categories.iter()).collect()
    };
    let flapping = pool("flapping");
    let flight = pool("flight");
    let shared: Vec<&str> = flight.iter().filter(|c| flapping.contains(c)).collect();
    assert_eq!(shared, vec!["Aerodynamics"]);
}

#[test]
fn only_one_flight_keyword_returns_data() {
    let store = bundled_snapshot();
    let with_data: Vec<&str> = FLIGHT
        .iter()
        .copied()
        .filter(|k| !store.get(k).is_empty())
        .collect();
    assert_eq!(with_data, vec!["vortex shedding"]);
}

#[test]
fn unfiltered_gravity_article_is_dominated_by_noise() {
    let store = bundled_snapshot();
    let config = InferenceConfig {
        noise: NoisePolicy::disabled(),
        ..InferenceConfig::default()
    };
    let out = infer_article(&GRAVITY, &store, &config).unwrap();
    assert_eq!(
        categories(&out.assignments),
        vec![
            "Living people",
            "American films",
            "Celestial mechanics",
            "English-language films"
        ]
    );
    assert_eq!(out.assignments[0].tier, Tier::High);
}

#[test]
fn filtered_gravity_article_keeps_celestial_mechanics() {
    let store = bundled_snapshot();
    let out = infer_article(&GRAVITY, &store, &InferenceConfig::default()).unwrap();
    assert_eq!(categories(&out.assignments), vec!["Celestial mechanics"]);
    let a = &out.assignments[0];
    assert_eq!(a.support, 2);
    assert_eq!(
        a.supporting_keywords.iter().collect::<Vec<_>>(),
        vec!["celestial mechanics", "nonlocal gravity"]
    );

    // disambiguation keeps the physics senses only
    let winning = winning_categories(&out.assignments);
    let kept: Vec<String> = out
        .profiles
        .iter()
        .flat_map(|p| disambiguate_synsets(p, &winning))
        .map(|s| s.id)
        .collect();
    assert_eq!(kept, vec!["bn:fx-nlg-01", "bn:fx-cm-01"]);
}

#[test]
fn raw_keyword_variants_normalize_to_the_same_result() {
    let store = bundled_snapshot();
    let messy = ["  Nonlocal   Gravity", "CELESTIAL MECHANICS ", "dark matter", "Dark Matter"];
    let a = infer_article(&messy, &store, &InferenceConfig::default()).unwrap();
    let b = infer_article(&GRAVITY, &store, &InferenceConfig::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fig1_article_without_fallback_has_no_assignment() {
    let store = bundled_snapshot();
    let config = InferenceConfig {
        composed_fallback: false,
        ..InferenceConfig::default()
    };
    let out = infer_article(&FLIGHT, &store, &config).unwrap();
    assert!(out.assignments.is_empty());
    assert_eq!(out.profiles.len(), 3);
}

#[test]
fn fig1_article_with_fallback_gains_aerodynamics() {
    let store = bundled_snapshot();
    let out = infer_article(&FLIGHT, &store, &InferenceConfig::default()).unwrap();
    assert_eq!(categories(&out.assignments), vec!["Aerodynamics"]);
    assert_eq!(
        out.assignments[0].supporting_keywords.iter().collect::<Vec<_>>(),
        vec!["flapping flight", "vortex shedding"]
    );
    let sources: Vec<_> = out.profiles.iter().map(|p| p.source).collect();
    assert_eq!(
        sources,
        vec![
            ProfileSource::Direct,
            ProfileSource::ComposedFallback,
            ProfileSource::Direct
        ]
    );
}

#[test]
fn fig2_resolution_and_disambiguation() {
    let store = bundled_snapshot();
    let config = InferenceConfig::default();
    let r = resolve_composed("flapping flight", &store, &config)
        .unwrap()
        .unwrap();
    assert_eq!(r.tokens, vec!["flapping", "flight"]);
    assert_eq!(r.token_synset_counts, vec![3, 25]);
    assert_eq!(r.derived_categories.iter().collect::<Vec<_>>(), vec!["Aerodynamics"]);

    let profile = promote_to_profile(&r).unwrap();
    assert_eq!(profile.keyword, "flapping flight");
    assert_eq!(profile.source, ProfileSource::ComposedFallback);

    let flight = build_profile(
        "flight",
        store.fetch_synsets("flight").unwrap(),
        &config.noise,
    );
    let kept = disambiguate_synsets(&flight, &r.derived_categories);
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0].id, "bn:fx-fl-01");

    // the two tokens connect on Aerodynamics at keyword level too
    let flapping = build_profile(
        "flapping",
        store.fetch_synsets("flapping").unwrap(),
        &config.noise,
    );
    let out = connect_categories(&[flapping, flight], &config).unwrap();
    assert_eq!(categories(&out), vec!["Aerodynamics"]);
}

#[test]
fn insect_flight_dynamics_stays_unresolved() {
    let store = bundled_snapshot();
    assert!(
        resolve_composed("insect flight dynamics", &store, &InferenceConfig::default())
            .unwrap()
            .is_none()
    );
}

#[test]
fn bundled_article_files_ingest() {
    let gravity = ingest(&fixture("gravity_articles.jsonl")).unwrap();
    assert_eq!(gravity.len(), 1);
    assert_eq!(gravity[0].keywords, GRAVITY);
    let flight = ingest(&fixture("flight_articles.jsonl")).unwrap();
    assert_eq!(flight[0].keywords, FLIGHT);
}
