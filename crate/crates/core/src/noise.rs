//! Noise filtering of category labels.
//!
//! Some categories show up for almost any query and carry no scientific
//! meaning (singers, albums, films, biographies). They are removed from each
//! keyword's category set before keywords are connected.

use serde::{Deserialize, Serialize};

use crate::category::CategorySet;

/// Patterns shipped by default.
pub const DEFAULT_NOISE_PATTERNS: &[&str] = &[
    "*_singer",
    "*_album",
    "*singers",
    "*albums",
    "living people",
    "*-language films",
    "american films",
    "english-language films",
];

/// Glob patterns (`*` matches any run of characters, including none),
/// matched case-insensitively against whole labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoisePolicy {
    pub enabled: bool,
    pub patterns: Vec<String>,
}

impl Default for NoisePolicy {
    fn default() -> Self {
        NoisePolicy {
            enabled: true,
            patterns: DEFAULT_NOISE_PATTERNS.iter().map(|p| p.to_string()).collect(),
        }
    }
}

impl NoisePolicy {
    pub fn disabled() -> Self {
        NoisePolicy {
            enabled: false,
            ..NoisePolicy::default()
        }
    }

    pub fn with_patterns<I, S>(patterns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        NoisePolicy {
            enabled: true,
            patterns: patterns.into_iter().map(Into::into).collect(),
        }
    }

    /// Whether `label` would be removed by this policy.
    pub fn is_noise(&self, label: &str) -> bool {
        if !self.enabled {
            return false;
        }
        let label: Vec<char> = label.to_lowercase().chars().collect();
        self.patterns.iter().any(|p| {
            let pattern: Vec<char> = p.to_lowercase().chars().collect();
            wildcard_match(&pattern, &label)
        })
    }
}

/// Removes every label matched by at least one pattern; identity when the
/// policy is disabled.
pub fn apply_noise_filter(categories: &CategorySet, policy: &NoisePolicy) -> CategorySet {
    let mut kept = categories.clone();
    if policy.enabled && !policy.patterns.is_empty() {
        kept.retain(|label| !policy.is_noise(label));
    }
    kept
}

/// `*`-only glob match over whole strings.
fn wildcard_match(pattern: &[char], text: &[char]) -> bool {
    let (mut p, mut t) = (0, 0);
    // position of the last `*` seen and the text index it is currently
    // standing in for
    let mut backtrack: Option<(usize, usize)> = None;
    while t < text.len() {
        if p < pattern.len() && pattern[p] == '*' {
            backtrack = Some((p, t));
            p += 1;
        } else if p < pattern.len() && pattern[p] == text[t] {
            p += 1;
            t += 1;
        } else if let Some((star, consumed)) = backtrack {
            p = star + 1;
            t = consumed + 1;
            backtrack = Some((star, consumed + 1));
        } else {
            return false;
        }
    }
    pattern[p..].iter().all(|&c| c == '*')
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn glob(pattern: &str, text: &str) -> bool {
        let p: Vec<char> = pattern.chars().collect();
        let t: Vec<char> = text.chars().collect();
        wildcard_match(&p, &t)
    }

    /// Reference matcher: the pattern translated to an anchored regex.
    fn reference(pattern: &str, text: &str) -> bool {
        let body = pattern
            .split('*')
            .map(regex::escape)
            .collect::<Vec<_>>()
            .join(".*");
        regex::Regex::new(&format!("(?s)^{body}$")).unwrap().is_match(text)
    }

    fn set(labels: &[&str]) -> CategorySet {
        labels.iter().copied().collect()
    }

    #[test]
    fn literal_pattern_removes_exact_label() {
        let policy = NoisePolicy::with_patterns(["living people"]);
        let out = apply_noise_filter(&set(&["living people", "celestial mechanics"]), &policy);
        assert_eq!(out, set(&["celestial mechanics"]));
    }

    #[test]
    fn infix_wildcard() {
        let policy = NoisePolicy::with_patterns(["*album*"]);
        let out = apply_noise_filter(&set(&["Rock albums", "Aerodynamics"]), &policy);
        assert_eq!(out, set(&["Aerodynamics"]));
    }

    #[test]
    fn no_patterns_is_identity() {
        let input = set(&["Living people", "Pop_singer"]);
        let policy = NoisePolicy::with_patterns(Vec::<String>::new());
        assert_eq!(apply_noise_filter(&input, &policy), input);
    }

    #[test]
    fn disabled_policy_is_identity() {
        let input = set(&["Living people", "Pop_singer"]);
        assert_eq!(apply_noise_filter(&input, &NoisePolicy::disabled()), input);
    }

    #[test]
    fn matching_ignores_case() {
        let policy = NoisePolicy::with_patterns(["*_SINGER", "Living People"]);
        assert!(policy.is_noise("american_singer"));
        assert!(policy.is_noise("LIVING PEOPLE"));
        assert!(!policy.is_noise("living peoples"));
    }

    #[test]
    fn default_patterns() {
        let policy = NoisePolicy::default();
        for noise in [
            "Living people",
            "English-language films",
            "American films",
            "French-language films",
            "Pop_singer",
            "2012_album",
            "Debut albums",
            "American singers",
        ] {
            assert!(policy.is_noise(noise), "{noise}");
        }
        for keep in ["Celestial mechanics", "Aerodynamics", "Films about aviation"] {
            assert!(!policy.is_noise(keep), "{keep}");
        }
    }

    #[test]
    fn wildcard_edge_cases() {
        assert!(glob("*", ""));
        assert!(glob("", ""));
        assert!(!glob("", "a"));
        assert!(glob("a*b*c", "abc"));
        assert!(glob("a*b*c", "aXXbYYc"));
        assert!(!glob("a*b*c", "aXXbYY"));
        assert!(glob("**x", "yyx"));
        assert!(glob("*_singer", "_singer"));
    }

    proptest! {
        #[test]
        fn agrees_with_regex_reference(
            pattern in "[ab_*]{0,6}",
            text in "[ab_]{0,10}",
        ) {
            prop_assert_eq!(glob(&pattern, &text), reference(&pattern, &text));
        }

        #[test]
        fn filtering_is_idempotent(
            labels in proptest::collection::vec("[a-cA-C _]{1,6}", 0..12),
            patterns in proptest::collection::vec("[a-c*_]{0,4}", 0..4),
        ) {
            let input: CategorySet = labels.iter().collect();
            let policy = NoisePolicy::with_patterns(patterns);
            let once = apply_noise_filter(&input, &policy);
            let twice = apply_noise_filter(&once, &policy);
            prop_assert_eq!(&once, &twice);
            for label in input.iter() {
                prop_assert_eq!(once.contains(label), !policy.is_noise(label));
            }
        }
    }
}
