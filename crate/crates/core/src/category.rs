//! Case-insensitive category label sets.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Comparison key for a category label.
pub fn fold_label(label: &str) -> String {
    label.to_lowercase()
}

/// A set of category labels compared case-insensitively.
///
/// When several casings of one label are inserted, the set reports the
/// smallest of them (byte order), so the result does not depend on the order
/// in which synsets or keywords were visited. Iteration is ordered by the
/// folded label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CategorySet {
    labels: BTreeMap<String, String>,
}

impl CategorySet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `label`; returns `true` when its folded form was not present.
    pub fn insert(&mut self, label: &str) -> bool {
        let key = fold_label(label);
        match self.labels.get_mut(&key) {
            Some(display) => {
                if label < display.as_str() {
                    *display = label.to_string();
                }
                false
            }
            None => {
                self.labels.insert(key, label.to_string());
                true
            }
        }
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains_key(&fold_label(label))
    }

    pub fn contains_folded(&self, folded: &str) -> bool {
        self.labels.contains_key(folded)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Reported labels, ordered by folded form.
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.labels.values().map(String::as_str)
    }

    /// `(folded, reported)` pairs, ordered by folded form.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.labels.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn intersects<'a>(&self, labels: impl IntoIterator<Item = &'a String>) -> bool {
        labels.into_iter().any(|l| self.contains(l))
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&str) -> bool) {
        self.labels.retain(|_, display| keep(display));
    }

    pub fn extend<'a>(&mut self, labels: impl IntoIterator<Item = &'a str>) {
        for label in labels {
            self.insert(label);
        }
    }
}

impl<'a> FromIterator<&'a str> for CategorySet {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        let mut set = CategorySet::new();
        set.extend(iter);
        set
    }
}

impl<'a> FromIterator<&'a String> for CategorySet {
    fn from_iter<I: IntoIterator<Item = &'a String>>(iter: I) -> Self {
        iter.into_iter().map(String::as_str).collect()
    }
}

impl Serialize for CategorySet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for CategorySet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let labels = Vec::<String>::deserialize(deserializer)?;
        Ok(labels.iter().collect())
    }
}
