#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::json;
use synsem_core::kb::{load_snapshot, RemoteSettings, SnapshotStore, Transport, TransportError};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn bundled_snapshot() -> SnapshotStore {
    load_snapshot(&fixture("snapshot.json")).expect("bundled snapshot loads")
}

/// Serves a snapshot through the two-step remote API shape, counting calls.
pub struct SnapshotTransport {
    ids: HashMap<String, Vec<String>>,
    synsets: HashMap<String, serde_json::Value>,
    pub calls: AtomicUsize,
}

impl SnapshotTransport {
    pub fn new(store: &SnapshotStore) -> Self {
        let mut ids = HashMap::new();
        let mut synsets = HashMap::new();
        for keyword in store.keywords() {
            let entry = store.get(keyword);
            ids.insert(
                keyword.to_string(),
                entry.iter().map(|s| s.id.clone()).collect(),
            );
            for s in entry {
                let body = json!({
                    "senses": s.synonyms.iter()
                        .map(|l| json!({"properties": {"fullLemma": l, "language": "EN"}}))
                        .collect::<Vec<_>>(),
                    "categories": s.categories.iter()
                        .map(|c| json!({"category": c, "language": "EN"}))
                        .collect::<Vec<_>>(),
                    "domains": s.domains.iter()
                        .map(|d| (d.clone(), json!(0.5)))
                        .collect::<serde_json::Map<_, _>>(),
                });
                synsets.insert(s.id.clone(), body);
            }
        }
        SnapshotTransport {
            ids,
            synsets,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for SnapshotTransport {
    fn get(&self, endpoint: &str, params: &[(&str, &str)]) -> Result<String, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let param = |name: &str| {
            params
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| v.to_string())
                .unwrap_or_default()
        };
        match endpoint {
            "getSynsetIds" => {
                let ids = self.ids.get(&param("lemma")).cloned().unwrap_or_default();
                let body: Vec<_> = ids.iter().map(|id| json!({"id": id, "pos": "NOUN"})).collect();
                Ok(serde_json::to_string(&body).unwrap())
            }
            "getSynset" => self
                .synsets
                .get(&param("id"))
                .map(|v| v.to_string())
                .ok_or_else(|| TransportError("getSynset: HTTP status 404".into())),
            other => Err(TransportError(format!("{other}: HTTP status 404"))),
        }
    }
}

/// Remote settings that never sleep.
pub fn fast_remote() -> RemoteSettings {
    RemoteSettings {
        requests_per_second: 0.0,
        backoff_ms: 1,
        ..RemoteSettings::default()
    }
}
