//! Remote knowledge-base backend.
//!
//! Speaks the public BabelNet HTTP shape: `getSynsetIds` resolves a lemma to
//! synset ids, then `getSynset` is called once per id. Both steps are hidden
//! behind a single [`SynsetProvider::fetch_synsets`] call. Every request goes
//! through a shared token-bucket limiter and is retried with exponential
//! backoff on transport failure.

use std::collections::HashSet;
use std::fmt;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::Value;

use super::{KbError, Synset, SynsetProvider};

/// Environment variable holding the API key.
pub const KB_KEY_ENV: &str = "SYNSEM_KB_KEY";

pub const DEFAULT_BASE_URL: &str = "https://babelnet.io/v9";

#[derive(Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteSettings {
    pub base_url: String,
    pub api_key: Option<String>,
    pub language: String,
    pub requests_per_second: f64,
    pub burst: u32,
    pub max_attempts: u32,
    pub backoff_ms: u64,
    pub timeout_ms: u64,
    /// Cache time-to-live for remote results; `None` never expires.
    pub cache_ttl_secs: Option<u64>,
    pub parallelism: usize,
}

impl Default for RemoteSettings {
    fn default() -> Self {
        RemoteSettings {
            base_url: DEFAULT_BASE_URL.into(),
            api_key: None,
            language: "EN".into(),
            requests_per_second: 1.0,
            burst: 1,
            max_attempts: 3,
            backoff_ms: 500,
            timeout_ms: 10_000,
            cache_ttl_secs: Some(30 * 24 * 3600),
            parallelism: 4,
        }
    }
}

impl RemoteSettings {
    /// Fills `api_key` from [`KB_KEY_ENV`] when the configuration left it out.
    pub fn with_env_key(mut self) -> Self {
        if self.api_key.is_none() {
            self.api_key = std::env::var(KB_KEY_ENV).ok().filter(|k| !k.is_empty());
        }
        self
    }

    pub fn cache_ttl(&self) -> Option<Duration> {
        self.cache_ttl_secs.map(Duration::from_secs)
    }
}

impl fmt::Debug for RemoteSettings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteSettings")
            .field("base_url", &self.base_url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("language", &self.language)
            .field("requests_per_second", &self.requests_per_second)
            .field("burst", &self.burst)
            .field("max_attempts", &self.max_attempts)
            .field("backoff_ms", &self.backoff_ms)
            .field("timeout_ms", &self.timeout_ms)
            .field("cache_ttl_secs", &self.cache_ttl_secs)
            .field("parallelism", &self.parallelism)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportError(pub String);

impl fmt::Display for TransportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One GET against the knowledge-base service, returning the response body.
pub trait Transport: Send + Sync {
    fn get(&self, endpoint: &str, params: &[(&str, &str)]) -> Result<String, TransportError>;
}

/// Plain HTTP(S) transport.
pub struct HttpTransport {
    base_url: String,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        HttpTransport {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent,
        }
    }
}

impl Transport for HttpTransport {
    fn get(&self, endpoint: &str, params: &[(&str, &str)]) -> Result<String, TransportError> {
        let url = format!("{}/{}", self.base_url, endpoint);
        let mut request = self.agent.get(&url);
        for (key, value) in params {
            request = request.query(*key, *value);
        }
        match request.call() {
            Ok(mut response) => response
                .body_mut()
                .read_to_string()
                .map_err(|e| TransportError(format!("reading {endpoint} response: {e}"))),
            Err(ureq::Error::StatusCode(code)) => {
                Err(TransportError(format!("{endpoint}: HTTP status {code}")))
            }
            Err(e) => Err(TransportError(format!("{endpoint}: {e}"))),
        }
    }
}

/// Token bucket shared by every request of one backend.
pub struct RateLimiter {
    rate: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    /// `rate` tokens per second, at most `burst` banked. A non-positive or
    /// non-finite rate disables limiting.
    pub fn new(rate: f64, burst: u32) -> Self {
        let capacity = f64::from(burst.max(1));
        RateLimiter {
            rate,
            capacity,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    /// Blocks until a token is available.
    pub fn acquire(&self) {
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return;
        }
        loop {
            let wait = {
                let mut state = self.state.lock().unwrap();
                let now = Instant::now();
                let refill = now.duration_since(state.1).as_secs_f64() * self.rate;
                state.0 = (state.0 + refill).min(self.capacity);
                state.1 = now;
                if state.0 >= 1.0 {
                    state.0 -= 1.0;
                    return;
                }
                (1.0 - state.0) / self.rate
            };
            std::thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

pub struct RemoteBackend<T> {
    transport: T,
    settings: RemoteSettings,
    limiter: RateLimiter,
}

impl RemoteBackend<HttpTransport> {
    pub fn http(settings: RemoteSettings) -> Self {
        let transport =
            HttpTransport::new(&settings.base_url, Duration::from_millis(settings.timeout_ms));
        RemoteBackend::new(transport, settings)
    }
}

impl<T: Transport> RemoteBackend<T> {
    pub fn new(transport: T, settings: RemoteSettings) -> Self {
        let limiter = RateLimiter::new(settings.requests_per_second, settings.burst);
        RemoteBackend {
            transport,
            settings,
            limiter,
        }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn settings(&self) -> &RemoteSettings {
        &self.settings
    }

    fn call(&self, endpoint: &str, params: &[(&str, &str)]) -> Result<String, KbError> {
        let mut full: Vec<(&str, &str)> = params.to_vec();
        if let Some(key) = &self.settings.api_key {
            full.push(("key", key.as_str()));
        }
        let attempts = self.settings.max_attempts.max(1);
        let mut last = TransportError(String::new());
        for attempt in 0..attempts {
            self.limiter.acquire();
            match self.transport.get(endpoint, &full) {
                Ok(body) => return Ok(body),
                Err(e) => {
                    log::debug!("{endpoint} attempt {} failed: {}", attempt + 1, self.redact(&e.0));
                    last = e;
                }
            }
            if attempt + 1 < attempts {
                let delay = self.settings.backoff_ms.saturating_mul(1 << attempt.min(16));
                std::thread::sleep(Duration::from_millis(delay));
            }
        }
        Err(KbError::Transport(format!(
            "{} (after {attempts} attempts)",
            self.redact(&last.0)
        )))
    }

    fn redact(&self, message: &str) -> String {
        match &self.settings.api_key {
            Some(key) if !key.is_empty() => message.replace(key.as_str(), "<redacted>"),
            _ => message.to_string(),
        }
    }

    fn synset_ids(&self, keyword: &str) -> Result<Vec<String>, KbError> {
        let lang = self.settings.language.as_str();
        let body = self.call(
            "getSynsetIds",
            &[("lemma", keyword), ("searchLang", lang)],
        )?;
        let decode_err = |record: String, reason: String| KbError::Decode {
            keyword: keyword.to_string(),
            record,
            reason,
        };
        let value: Value = serde_json::from_str(&body)
            .map_err(|e| decode_err("getSynsetIds".into(), e.to_string()))?;
        let Value::Array(items) = value else {
            return Err(decode_err("getSynsetIds".into(), "expected an array".into()));
        };
        let mut seen = HashSet::new();
        let mut ids = Vec::with_capacity(items.len());
        for (index, item) in items.iter().enumerate() {
            let id = item
                .get("id")
                .and_then(Value::as_str)
                .filter(|id| !id.is_empty())
                .ok_or_else(|| decode_err(format!("id #{index}"), "missing string `id`".into()))?;
            if seen.insert(id.to_string()) {
                ids.push(id.to_string());
            }
        }
        Ok(ids)
    }

    fn synset(&self, keyword: &str, id: &str) -> Result<Synset, KbError> {
        let lang = self.settings.language.as_str();
        let body = self.call("getSynset", &[("id", id), ("targetLang", lang)])?;
        decode_synset(keyword, id, lang, &body)
    }
}

fn push_unique(out: &mut Vec<String>, seen: &mut HashSet<String>, value: &str) {
    if !value.is_empty() && seen.insert(value.to_string()) {
        out.push(value.to_string());
    }
}

fn language_matches(value: &Value, lang: &str) -> bool {
    match value.get("language").and_then(Value::as_str) {
        Some(l) => l.eq_ignore_ascii_case(lang),
        None => true,
    }
}

/// Maps one `getSynset` body onto a [`Synset`], keeping only labels in
/// `lang` and dropping empty or repeated labels.
fn decode_synset(keyword: &str, id: &str, lang: &str, body: &str) -> Result<Synset, KbError> {
    let decode_err = |reason: String| KbError::Decode {
        keyword: keyword.to_string(),
        record: id.to_string(),
        reason,
    };
    let value: Value = serde_json::from_str(body).map_err(|e| decode_err(e.to_string()))?;
    if !value.is_object() {
        return Err(decode_err("expected an object".into()));
    }

    let mut categories = Vec::new();
    let mut seen = HashSet::new();
    if let Some(raw) = value.get("categories") {
        let items = raw
            .as_array()
            .ok_or_else(|| decode_err("`categories` is not an array".into()))?;
        for item in items {
            let label = match item {
                Value::String(s) => Some(s.as_str()),
                Value::Object(_) if language_matches(item, lang) => {
                    item.get("category").and_then(Value::as_str)
                }
                Value::Object(_) => None,
                _ => return Err(decode_err("unexpected category entry".into())),
            };
            if let Some(label) = label {
                push_unique(&mut categories, &mut seen, label.trim());
            }
        }
    }

    let mut domains = Vec::new();
    let mut seen = HashSet::new();
    match value.get("domains") {
        Some(Value::Object(map)) => {
            for key in map.keys() {
                push_unique(&mut domains, &mut seen, key);
            }
        }
        Some(Value::Array(items)) => {
            for item in items.iter().filter_map(Value::as_str) {
                push_unique(&mut domains, &mut seen, item);
            }
        }
        Some(Value::Null) | None => {}
        Some(_) => return Err(decode_err("`domains` has an unexpected shape".into())),
    }

    let mut synonyms = Vec::new();
    let mut seen = HashSet::new();
    if let Some(senses) = value.get("senses").and_then(Value::as_array) {
        for sense in senses {
            let props = sense.get("properties").unwrap_or(sense);
            if !language_matches(props, lang) {
                continue;
            }
            let lemma = props
                .get("fullLemma")
                .or_else(|| props.get("lemma"))
                .and_then(Value::as_str);
            if let Some(lemma) = lemma {
                push_unique(&mut synonyms, &mut seen, &lemma.replace('_', " "));
            }
        }
    }

    Ok(Synset {
        id: id.to_string(),
        lemma: keyword.to_string(),
        categories,
        domains,
        synonyms,
    })
}

impl<T: Transport> SynsetProvider for RemoteBackend<T> {
    fn fetch_synsets(&self, keyword: &str) -> Result<Vec<Synset>, KbError> {
        if keyword.is_empty() || super::normalize_keyword(keyword) != keyword {
            return Err(KbError::InvalidKeyword(keyword.to_string()));
        }
        self.synset_ids(keyword)?
            .iter()
            .map(|id| self.synset(keyword, id))
            .collect()
    }

    fn backend_tag(&self) -> String {
        format!("remote:{}:{}", self.settings.base_url, self.settings.language)
    }

    fn parallelism(&self) -> usize {
        self.settings.parallelism.max(1)
    }
}
