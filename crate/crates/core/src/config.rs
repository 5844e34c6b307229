//! Configuration file loading and fingerprinting.
//!
//! The file is a JSON object; every key is optional:
//!
//! ```json
//! {
//!   "min_support": 2,
//!   "noise": { "enabled": true, "patterns": ["*_singer", "living people"] },
//!   "composed_fallback": true,
//!   "language": "EN",
//!   "remote": { "base_url": "https://babelnet.io/v9", "requests_per_second": 1 }
//! }
//! ```

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::inference::InferenceConfig;
use crate::kb::RemoteSettings;
use crate::noise::NoisePolicy;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}: {reason}")]
    Parse { path: String, reason: String },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub min_support: Option<usize>,
    pub noise: Option<NoisePolicy>,
    pub composed_fallback: Option<bool>,
    pub language: Option<String>,
    pub remote: Option<RemoteSettings>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: origin.clone(),
            source,
        })?;
        Self::parse(&text, &origin)
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            reason: e.to_string(),
        })?;
        if let Some(k) = file.min_support {
            if k < 2 {
                return Err(ConfigError::Parse {
                    path: origin.to_string(),
                    reason: format!("min_support must be at least 2, got {k}"),
                });
            }
        }
        Ok(file)
    }

    pub fn inference(&self) -> InferenceConfig {
        let defaults = InferenceConfig::default();
        InferenceConfig {
            min_support: self.min_support.unwrap_or(defaults.min_support),
            noise: self.noise.clone().unwrap_or(defaults.noise),
            composed_fallback: self.composed_fallback.unwrap_or(defaults.composed_fallback),
            language: self.language.clone().unwrap_or(defaults.language),
        }
    }

    /// Remote settings, with the language aligned to the inference config.
    pub fn remote(&self) -> RemoteSettings {
        let mut settings = self.remote.clone().unwrap_or_default();
        if let Some(language) = &self.language {
            settings.language = language.clone();
        }
        settings
    }
}

/// Stable identifier of an [`InferenceConfig`]: SHA-256 over its canonical
/// JSON serialization.
pub fn config_fingerprint(config: &InferenceConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    format!("sha256:{}", hex::encode(Sha256::digest(canonical.as_bytes())))
}
