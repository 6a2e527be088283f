//! TOML configuration with environment overrides for endpoints.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ingest::SplitMode;
use crate::llm::{HttpConfig, Sampling};
use crate::pipeline::Limits;
use crate::retrieval::{Embedder, HashEmbedder, HttpEmbedder, RetrievalConfig};
use crate::semantics::EquivOptions;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingProvider {
    /// Hashed bag-of-tokens vectors; no network.
    #[default]
    Hash,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub provider: EmbeddingProvider,
    pub dim: usize,
    pub http: HttpConfig,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            provider: EmbeddingProvider::Hash,
            dim: 256,
            http: HttpConfig {
                model: "text-embedding-3-small".into(),
                ..HttpConfig::default()
            },
        }
    }
}

impl EmbeddingConfig {
    pub fn embedder(&self) -> Box<dyn Embedder> {
        match self.provider {
            EmbeddingProvider::Hash => Box::new(HashEmbedder::new(self.dim)),
            EmbeddingProvider::Http => Box::new(HttpEmbedder::new(self.http.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    #[serde(flatten)]
    pub http: HttpConfig,
    pub sampling: Sampling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    /// Split used for the static-window store.
    pub static_split: SplitMode,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            static_split: SplitMode::Static {
                size: 1000,
                overlap: 200,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub equivalence: EquivOptions,
    /// Records evaluated concurrently.
    pub workers: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            equivalence: EquivOptions::default(),
            workers: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub llm: LlmConfig,
    pub embedding: EmbeddingConfig,
    pub ingest: IngestConfig,
    pub retrieval: RetrievalConfig,
    pub pipeline: Limits,
    pub eval: EvalConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.embedding.dim == 0 {
            return Err(ConfigError::Invalid("embedding.dim must be positive".into()));
        }
        if self.pipeline.max_recheck_iterations == 0 {
            return Err(ConfigError::Invalid(
                "pipeline.max_recheck_iterations must be at least 1".into(),
            ));
        }
        if self.eval.equivalence.max_len == 0 {
            return Err(ConfigError::Invalid("eval.equivalence.max_len must be at least 1".into()));
        }
        if self.eval.workers == 0 || self.llm.http.max_concurrency == 0 {
            return Err(ConfigError::Invalid("worker and concurrency caps must be positive".into()));
        }
        if let SplitMode::Static { size, overlap } = self.ingest.static_split {
            if size <= overlap {
                return Err(ConfigError::Invalid(
                    "ingest.static_split size must exceed overlap".into(),
                ));
            }
        }
        Ok(())
    }

    /// Applies `SVAGEN_LLM_BASE_URL`, `SVAGEN_LLM_MODEL`,
    /// `SVAGEN_EMBED_BASE_URL` and `SVAGEN_EMBED_MODEL` when set.
    pub fn with_env_overrides(mut self) -> Self {
        self.apply_overrides(|k| std::env::var(k).ok());
        self
    }

    fn apply_overrides(&mut self, get: impl Fn(&str) -> Option<String>) {
        let fields: [(&str, &mut String); 4] = [
            ("SVAGEN_LLM_BASE_URL", &mut self.llm.http.base_url),
            ("SVAGEN_LLM_MODEL", &mut self.llm.http.model),
            ("SVAGEN_EMBED_BASE_URL", &mut self.embedding.http.base_url),
            ("SVAGEN_EMBED_MODEL", &mut self.embedding.http.model),
        ];
        for (key, field) in fields {
            if let Some(v) = get(key).filter(|v| !v.trim().is_empty()) {
                *field = v;
            }
        }
    }

    /// SHA-256 over the canonical TOML rendering.
    pub fn digest(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
