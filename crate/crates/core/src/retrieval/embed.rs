use serde::{Deserialize, Serialize};

use super::RetrievalError;
use crate::llm::{HttpConfig, JsonClient};

/// Unit-norm embedding vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding {
    values: Vec<f64>,
}

impl Embedding {
    /// Normalizes `values` to unit length.
    pub fn normalized(mut values: Vec<f64>) -> Result<Self, RetrievalError> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(RetrievalError::EmptyText);
        }
        for v in &mut values {
            *v /= norm;
        }
        Ok(Embedding { values })
    }

    /// Wraps a vector that is already unit length (e.g. read from a store).
    pub fn from_unit(values: Vec<f64>) -> Result<Self, RetrievalError> {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(RetrievalError::NotUnit(norm));
        }
        Ok(Embedding { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Cosine similarity, which is the dot product for unit vectors.
    pub fn cosine(&self, other: &Embedding) -> f64 {
        let dot: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        dot.clamp(-1.0, 1.0)
    }
}

pub trait Embedder: Send + Sync {
    /// Identifies provider and settings; embeddings from different ids are
    /// never mixed.
    fn id(&self) -> String;
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Embedding>, RetrievalError>;

    fn embed(&self, text: &str) -> Result<Embedding, RetrievalError> {
        Ok(self.embed_batch(&[text])?.remove(0))
    }
}

/// Deterministic offline embedder: lowercase tokens hashed with FNV-1a into
/// `dim` buckets, term-frequency weighted, L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    pub dim: usize,
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder { dim: 256 }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Identifier-like runs of `[a-z0-9_$]` plus the operator tokens `|->`,
/// `|=>` and `##`.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let b = lower.as_bytes();
    let word = |c: u8| c.is_ascii_lowercase() || c.is_ascii_digit() || c == b'_' || c == b'$';
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if b[i..].starts_with(b"|->") || b[i..].starts_with(b"|=>") {
            out.push(lower[i..i + 3].to_string());
            i += 3;
        } else if b[i..].starts_with(b"##") {
            out.push("##".to_string());
            i += 2;
        } else if word(b[i]) {
            let start = i;
            while i < b.len() && word(b[i]) {
                i += 1;
            }
            out.push(lower[start..i].to_string());
        } else {
            i += 1;
        }
    }
    out
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        HashEmbedder { dim: dim.max(1) }
    }

    fn one(&self, text: &str) -> Result<Embedding, RetrievalError> {
        let mut v = vec![0.0; self.dim];
        for t in tokenize(text) {
            v[(fnv1a(t.as_bytes()) % self.dim as u64) as usize] += 1.0;
        }
        Embedding::normalized(v)
    }
}

impl Embedder for HashEmbedder {
    fn id(&self) -> String {
        format!("hash-fnv1a-{}", self.dim)
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Embedding>, RetrievalError> {
        texts.iter().map(|t| self.one(t)).collect()
    }
}

/// Remote embeddings endpoint: `POST {input: [...]}` returning
/// `{data: [{embedding: [...]}]}`.
pub struct HttpEmbedder {
    client: JsonClient,
    batch: usize,
}

impl HttpEmbedder {
    pub fn new(config: HttpConfig) -> Self {
        HttpEmbedder {
            client: JsonClient::new(config),
            batch: 64,
        }
    }
}

impl Embedder for HttpEmbedder {
    fn id(&self) -> String {
        let c = self.client.config();
        format!("http:{}:{}", c.base_url, c.model)
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Embedding>, RetrievalError> {
        if texts.iter().any(|t| t.trim().is_empty()) {
            return Err(RetrievalError::EmptyText);
        }
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch) {
            let body = serde_json::json!({
                "model": self.client.config().model,
                "input": chunk,
            });
            let (value, _) = self.client.post("embeddings", &body)?;
            let data = value
                .get("data")
                .and_then(|d| d.as_array())
                .filter(|d| d.len() == chunk.len())
                .ok_or_else(|| RetrievalError::Malformed(value.to_string()))?;
            for item in data {
                let vec: Vec<f64> = item
                    .get("embedding")
                    .and_then(|e| e.as_array())
                    .ok_or_else(|| RetrievalError::Malformed(item.to_string()))?
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| RetrievalError::Malformed(x.to_string())))
                    .collect::<Result<_, _>>()?;
                if let Some(first) = out.first().map(|e: &Embedding| e.dim()) {
                    if first != vec.len() {
                        return Err(RetrievalError::DimMismatch {
                            expected: first,
                            found: vec.len(),
                        });
                    }
                }
                out.push(Embedding::normalized(vec)?);
            }
        }
        Ok(out)
    }
}
