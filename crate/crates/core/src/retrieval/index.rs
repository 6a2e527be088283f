use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::embed::Embedding;
use super::RetrievalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub chunk_id: String,
    pub similarity: f64,
}

/// Exact-scan cosine index.
#[derive(Debug, Clone, Default)]
pub struct VectorIndex {
    dim: usize,
    entries: Vec<(String, Embedding)>,
}

/// Descending similarity, then ascending chunk id.
fn rank(a: &Scored, b: &Scored) -> Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then_with(|| a.chunk_id.cmp(&b.chunk_id))
}

impl VectorIndex {
    pub fn new(dim: usize) -> Self {
        VectorIndex {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, chunk_id: impl Into<String>, v: Embedding) -> Result<(), RetrievalError> {
        let chunk_id = chunk_id.into();
        if v.dim() != self.dim {
            return Err(RetrievalError::DimMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        if self.entries.iter().any(|(id, _)| *id == chunk_id) {
            return Err(RetrievalError::DuplicateChunk(chunk_id));
        }
        self.entries.push((chunk_id, v));
        Ok(())
    }

    pub fn get(&self, chunk_id: &str) -> Option<&Embedding> {
        self.entries.iter().find(|(id, _)| id == chunk_id).map(|(_, v)| v)
    }

    /// Top `k` entries by cosine similarity.
    pub fn query(&self, q: &Embedding, k: usize) -> Result<Vec<Scored>, RetrievalError> {
        self.query_filtered(q, k, |_| true)
    }

    /// Like [`VectorIndex::query`] but only over ids accepted by `keep`.
    pub fn query_filtered(
        &self,
        q: &Embedding,
        k: usize,
        keep: impl Fn(&str) -> bool,
    ) -> Result<Vec<Scored>, RetrievalError> {
        if q.dim() != self.dim {
            return Err(RetrievalError::DimMismatch {
                expected: self.dim,
                found: q.dim(),
            });
        }
        let mut scored: Vec<Scored> = self
            .entries
            .iter()
            .filter(|(id, _)| keep(id))
            .map(|(id, v)| Scored {
                chunk_id: id.clone(),
                similarity: q.cosine(v),
            })
            .collect();
        scored.sort_by(rank);
        scored.truncate(k);
        Ok(scored)
    }
}
