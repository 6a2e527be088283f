//! Chunk embedding, exact cosine search and the two retrieval paths: global
//! semantic search over the whole spec and keyword-guided operator search.

mod embed;
mod index;

use serde::{Deserialize, Serialize};

pub use embed::{tokenize, Embedder, Embedding, HashEmbedder, HttpEmbedder};
pub use index::{Scored, VectorIndex};

use crate::ingest::{Chunk, ChunkStore, EmbeddingRecord, EmbeddingSidecar};
use crate::llm::{bindings, parse_keywords, parse_operator_map, Gateway, LlmError, TemplateId};
use crate::sva::{OperatorKind, TABLE_OPERATORS};

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("embedding has norm {0}, expected 1")]
    NotUnit(f64),
    #[error("dimension mismatch: index has {expected}, vector has {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("chunk `{0}` is already indexed")]
    DuplicateChunk(String),
    #[error("malformed embedding response: {0}")]
    Malformed(String),
    #[error(transparent)]
    Gateway(#[from] LlmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankBy {
    /// Rank operator chunks by similarity to the whole spec.
    #[default]
    Spec,
    /// Rank by similarity to the keyword phrases mapped to the operator.
    Keyword,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalConfig {
    pub k_global: usize,
    pub k_per_op: usize,
    pub rank_by: RankBy,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            k_global: 3,
            k_per_op: 2,
            rank_by: RankBy::Spec,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordOperator {
    pub keyword: String,
    pub operator: OperatorKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KeywordOperatorMap {
    pub pairs: Vec<KeywordOperator>,
}

impl KeywordOperatorMap {
    /// Distinct operators in first-mention order.
    pub fn operators(&self) -> Vec<OperatorKind> {
        let mut out = Vec::new();
        for p in &self.pairs {
            if !out.contains(&p.operator) {
                out.push(p.operator);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorChunks {
    pub operator: OperatorKind,
    pub chunks: Vec<Scored>,
}

/// Output of the keyword-guided path.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatorGuided {
    pub keyword_map: KeywordOperatorMap,
    pub operator_chunks: Vec<OperatorChunks>,
    /// Operator names proposed by the model that are not table operators.
    pub discarded: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalPath {
    Global,
    OperatorGuided,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degraded {
    pub failed_path: RetrievalPath,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RetrievalContext {
    pub global_chunks: Vec<Scored>,
    pub operator_chunks: Vec<OperatorChunks>,
    pub keyword_map: KeywordOperatorMap,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub discarded_operators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degraded: Option<Degraded>,
}

impl RetrievalContext {
    /// Chunk ids from both paths, global first, without repeats.
    pub fn chunk_ids(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let all = self
            .global_chunks
            .iter()
            .chain(self.operator_chunks.iter().flat_map(|o| o.chunks.iter()));
        for s in all {
            if !out.contains(&s.chunk_id.as_str()) {
                out.push(&s.chunk_id);
            }
        }
        out
    }
}

/// True when `haystack` contains `token` at identifier boundaries, so
/// `$onehot` does not match inside `$onehot0`.
pub fn contains_token(haystack: &str, token: &str) -> bool {
    let ident = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '$';
    let starts_ident = token.starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_');
    let ends_ident = token.ends_with(ident);
    let mut from = 0;
    while let Some(i) = haystack[from..].find(token).map(|i| i + from) {
        let before_ok = !starts_ident || !haystack[..i].ends_with(ident);
        let after_ok = !ends_ident || !haystack[i + token.len()..].starts_with(ident);
        if before_ok && after_ok {
            return true;
        }
        from = i + token.len();
    }
    false
}

/// The operator table as shown to the model: name, usage and meaning per
/// line.
pub fn operator_table() -> String {
    TABLE_OPERATORS
        .iter()
        .map(|op| {
            format!(
                "{} | {} | {}",
                op.surface_token().unwrap_or_default(),
                op.syntax(),
                op.explanation().unwrap_or_default()
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Chunk store, its embeddings and the embedder used for queries.
pub struct Retriever {
    store: ChunkStore,
    index: VectorIndex,
    embedder: Box<dyn Embedder>,
    pub config: RetrievalConfig,
}

impl Retriever {
    /// Embeds every chunk, reusing `cached` vectors when they come from the
    /// same embedder.
    pub fn build(
        store: ChunkStore,
        embedder: Box<dyn Embedder>,
        cached: Option<&EmbeddingSidecar>,
        config: RetrievalConfig,
    ) -> Result<Self, RetrievalError> {
        let id = embedder.id();
        let cached = cached.filter(|c| c.provider == id);
        let mut vectors: Vec<Option<Embedding>> = store
            .chunks
            .iter()
            .map(|c| {
                cached
                    .and_then(|s| s.records.iter().find(|r| r.chunk_id == c.id()))
                    .and_then(|r| Embedding::from_unit(r.embedding.clone()).ok())
            })
            .collect();
        let missing: Vec<usize> = (0..vectors.len()).filter(|&i| vectors[i].is_none()).collect();
        if !missing.is_empty() {
            let texts: Vec<String> = missing.iter().map(|&i| store.chunks[i].text()).collect();
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            for (i, v) in missing.into_iter().zip(embedder.embed_batch(&refs)?) {
                vectors[i] = Some(v);
            }
        }
        let dim = vectors
            .first()
            .and_then(|v| v.as_ref().map(Embedding::dim))
            .unwrap_or_else(|| embedder.embed("dimension probe").map(|e| e.dim()).unwrap_or(0));
        let mut index = VectorIndex::new(dim);
        for (c, v) in store.chunks.iter().zip(vectors) {
            index.insert(c.id(), v.expect("every chunk embedded"))?;
        }
        Ok(Retriever {
            store,
            index,
            embedder,
            config,
        })
    }

    pub fn store(&self) -> &ChunkStore {
        &self.store
    }

    pub fn index(&self) -> &VectorIndex {
        &self.index
    }

    pub fn embedder_id(&self) -> String {
        self.embedder.id()
    }

    /// Embeddings in store order, ready to write as a sidecar.
    pub fn sidecar(&self) -> EmbeddingSidecar {
        EmbeddingSidecar {
            provider: self.embedder.id(),
            dim: self.index.dim(),
            records: self
                .store
                .chunks
                .iter()
                .map(|c| EmbeddingRecord {
                    chunk_id: c.id().to_string(),
                    embedding: self.index.get(c.id()).expect("indexed").values().to_vec(),
                })
                .collect(),
        }
    }

    pub fn chunk(&self, id: &str) -> Option<&Chunk> {
        self.store.get(id)
    }

    /// Global semantic path: embed the whole spec and take the top `k`.
    pub fn retrieve_global(&self, spec: &str, k: usize) -> Result<Vec<Scored>, RetrievalError> {
        if self.index.is_empty() {
            return Ok(Vec::new());
        }
        let q = self.embedder.embed(spec)?;
        self.index.query(&q, k)
    }

    /// Keyword-guided path: keyword extraction, mapping to table operators,
    /// then lexical filtering on each operator's surface token ranked by
    /// similarity.
    pub fn retrieve_operator_guided(
        &self,
        spec: &str,
        gateway: &Gateway,
        k_per_op: usize,
    ) -> Result<OperatorGuided, RetrievalError> {
        let reply = gateway.complete(TemplateId::KeywordExtraction, bindings([("spec", spec.to_string())]))?;
        let keywords = parse_keywords(&reply.response.text)?;
        if keywords.is_empty() {
            return Ok(OperatorGuided::default());
        }
        let listed = keywords.iter().map(|k| format!("- {k}")).collect::<Vec<_>>().join("\n");
        let reply = gateway.complete(
            TemplateId::OperatorExtraction,
            bindings([
                ("spec", spec.to_string()),
                ("keywords", listed),
                ("operator_table", operator_table()),
            ]),
        )?;
        let mut map = KeywordOperatorMap::default();
        let mut discarded = Vec::new();
        for (keyword, name) in parse_operator_map(&reply.response.text)? {
            match name.parse::<OperatorKind>() {
                Ok(op) if TABLE_OPERATORS.contains(&op) => map.pairs.push(KeywordOperator { keyword, operator: op }),
                _ => {
                    tracing::warn!(%keyword, operator = %name, "discarding operator outside the table");
                    discarded.push(name);
                }
            }
        }

        let spec_vec = if self.index.is_empty() { None } else { Some(self.embedder.embed(spec)?) };
        let mut operator_chunks = Vec::new();
        for op in map.operators() {
            let token = op.surface_token().expect("table operators have tokens");
            let Some(spec_vec) = &spec_vec else {
                operator_chunks.push(OperatorChunks { operator: op, chunks: Vec::new() });
                continue;
            };
            let query = match self.config.rank_by {
                RankBy::Spec => spec_vec.clone(),
                RankBy::Keyword => {
                    let phrases: Vec<&str> = map
                        .pairs
                        .iter()
                        .filter(|p| p.operator == op)
                        .map(|p| p.keyword.as_str())
                        .collect();
                    self.embedder.embed(&phrases.join(" ")).unwrap_or_else(|_| spec_vec.clone())
                }
            };
            let chunks = self.index.query_filtered(&query, k_per_op, |id| {
                self.store
                    .get(id)
                    .is_some_and(|c| contains_token(&c.text(), token))
            })?;
            operator_chunks.push(OperatorChunks { operator: op, chunks });
        }
        Ok(OperatorGuided {
            keyword_map: map,
            operator_chunks,
            discarded,
        })
    }

    /// Runs both paths concurrently. If exactly one path fails the other's
    /// result is returned with a degraded marker.
    pub fn hybrid_retrieve(
        &self,
        spec: &str,
        gateway: &Gateway,
        k_global: usize,
        k_per_op: usize,
    ) -> Result<RetrievalContext, RetrievalError> {
        let (global, guided) = std::thread::scope(|s| {
            let guided = s.spawn(|| self.retrieve_operator_guided(spec, gateway, k_per_op));
            let global = self.retrieve_global(spec, k_global);
            (global, guided.join().expect("operator-guided path panicked"))
        });
        match (global, guided) {
            (Ok(global_chunks), Ok(g)) => Ok(RetrievalContext {
                global_chunks,
                operator_chunks: g.operator_chunks,
                keyword_map: g.keyword_map,
                discarded_operators: g.discarded,
                degraded: None,
            }),
            (Ok(global_chunks), Err(e)) => Ok(RetrievalContext {
                global_chunks,
                degraded: Some(Degraded {
                    failed_path: RetrievalPath::OperatorGuided,
                    error: e.to_string(),
                }),
                ..Default::default()
            }),
            (Err(e), Ok(g)) => Ok(RetrievalContext {
                operator_chunks: g.operator_chunks,
                keyword_map: g.keyword_map,
                discarded_operators: g.discarded,
                degraded: Some(Degraded {
                    failed_path: RetrievalPath::Global,
                    error: e.to_string(),
                }),
                ..Default::default()
            }),
            (Err(e), Err(_)) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_boundaries() {
        assert!(contains_token("x = $onehot(v);", "$onehot"));
        assert!(!contains_token("x = $onehot0(v);", "$onehot"));
        assert!(contains_token("x = $onehot0(v);", "$onehot0"));
        assert!(contains_token("a |-> ##1 b", "##"));
        assert!(contains_token("(s_eventually b)", "s_eventually"));
        assert!(!contains_token("my_s_eventually_flag", "s_eventually"));
    }

    #[test]
    fn table_lists_ten_operators() {
        assert_eq!(operator_table().lines().count(), 10);
    }
}
