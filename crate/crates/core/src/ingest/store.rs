//! On-disk chunk store: a directory holding `chunks.jsonl` and an optional
//! `embeddings.jsonl` sidecar. Each file opens with a header record.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Chunk, IngestError, SplitMode};

pub const STORE_VERSION: u32 = 1;
const CHUNKS_FILE: &str = "chunks.jsonl";
const EMBEDDINGS_FILE: &str = "embeddings.jsonl";

#[derive(Serialize, Deserialize)]
struct ChunkHeader {
    format: String,
    version: u32,
    split: SplitMode,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingHeader {
    format: String,
    version: u32,
    provider: String,
    dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub chunk_id: String,
    pub embedding: Vec<f64>,
}

/// Embeddings keyed by chunk id, tagged with the provider that made them.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSidecar {
    pub provider: String,
    pub dim: usize,
    pub records: Vec<EmbeddingRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkStore {
    pub split: SplitMode,
    pub chunks: Vec<Chunk>,
}

fn store_err(path: &Path, line: usize, message: impl Into<String>) -> IngestError {
    IngestError::Store {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn write_jsonl<H: Serialize, R: Serialize>(path: &Path, header: &H, records: &[R]) -> Result<(), IngestError> {
    let file = fs::File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |v: String| writeln!(w, "{v}").map_err(|e| IngestError::io(path, e));
    put(serde_json::to_string(header).expect("header serializes"))?;
    for r in records {
        put(serde_json::to_string(r).expect("record serializes"))?;
    }
    w.flush().map_err(|e| IngestError::io(path, e))
}

fn read_jsonl<H: for<'de> Deserialize<'de>, R: for<'de> Deserialize<'de>>(
    path: &Path,
) -> Result<(H, Vec<R>), IngestError> {
    let file = fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| store_err(path, 1, "missing header"))?;
    let first = first.map_err(|e| IngestError::io(path, e))?;
    let header: H = serde_json::from_str(&first).map_err(|e| store_err(path, 1, e.to_string()))?;
    let mut records = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| IngestError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| store_err(path, i + 1, e.to_string()))?);
    }
    Ok((header, records))
}

impl ChunkStore {
    pub fn new(split: SplitMode, chunks: Vec<Chunk>) -> Self {
        ChunkStore { split, chunks }
    }

    pub fn get(&self, chunk_id: &str) -> Option<&Chunk> {
        self.chunks.iter().find(|c| c.id() == chunk_id)
    }

    pub fn write(&self, dir: &Path) -> Result<(), IngestError> {
        fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
        let header = ChunkHeader {
            format: "svagen-chunks".into(),
            version: STORE_VERSION,
            split: self.split,
        };
        write_jsonl(&dir.join(CHUNKS_FILE), &header, &self.chunks)
    }

    pub fn read(dir: &Path) -> Result<Self, IngestError> {
        let path = dir.join(CHUNKS_FILE);
        let (header, chunks): (ChunkHeader, Vec<Chunk>) = read_jsonl(&path)?;
        if header.format != "svagen-chunks" || header.version != STORE_VERSION {
            return Err(store_err(
                &path,
                1,
                format!("unsupported store {} v{}", header.format, header.version),
            ));
        }
        for (i, c) in chunks.iter().enumerate() {
            if chunks[..i].iter().any(|o| o.id() == c.id()) {
                return Err(store_err(&path, i + 2, format!("duplicate chunk id `{}`", c.id())));
            }
        }
        Ok(ChunkStore {
            split: header.split,
            chunks,
        })
    }
}

impl EmbeddingSidecar {
    pub fn write(&self, dir: &Path) -> Result<(), IngestError> {
        let header = EmbeddingHeader {
            format: "svagen-embeddings".into(),
            version: STORE_VERSION,
            provider: self.provider.clone(),
            dim: self.dim,
        };
        write_jsonl(&dir.join(EMBEDDINGS_FILE), &header, &self.records)
    }

    /// `Ok(None)` when the store has no sidecar yet.
    pub fn read(dir: &Path) -> Result<Option<Self>, IngestError> {
        let path = dir.join(EMBEDDINGS_FILE);
        if !path.exists() {
            return Ok(None);
        }
        let (header, records): (EmbeddingHeader, Vec<EmbeddingRecord>) = read_jsonl(&path)?;
        if header.format != "svagen-embeddings" {
            return Err(store_err(&path, 1, "not an embeddings file"));
        }
        if let Some((i, r)) = records.iter().enumerate().find(|(_, r)| r.embedding.len() != header.dim) {
            return Err(store_err(
                &path,
                i + 2,
                format!("`{}` has dimension {}, expected {}", r.chunk_id, r.embedding.len(), header.dim),
            ));
        }
        Ok(Some(EmbeddingSidecar {
            provider: header.provider,
            dim: header.dim,
            records,
        }))
    }
}
