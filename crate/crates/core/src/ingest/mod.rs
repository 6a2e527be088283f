//! Corpus chunking. Dynamic splitting keeps each code block together with
//! the paragraph directly before and after it; static splitting cuts fixed
//! character windows as a baseline.

mod detect;
mod split;
mod store;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use detect::{detect_code_blocks, PLAINTEXT_KEYWORDS};
pub use split::{dynamic_split, static_split, split_corpus, SplitMode};
pub use store::{ChunkStore, EmbeddingRecord, EmbeddingSidecar, STORE_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("invalid splitter configuration: {0}")]
    InvalidConfig(String),
    #[error("document id `{0}` appears twice in the corpus")]
    DuplicateDocId(String),
    #[error("document `{0}` is empty")]
    EmptyDocument(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Store {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocFormat {
    Markdown,
    Plaintext,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub doc_id: String,
    pub format: DocFormat,
    pub text: String,
}

impl SourceDocument {
    pub fn new(doc_id: impl Into<String>, format: DocFormat, text: impl Into<String>) -> Result<Self, IngestError> {
        let doc = SourceDocument {
            doc_id: doc_id.into(),
            format,
            text: text.into(),
        };
        if doc.text.trim().is_empty() {
            return Err(IngestError::EmptyDocument(doc.doc_id));
        }
        Ok(doc)
    }

    pub fn markdown(doc_id: &str, text: &str) -> Result<Self, IngestError> {
        Self::new(doc_id, DocFormat::Markdown, text)
    }

    pub fn plaintext(doc_id: &str, text: &str) -> Result<Self, IngestError> {
        Self::new(doc_id, DocFormat::Plaintext, text)
    }
}

/// Byte range `[start, end)` into a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeChunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub pre_paragraph: String,
    pub code: String,
    pub post_paragraph: String,
    pub position: Span,
}

impl CodeChunk {
    /// Paragraph before, code, paragraph after, separated by blank lines.
    pub fn text(&self) -> String {
        [&self.pre_paragraph, &self.code, &self.post_paragraph]
            .iter()
            .filter(|s| !s.is_empty())
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextChunk {
    pub chunk_id: String,
    pub doc_id: String,
    pub text: String,
    pub span: Span,
}

/// One retrieval unit as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Chunk {
    Code(CodeChunk),
    Text(TextChunk),
}

impl Chunk {
    pub fn id(&self) -> &str {
        match self {
            Chunk::Code(c) => &c.chunk_id,
            Chunk::Text(t) => &t.chunk_id,
        }
    }

    pub fn doc_id(&self) -> &str {
        match self {
            Chunk::Code(c) => &c.doc_id,
            Chunk::Text(t) => &t.doc_id,
        }
    }

    /// Full text used for embedding and prompt assembly.
    pub fn text(&self) -> String {
        match self {
            Chunk::Code(c) => c.text(),
            Chunk::Text(t) => t.text.clone(),
        }
    }
}

/// Reads every `.md`, `.markdown` and `.txt` file under `dir`, sorted by
/// relative path. The relative path without extension is the document id.
pub fn load_corpus(dir: &Path) -> Result<Vec<SourceDocument>, IngestError> {
    let mut files = Vec::new();
    collect_files(dir, &mut files)?;
    files.sort();
    let mut docs: Vec<SourceDocument> = Vec::new();
    for path in files {
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("md") | Some("markdown") => DocFormat::Markdown,
            Some("txt") => DocFormat::Plaintext,
            _ => continue,
        };
        let text = std::fs::read_to_string(&path).map_err(|e| IngestError::io(&path, e))?;
        let rel = path.strip_prefix(dir).unwrap_or(&path).with_extension("");
        let doc_id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        if docs.iter().any(|d| d.doc_id == doc_id) {
            return Err(IngestError::DuplicateDocId(doc_id));
        }
        docs.push(SourceDocument::new(doc_id, format, text)?);
    }
    Ok(docs)
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), IngestError> {
    let entries = std::fs::read_dir(dir).map_err(|e| IngestError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| IngestError::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}
