//! Chat-completion access: prompt templates, providers (HTTP, fixture
//! replay, scripted) and parsing of model replies.

mod gateway;
mod http;
mod parse;
mod provider;
mod template;

use std::path::{Path, PathBuf};

pub use gateway::{ChatExchange, Gateway};
pub use http::{HttpConfig, HttpProvider};
pub(crate) use http::JsonClient;
pub use parse::{
    extract_sva_from_response, parse_fragments, parse_keywords, parse_operator_map,
    parse_recheck_reply, RecheckReply, RecheckVerdict,
};
pub use provider::{
    mock_key, ChatRequest, ChatResponse, FixtureIndexEntry, MockProvider, Provider, Recorder,
    Sampling, ScriptedProvider,
};
pub use template::{bindings, render_prompt, Bindings, Prompt, PromptTemplate, TemplateId};

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("template {template} is missing bindings for: {}", names.join(", "))]
    MissingVariable { template: TemplateId, names: Vec<String> },
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("no mock fixture for {template} (key {key})")]
    MockMiss { key: String, template: TemplateId },
    #[error("provider error after {retries} retries: {message}")]
    Provider { message: String, retries: u32 },
    #[error("no assertion found in response")]
    NoAssertionFound { raw: String },
    #[error("malformed response, expected {expected}")]
    Malformed { expected: &'static str, raw: String },
    #[error("{0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl LlmError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        LlmError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Raw model text attached to parse failures.
    pub fn raw_response(&self) -> Option<&str> {
        match self {
            LlmError::NoAssertionFound { raw } | LlmError::Malformed { raw, .. } => Some(raw),
            _ => None,
        }
    }
}
