use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::template::{Bindings, TemplateId};
use super::LlmError;

/// Sampling parameters sent with every request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Sampling {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            temperature: 0.6,
            top_p: 0.95,
            max_tokens: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub template_id: TemplateId,
    pub bindings: Bindings,
    pub system: String,
    pub user: String,
    #[serde(flatten)]
    pub sampling: Sampling,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    /// Verbatim reply text.
    pub text: String,
    pub provider: String,
    pub model: Option<String>,
    pub retries: u32,
}

pub trait Provider: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError>;
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    template_id: &'a str,
    bindings: &'a Bindings,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Stable fixture key: SHA-256 of the canonical JSON of the template id and
/// the (sorted) bindings.
pub fn mock_key(template_id: TemplateId, bindings: &Bindings) -> String {
    let json = serde_json::to_string(&KeyMaterial {
        template_id: template_id.as_str(),
        bindings,
    })
    .expect("bindings serialize");
    sha256_hex(json.as_bytes())
}

/// Human-readable entry in a fixture directory's `index.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureIndexEntry {
    pub template_id: TemplateId,
    pub bindings_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
}

/// Replays recorded replies keyed by [`mock_key`]. Never invents a reply.
#[derive(Debug, Clone, Default)]
pub struct MockProvider {
    responses: BTreeMap<String, String>,
}

impl MockProvider {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads every `<key>.txt` file from a fixture directory.
    pub fn from_dir(dir: &Path) -> Result<Self, LlmError> {
        let mut responses = BTreeMap::new();
        let entries = fs::read_dir(dir).map_err(|e| LlmError::io(dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| LlmError::io(dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(key) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let text = fs::read_to_string(&path).map_err(|e| LlmError::io(&path, e))?;
            responses.insert(key.to_string(), text);
        }
        Ok(MockProvider { responses })
    }

    pub fn insert(&mut self, template_id: TemplateId, bindings: &Bindings, reply: impl Into<String>) {
        self.responses.insert(mock_key(template_id, bindings), reply.into());
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl Provider for MockProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let key = mock_key(request.template_id, &request.bindings);
        match self.responses.get(&key) {
            Some(text) => Ok(ChatResponse {
                text: text.clone(),
                provider: "mock".into(),
                model: None,
                retries: 0,
            }),
            None => Err(LlmError::MockMiss {
                key,
                template: request.template_id,
            }),
        }
    }
}

type Script = dyn Fn(&ChatRequest) -> Option<String> + Send + Sync;

/// Answers from a closure; `None` from the closure is a miss. Useful for
/// tests and for authoring fixtures together with [`Recorder`].
pub struct ScriptedProvider {
    script: Box<Script>,
}

impl ScriptedProvider {
    pub fn new(script: impl Fn(&ChatRequest) -> Option<String> + Send + Sync + 'static) -> Self {
        ScriptedProvider {
            script: Box::new(script),
        }
    }
}

impl Provider for ScriptedProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        match (self.script)(request) {
            Some(text) => Ok(ChatResponse {
                text,
                provider: "mock".into(),
                model: None,
                retries: 0,
            }),
            None => Err(LlmError::MockMiss {
                key: mock_key(request.template_id, &request.bindings),
                template: request.template_id,
            }),
        }
    }
}

/// Passes requests through and saves every reply as a mock fixture.
pub struct Recorder<P> {
    inner: P,
    dir: PathBuf,
    index: Mutex<BTreeMap<String, FixtureIndexEntry>>,
}

impl<P: Provider> Recorder<P> {
    pub fn new(inner: P, dir: &Path) -> Result<Self, LlmError> {
        fs::create_dir_all(dir).map_err(|e| LlmError::io(dir, e))?;
        let index_path = dir.join("index.json");
        let index = if index_path.exists() {
            let text = fs::read_to_string(&index_path).map_err(|e| LlmError::io(&index_path, e))?;
            serde_json::from_str(&text).map_err(|e| LlmError::Malformed {
                expected: "a fixture index",
                raw: e.to_string(),
            })?
        } else {
            BTreeMap::new()
        };
        Ok(Recorder {
            inner,
            dir: dir.to_path_buf(),
            index: Mutex::new(index),
        })
    }

    fn save(&self, request: &ChatRequest, text: &str) -> Result<(), LlmError> {
        let key = mock_key(request.template_id, &request.bindings);
        let path = self.dir.join(format!("{key}.txt"));
        fs::write(&path, text).map_err(|e| LlmError::io(&path, e))?;
        let bindings_json = serde_json::to_string(&request.bindings).expect("bindings serialize");
        let mut index = self.index.lock().expect("index lock");
        index.insert(
            key,
            FixtureIndexEntry {
                template_id: request.template_id,
                bindings_digest: sha256_hex(bindings_json.as_bytes()),
                spec: request.bindings.get("spec").cloned(),
            },
        );
        let index_path = self.dir.join("index.json");
        let json = serde_json::to_string_pretty(&*index).expect("index serializes");
        fs::write(&index_path, json + "\n").map_err(|e| LlmError::io(&index_path, e))
    }
}

impl<P: Provider> Provider for Recorder<P> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let response = self.inner.complete(request)?;
        self.save(request, &response.text)?;
        Ok(response)
    }
}
