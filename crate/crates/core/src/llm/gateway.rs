use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::provider::{ChatRequest, ChatResponse, Provider, Sampling};
use super::template::{render_prompt, Bindings, Prompt, TemplateId};
use super::LlmError;

/// One request/response pair. Timing lives in the transcript log only, so
/// exchanges replayed from fixtures compare equal across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub template_id: TemplateId,
    pub prompt: Prompt,
    pub sampling: Sampling,
    pub response: ChatResponse,
}

#[derive(Serialize)]
struct TranscriptEntry<'a> {
    template_id: TemplateId,
    prompt: &'a Prompt,
    sampling: Sampling,
    #[serde(skip_serializing_if = "Option::is_none")]
    response: Option<&'a ChatResponse>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    elapsed_ms: u128,
}

/// Renders templates, calls the provider and appends every exchange to an
/// optional JSONL transcript.
#[derive(Clone)]
pub struct Gateway {
    provider: Arc<dyn Provider>,
    sampling: Sampling,
    transcript: Option<Arc<Mutex<File>>>,
}

impl Gateway {
    pub fn new(provider: impl Provider + 'static) -> Self {
        Self::from_arc(Arc::new(provider))
    }

    pub fn from_arc(provider: Arc<dyn Provider>) -> Self {
        Gateway {
            provider,
            sampling: Sampling::default(),
            transcript: None,
        }
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Result<Self, LlmError> {
        if !(0.0..=2.0).contains(&sampling.temperature) {
            return Err(LlmError::InvalidConfig(format!(
                "temperature {} is outside [0, 2]",
                sampling.temperature
            )));
        }
        if !(0.0..=1.0).contains(&sampling.top_p) {
            return Err(LlmError::InvalidConfig(format!("top_p {} is outside [0, 1]", sampling.top_p)));
        }
        self.sampling = sampling;
        Ok(self)
    }

    /// Appends exchanges to `path`, creating it if needed.
    pub fn with_transcript(mut self, path: &Path) -> Result<Self, LlmError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| LlmError::io(parent, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| LlmError::io(path, e))?;
        self.transcript = Some(Arc::new(Mutex::new(file)));
        Ok(self)
    }

    pub fn provider_name(&self) -> &str {
        self.provider.name()
    }

    pub fn is_mock(&self) -> bool {
        self.provider.name() == "mock"
    }

    pub fn complete(&self, template_id: TemplateId, bindings: Bindings) -> Result<ChatExchange, LlmError> {
        let prompt = render_prompt(template_id, &bindings)?;
        let request = ChatRequest {
            template_id,
            bindings,
            system: prompt.system.clone(),
            user: prompt.user.clone(),
            sampling: self.sampling,
        };
        let started = Instant::now();
        let result = self.provider.complete(&request);
        self.log(TranscriptEntry {
            template_id,
            prompt: &prompt,
            sampling: self.sampling,
            response: result.as_ref().ok(),
            error: result.as_ref().err().map(|e| e.to_string()),
            elapsed_ms: started.elapsed().as_millis(),
        });
        Ok(ChatExchange {
            template_id,
            prompt,
            sampling: self.sampling,
            response: result?,
        })
    }

    fn log(&self, entry: TranscriptEntry<'_>) {
        let Some(file) = &self.transcript else { return };
        let line = serde_json::to_string(&entry).expect("transcript entry serializes");
        let mut f = file.lock().expect("transcript lock");
        if let Err(e) = writeln!(f, "{line}") {
            tracing::warn!(error = %e, "could not append to transcript");
        }
    }
}
