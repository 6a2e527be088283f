//! Generation orchestration: mode-selected retrieval, initial generation,
//! operator rechecking and derivation traces for fine-tuning records.

mod derive;
mod generate;
mod mode;
mod recheck;

pub use derive::{
    build_finetune_records, derive_trace, explain, DerivationStep, DerivationTrace, FinetuneBatch,
    FinetunePair, FinetuneRecord, Fragmenter, Reject, ReplayError, StepKind,
};
pub use generate::{
    render_retrieved, retrieve_for, run_nl2sva, CandidateStatus, DesignContext, GenerationArtifacts,
    GenerationJob, Limits, Retrievers,
};
pub use mode::{Mode, RetrievalPlan, UnknownMode};
pub use recheck::{
    candidate_operators, explanation_lines, recheck, RecheckIteration, RecheckOutcome,
    RecheckTermination,
};

use crate::llm::LlmError;
use crate::retrieval::RetrievalError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid job: {0}")]
    InvalidJob(String),
    #[error("mode {mode} needs the {store} chunk store, which was not provided")]
    MissingIndex { mode: Mode, store: &'static str },
    #[error("retrieval stage: {0}")]
    Retrieval(#[from] RetrievalError),
    #[error("generation stage: {0}")]
    Generation(LlmError),
    #[error("derivation stage: {0}")]
    Derivation(LlmError),
}

impl PipelineError {
    /// True when the failure came from the model provider.
    pub fn is_provider(&self) -> bool {
        match self {
            PipelineError::Generation(e) | PipelineError::Derivation(e) => {
                matches!(e, LlmError::Provider { .. } | LlmError::MockMiss { .. })
            }
            PipelineError::Retrieval(RetrievalError::Gateway(e)) => {
                matches!(e, LlmError::Provider { .. } | LlmError::MockMiss { .. })
            }
            _ => false,
        }
    }
}
