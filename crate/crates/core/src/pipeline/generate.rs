use serde::{Deserialize, Serialize};

use super::mode::{Mode, RetrievalPlan};
use super::recheck::{recheck, RecheckOutcome};
use super::PipelineError;
use crate::llm::{bindings, extract_sva_from_response, ChatExchange, Gateway, TemplateId};
use crate::retrieval::{RetrievalContext, Retriever};
use crate::sva::{parse_assertion, SignalTable, SvaAst, SyntaxError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DesignContext {
    /// Verilog source shown to the model as is.
    Source(String),
    Signals(SignalTable),
}

impl DesignContext {
    pub fn render(&self) -> String {
        match self {
            DesignContext::Source(src) => src.trim_end().to_string(),
            DesignContext::Signals(table) => format!("Signals:\n{}", table.describe()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Limits {
    pub max_recheck_iterations: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_recheck_iterations: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationJob {
    pub spec: String,
    pub design_context: DesignContext,
    pub mode: Mode,
    #[serde(default)]
    pub limits: Limits,
}

/// Chunk stores available to a run. Only the modes that retrieve need them.
#[derive(Clone, Copy, Default)]
pub struct Retrievers<'a> {
    /// Code-centric chunks from dynamic splitting.
    pub dynamic: Option<&'a Retriever>,
    /// Fixed-size windows from static splitting.
    pub static_windows: Option<&'a Retriever>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CandidateStatus {
    Valid,
    SyntaxInvalid { error: SyntaxError },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationArtifacts {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieval: Option<RetrievalContext>,
    /// The reference-material block exactly as placed in the prompt.
    pub retrieved_context: String,
    pub initial: ChatExchange,
    /// Every assertion text considered, in order.
    pub candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recheck: Option<RecheckOutcome>,
    pub final_sva: String,
    pub status: CandidateStatus,
}

impl GenerationArtifacts {
    pub fn is_valid(&self) -> bool {
        matches!(self.status, CandidateStatus::Valid)
    }

    pub fn parsed(&self) -> Option<SvaAst> {
        parse_assertion(&self.final_sva).ok()
    }
}

fn need<'a>(r: Option<&'a Retriever>, mode: Mode, store: &'static str) -> Result<&'a Retriever, PipelineError> {
    r.ok_or(PipelineError::MissingIndex { mode, store })
}

/// The retrieval stage selected by the job's mode, with the store it used.
pub fn retrieve_for<'a>(
    job: &GenerationJob,
    retrievers: Retrievers<'a>,
    gateway: &Gateway,
) -> Result<Option<(RetrievalContext, &'a Retriever)>, PipelineError> {
    let mode = job.mode;
    let spec = job.spec.as_str();
    let ctx = match mode.retrieval() {
        RetrievalPlan::None => return Ok(None),
        RetrievalPlan::StaticGlobal => {
            let r = need(retrievers.static_windows, mode, "static")?;
            let global_chunks = r.retrieve_global(spec, r.config.k_global)?;
            (RetrievalContext { global_chunks, ..Default::default() }, r)
        }
        RetrievalPlan::Global => {
            let r = need(retrievers.dynamic, mode, "dynamic")?;
            let global_chunks = r.retrieve_global(spec, r.config.k_global)?;
            (RetrievalContext { global_chunks, ..Default::default() }, r)
        }
        RetrievalPlan::OperatorGuided => {
            let r = need(retrievers.dynamic, mode, "dynamic")?;
            let g = r.retrieve_operator_guided(spec, gateway, r.config.k_per_op)?;
            let ctx = RetrievalContext {
                operator_chunks: g.operator_chunks,
                keyword_map: g.keyword_map,
                discarded_operators: g.discarded,
                ..Default::default()
            };
            (ctx, r)
        }
        RetrievalPlan::Hybrid => {
            let r = need(retrievers.dynamic, mode, "dynamic")?;
            (r.hybrid_retrieve(spec, gateway, r.config.k_global, r.config.k_per_op)?, r)
        }
    };
    Ok(Some(ctx))
}

/// Renders retrieved chunks as `### <chunk id>` sections, global hits first.
pub fn render_retrieved(ctx: &RetrievalContext, retriever: &Retriever) -> String {
    let blocks: Vec<String> = ctx
        .chunk_ids()
        .into_iter()
        .filter_map(|id| retriever.chunk(id).map(|c| format!("### {id}\n{}", c.text())))
        .collect();
    if blocks.is_empty() {
        "(none)".to_string()
    } else {
        blocks.join("\n\n")
    }
}

fn status_of(text: &str) -> CandidateStatus {
    match parse_assertion(text) {
        Ok(_) => CandidateStatus::Valid,
        Err(e) => CandidateStatus::SyntaxInvalid { error: e.to_record() },
    }
}

/// Retrieval, initial generation, extraction and, for the rechecking modes,
/// the operator rechecking loop. A final candidate that does not parse is
/// returned tagged rather than dropped.
pub fn run_nl2sva(
    job: &GenerationJob,
    retrievers: Retrievers<'_>,
    gateway: &Gateway,
) -> Result<GenerationArtifacts, PipelineError> {
    if job.spec.trim().is_empty() {
        return Err(PipelineError::InvalidJob("spec is empty".into()));
    }
    if job.mode.rechecks() && job.limits.max_recheck_iterations == 0 {
        return Err(PipelineError::InvalidJob(
            "max_recheck_iterations must be at least 1".into(),
        ));
    }
    let retrieved = retrieve_for(job, retrievers, gateway)?;
    let retrieved_context = match &retrieved {
        Some((ctx, r)) => render_retrieved(ctx, r),
        None => "(none)".to_string(),
    };
    let initial = gateway
        .complete(
            TemplateId::InitialGeneration,
            bindings([
                ("spec", job.spec.clone()),
                ("design_context", job.design_context.render()),
                ("retrieved_context", retrieved_context.clone()),
            ]),
        )
        .map_err(PipelineError::Generation)?;
    let first = match extract_sva_from_response(&initial.response.text) {
        Ok(sva) => sva,
        Err(_) => initial.response.text.trim().to_string(),
    };
    let mut candidates = vec![first.clone()];
    let mut final_sva = first;
    let mut recheck_outcome = None;
    if job.mode.rechecks() {
        let outcome = recheck(&final_sva, &job.spec, gateway, job.limits.max_recheck_iterations)?;
        for it in &outcome.iterations {
            if let Some(p) = &it.proposed {
                candidates.push(p.clone());
            }
        }
        final_sva = outcome.final_sva.clone();
        recheck_outcome = Some(outcome);
    }
    Ok(GenerationArtifacts {
        mode: job.mode,
        retrieval: retrieved.map(|(ctx, _)| ctx),
        retrieved_context,
        initial,
        candidates,
        recheck: recheck_outcome,
        status: status_of(&final_sva),
        final_sva,
    })
}
