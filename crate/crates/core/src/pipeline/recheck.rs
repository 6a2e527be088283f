use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::llm::{bindings, parse_recheck_reply, ChatExchange, Gateway, RecheckVerdict, TemplateId};
use crate::retrieval::contains_token;
use crate::sva::{extract_operators, parse_assertion, OperatorKind, TABLE_OPERATORS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecheckTermination {
    /// The model answered `VERDICT: CORRECT`.
    Correct,
    /// The model returned the same assertion it was shown.
    Unchanged,
    /// The iteration cap was reached with the model still revising.
    MaxIterations,
    /// The reply carried no assertion to continue with.
    NoAssertion,
    /// A gateway error stopped the loop.
    Degraded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecheckIteration {
    pub candidate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub syntax_error: Option<String>,
    pub operators: Vec<OperatorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exchange: Option<ChatExchange>,
    pub verdict: Option<RecheckVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecheckOutcome {
    pub final_sva: String,
    pub termination: RecheckTermination,
    pub iterations: Vec<RecheckIteration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degraded: Option<String>,
}

/// Operators a candidate uses. Parsed candidates report exact operators;
/// unparseable ones fall back to a lexical scan for surface tokens.
pub fn candidate_operators(candidate: &str) -> (Vec<OperatorKind>, Option<String>) {
    match parse_assertion(candidate) {
        Ok(ast) => (
            extract_operators(&ast)
                .into_iter()
                .filter(|op| op.is_table_operator())
                .collect(),
            None,
        ),
        Err(e) => (
            TABLE_OPERATORS
                .into_iter()
                .filter(|op| {
                    op.surface_token()
                        .is_some_and(|t| contains_token(candidate, t))
                })
                .collect(),
            Some(e.to_string()),
        ),
    }
}

pub fn explanation_lines(ops: &[OperatorKind]) -> String {
    if ops.is_empty() {
        return "(none)".to_string();
    }
    ops.iter()
        .filter_map(|op| {
            let token = op.surface_token()?;
            let text = op.explanation().ok()?;
            Some(format!("- `{token}` ({}): {text}", op.syntax()))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn same_text(a: &str, b: &str) -> bool {
    a.split_whitespace().eq(b.split_whitespace())
}

/// Feeds operator explanations (and any syntax error) back to the model
/// until it accepts the candidate, stops changing it, or `max_iters` passes.
pub fn recheck(
    candidate: &str,
    spec: &str,
    gateway: &Gateway,
    max_iters: usize,
) -> Result<RecheckOutcome, PipelineError> {
    if max_iters == 0 {
        return Err(PipelineError::InvalidJob(
            "max_recheck_iterations must be at least 1".into(),
        ));
    }
    let mut current = candidate.trim().to_string();
    let mut best: Option<String> = None;
    let mut iterations = Vec::new();

    for _ in 0..max_iters {
        let (operators, syntax_error) = candidate_operators(&current);
        if syntax_error.is_none() {
            best = Some(current.clone());
        }
        let feedback = match &syntax_error {
            Some(e) => format!("\nThe candidate does not parse: {e}\nFix the syntax as well.\n"),
            None => String::new(),
        };
        let reply = gateway.complete(
            TemplateId::SvaRechecking,
            bindings([
                ("operator_explanations", explanation_lines(&operators)),
                ("syntax_feedback", feedback),
                ("spec", spec.to_string()),
                ("candidate", current.clone()),
            ]),
        );
        let mut step = RecheckIteration {
            candidate: current.clone(),
            syntax_error,
            operators,
            exchange: None,
            verdict: None,
            proposed: None,
        };
        let exchange = match reply {
            Ok(x) => x,
            Err(e) => {
                iterations.push(step);
                return Ok(RecheckOutcome {
                    final_sva: best.unwrap_or(current),
                    termination: RecheckTermination::Degraded,
                    iterations,
                    degraded: Some(e.to_string()),
                });
            }
        };
        let parsed = parse_recheck_reply(&exchange.response.text);
        step.exchange = Some(exchange);
        step.verdict = Some(parsed.verdict);
        step.proposed = parsed.sva.clone();
        iterations.push(step);

        let termination = match (parsed.verdict, parsed.sva) {
            (RecheckVerdict::Correct, _) => Some(RecheckTermination::Correct),
            (_, None) => Some(RecheckTermination::NoAssertion),
            (_, Some(next)) if same_text(&next, &current) => Some(RecheckTermination::Unchanged),
            (_, Some(next)) => {
                current = next;
                None
            }
        };
        if let Some(termination) = termination {
            return Ok(RecheckOutcome {
                final_sva: current,
                termination,
                iterations,
                degraded: None,
            });
        }
    }
    Ok(RecheckOutcome {
        final_sva: current,
        termination: RecheckTermination::MaxIterations,
        iterations,
        degraded: None,
    })
}
