use serde::{Deserialize, Serialize};

use crate::semantics::{equivalent, Counterexample, EquivOptions, Equivalence, SemanticsError};
use crate::sva::{parse_assertion, parse_with_signals, SignalTable, SvaAst};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxCheck {
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Syntax correctness: the text is one `assert property` statement and,
/// when a signal table is given, references only declared signals.
pub fn check_syntax(sva: &str, signals: Option<&SignalTable>) -> SyntaxCheck {
    let result = match signals {
        Some(t) => parse_with_signals(sva, t),
        None => parse_assertion(sva),
    };
    match result {
        Ok(_) => SyntaxCheck { ok: true, error: None },
        Err(e) => SyntaxCheck {
            ok: false,
            error: Some(e.to_string()),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FmOutcome {
    Equivalent,
    Inequivalent,
    /// Not decided within the bounded check; never counted as a match.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FmMethod {
    BoundedTrace,
    ExternalFpv,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FmVerdict {
    pub verdict: FmOutcome,
    pub method: FmMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl FmVerdict {
    pub fn matched(&self) -> bool {
        self.verdict == FmOutcome::Equivalent
    }
}

/// Functionality match by exhaustive bounded-trace equivalence over the
/// signals the two assertions reference.
pub fn check_functionality(
    golden: &SvaAst,
    generated: &SvaAst,
    signals: &SignalTable,
    options: EquivOptions,
) -> FmVerdict {
    let mut notes = Vec::new();
    if golden.disable != generated.disable {
        notes.push("disable iff clauses differ; full attempt semantics compared".to_string());
    }
    let (verdict, method, counterexample) = match equivalent(golden, generated, signals, options) {
        Ok(Equivalence::Equivalent { .. }) => (FmOutcome::Equivalent, FmMethod::BoundedTrace, None),
        Ok(Equivalence::Inequivalent(cx)) => (FmOutcome::Inequivalent, FmMethod::BoundedTrace, Some(cx)),
        Ok(Equivalence::ClockMismatch { golden, candidate }) => {
            notes.push(format!(
                "clocking differs: {:?} {} versus {:?} {}",
                golden.edge, golden.clock, candidate.edge, candidate.clock
            ));
            (FmOutcome::Inequivalent, FmMethod::BoundedTrace, None)
        }
        Err(e @ SemanticsError::BudgetExceeded { .. }) => {
            notes.push(e.to_string());
            (FmOutcome::Unknown, FmMethod::Unknown, None)
        }
        Err(e) => {
            notes.push(e.to_string());
            (FmOutcome::Unknown, FmMethod::Unknown, None)
        }
    };
    FmVerdict {
        verdict,
        method,
        counterexample,
        notes,
    }
}
