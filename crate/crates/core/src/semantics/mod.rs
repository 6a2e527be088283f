//! Two-state bounded-trace semantics for the supported assertion subset and
//! exhaustive equivalence checking over short traces.
//!
//! Attempts start at every cycle. Sampled-value functions look back at 0
//! before the first cycle. Obligations still open when the trace ends are
//! pending: they hold under [`EndOfTrace::Weak`] and fail under
//! [`EndOfTrace::Strict`].

mod equiv;
mod eval;
mod trace;

pub use equiv::{equivalent, Counterexample, EquivOptions, Equivalence};
pub use eval::{
    check_assertion, eval_boolean, eval_property, eval_sequence_function, AttemptStatus,
    CheckOptions, EndOfTrace, PropertyOutcome, Truth, Verdict, VerdictStatus,
};
pub use trace::{Trace, TraceError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemanticsError {
    #[error("signal `{0}` is not declared")]
    UnknownSignal(String),
    #[error("select on `{signal}` is outside its {width} bits")]
    SelectOutOfRange { signal: String, width: u32 },
    #[error("expression spans more than one cycle")]
    NotAValue,
    #[error("cycle {cycle} is outside a {len}-cycle trace")]
    CycleOutOfRange { cycle: usize, len: usize },
    #[error("{bits} enumerated bits exceed the budget of {budget}")]
    BudgetExceeded { bits: u64, budget: u32 },
    #[error("{0}")]
    InvalidBound(String),
    #[error(transparent)]
    Trace(#[from] TraceError),
}
