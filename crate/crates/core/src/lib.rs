//! Natural-language to SystemVerilog assertion generation.
//!
//! The crate covers the whole flow: a four-layer assertion parser ([`sva`]),
//! bounded trace semantics and exhaustive equivalence ([`semantics`]),
//! code-centric corpus chunking ([`ingest`]), two-path retrieval
//! ([`retrieval`]), a chat-completion gateway with prompt templates ([`llm`]),
//! generation/rechecking/derivation orchestration ([`pipeline`]) and the
//! evaluation harness ([`eval`]).

pub mod sva;
pub mod semantics;
pub mod ingest;
pub mod llm;
pub mod retrieval;
pub mod pipeline;
pub mod config;
pub mod eval;
