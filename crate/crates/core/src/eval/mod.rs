//! Dataset loading, syntax and functionality checks, checker export for
//! external formal tools, and batch metrics.

mod check;
mod dataset;
mod fpv;
mod run;

pub use check::{check_functionality, check_syntax, FmMethod, FmOutcome, FmVerdict, SyntaxCheck};
pub use dataset::{load_dataset, Design, EvalDataset, EvalRecord, Manifest, ManifestDesign};
pub use fpv::{export_fpv, iff_assertion};
pub use run::{
    improvement, render_table, round2, run_eval, summarize, EvalRun, EvalSetup, MetricsReport,
    ModeMetrics, ModeRun, Provenance, RecordResult, MOCK_BANNER,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("golden assertion of record `{record_id}` is invalid: {message}")]
    GoldenParse { record_id: String, message: String },
    #[error("clocking differs: golden {golden}, generated {generated}")]
    ClockMismatch { golden: String, generated: String },
    #[error("{0}")]
    Io(String),
}
