use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::check::{check_functionality, check_syntax, FmOutcome};
use super::dataset::{EvalDataset, EvalRecord};
use crate::llm::Gateway;
use crate::pipeline::{run_nl2sva, DesignContext, GenerationJob, Limits, Mode, Retrievers};
use crate::semantics::EquivOptions;
use crate::sva::parse_assertion;

/// Shown whenever counts come from the mock provider.
pub const MOCK_BANNER: &str = "Mock provider active: counts come from scripted fixtures and measure the harness, not a model. \
The published FM improvements of +58.42% (GPT-4o-mini) and +59.05% (Qwen) depend on the original models, \
a commercial formal tool and the full 229-assertion corpus, and are out of reach at desk scale.";

pub struct EvalSetup<'a> {
    pub gateway: &'a Gateway,
    pub retrievers: Retrievers<'a>,
    pub limits: Limits,
    pub equivalence: EquivOptions,
    pub workers: usize,
    pub config_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordResult {
    pub record: EvalRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRun {
    pub mode: Mode,
    pub records: Vec<RecordResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeMetrics {
    pub mode: Mode,
    pub total: usize,
    pub sc_count: usize,
    pub fm_count: usize,
    /// Syntactically valid records the bounded check could not decide.
    pub fm_unknown: usize,
    pub sc_pct: f64,
    pub fm_pct: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sc_improvement_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fm_improvement_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_digest: String,
    pub dataset_digest: String,
    pub provider: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub banner: Option<String>,
    pub records: usize,
    pub modes: Vec<ModeMetrics>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub report: MetricsReport,
    pub runs: Vec<ModeRun>,
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn pct(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        round2(count as f64 / total as f64 * 100.0)
    }
}

/// `(mode - baseline) / baseline * 100`, undefined for a zero baseline.
pub fn improvement(count: usize, baseline: usize) -> Option<f64> {
    (baseline > 0).then(|| round2((count as f64 - baseline as f64) / baseline as f64 * 100.0))
}

fn evaluate_record(dataset: &EvalDataset, record: &EvalRecord, mode: Mode, setup: &EvalSetup<'_>) -> RecordResult {
    let mut out = record.clone();
    out.sc = Some(false);
    let Some(design) = dataset.design(&record.design_id) else {
        return RecordResult {
            record: out,
            error: Some(format!("unknown design `{}`", record.design_id)),
        };
    };
    let design_context = if design.verilog.trim().is_empty() {
        DesignContext::Signals(design.signals.clone())
    } else {
        DesignContext::Source(design.verilog.clone())
    };
    let job = GenerationJob {
        spec: record.nl_property.clone(),
        design_context,
        mode,
        limits: setup.limits,
    };
    let artifacts = match run_nl2sva(&job, setup.retrievers, setup.gateway) {
        Ok(a) => a,
        Err(e) => {
            return RecordResult {
                record: out,
                error: Some(e.to_string()),
            }
        }
    };
    let sc = check_syntax(&artifacts.final_sva, Some(&design.signals));
    out.generated_sva = Some(artifacts.final_sva.clone());
    out.sc = Some(sc.ok);
    if sc.ok {
        let golden = parse_assertion(&record.golden_sva).expect("golden validated at load");
        let generated = parse_assertion(&artifacts.final_sva).expect("syntax checked");
        out.fm = Some(check_functionality(&golden, &generated, &design.signals, setup.equivalence));
    }
    RecordResult {
        record: out,
        error: sc.error,
    }
}

fn run_mode(dataset: &EvalDataset, mode: Mode, setup: &EvalSetup<'_>) -> ModeRun {
    let n = dataset.records.len();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RecordResult>>> = Mutex::new(vec![None; n]);
    std::thread::scope(|s| {
        for _ in 0..setup.workers.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = evaluate_record(dataset, &dataset.records[i], mode, setup);
                slots.lock().expect("result slots")[i] = Some(r);
            });
        }
    });
    let records = slots
        .into_inner()
        .expect("result slots")
        .into_iter()
        .map(|r| r.expect("every record evaluated"))
        .collect();
    ModeRun { mode, records }
}

fn metrics(run: &ModeRun) -> ModeMetrics {
    let total = run.records.len();
    let sc_count = run.records.iter().filter(|r| r.record.sc == Some(true)).count();
    let fm_of = |o: FmOutcome| {
        run.records
            .iter()
            .filter(|r| r.record.fm.as_ref().is_some_and(|f| f.verdict == o))
            .count()
    };
    let fm_count = fm_of(FmOutcome::Equivalent);
    ModeMetrics {
        mode: run.mode,
        total,
        sc_count,
        fm_count,
        fm_unknown: fm_of(FmOutcome::Unknown),
        sc_pct: pct(sc_count, total),
        fm_pct: pct(fm_count, total),
        sc_improvement_pct: None,
        fm_improvement_pct: None,
    }
}

/// Aggregates per-mode counts. Improvements are filled in only when the
/// plain LLM baseline is among the modes.
pub fn summarize(runs: &[ModeRun], provenance: Provenance, mock: bool) -> MetricsReport {
    let mut modes: Vec<ModeMetrics> = runs.iter().map(metrics).collect();
    if let Some(base) = modes.iter().find(|m| m.mode == Mode::Llm).cloned() {
        for m in &mut modes {
            m.sc_improvement_pct = improvement(m.sc_count, base.sc_count);
            m.fm_improvement_pct = improvement(m.fm_count, base.fm_count);
        }
    }
    MetricsReport {
        banner: mock.then(|| MOCK_BANNER.to_string()),
        records: runs.first().map_or(0, |r| r.records.len()),
        modes,
        provenance,
    }
}

/// Generates, syntax-checks and equivalence-checks every record under each
/// mode. Per-record failures count as syntax failures and never abort the
/// batch.
pub fn run_eval(dataset: &EvalDataset, modes: &[Mode], setup: &EvalSetup<'_>) -> EvalRun {
    let runs: Vec<ModeRun> = modes.iter().map(|&m| run_mode(dataset, m, setup)).collect();
    let provenance = Provenance {
        config_digest: setup.config_digest.clone(),
        dataset_digest: dataset.digest.clone(),
        provider: setup.gateway.provider_name().to_string(),
    };
    EvalRun {
        report: summarize(&runs, provenance, setup.gateway.is_mock()),
        runs,
    }
}

fn signed(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:+.2}%"))
}

/// Plain-text table of a report.
pub fn render_table(report: &MetricsReport) -> String {
    let mut out = String::new();
    if let Some(b) = &report.banner {
        let _ = writeln!(out, "NOTE: {b}\n");
    }
    let with_delta = report.modes.iter().any(|m| m.fm_improvement_pct.is_some());
    let _ = write!(out, "{:<11} {:>9} {:>8} {:>9} {:>8}", "mode", "SC", "SC%", "FM", "FM%");
    if with_delta {
        let _ = write!(out, " {:>10} {:>10}", "SC vs LLM", "FM vs LLM");
    }
    out.push('\n');
    for m in &report.modes {
        let _ = write!(
            out,
            "{:<11} {:>9} {:>8.2} {:>9} {:>8.2}",
            m.mode.as_str(),
            format!("{}/{}", m.sc_count, m.total),
            m.sc_pct,
            format!("{}/{}", m.fm_count, m.total),
            m.fm_pct
        );
        if with_delta {
            let _ = write!(out, " {:>10} {:>10}", signed(m.sc_improvement_pct), signed(m.fm_improvement_pct));
        }
        if m.fm_unknown > 0 {
            let _ = write!(out, "  ({} undecided)", m.fm_unknown);
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "\nprovider {}, config {}, dataset {}",
        report.provenance.provider,
        &report.provenance.config_digest[..report.provenance.config_digest.len().min(12)],
        &report.provenance.dataset_digest[..report.provenance.dataset_digest.len().min(12)]
    );
    out
}
