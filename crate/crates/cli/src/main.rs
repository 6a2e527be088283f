//! `svagen` command-line front end.

use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use svagen::config::Config;
use svagen::eval::{
    check_functionality, export_fpv, load_dataset, render_table, run_eval, EvalSetup,
    FmOutcome,
};
use svagen::ingest::{load_corpus, split_corpus, ChunkStore, EmbeddingSidecar, SplitMode};
use svagen::llm::{Gateway, HttpProvider, LlmError, MockProvider};
use svagen::pipeline::{
    build_finetune_records, explain, recheck, run_nl2sva, DesignContext, FinetunePair, Fragmenter,
    GenerationJob, Mode, PipelineError, Retrievers,
};
use svagen::retrieval::{RetrievalError, Retriever};
use svagen::sva::{parse_assertion, parse_with_signals, SignalTable, SvaAst};

const BUNDLED_MOCK_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/mock");

#[derive(Parser)]
#[command(name = "svagen", version, about = "Natural-language to SystemVerilog assertion toolkit")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Chat provider.
    #[arg(long, global = true, value_enum, default_value_t = ProviderKind::Mock)]
    provider: ProviderKind,
    /// Recorded replies used by the mock provider.
    #[arg(long, global = true, env = "SVAGEN_MOCK_DIR", default_value = BUNDLED_MOCK_DIR)]
    mock_dir: PathBuf,
    /// Prebuilt dynamic chunk store used for retrieval.
    #[arg(long, global = true)]
    seed_store: Option<PathBuf>,
    /// Prebuilt static-window store used by the StaticRAG mode.
    #[arg(long, global = true)]
    static_store: Option<PathBuf>,
    /// Append every model exchange to this JSONL file.
    #[arg(long, global = true)]
    transcript: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProviderKind {
    Mock,
    Http,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SplitKind {
    Dynamic,
    Static,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RetrieveMode {
    Global,
    Operator,
    Hybrid,
}

#[derive(Subcommand)]
enum Command {
    /// Split a corpus into a chunk store and embed it.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = SplitKind::Dynamic)]
        mode: SplitKind,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        overlap: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Retrieve chunks for a property description.
    Retrieve {
        #[arg(long)]
        spec: PathBuf,
        /// Store directory; defaults to --seed-store.
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RetrieveMode::Hybrid)]
        mode: RetrieveMode,
    },
    /// Generate an assertion from a property description.
    Generate {
        #[arg(long)]
        spec: PathBuf,
        /// Verilog source, or a `signals.json` signal list.
        #[arg(long)]
        design: PathBuf,
        #[arg(long, default_value = "RAGSVAG")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the rechecking loop on a candidate assertion.
    Recheck {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Build derivation-trace fine-tuning records from `{sva, explanation}` lines.
    Derive {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Ask the model to fragment explanations.
        #[arg(long)]
        llm_fragmenter: bool,
    },
    /// Evaluate pipeline modes over a dataset.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated modes; all modes when omitted.
        #[arg(long, value_delimiter = ',')]
        modes: Vec<Mode>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the full run (report and per-record results) as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a formal checker pairing a golden and a generated assertion.
    ExportFpv {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        design_id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bounded-trace equivalence of two assertions.
    Check {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Parse an assertion and explain it.
    Parse {
        file: PathBuf,
        #[arg(long)]
        signals: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    golden: PathBuf,
    #[arg(long)]
    generated: PathBuf,
    #[arg(long)]
    signals: PathBuf,
}

/// Failure class, mapped to the process exit code.
enum Failure {
    Data(anyhow::Error),
    Provider(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

fn llm_failure(e: LlmError) -> Failure {
    match e {
        LlmError::Provider { .. } | LlmError::MockMiss { .. } => Failure::Provider(e.into()),
        other => Failure::Data(other.into()),
    }
}

fn pipeline_failure(e: PipelineError) -> Failure {
    if e.is_provider() {
        Failure::Provider(e.into())
    } else {
        Failure::Data(e.into())
    }
}

fn retrieval_failure(e: RetrievalError) -> Failure {
    match e {
        RetrievalError::Gateway(inner) => llm_failure(inner),
        other => Failure::Data(other.into()),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn read_signals(path: &Path) -> anyhow::Result<SignalTable> {
    serde_json::from_str(&read(path)?).with_context(|| format!("{} is not a signal list", path.display()))
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

struct App {
    config: Config,
    cli: Cli,
}

impl App {
    fn gateway(&self, transcript: Option<&Path>) -> Result<Gateway, Failure> {
        let gateway = match self.cli.provider {
            ProviderKind::Mock => Gateway::new(MockProvider::from_dir(&self.cli.mock_dir).map_err(llm_failure)?),
            ProviderKind::Http => Gateway::new(HttpProvider::new(self.config.llm.http.clone()))
                .with_sampling(self.config.llm.sampling)
                .map_err(|e| Failure::Data(e.into()))?,
        };
        match transcript.or(self.cli.transcript.as_deref()) {
            Some(path) => gateway.with_transcript(path).map_err(|e| Failure::Data(e.into())),
            None => Ok(gateway),
        }
    }

    fn open_store(&self, dir: &Path) -> Result<Retriever, Failure> {
        let store = ChunkStore::read(dir).map_err(|e| Failure::Data(e.into()))?;
        let sidecar = EmbeddingSidecar::read(dir).map_err(|e| Failure::Data(e.into()))?;
        Retriever::build(store, self.config.embedding.embedder(), sidecar.as_ref(), self.config.retrieval)
            .map_err(retrieval_failure)
    }

    fn stores(&self) -> Result<(Option<Retriever>, Option<Retriever>), Failure> {
        let dynamic = self.cli.seed_store.as_deref().map(|d| self.open_store(d)).transpose()?;
        let static_windows = self.cli.static_store.as_deref().map(|d| self.open_store(d)).transpose()?;
        Ok((dynamic, static_windows))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();

    let config = match &cli.config {
        Some(path) => Config::load(path),
        None => Ok(Config::default()),
    }
    .map(Config::with_env_overrides);
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    match run(App { config, cli }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Provider(e)) => {
            eprintln!("provider error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(ctx: App) -> Result<(), Failure> {
    let json = ctx.cli.json;
    match &ctx.cli.command {
        Command::Ingest {
            corpus,
            mode,
            size,
            overlap,
            out,
        } => {
            let split = match mode {
                SplitKind::Dynamic => SplitMode::Dynamic,
                SplitKind::Static => {
                    let (dsize, doverlap) = match ctx.config.ingest.static_split {
                        SplitMode::Static { size, overlap } => (size, overlap),
                        SplitMode::Dynamic => (1000, 200),
                    };
                    SplitMode::Static {
                        size: size.unwrap_or(dsize),
                        overlap: overlap.unwrap_or(doverlap),
                    }
                }
            };
            let docs = load_corpus(corpus).map_err(|e| Failure::Data(e.into()))?;
            let chunks = split_corpus(&docs, split).map_err(|e| Failure::Data(e.into()))?;
            let store = ChunkStore::new(split, chunks);
            store.write(out).map_err(|e| Failure::Data(e.into()))?;
            let retriever = Retriever::build(store, ctx.config.embedding.embedder(), None, ctx.config.retrieval)
                .map_err(retrieval_failure)?;
            retriever.sidecar().write(out).map_err(|e| Failure::Data(e.into()))?;
            let n = retriever.store().chunks.len();
            if json {
                print_json(&serde_json::json!({
                    "documents": docs.len(),
                    "chunks": n,
                    "embedder": retriever.embedder_id(),
                    "store": out,
                }));
            } else {
                println!("{} documents, {n} chunks written to {}", docs.len(), out.display());
            }
        }
        Command::Retrieve { spec, store, mode } => {
            let dir = store
                .as_deref()
                .or(ctx.cli.seed_store.as_deref())
                .ok_or_else(|| Failure::Data(anyhow::anyhow!("retrieve needs --store or --seed-store")))?;
            let retriever = ctx.open_store(dir)?;
            let spec = read(spec)?;
            let spec = spec.trim();
            let cfg = ctx.config.retrieval;
            let value = match mode {
                RetrieveMode::Global => {
                    serde_json::to_value(retriever.retrieve_global(spec, cfg.k_global).map_err(retrieval_failure)?)
                }
                RetrieveMode::Operator => serde_json::to_value(
                    retriever
                        .retrieve_operator_guided(spec, &ctx.gateway(None)?, cfg.k_per_op)
                        .map_err(retrieval_failure)?,
                ),
                RetrieveMode::Hybrid => serde_json::to_value(
                    retriever
                        .hybrid_retrieve(spec, &ctx.gateway(None)?, cfg.k_global, cfg.k_per_op)
                        .map_err(retrieval_failure)?,
                ),
            }
            .expect("retrieval output serializes");
            if json {
                print_json(&value);
            } else {
                print_scored(&value, &retriever);
            }
        }
        Command::Generate { spec, design, mode, out } => {
            let design_context = if design.extension().is_some_and(|e| e == "json") {
                DesignContext::Signals(read_signals(design)?)
            } else {
                DesignContext::Source(read(design)?)
            };
            let job = GenerationJob {
                spec: read(spec)?.trim().to_string(),
                design_context,
                mode: *mode,
                limits: ctx.config.pipeline,
            };
            let transcript = out.as_ref().map(|o| o.with_extension("transcript.jsonl"));
            let gateway = ctx.gateway(transcript.as_deref())?;
            let (dynamic, static_windows) = ctx.stores()?;
            let retrievers = Retrievers {
                dynamic: dynamic.as_ref(),
                static_windows: static_windows.as_ref(),
            };
            let artifacts = run_nl2sva(&job, retrievers, &gateway).map_err(pipeline_failure)?;
            if let Some(out) = out {
                write(out, &serde_json::to_string_pretty(&artifacts).expect("artifacts serialize"))?;
            }
            if json {
                print_json(&artifacts);
            } else {
                println!("{}", artifacts.final_sva);
                if let svagen::pipeline::CandidateStatus::SyntaxInvalid { error } = &artifacts.status {
                    eprintln!("warning: final assertion does not parse: {error}");
                }
            }
        }
        Command::Recheck { spec, candidate, max_iters } => {
            let gateway = ctx.gateway(None)?;
            let max = max_iters.unwrap_or(ctx.config.pipeline.max_recheck_iterations);
            let outcome = recheck(read(candidate)?.trim(), read(spec)?.trim(), &gateway, max)
                .map_err(pipeline_failure)?;
            if json {
                print_json(&outcome);
            } else {
                println!("{}", outcome.final_sva);
                eprintln!("{} iteration(s), stopped: {:?}", outcome.iterations.len(), outcome.termination);
                if let Some(reason) = &outcome.degraded {
                    eprintln!("degraded: {reason}");
                }
            }
        }
        Command::Derive { pairs, out, llm_fragmenter } => {
            let text = read(pairs)?;
            let pairs: Vec<FinetunePair> = text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{} line {}", pairs.display(), i + 1)))
                .collect::<anyhow::Result<_>>()?;
            let transcript = out.with_extension("transcript.jsonl");
            let gateway;
            let fragmenter = if *llm_fragmenter {
                gateway = ctx.gateway(Some(&transcript))?;
                Fragmenter::Llm(&gateway)
            } else {
                Fragmenter::Deterministic
            };
            let batch = build_finetune_records(&pairs, fragmenter);
            write(out, &batch.to_jsonl())?;
            for r in &batch.rejects {
                eprintln!("rejected pair {}: {}", r.index + 1, r.error);
            }
            if json {
                print_json(&serde_json::json!({
                    "records": batch.records.len(),
                    "rejects": batch.rejects,
                }));
            } else {
                println!("{} records written, {} rejected", batch.records.len(), batch.rejects.len());
            }
        }
        Command::Eval {
            dataset,
            modes,
            workers,
            out,
        } => {
            let data = load_dataset(dataset).map_err(|e| Failure::Data(e.into()))?;
            let modes = if modes.is_empty() { Mode::ALL.to_vec() } else { modes.clone() };
            let gateway = ctx.gateway(None)?;
            let (dynamic, static_windows) = ctx.stores()?;
            let setup = EvalSetup {
                gateway: &gateway,
                retrievers: Retrievers {
                    dynamic: dynamic.as_ref(),
                    static_windows: static_windows.as_ref(),
                },
                limits: ctx.config.pipeline,
                equivalence: ctx.config.eval.equivalence,
                workers: workers.unwrap_or(ctx.config.eval.workers).max(1),
                config_digest: ctx.config.digest(),
            };
            let result = run_eval(&data, &modes, &setup);
            if let Some(out) = out {
                write(out, &serde_json::to_string_pretty(&result).expect("run serializes"))?;
            }
            if json {
                print_json(&result.report);
            } else {
                print!("{}", render_table(&result.report));
            }
        }
        Command::ExportFpv { pair, design_id, out } => {
            let (golden, generated, signals) = load_pair(pair)?;
            let files = export_fpv(&golden, &generated, design_id, &signals, out).map_err(|e| Failure::Data(e.into()))?;
            if json {
                print_json(&files);
            } else {
                for f in files {
                    println!("{}", f.display());
                }
            }
        }
        Command::Check { pair, max_len } => {
            let (golden, generated, signals) = load_pair(pair)?;
            let mut options = ctx.config.eval.equivalence;
            if let Some(n) = max_len {
                options.max_len = *n;
            }
            let verdict = check_functionality(&golden, &generated, &signals, options);
            if json {
                print_json(&verdict);
            } else {
                let word = match verdict.verdict {
                    FmOutcome::Equivalent => "equivalent",
                    FmOutcome::Inequivalent => "inequivalent",
                    FmOutcome::Unknown => "unknown",
                };
                println!("{word} (bounded to {} cycles)", options.max_len);
                if let Some(cx) = &verdict.counterexample {
                    println!("counterexample, attempt starting at cycle {}:", cx.cycle);
                    print!("{}", cx.trace.to_table());
                }
                for n in &verdict.notes {
                    println!("note: {n}");
                }
            }
        }
        Command::Parse { file, signals } => {
            let text = read(file)?;
            let parsed = match signals {
                Some(s) => parse_with_signals(&text, &read_signals(s)?),
                None => parse_assertion(&text),
            };
            match parsed {
                Ok(ast) => {
                    if json {
                        print_json(&serde_json::json!({
                            "ok": true,
                            "rendered": svagen::sva::render(&ast),
                            "operators": svagen::sva::extract_operators(&ast),
                            "explanation": explain(&ast),
                        }));
                    } else {
                        println!("{}", svagen::sva::render(&ast));
                        println!("{}", explain(&ast));
                    }
                }
                Err(e) => {
                    if json {
                        print_json(&serde_json::json!({"ok": false, "error": e.to_record()}));
                    }
                    return Err(Failure::Data(e.into()));
                }
            }
        }
    }
    Ok(())
}

fn load_pair(pair: &PairArgs) -> Result<(SvaAst, SvaAst, SignalTable), Failure> {
    let signals = read_signals(&pair.signals)?;
    let golden = parse_with_signals(&read(&pair.golden)?, &signals)
        .with_context(|| format!("golden {}", pair.golden.display()))?;
    let generated = parse_with_signals(&read(&pair.generated)?, &signals)
        .with_context(|| format!("generated {}", pair.generated.display()))?;
    Ok((golden, generated, signals))
}

/// Human listing of every `{chunk_id, similarity}` found in a retrieval result.
fn print_scored(value: &serde_json::Value, retriever: &Retriever) {
    fn walk(v: &serde_json::Value, label: &str, out: &mut Vec<(String, String, f64)>) {
        match v {
            serde_json::Value::Object(m) => {
                if let (Some(id), Some(sim)) = (m.get("chunk_id").and_then(|x| x.as_str()), m.get("similarity").and_then(|x| x.as_f64())) {
                    out.push((label.to_string(), id.to_string(), sim));
                    return;
                }
                let label = m.get("operator").and_then(|o| o.as_str()).unwrap_or(label);
                for (k, child) in m {
                    let l = if k == "global_chunks" { "global" } else { label };
                    walk(child, l, out);
                }
            }
            serde_json::Value::Array(items) => items.iter().for_each(|i| walk(i, label, out)),
            _ => {}
        }
    }
    let mut rows = Vec::new();
    walk(value, "global", &mut rows);
    if rows.is_empty() {
        println!("(no chunks)");
    }
    for (label, id, sim) in rows {
        let first = retriever
            .chunk(&id)
            .map(|c| c.text().lines().next().unwrap_or("").to_string())
            .unwrap_or_default();
        println!("{label:<14} {sim:.4}  {id}  {first}");
    }
}
