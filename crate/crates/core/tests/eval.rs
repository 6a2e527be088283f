mod common;

use std::fs;
use std::path::Path;

use common::fixtures::{fixtures_dir, stores};
use common::script::load_script;
use svagen::config::Config;
use svagen::eval::{
    check_functionality, check_syntax, export_fpv, load_dataset, run_eval, EvalError, EvalRun,
    EvalSetup, FmOutcome, MOCK_BANNER,
};
use svagen::llm::{Gateway, MockProvider, Recorder};
use svagen::pipeline::{Limits, Mode, Retrievers};
use svagen::semantics::EquivOptions;
use svagen::sva::{parse_assertion, SignalTable};

fn dataset_dir() -> std::path::PathBuf {
    fixtures_dir().join("dataset")
}

fn run_with(gateway: &Gateway, modes: &[Mode], workers: usize) -> EvalRun {
    let dataset = load_dataset(&dataset_dir()).unwrap();
    let s = stores();
    let setup = EvalSetup {
        gateway,
        retrievers: s.retrievers(),
        limits: Limits::default(),
        equivalence: EquivOptions::default(),
        workers,
        config_digest: Config::default().digest(),
    };
    run_eval(&dataset, modes, &setup)
}

#[test]
fn bundled_dataset_loads() {
    let d = load_dataset(&dataset_dir()).unwrap();
    assert_eq!(d.designs.len(), 5);
    assert_eq!(d.records.len(), 12);
    for r in &d.records {
        d.golden(r).unwrap();
    }
    let bits: Vec<u32> = d
        .designs
        .iter()
        .map(|x| x.signals.entries().iter().filter(|s| s.name != "clk").map(|s| s.width).sum())
        .collect();
    assert!(bits.iter().all(|&b| b * 5 <= 26), "{bits:?}");
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        let dest = to.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &dest);
        } else {
            fs::copy(e.path(), dest).unwrap();
        }
    }
}

#[test]
fn missing_design_directory_is_a_manifest_error() {
    let tmp = tempfile::tempdir().unwrap();
    copy_dir(&dataset_dir(), tmp.path());
    fs::remove_dir_all(tmp.path().join("pwm")).unwrap();
    match load_dataset(tmp.path()) {
        Err(EvalError::Manifest(m)) => assert!(m.contains("pwm"), "{m}"),
        other => panic!("expected a manifest error, got {other:?}"),
    }
}

#[test]
fn undeclared_signal_in_golden_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    copy_dir(&dataset_dir(), tmp.path());
    fs::write(
        tmp.path().join("ff/ff_1/golden.sva"),
        "assert property (@(posedge clk) ghost |=> out);\n",
    )
    .unwrap();
    match load_dataset(tmp.path()) {
        Err(EvalError::GoldenParse { record_id, .. }) => assert_eq!(record_id, "ff_1"),
        other => panic!("expected a golden parse error, got {other:?}"),
    }
}

#[test]
fn dataset_digest_tracks_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    copy_dir(&dataset_dir(), tmp.path());
    let a = load_dataset(tmp.path()).unwrap().digest;
    assert_eq!(a, load_dataset(&dataset_dir()).unwrap().digest);
    fs::write(tmp.path().join("ff/ff_1/property.txt"), "Changed wording.\n").unwrap();
    assert_ne!(a, load_dataset(tmp.path()).unwrap().digest);
}

#[test]
fn syntax_check_examples() {
    assert!(check_syntax(
        "assert property (@(posedge clk) disable iff (rst) (en |=> (out == $past(in))));",
        None
    )
    .ok);
    let bad = check_syntax(
        "assert property (@(posedge clk) disable iff(!rst_n) (req_ff in {1'b0, 1'b1} during [2] |=> (ack_ff == 1'b1)));",
        None,
    );
    assert!(!bad.ok && bad.error.is_some());
    assert!(!check_syntax("", None).ok);
    let table = SignalTable::from_widths([("clk", 1), ("a", 1)]).unwrap();
    assert!(!check_syntax("assert property (@(posedge clk) a |-> b);", Some(&table)).ok);
}

fn ff_table() -> SignalTable {
    SignalTable::from_widths([("clk", 1), ("rst", 1), ("en", 1), ("in", 2), ("out", 1)]).unwrap()
}

#[test]
fn functionality_examples() {
    let golden =
        parse_assertion("assert property (@(posedge clk) disable iff (rst) (en |=> (out == $past(in))));").unwrap();
    let fm = check_functionality(&golden, &golden, &ff_table(), EquivOptions::default());
    assert_eq!(fm.verdict, FmOutcome::Equivalent);

    let gpt =
        parse_assertion("assert property (@(posedge clk) disable iff (rst) (en == 1'b1 |=> out == in[1]));").unwrap();
    let fm = check_functionality(&golden, &gpt, &ff_table(), EquivOptions::default());
    assert_eq!(fm.verdict, FmOutcome::Inequivalent);
    let cx = fm.counterexample.unwrap();
    let names: Vec<&str> = cx.trace.signals().iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, vec!["rst", "en", "out", "in"]);
    assert_eq!(cx.trace.signals()[3].1, 2);
    let back = check_functionality(&gpt, &golden, &ff_table(), EquivOptions::default());
    assert_eq!(back.verdict, FmOutcome::Inequivalent);

    let t = SignalTable::from_widths([("clk", 1), ("a", 1), ("b", 1)]).unwrap();
    let x = parse_assertion("assert property (@(posedge clk) a |=> b);").unwrap();
    let y = parse_assertion("assert property (@(posedge clk) (a ##1 1) |-> b);").unwrap();
    assert_eq!(check_functionality(&x, &y, &t, EquivOptions::default()).verdict, FmOutcome::Equivalent);
}

#[test]
fn over_budget_is_unknown_not_a_mismatch() {
    let t = SignalTable::from_widths([("clk", 1), ("a", 1), ("v", 8)]).unwrap();
    let x = parse_assertion("assert property (@(posedge clk) a |-> v == 0);").unwrap();
    let y = parse_assertion("assert property (@(posedge clk) a |-> v != 1);").unwrap();
    let fm = check_functionality(&x, &y, &t, EquivOptions::default());
    assert_eq!(fm.verdict, FmOutcome::Unknown);
    assert!(!fm.matched());
}

#[test]
fn fpv_export_shape_and_determinism() {
    let golden =
        parse_assertion("assert property (@(posedge clk) disable iff (rst) (en |=> (out == $past(in))));").unwrap();
    let gpt =
        parse_assertion("assert property (@(posedge clk) disable iff (rst) (en == 1'b1 |=> out == in[1]));").unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let files = export_fpv(&golden, &gpt, "ff", &ff_table(), a.path()).unwrap();
    export_fpv(&golden, &gpt, "ff", &ff_table(), b.path()).unwrap();
    let sv = fs::read_to_string(&files[0]).unwrap();
    let line = sv.lines().find(|l| l.contains("assert property")).unwrap();
    let (lhs, rhs) = line.split_once(" iff ((").unwrap();
    assert!(lhs.contains("$past(in)"), "{line}");
    assert!(rhs.contains("in[1]"), "{line}");
    let stmt = line.trim().trim_start_matches("fm_check:").trim();
    let parsed = parse_assertion(stmt).unwrap();
    assert!(matches!(parsed.body.kind, svagen::sva::ExprKind::Iff { .. }));
    for f in &files {
        let name = f.file_name().unwrap();
        assert_eq!(fs::read(f).unwrap(), fs::read(b.path().join(name)).unwrap());
    }

    let neg = parse_assertion("assert property (@(negedge clk) en |=> out);").unwrap();
    assert!(matches!(
        export_fpv(&golden, &neg, "ff", &ff_table(), a.path()),
        Err(EvalError::ClockMismatch { .. })
    ));
}

#[test]
fn scripted_fixture_metrics() {
    let gateway = Gateway::new(load_script().provider());
    let run = run_with(&gateway, &[Mode::Llm, Mode::Ragsvag], 4);
    let r = &run.report;
    let llm = &r.modes[0];
    let rag = &r.modes[1];
    assert_eq!((llm.sc_count, llm.fm_count), (8, 5));
    assert_eq!((rag.sc_count, rag.fm_count), (11, 9));
    assert_eq!(rag.fm_improvement_pct, Some(80.0));
    assert_eq!(rag.sc_improvement_pct, Some(37.5));
    assert_eq!(llm.fm_improvement_pct, Some(0.0));
    assert_eq!(r.banner.as_deref(), Some(MOCK_BANNER));
    for m in &r.modes {
        assert!(m.fm_count <= m.sc_count && m.sc_count <= m.total);
    }
}

#[test]
fn record_order_and_worker_count_do_not_matter() {
    let gateway = Gateway::new(load_script().provider());
    let one = run_with(&gateway, &[Mode::Hr, Mode::Sor], 1);
    let many = run_with(&gateway, &[Mode::Hr, Mode::Sor], 8);
    assert_eq!(one, many);
    let twice = run_with(&gateway, &[Mode::Sor, Mode::Sor], 3);
    assert_eq!(twice.report.modes[0], twice.report.modes[1]);
}

#[test]
fn unparseable_output_scores_zero() {
    let tmp = tempfile::tempdir().unwrap();
    copy_dir(&dataset_dir(), tmp.path());
    fs::write(
        tmp.path().join("manifest.json"),
        r#"{"designs": [{"design_id": "ff", "records": ["ff_1"]}]}"#,
    )
    .unwrap();
    let dataset = load_dataset(tmp.path()).unwrap();
    let gateway = Gateway::new(svagen::llm::ScriptedProvider::new(|_| {
        Some("```systemverilog\nassert property (@(posedge clk) en |-> );\n```".into())
    }));
    let setup = EvalSetup {
        gateway: &gateway,
        retrievers: Retrievers::default(),
        limits: Limits::default(),
        equivalence: EquivOptions::default(),
        workers: 2,
        config_digest: String::new(),
    };
    let run = run_eval(&dataset, &[Mode::Llm], &setup);
    let m = &run.report.modes[0];
    assert_eq!((m.total, m.sc_count, m.fm_count), (1, 0, 0));
    assert!(run.runs[0].records[0].error.is_some());
}

/// The recorded mock fixtures replay the script exactly. Set
/// `SVAGEN_REGEN_FIXTURES=1` to rewrite them after changing the script,
/// prompts or corpus.
#[test]
fn recorded_fixtures_match_script() {
    let dir = fixtures_dir().join("mock");
    if std::env::var_os("SVAGEN_REGEN_FIXTURES").is_some() {
        let _ = fs::remove_dir_all(&dir);
        let gateway = Gateway::new(Recorder::new(load_script().provider(), &dir).unwrap());
        run_with(&gateway, &Mode::ALL, 1);
    }
    let scripted = run_with(&Gateway::new(load_script().provider()), &Mode::ALL, 4);
    let replayed = run_with(&Gateway::new(MockProvider::from_dir(&dir).unwrap()), &Mode::ALL, 4);
    assert_eq!(scripted, replayed);
}
