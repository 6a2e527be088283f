use std::fs;
use std::path::{Path, PathBuf};

use super::EvalError;
use crate::sva::{render_clocking, render_expr, SignalTable, SvaAst};

/// The checking assertion: golden and generated property expressions joined
/// by `iff`, golden first, under the shared clocking event.
pub fn iff_assertion(golden: &SvaAst, generated: &SvaAst) -> Result<String, EvalError> {
    if golden.clocking != generated.clocking {
        return Err(EvalError::ClockMismatch {
            golden: render_clocking(&golden.clocking),
            generated: render_clocking(&generated.clocking),
        });
    }
    let disable = golden
        .disable
        .as_ref()
        .map(|d| format!(" disable iff ({})", render_expr(d)))
        .unwrap_or_default();
    Ok(format!(
        "assert property ({}{disable} (({}) iff ({})));",
        render_clocking(&golden.clocking),
        render_expr(&golden.body),
        render_expr(&generated.body)
    ))
}

fn port(name: &str, width: u32) -> String {
    if width == 1 {
        format!("  input logic {name}")
    } else {
        format!("  input logic [{}:0] {name}", width - 1)
    }
}

/// Writes `<design>_fm_check.sv`, a bindable checker module, and
/// `<design>_fm_check.tcl`, a generic formal run script.
pub fn export_fpv(
    golden: &SvaAst,
    generated: &SvaAst,
    design_id: &str,
    signals: &SignalTable,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, EvalError> {
    let check = iff_assertion(golden, generated)?;
    let module = format!("{design_id}_fm_check");
    let ports: Vec<String> = signals.entries().iter().map(|s| port(&s.name, s.width)).collect();
    let mut sv = String::new();
    sv.push_str(&format!("// Golden versus generated assertion for `{design_id}`.\n"));
    if golden.disable != generated.disable {
        sv.push_str("// The generated assertion uses a different disable condition; the golden one is kept.\n");
    }
    sv.push_str(&format!("module {module} (\n{}\n);\n", ports.join(",\n")));
    sv.push_str(&format!("  fm_check: {check}\nendmodule\n\n"));
    sv.push_str(&format!("bind {design_id} {module} u_{module} (.*);\n"));

    let clock = &golden.clocking.clock;
    let mut tcl = String::new();
    tcl.push_str("# Generic formal run; adapt the commands to your tool.\n");
    tcl.push_str("analyze -sv design.v\n");
    tcl.push_str(&format!("analyze -sv {module}.sv\n"));
    tcl.push_str(&format!("elaborate -top {design_id}\n"));
    tcl.push_str(&format!("clock {clock}\n"));
    if let Some(d) = &golden.disable {
        tcl.push_str(&format!("reset -expression {{{}}}\n", render_expr(d)));
    }
    tcl.push_str("prove -all\nreport\n");

    fs::create_dir_all(out_dir).map_err(|e| EvalError::Io(format!("{}: {e}", out_dir.display())))?;
    let sv_path = out_dir.join(format!("{module}.sv"));
    let tcl_path = out_dir.join(format!("{module}.tcl"));
    for (path, text) in [(&sv_path, &sv), (&tcl_path, &tcl)] {
        fs::write(path, text).map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(vec![sv_path, tcl_path])
}
