use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::llm::{bindings, parse_fragments, Gateway, TemplateId};
use crate::sva::{
    parse_assertion_lenient, parse_clocking, parse_expression, render, render_clocking, render_expr,
    BinaryOp, Edge, Expr, ExprKind, ImplicationKind, Layer, SampledFunction, Select, SvaAst, UnaryOp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Names the top-level property operator of the current expression.
    IdentifyPropertyOp,
    /// Splits the current explanation into one fragment per operand.
    SplitFragments,
    /// Labels an operand `sequence` or `property`.
    ClassifyFragment,
    /// Writes a sequence operand directly; replay pushes it.
    TranslateSequence,
    /// Applies the identified operator; replay pops its operands.
    Combine,
    /// Adds the clocking event and `disable iff` clause.
    Wrap,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub kind: StepKind,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub steps: Vec<DerivationStep>,
    pub final_sva: String,
}

#[derive(Clone, Copy)]
pub enum Fragmenter<'a> {
    /// Fragments from the fixed operator phrase table.
    Deterministic,
    /// Asks the model to split the explanation, falling back to the phrase
    /// table when the fragment count is wrong.
    Llm(&'a Gateway),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("step {step}: {message}")]
pub struct ReplayError {
    pub step: usize,
    pub message: String,
}

impl DerivationTrace {
    /// Rebuilds the assertion from the step outputs: translated sequences are
    /// pushed, combines pop their operands, the wrap closes the assertion.
    pub fn replay(&self) -> Result<SvaAst, ReplayError> {
        let mut stack: Vec<Expr> = Vec::new();
        let mut result = None;
        for (i, step) in self.steps.iter().enumerate() {
            let err = |message: String| ReplayError { step: i, message };
            let first = |v: &[String]| v.first().cloned().ok_or_else(|| err("missing operand text".into()));
            match step.kind {
                StepKind::IdentifyPropertyOp | StepKind::SplitFragments | StepKind::ClassifyFragment => {}
                StepKind::TranslateSequence => {
                    let text = first(&step.outputs)?;
                    stack.push(parse_expression(&text).map_err(|e| err(e.to_string()))?);
                }
                StepKind::Combine => {
                    let op = first(&step.inputs)?;
                    let mut pop = || stack.pop().ok_or_else(|| err(format!("`{op}` is missing an operand")));
                    let built = match op.as_str() {
                        "|->" | "|=>" => {
                            let consequent = pop()?;
                            let antecedent = pop()?;
                            let kind = if op == "|->" {
                                ImplicationKind::Overlapping
                            } else {
                                ImplicationKind::NonOverlapping
                            };
                            Expr::implication(kind, antecedent, consequent)
                        }
                        "iff" => {
                            let rhs = pop()?;
                            let lhs = pop()?;
                            Expr::iff(lhs, rhs)
                        }
                        "s_eventually" => Expr::eventually(pop()?),
                        other => return Err(err(format!("`{other}` is not a property operator"))),
                    };
                    stack.push(built.map_err(|e| err(e.to_string()))?);
                }
                StepKind::Wrap => {
                    let body = stack.pop().ok_or_else(|| err("nothing to wrap".into()))?;
                    let clocking = parse_clocking(&first(&step.inputs)?).map_err(|e| err(e.to_string()))?;
                    let disable = match step.inputs.get(1).map(String::as_str) {
                        None | Some("") => None,
                        Some(d) => Some(parse_expression(d).map_err(|e| err(e.to_string()))?),
                    };
                    result = Some(SvaAst::new(clocking, disable, body).map_err(|e| err(e.to_string()))?);
                }
            }
        }
        if !stack.is_empty() {
            return Err(ReplayError {
                step: self.steps.len(),
                message: format!("{} operands left unused", stack.len()),
            });
        }
        result.ok_or(ReplayError {
            step: self.steps.len(),
            message: "trace has no wrap step".into(),
        })
    }
}

/// Property-layer operator at the root of `e`, with its operands.
fn property_parts(e: &Expr) -> Option<(&'static str, Vec<&Expr>)> {
    match &e.unpromoted().kind {
        ExprKind::Implication {
            kind,
            antecedent,
            consequent,
        } => Some((kind.symbol(), vec![antecedent, consequent])),
        ExprKind::Iff { lhs, rhs } => Some(("iff", vec![lhs, rhs])),
        ExprKind::Eventually(inner) => Some(("s_eventually", vec![inner])),
        _ => None,
    }
}

fn cycles(n: u32) -> String {
    if n == 1 {
        "1 cycle".to_string()
    } else {
        format!("{n} cycles")
    }
}

/// Noun phrase for a value.
fn value_phrase(e: &Expr) -> String {
    let e = e.unpromoted();
    match &e.kind {
        ExprKind::Signal(s) => match s.select {
            None => format!("`{}`", s.name),
            Some(Select::Bit(i)) => format!("bit {i} of `{}`", s.name),
            Some(Select::Range { msb, lsb }) => format!("bits {msb} to {lsb} of `{}`", s.name),
        },
        ExprKind::Literal(l) => l.value.to_string(),
        ExprKind::Function {
            func: SampledFunction::Past(n),
            arg,
        } => format!("the value of {} {} earlier", value_phrase(arg), cycles(*n)),
        ExprKind::Unary {
            op: UnaryOp::BitNot,
            operand,
        } => format!("the bitwise inverse of {}", value_phrase(operand)),
        _ => format!("({})", holds_phrase(e)),
    }
}

/// Clause stating that an expression holds.
fn holds_phrase(e: &Expr) -> String {
    let e = e.unpromoted();
    match &e.kind {
        ExprKind::Signal(_) | ExprKind::Literal(_) => format!("{} is high", value_phrase(e)),
        ExprKind::Unary {
            op: UnaryOp::Not,
            operand,
        } => match &operand.unpromoted().kind {
            ExprKind::Signal(_) => format!("{} is low", value_phrase(operand)),
            _ => format!("it is not the case that {}", holds_phrase(operand)),
        },
        ExprKind::Unary { .. } => format!("{} is nonzero", value_phrase(e)),
        ExprKind::Binary { op, lhs, rhs } => match op {
            BinaryOp::And => format!("{} and {}", holds_phrase(lhs), holds_phrase(rhs)),
            BinaryOp::Or => format!("{} or {}", holds_phrase(lhs), holds_phrase(rhs)),
            BinaryOp::Eq => format!("{} equals {}", value_phrase(lhs), value_phrase(rhs)),
            BinaryOp::Neq => format!("{} differs from {}", value_phrase(lhs), value_phrase(rhs)),
        },
        ExprKind::Function { func, arg } => {
            let a = value_phrase(arg);
            match func {
                SampledFunction::Rose => format!("{a} rises"),
                SampledFunction::Fell => format!("{a} falls"),
                SampledFunction::Stable => format!("{a} keeps its previous value"),
                SampledFunction::Onehot => format!("exactly one bit of {a} is set"),
                SampledFunction::Onehot0 => format!("at most one bit of {a} is set"),
                SampledFunction::Past(_) => format!("{} is high", value_phrase(e)),
            }
        }
        ExprKind::Delay { lhs, cycles: n, rhs } => match lhs {
            Some(lhs) => format!(
                "{}, followed {} later by {}",
                holds_phrase(lhs),
                cycles(*n),
                holds_phrase(rhs)
            ),
            None => format!("{} later, {}", cycles(*n), holds_phrase(rhs)),
        },
        ExprKind::Implication {
            kind,
            antecedent,
            consequent,
        } => match kind {
            ImplicationKind::Overlapping => format!(
                "whenever {}, {} in the same cycle",
                holds_phrase(antecedent),
                holds_phrase(consequent)
            ),
            ImplicationKind::NonOverlapping => format!(
                "whenever {}, {} starting in the next cycle",
                holds_phrase(antecedent),
                holds_phrase(consequent)
            ),
        },
        ExprKind::Iff { lhs, rhs } => {
            format!("{} exactly when {}", holds_phrase(lhs), holds_phrase(rhs))
        }
        ExprKind::Eventually(inner) => format!("eventually {}", holds_phrase(inner)),
        ExprKind::Promote(_) => unreachable!("unpromoted"),
    }
}

/// One-sentence explanation built from the phrase table.
pub fn explain(ast: &SvaAst) -> String {
    let edge = match ast.clocking.edge {
        Edge::Posedge => "rising",
        Edge::Negedge => "falling",
    };
    let mut s = format!(
        "On every {edge} edge of `{}`, {}",
        ast.clocking.clock,
        holds_phrase(&ast.body)
    );
    if let Some(d) = &ast.disable {
        s.push_str(&format!(", unless {}", holds_phrase(d)));
    }
    s.push('.');
    s
}

struct Builder<'a> {
    fragmenter: Fragmenter<'a>,
    steps: Vec<DerivationStep>,
}

impl Builder<'_> {
    fn push(&mut self, kind: StepKind, inputs: Vec<String>, outputs: Vec<String>, note: Option<String>) {
        self.steps.push(DerivationStep {
            kind,
            inputs,
            outputs,
            note,
        });
    }

    fn fragments(
        &self,
        op: &str,
        operands: &[&Expr],
        node: &Expr,
        explanation: &str,
    ) -> Result<(Vec<String>, Option<String>), PipelineError> {
        let table: Vec<String> = operands.iter().map(|o| holds_phrase(o)).collect();
        let Fragmenter::Llm(gateway) = self.fragmenter else {
            return Ok((table, None));
        };
        let listed = operands
            .iter()
            .enumerate()
            .map(|(i, o)| format!("{}. {}", i + 1, render_expr(o)))
            .collect::<Vec<_>>()
            .join("\n");
        let reply = gateway
            .complete(
                TemplateId::DerivationGeneration,
                bindings([
                    ("operator", op.to_string()),
                    ("count", operands.len().to_string()),
                    ("operands", listed),
                    ("property", render_expr(node)),
                    ("explanation", explanation.to_string()),
                ]),
            )
            .map_err(PipelineError::Derivation)?;
        match parse_fragments(&reply.response.text) {
            Ok(f) if f.len() == operands.len() => Ok((f, None)),
            Ok(f) => Ok((
                table,
                Some(format!(
                    "FragmentCountMismatch: expected {}, got {}; used the phrase table",
                    operands.len(),
                    f.len()
                )),
            )),
            Err(e) => Ok((
                table,
                Some(format!("FragmentCountMismatch: {e}; used the phrase table")),
            )),
        }
    }

    fn property(&mut self, e: &Expr, explanation: &str) -> Result<(), PipelineError> {
        let Some((op, operands)) = property_parts(e) else {
            self.push(
                StepKind::TranslateSequence,
                vec![explanation.to_string()],
                vec![render_expr(e)],
                None,
            );
            return Ok(());
        };
        self.push(
            StepKind::IdentifyPropertyOp,
            vec![render_expr(e)],
            vec![op.to_string()],
            None,
        );
        let (fragments, note) = self.fragments(op, &operands, e, explanation)?;
        self.push(
            StepKind::SplitFragments,
            vec![explanation.to_string()],
            fragments.clone(),
            note,
        );
        for (operand, fragment) in operands.iter().zip(&fragments) {
            let is_property = operand.unpromoted().layer == Layer::Property;
            self.push(
                StepKind::ClassifyFragment,
                vec![fragment.clone(), render_expr(operand)],
                vec![if is_property { "property" } else { "sequence" }.to_string()],
                None,
            );
            if is_property {
                self.property(operand, fragment)?;
            } else {
                self.push(
                    StepKind::TranslateSequence,
                    vec![fragment.clone()],
                    vec![render_expr(operand)],
                    None,
                );
            }
        }
        self.push(StepKind::Combine, vec![op.to_string()], vec![render_expr(e)], None);
        Ok(())
    }
}

/// Layer-by-layer derivation of an assertion from its explanation. Without
/// an explanation the phrase-table sentence is used.
pub fn derive_trace(
    ast: &SvaAst,
    explanation: Option<&str>,
    fragmenter: Fragmenter<'_>,
) -> Result<DerivationTrace, PipelineError> {
    let explanation = match explanation {
        Some(e) if !e.trim().is_empty() => e.trim().to_string(),
        _ => explain(ast),
    };
    let mut b = Builder {
        fragmenter,
        steps: Vec::new(),
    };
    b.property(&ast.body, &explanation)?;
    let final_sva = render(ast);
    b.push(
        StepKind::Wrap,
        vec![
            render_clocking(&ast.clocking),
            ast.disable.as_ref().map(render_expr).unwrap_or_default(),
        ],
        vec![final_sva.clone()],
        None,
    );
    Ok(DerivationTrace {
        steps: b.steps,
        final_sva,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetunePair {
    pub sva: String,
    #[serde(default)]
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneRecord {
    pub sva: String,
    pub explanation: String,
    pub prompt_guided_explanation: DerivationTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    /// Position in the input corpus.
    pub index: usize,
    pub sva: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinetuneBatch {
    pub records: Vec<FinetuneRecord>,
    pub rejects: Vec<Reject>,
}

impl FinetuneBatch {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
            .collect()
    }
}

/// Builds one record per pair. Pairs whose assertion does not parse, or
/// whose trace fails to replay, are reported as rejects.
pub fn build_finetune_records(pairs: &[FinetunePair], fragmenter: Fragmenter<'_>) -> FinetuneBatch {
    let mut batch = FinetuneBatch::default();
    for (index, pair) in pairs.iter().enumerate() {
        let reject = |error: String| Reject {
            index,
            sva: pair.sva.clone(),
            error,
        };
        let ast = match parse_assertion_lenient(&pair.sva) {
            Ok(a) => a,
            Err(e) => {
                batch.rejects.push(reject(e.to_string()));
                continue;
            }
        };
        let explanation = if pair.explanation.trim().is_empty() {
            explain(&ast)
        } else {
            pair.explanation.trim().to_string()
        };
        let trace = match derive_trace(&ast, Some(&explanation), fragmenter) {
            Ok(t) => t,
            Err(e) => {
                batch.rejects.push(reject(e.to_string()));
                continue;
            }
        };
        match trace.replay() {
            Ok(replayed) if replayed == ast => batch.records.push(FinetuneRecord {
                sva: pair.sva.clone(),
                explanation,
                prompt_guided_explanation: trace,
            }),
            Ok(_) => batch.rejects.push(reject("replayed assertion differs from the input".into())),
            Err(e) => batch.rejects.push(reject(format!("replay failed: {e}"))),
        }
    }
    batch
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sva::parse_assertion;

    fn kinds(t: &DerivationTrace) -> Vec<StepKind> {
        t.steps.iter().map(|s| s.kind).collect()
    }

    #[test]
    fn leaf_property_is_translate_then_wrap() {
        let ast = parse_assertion("assert property (@(posedge clk) a);").unwrap();
        let t = derive_trace(&ast, None, Fragmenter::Deterministic).unwrap();
        assert_eq!(kinds(&t), vec![StepKind::TranslateSequence, StepKind::Wrap]);
        assert_eq!(t.replay().unwrap(), ast);
    }

    #[test]
    fn nested_implication_recurses_on_the_right() {
        let ast = parse_assertion("assert property (@(posedge clk) a |-> (b |=> c));").unwrap();
        let t = derive_trace(&ast, None, Fragmenter::Deterministic).unwrap();
        let ops: Vec<&str> = t
            .steps
            .iter()
            .filter(|s| s.kind == StepKind::IdentifyPropertyOp)
            .map(|s| s.outputs[0].as_str())
            .collect();
        assert_eq!(ops, vec!["|->", "|=>"]);
        let classes: Vec<&str> = t
            .steps
            .iter()
            .filter(|s| s.kind == StepKind::ClassifyFragment)
            .map(|s| s.outputs[0].as_str())
            .collect();
        assert_eq!(classes, vec!["sequence", "property", "sequence", "sequence"]);
        assert_eq!(t.replay().unwrap(), ast);
    }

    #[test]
    fn disable_and_explanation_survive() {
        let ast = parse_assertion(
            "assert property (@(posedge clk) disable iff (rst) en |=> (out == $past(in)));",
        )
        .unwrap();
        assert_eq!(
            explain(&ast),
            "On every rising edge of `clk`, whenever `en` is high, `out` equals the value of `in` 1 cycle earlier starting in the next cycle, unless `rst` is high."
        );
        let t = derive_trace(&ast, None, Fragmenter::Deterministic).unwrap();
        assert_eq!(t.replay().unwrap(), ast);
    }

    #[test]
    fn corrupted_trace_fails_to_replay() {
        let ast = parse_assertion("assert property (@(posedge clk) a |-> b);").unwrap();
        let mut t = derive_trace(&ast, None, Fragmenter::Deterministic).unwrap();
        t.steps.retain(|s| s.kind != StepKind::Combine);
        assert!(t.replay().is_err());
    }
}
