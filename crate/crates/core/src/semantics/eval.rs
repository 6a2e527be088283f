//! Bounded-trace evaluation. Expressions are compiled once against a column
//! layout so that the exhaustive equivalence search can reuse them across
//! millions of traces.

use serde::{Deserialize, Serialize};

use super::trace::{width_mask, Trace};
use super::SemanticsError;
use crate::sva::{BinaryOp, Expr, ExprKind, ImplicationKind, SampledFunction, Select, SvaAst, UnaryOp};

/// How obligations still open at the last cycle are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndOfTrace {
    /// Pending obligations count as holding.
    #[default]
    Weak,
    /// Pending obligations count as failures.
    Strict,
}

/// Three-valued outcome of a property at one start cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    Holds,
    Fails,
    /// The trace ended before the property resolved.
    Pending,
}

impl Truth {
    /// `Some(pass)` once resolved under `mode`; `None` while still open.
    pub fn resolve(self, mode: EndOfTrace) -> Option<bool> {
        match (self, mode) {
            (Truth::Holds, _) => Some(true),
            (Truth::Fails, _) => Some(false),
            (Truth::Pending, EndOfTrace::Weak) => None,
            (Truth::Pending, EndOfTrace::Strict) => Some(false),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub truth: Truth,
    /// No implication antecedent matched on the path that decided the result.
    pub vacuous: bool,
    /// Last cycle inspected before the outcome was fixed.
    pub span_end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptStatus {
    Holds,
    Fails,
    Vacuous,
    Disabled,
    /// Open at end of trace under weak semantics; counts as holding.
    Pending,
}

impl AttemptStatus {
    pub fn passes(self) -> bool {
        self != AttemptStatus::Fails
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Holds,
    Fails,
    VacuousHolds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    /// One entry per start cycle.
    pub per_attempt: Vec<AttemptStatus>,
    pub first_failure: Option<usize>,
    /// Filled only by equivalence checking.
    pub counterexample: Option<(Trace, usize)>,
}

impl Verdict {
    fn from_attempts(per_attempt: Vec<AttemptStatus>) -> Verdict {
        let first_failure = per_attempt.iter().position(|a| *a == AttemptStatus::Fails);
        let status = if first_failure.is_some() {
            VerdictStatus::Fails
        } else if per_attempt
            .iter()
            .any(|a| matches!(a, AttemptStatus::Holds | AttemptStatus::Pending))
        {
            VerdictStatus::Holds
        } else {
            VerdictStatus::VacuousHolds
        };
        Verdict {
            status,
            per_attempt,
            first_failure,
            counterexample: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CheckOptions {
    pub mode: EndOfTrace,
}

#[derive(Debug, Clone)]
enum Node {
    Sig { col: usize, shift: u32, mask: u64 },
    Lit(u64),
    Not(Box<Node>),
    BitNot(Box<Node>, u64),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Eq(Box<Node>, Box<Node>),
    Neq(Box<Node>, Box<Node>),
    Func(SampledFunction, Box<Node>),
    Delay(Option<Box<Node>>, usize, Box<Node>),
    Impl(bool, Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Eventually(Box<Node>),
}

#[derive(Debug, Clone, Copy)]
enum SeqOutcome {
    Match(usize),
    NoMatch(usize),
    Pending,
}

/// Maps signal names to columns of a row-major value buffer.
pub(crate) trait Layout {
    fn column(&self, name: &str) -> Option<(usize, u32)>;
}

impl Layout for Trace {
    fn column(&self, name: &str) -> Option<(usize, u32)> {
        self.index_of(name).map(|i| (i, self.signals()[i].1))
    }
}

impl Layout for [(String, u32)] {
    fn column(&self, name: &str) -> Option<(usize, u32)> {
        self.iter()
            .position(|(n, _)| n == name)
            .map(|i| (i, self[i].1))
    }
}

fn compile(e: &Expr, layout: &(impl Layout + ?Sized)) -> Result<(Node, u32), SemanticsError> {
    let b = |n: Node| Box::new(n);
    Ok(match &e.kind {
        ExprKind::Signal(s) => {
            let (col, width) = layout
                .column(&s.name)
                .ok_or_else(|| SemanticsError::UnknownSignal(s.name.clone()))?;
            let (shift, w) = match s.select {
                None => (0, width),
                Some(Select::Bit(i)) if i < width => (i, 1),
                Some(Select::Range { msb, lsb }) if msb < width && lsb <= msb => {
                    (lsb, msb - lsb + 1)
                }
                Some(_) => {
                    return Err(SemanticsError::SelectOutOfRange {
                        signal: s.name.clone(),
                        width,
                    })
                }
            };
            (
                Node::Sig {
                    col,
                    shift,
                    mask: width_mask(w),
                },
                w,
            )
        }
        ExprKind::Literal(lit) => {
            let w = lit.effective_width();
            (Node::Lit(lit.value & width_mask(w)), w)
        }
        ExprKind::Unary { op, operand } => {
            let (n, w) = compile(operand, layout)?;
            match op {
                UnaryOp::Not => (Node::Not(b(n)), 1),
                UnaryOp::BitNot => (Node::BitNot(b(n), width_mask(w)), w),
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let (l, _) = compile(lhs, layout)?;
            let (r, _) = compile(rhs, layout)?;
            let node = match op {
                BinaryOp::And => Node::And(b(l), b(r)),
                BinaryOp::Or => Node::Or(b(l), b(r)),
                BinaryOp::Eq => Node::Eq(b(l), b(r)),
                BinaryOp::Neq => Node::Neq(b(l), b(r)),
            };
            (node, 1)
        }
        ExprKind::Function { func, arg } => {
            let (n, w) = compile(arg, layout)?;
            let out_w = if matches!(func, SampledFunction::Past(_)) { w } else { 1 };
            (Node::Func(*func, b(n)), out_w)
        }
        ExprKind::Delay { lhs, cycles, rhs } => {
            let l = match lhs {
                Some(l) => Some(b(compile(l, layout)?.0)),
                None => None,
            };
            let (r, _) = compile(rhs, layout)?;
            (Node::Delay(l, *cycles as usize, b(r)), 1)
        }
        ExprKind::Implication {
            kind,
            antecedent,
            consequent,
        } => {
            let (a, _) = compile(antecedent, layout)?;
            let (c, _) = compile(consequent, layout)?;
            (
                Node::Impl(*kind == ImplicationKind::NonOverlapping, b(a), b(c)),
                1,
            )
        }
        ExprKind::Iff { lhs, rhs } => {
            let (l, _) = compile(lhs, layout)?;
            let (r, _) = compile(rhs, layout)?;
            (Node::Iff(b(l), b(r)), 1)
        }
        ExprKind::Eventually(inner) => (Node::Eventually(b(compile(inner, layout)?.0)), 1),
        ExprKind::Promote(inner) => compile(inner, layout)?,
    })
}

/// Applies a sampled-value function given the current value and the value
/// it looks back at. Before the first cycle the look-back value is 0.
fn apply_sampled(func: SampledFunction, cur: u64, prev: u64) -> u64 {
    let bit = |c: bool| c as u64;
    match func {
        SampledFunction::Rose => bit(prev & 1 == 0 && cur & 1 == 1),
        SampledFunction::Fell => bit(prev & 1 == 1 && cur & 1 == 0),
        SampledFunction::Stable => bit(cur == prev),
        SampledFunction::Onehot => bit(cur.count_ones() == 1),
        SampledFunction::Onehot0 => bit(cur.count_ones() <= 1),
        SampledFunction::Past(_) => prev,
    }
}

/// Value of a sampled-value function at `cycle`, given the argument's value
/// at every cycle up to and including `cycle`.
pub fn eval_sequence_function(func: SampledFunction, history: &[u64], cycle: usize) -> u64 {
    let cur = history[cycle];
    let back = match func {
        SampledFunction::Past(n) => Some(n as usize),
        SampledFunction::Rose | SampledFunction::Fell | SampledFunction::Stable => Some(1),
        SampledFunction::Onehot | SampledFunction::Onehot0 => None,
    };
    let prev = match back {
        Some(n) if cycle >= n => history[cycle - n],
        _ => 0,
    };
    apply_sampled(func, cur, prev)
}

/// A view over row-major values with `ncols` columns and `len` cycles.
#[derive(Clone, Copy)]
pub(crate) struct Rows<'a> {
    pub values: &'a [u64],
    pub ncols: usize,
    pub len: usize,
}

impl Node {
    fn value(&self, rows: Rows<'_>, t: usize) -> u64 {
        match self {
            Node::Sig { col, shift, mask } => (rows.values[t * rows.ncols + col] >> shift) & mask,
            Node::Lit(v) => *v,
            Node::Not(a) => (a.value(rows, t) == 0) as u64,
            Node::BitNot(a, mask) => !a.value(rows, t) & mask,
            Node::And(a, b) => (a.value(rows, t) != 0 && b.value(rows, t) != 0) as u64,
            Node::Or(a, b) => (a.value(rows, t) != 0 || b.value(rows, t) != 0) as u64,
            Node::Eq(a, b) => (a.value(rows, t) == b.value(rows, t)) as u64,
            Node::Neq(a, b) => (a.value(rows, t) != b.value(rows, t)) as u64,
            Node::Func(func, arg) => {
                let cur = arg.value(rows, t);
                let back = match func {
                    SampledFunction::Past(n) => *n as usize,
                    SampledFunction::Rose | SampledFunction::Fell | SampledFunction::Stable => 1,
                    SampledFunction::Onehot | SampledFunction::Onehot0 => 0,
                };
                let prev = if back > 0 && t >= back {
                    arg.value(rows, t - back)
                } else {
                    0
                };
                apply_sampled(*func, cur, prev)
            }
            // Temporal nodes never sit under value operators.
            _ => unreachable!("temporal node evaluated as a value"),
        }
    }

    fn seq(&self, rows: Rows<'_>, t: usize) -> SeqOutcome {
        match self {
            Node::Delay(lhs, cycles, rhs) => {
                let start = match lhs {
                    None => t,
                    Some(l) => match l.seq(rows, t) {
                        SeqOutcome::Match(end) => end,
                        other => return other,
                    },
                };
                rhs.seq(rows, start + cycles)
            }
            Node::Impl(..) | Node::Iff(..) | Node::Eventually(_) => {
                unreachable!("property node evaluated as a sequence")
            }
            _ if t >= rows.len => SeqOutcome::Pending,
            _ if self.value(rows, t) != 0 => SeqOutcome::Match(t),
            _ => SeqOutcome::NoMatch(t),
        }
    }

    fn prop(&self, rows: Rows<'_>, t: usize) -> PropertyOutcome {
        let last = rows.len - 1;
        match self {
            Node::Impl(nonoverlap, ante, cons) => match ante.seq(rows, t) {
                SeqOutcome::NoMatch(at) => PropertyOutcome {
                    truth: Truth::Holds,
                    vacuous: true,
                    span_end: at,
                },
                SeqOutcome::Pending => PropertyOutcome {
                    truth: Truth::Pending,
                    vacuous: true,
                    span_end: last,
                },
                SeqOutcome::Match(end) => {
                    let start = end + *nonoverlap as usize;
                    if start >= rows.len {
                        PropertyOutcome {
                            truth: Truth::Pending,
                            vacuous: false,
                            span_end: last,
                        }
                    } else {
                        cons.prop(rows, start)
                    }
                }
            },
            Node::Eventually(inner) => {
                for t2 in t..rows.len {
                    let r = inner.prop(rows, t2);
                    if r.truth == Truth::Holds {
                        return PropertyOutcome {
                            truth: Truth::Holds,
                            vacuous: false,
                            span_end: r.span_end,
                        };
                    }
                }
                PropertyOutcome {
                    truth: Truth::Pending,
                    vacuous: false,
                    span_end: last,
                }
            }
            Node::Iff(a, b) => {
                let ra = a.prop(rows, t);
                let rb = b.prop(rows, t);
                let truth = match (ra.truth, rb.truth) {
                    (Truth::Pending, _) | (_, Truth::Pending) => Truth::Pending,
                    (x, y) if x == y => Truth::Holds,
                    _ => Truth::Fails,
                };
                PropertyOutcome {
                    truth,
                    vacuous: false,
                    span_end: ra.span_end.max(rb.span_end),
                }
            }
            _ => match self.seq(rows, t) {
                SeqOutcome::Match(end) => PropertyOutcome {
                    truth: Truth::Holds,
                    vacuous: false,
                    span_end: end,
                },
                SeqOutcome::NoMatch(at) => PropertyOutcome {
                    truth: Truth::Fails,
                    vacuous: false,
                    span_end: at,
                },
                SeqOutcome::Pending => PropertyOutcome {
                    truth: Truth::Pending,
                    vacuous: false,
                    span_end: last,
                },
            },
        }
    }
}

/// An assertion compiled against a fixed column layout.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    body: Node,
    disable: Option<Node>,
}

impl Compiled {
    pub fn new(ast: &SvaAst, layout: &(impl Layout + ?Sized)) -> Result<Self, SemanticsError> {
        Ok(Compiled {
            body: compile(&ast.body, layout)?.0,
            disable: match &ast.disable {
                Some(d) => Some(compile(d, layout)?.0),
                None => None,
            },
        })
    }

    pub fn outcome(&self, rows: Rows<'_>, t: usize) -> PropertyOutcome {
        self.body.prop(rows, t)
    }

    /// True when the disable condition holds anywhere in `[from, to]`.
    pub fn disabled(&self, rows: Rows<'_>, from: usize, to: usize) -> bool {
        match &self.disable {
            None => false,
            Some(d) => (from..=to.min(rows.len - 1)).any(|c| d.value(rows, c) != 0),
        }
    }

    pub fn attempt(&self, rows: Rows<'_>, t: usize, mode: EndOfTrace) -> AttemptStatus {
        let out = self.outcome(rows, t);
        if self.disabled(rows, t, out.span_end) {
            return AttemptStatus::Disabled;
        }
        status_of(out, mode)
    }
}

fn status_of(out: PropertyOutcome, mode: EndOfTrace) -> AttemptStatus {
    match (out.truth, mode) {
        (Truth::Fails, _) | (Truth::Pending, EndOfTrace::Strict) => AttemptStatus::Fails,
        (_, _) if out.vacuous => AttemptStatus::Vacuous,
        (Truth::Holds, _) => AttemptStatus::Holds,
        (Truth::Pending, EndOfTrace::Weak) => AttemptStatus::Pending,
    }
}

fn rows(trace: &Trace) -> Rows<'_> {
    Rows {
        values: trace.raw(),
        ncols: trace.signals().len(),
        len: trace.len(),
    }
}

/// Evaluates a single-cycle expression at `cycle`. Boolean-layer operators
/// and sampled-value functions are accepted; anything with a cycle delay or
/// from the property layer is rejected.
pub fn eval_boolean(expr: &Expr, trace: &Trace, cycle: usize) -> Result<u64, SemanticsError> {
    if !expr.unpromoted().is_value() {
        return Err(SemanticsError::NotAValue);
    }
    if cycle >= trace.len() {
        return Err(SemanticsError::CycleOutOfRange {
            cycle,
            len: trace.len(),
        });
    }
    let (node, _) = compile(expr, trace)?;
    Ok(node.value(rows(trace), cycle))
}

/// Evaluates a property or sequence starting at `cycle`, ignoring any
/// disable condition.
pub fn eval_property(expr: &Expr, trace: &Trace, cycle: usize) -> Result<PropertyOutcome, SemanticsError> {
    if cycle >= trace.len() {
        return Err(SemanticsError::CycleOutOfRange {
            cycle,
            len: trace.len(),
        });
    }
    let (node, _) = compile(expr, trace)?;
    Ok(node.prop(rows(trace), cycle))
}

/// Starts one attempt at every cycle and aggregates the results.
pub fn check_assertion(ast: &SvaAst, trace: &Trace, options: CheckOptions) -> Result<Verdict, SemanticsError> {
    let compiled = Compiled::new(ast, trace)?;
    let view = rows(trace);
    let per_attempt = (0..trace.len())
        .map(|t| compiled.attempt(view, t, options.mode))
        .collect();
    Ok(Verdict::from_attempts(per_attempt))
}
