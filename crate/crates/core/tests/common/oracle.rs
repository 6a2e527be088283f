//! Reference evaluator written directly against the AST. It shares no code
//! with the library evaluator: sequences are evaluated to explicit end-point
//! lists and properties use Kleene three-valued connectives.

use svagen::sva::{BinaryOp, Expr, ExprKind, ImplicationKind, SampledFunction, Select, UnaryOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    T,
    F,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum End {
    At(usize),
    Beyond,
}

/// Columns of sampled values, `cols[signal][cycle]`, plus names and widths.
pub struct OTrace {
    pub names: Vec<String>,
    pub widths: Vec<u32>,
    pub cols: Vec<Vec<u64>>,
}

impl OTrace {
    pub fn len(&self) -> usize {
        self.cols.first().map(|c| c.len()).unwrap_or(0)
    }

    fn col(&self, name: &str) -> usize {
        self.names.iter().position(|n| n == name).expect("signal in trace")
    }
}

fn strip(e: &Expr) -> &Expr {
    match &e.kind {
        ExprKind::Promote(inner) => strip(inner),
        _ => e,
    }
}

fn width(e: &Expr, tr: &OTrace) -> u32 {
    match &strip(e).kind {
        ExprKind::Signal(s) => match s.select {
            None => tr.widths[tr.col(&s.name)],
            Some(Select::Bit(_)) => 1,
            Some(Select::Range { msb, lsb }) => msb - lsb + 1,
        },
        ExprKind::Literal(l) => l.width.unwrap_or(32),
        ExprKind::Unary { op: UnaryOp::BitNot, operand } => width(operand, tr),
        ExprKind::Function { func: SampledFunction::Past(_), arg } => width(arg, tr),
        _ => 1,
    }
}

/// Value of a single-cycle expression. Look-back before cycle 0 reads 0.
pub fn value(e: &Expr, tr: &OTrace, t: isize) -> u64 {
    if t < 0 {
        return 0;
    }
    let e = strip(e);
    match &e.kind {
        ExprKind::Signal(s) => {
            let raw = tr.cols[tr.col(&s.name)][t as usize];
            match s.select {
                None => raw,
                Some(Select::Bit(i)) => (raw >> i) % 2,
                Some(Select::Range { msb, lsb }) => (raw >> lsb) % (1u64 << (msb - lsb + 1)),
            }
        }
        ExprKind::Literal(l) => l.value,
        ExprKind::Unary { op: UnaryOp::Not, operand } => u64::from(value(operand, tr, t) == 0),
        ExprKind::Unary { op: UnaryOp::BitNot, operand } => {
            let w = width(operand, tr);
            let v = value(operand, tr, t);
            let mut out = 0;
            for bit in 0..w {
                if (v >> bit) & 1 == 0 {
                    out |= 1 << bit;
                }
            }
            out
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let (l, r) = (value(lhs, tr, t), value(rhs, tr, t));
            u64::from(match op {
                BinaryOp::And => l != 0 && r != 0,
                BinaryOp::Or => l != 0 || r != 0,
                BinaryOp::Eq => l == r,
                BinaryOp::Neq => l != r,
            })
        }
        ExprKind::Function { func, arg } => {
            let now = value(arg, tr, t);
            let before = value(arg, tr, t - 1);
            match func {
                SampledFunction::Rose => u64::from(before & 1 == 0 && now & 1 == 1),
                SampledFunction::Fell => u64::from(before & 1 == 1 && now & 1 == 0),
                SampledFunction::Stable => u64::from(before == now),
                SampledFunction::Onehot => u64::from(now.count_ones() == 1),
                SampledFunction::Onehot0 => u64::from(now.count_ones() < 2),
                SampledFunction::Past(n) => value(arg, tr, t - *n as isize),
            }
        }
        other => panic!("not a value expression: {other:?}"),
    }
}

fn ends(s: &Expr, tr: &OTrace, t: usize) -> Vec<End> {
    let s = strip(s);
    match &s.kind {
        ExprKind::Delay { lhs, cycles, rhs } => {
            let starts = match lhs {
                None => vec![End::At(t)],
                Some(l) => ends(l, tr, t),
            };
            let mut out = Vec::new();
            for st in starts {
                match st {
                    End::Beyond => out.push(End::Beyond),
                    End::At(k) => out.extend(ends(rhs, tr, k + *cycles as usize)),
                }
            }
            out
        }
        _ => {
            if t >= tr.len() {
                vec![End::Beyond]
            } else if value(s, tr, t as isize) != 0 {
                vec![End::At(t)]
            } else {
                vec![]
            }
        }
    }
}

fn all(items: impl IntoIterator<Item = Tri>) -> Tri {
    let mut acc = Tri::T;
    for i in items {
        match i {
            Tri::F => return Tri::F,
            Tri::U => acc = Tri::U,
            Tri::T => {}
        }
    }
    acc
}

pub fn prop(p: &Expr, tr: &OTrace, t: usize) -> Tri {
    let p = strip(p);
    match &p.kind {
        ExprKind::Implication {
            kind,
            antecedent,
            consequent,
        } => {
            let shift = usize::from(*kind == ImplicationKind::NonOverlapping);
            all(ends(antecedent, tr, t).into_iter().map(|e| match e {
                End::Beyond => Tri::U,
                End::At(k) if k + shift >= tr.len() => Tri::U,
                End::At(k) => prop(consequent, tr, k + shift),
            }))
        }
        ExprKind::Eventually(inner) => {
            if (t..tr.len()).any(|u| prop(inner, tr, u) == Tri::T) {
                Tri::T
            } else {
                Tri::U
            }
        }
        ExprKind::Iff { lhs, rhs } => match (prop(lhs, tr, t), prop(rhs, tr, t)) {
            (Tri::U, _) | (_, Tri::U) => Tri::U,
            (x, y) if x == y => Tri::T,
            _ => Tri::F,
        },
        _ => {
            let e = ends(p, tr, t);
            if e.iter().any(|x| matches!(x, End::At(_))) {
                Tri::T
            } else if e.contains(&End::Beyond) {
                Tri::U
            } else {
                Tri::F
            }
        }
    }
}

/// Every trace over `widths` of length `len`, first cycle most significant.
pub fn all_traces(names: &[&str], widths: &[u32], len: usize) -> Vec<OTrace> {
    let bits: u32 = widths.iter().sum::<u32>() * len as u32;
    let mut out = Vec::new();
    for index in 0..(1u64 << bits) {
        let mut cols = vec![vec![0u64; len]; names.len()];
        let mut rest = index;
        for cycle in (0..len).rev() {
            for s in (0..names.len()).rev() {
                cols[s][cycle] = rest % (1 << widths[s]);
                rest >>= widths[s];
            }
        }
        out.push(OTrace {
            names: names.iter().map(|s| s.to_string()).collect(),
            widths: widths.to_vec(),
            cols,
        });
    }
    out
}
