use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ast::{Expr, Layer, SvaAst};

/// Operator kinds known to the parser. The first ten are the sequence and
/// property operators that generation, retrieval and rechecking reason about;
/// the rest are boolean connectives and `iff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorKind {
    Delay,
    Rose,
    Fell,
    Past,
    Stable,
    Onehot,
    Onehot0,
    OverlapImpl,
    NonOverlapImpl,
    SEventually,
    Iff,
    Not,
    BitNot,
    And,
    Or,
    Eq,
    Neq,
    Select,
}

/// The seven sequence operators followed by the three property operators.
pub const TABLE_OPERATORS: [OperatorKind; 10] = [
    OperatorKind::Delay,
    OperatorKind::Rose,
    OperatorKind::Fell,
    OperatorKind::Past,
    OperatorKind::Stable,
    OperatorKind::Onehot,
    OperatorKind::Onehot0,
    OperatorKind::OverlapImpl,
    OperatorKind::NonOverlapImpl,
    OperatorKind::SEventually,
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` is not one of the ten sequence/property operators")]
pub struct UnknownOperator(pub String);

impl OperatorKind {
    pub fn is_table_operator(self) -> bool {
        TABLE_OPERATORS.contains(&self)
    }

    pub fn arity(self) -> u8 {
        match self {
            OperatorKind::Delay => 2,
            OperatorKind::Rose
            | OperatorKind::Fell
            | OperatorKind::Past
            | OperatorKind::Stable
            | OperatorKind::Onehot
            | OperatorKind::Onehot0
            | OperatorKind::SEventually
            | OperatorKind::Not
            | OperatorKind::BitNot
            | OperatorKind::Select => 1,
            OperatorKind::OverlapImpl
            | OperatorKind::NonOverlapImpl
            | OperatorKind::Iff
            | OperatorKind::And
            | OperatorKind::Or
            | OperatorKind::Eq
            | OperatorKind::Neq => 2,
        }
    }

    /// Lowest layer the operator may appear at.
    pub fn layer(self) -> Layer {
        match self {
            OperatorKind::Delay
            | OperatorKind::Rose
            | OperatorKind::Fell
            | OperatorKind::Past
            | OperatorKind::Stable
            | OperatorKind::Onehot
            | OperatorKind::Onehot0 => Layer::Sequence,
            OperatorKind::OverlapImpl
            | OperatorKind::NonOverlapImpl
            | OperatorKind::SEventually
            | OperatorKind::Iff => Layer::Property,
            OperatorKind::Not
            | OperatorKind::BitNot
            | OperatorKind::And
            | OperatorKind::Or
            | OperatorKind::Eq
            | OperatorKind::Neq
            | OperatorKind::Select => Layer::Boolean,
        }
    }

    /// Syntax shape used in prompts, e.g. `$past(s,N)`.
    pub fn syntax(self) -> &'static str {
        match self {
            OperatorKind::Delay => "##N s",
            OperatorKind::Rose => "$rose(s)",
            OperatorKind::Fell => "$fell(s)",
            OperatorKind::Past => "$past(s,N)",
            OperatorKind::Stable => "$stable(s)",
            OperatorKind::Onehot => "$onehot(s)",
            OperatorKind::Onehot0 => "$onehot0(s)",
            OperatorKind::OverlapImpl => "s |-> p",
            OperatorKind::NonOverlapImpl => "s |=> p",
            OperatorKind::SEventually => "s_eventually p",
            OperatorKind::Iff => "p iff p",
            OperatorKind::Not => "!a",
            OperatorKind::BitNot => "~a",
            OperatorKind::And => "a && b",
            OperatorKind::Or => "a || b",
            OperatorKind::Eq => "a == b",
            OperatorKind::Neq => "a != b",
            OperatorKind::Select => "a[i]",
        }
    }

    /// Lexical anchor used to find chunks that mention the operator.
    pub fn surface_token(self) -> Option<&'static str> {
        Some(match self {
            OperatorKind::Delay => "##",
            OperatorKind::Rose => "$rose",
            OperatorKind::Fell => "$fell",
            OperatorKind::Past => "$past",
            OperatorKind::Stable => "$stable",
            OperatorKind::Onehot => "$onehot",
            OperatorKind::Onehot0 => "$onehot0",
            OperatorKind::OverlapImpl => "|->",
            OperatorKind::NonOverlapImpl => "|=>",
            OperatorKind::SEventually => "s_eventually",
            _ => return None,
        })
    }

    /// Explanation row for one of the ten operators.
    pub fn explanation(self) -> Result<&'static str, UnknownOperator> {
        Ok(match self {
            OperatorKind::Delay => {
                "The evaluation of sequence expression s is delayed by N clock cycles."
            }
            OperatorKind::Rose => {
                "Returns 1 if the LSB of sequence expression s changed to 1. Otherwise, returns 0."
            }
            OperatorKind::Fell => {
                "Returns 1 if the LSB of sequence expression s changed to 0. Otherwise, returns 0."
            }
            OperatorKind::Past => {
                "Returns the value of sequence s in a N clock cycle step prior to the current one."
            }
            OperatorKind::Stable => {
                "Returns 1 if the value of sequence expression s did not change. Otherwise, returns 0."
            }
            OperatorKind::Onehot => {
                "Returns 1 if one bit of sequence expression s is 1. Otherwise, returns 0."
            }
            OperatorKind::Onehot0 => {
                "Returns 1 if no more than one bit of sequence expression s is 1. Otherwise, returns 0."
            }
            OperatorKind::OverlapImpl => {
                "for every match of the sequence expression s beginning at the start point, the evaluation of property expression p beginning in the current clock cycle at the end point of the match succeeds and returns 1."
            }
            OperatorKind::NonOverlapImpl => {
                "for every match of the sequence expression s beginning at the start point, the evaluation of property expression p beginning in the next clock cycle at the end point of the match succeeds and returns 1."
            }
            OperatorKind::SEventually => {
                "Return 1 if there exists a current or future clock cycle at which property expression p is 1."
            }
            other => return Err(UnknownOperator(other.to_string())),
        })
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            OperatorKind::Delay => "##",
            OperatorKind::Rose => "$rose",
            OperatorKind::Fell => "$fell",
            OperatorKind::Past => "$past",
            OperatorKind::Stable => "$stable",
            OperatorKind::Onehot => "$onehot",
            OperatorKind::Onehot0 => "$onehot0",
            OperatorKind::OverlapImpl => "|->",
            OperatorKind::NonOverlapImpl => "|=>",
            OperatorKind::SEventually => "s_eventually",
            OperatorKind::Iff => "iff",
            OperatorKind::Not => "!",
            OperatorKind::BitNot => "~",
            OperatorKind::And => "&&",
            OperatorKind::Or => "||",
            OperatorKind::Eq => "==",
            OperatorKind::Neq => "!=",
            OperatorKind::Select => "[]",
        };
        f.write_str(name)
    }
}

/// Parses an operator name as an LLM might write it: the surface token
/// (`$past`, `|=>`, `##N`), the syntax shape (`$past(s,N)`), or the variant
/// name (`Past`, `NonOverlapImpl`). Only the ten table operators are accepted.
impl FromStr for OperatorKind {
    type Err = UnknownOperator;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let raw = s.trim().trim_matches(|c| c == '`' || c == '"' || c == '\'');
        let key: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = key.to_ascii_lowercase();
        let head = lower.split('(').next().unwrap_or("");
        let found = match head {
            "##" | "##n" | "##ns" | "delay" | "cycledelay" => OperatorKind::Delay,
            "$rose" | "rose" => OperatorKind::Rose,
            "$fell" | "fell" => OperatorKind::Fell,
            "$past" | "past" => OperatorKind::Past,
            "$stable" | "stable" => OperatorKind::Stable,
            "$onehot" | "onehot" => OperatorKind::Onehot,
            "$onehot0" | "onehot0" => OperatorKind::Onehot0,
            "|->" | "s|->p" | "overlapimpl" | "overlappingimplication" => OperatorKind::OverlapImpl,
            "|=>" | "s|=>p" | "nonoverlapimpl" | "nonoverlappingimplication" => {
                OperatorKind::NonOverlapImpl
            }
            "s_eventually" | "s_eventuallyp" | "seventually" => OperatorKind::SEventually,
            _ if lower.starts_with("##") => OperatorKind::Delay,
            _ => return Err(UnknownOperator(raw.to_string())),
        };
        Ok(found)
    }
}

/// Explanation text for the rechecking prompt.
pub fn operator_explanation(kind: OperatorKind) -> Result<&'static str, UnknownOperator> {
    kind.explanation()
}

/// Table operators occurring in the body, deduplicated, in first-occurrence
/// (pre-order) order.
pub fn extract_operators(ast: &SvaAst) -> Vec<OperatorKind> {
    extract_expr_operators(&ast.body)
}

pub fn extract_expr_operators(expr: &Expr) -> Vec<OperatorKind> {
    let mut out = Vec::new();
    expr.walk(&mut |e| {
        if let Some(op) = e.operator() {
            if op.is_table_operator() && !out.contains(&op) {
                out.push(op);
            }
        }
    });
    out
}
