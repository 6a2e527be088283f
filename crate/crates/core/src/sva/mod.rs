//! Concurrent assertion syntax: parsing, canonical rendering, operator
//! inventory and signal cross-checking.

mod ast;
mod error;
mod lexer;
mod operators;
mod parser;
mod render;
mod signals;

pub use ast::{
    BinaryOp, Clocking, Edge, Expr, ExprKind, ImplicationKind, Layer, LayerError, Literal,
    SampledFunction, Select, SignalRef, SvaAst, UnaryOp,
};
pub use error::{SvaError, SyntaxError};
pub use operators::{
    extract_expr_operators, extract_operators, operator_explanation, OperatorKind,
    UnknownOperator, TABLE_OPERATORS,
};
pub use parser::{
    parse_assertion, parse_assertion_lenient, parse_clocked_property, parse_clocking,
    parse_expression,
};
pub use render::{render, render_clocking, render_expr, render_property};
pub use signals::{check_expr_signals, check_signals, SignalDecl, SignalTable, SignalTableError};

/// Parses and cross-checks against a signal table.
pub fn parse_with_signals(text: &str, signals: &SignalTable) -> Result<SvaAst, SvaError> {
    let ast = parse_assertion(text)?;
    check_signals(&ast, signals)?;
    Ok(ast)
}
