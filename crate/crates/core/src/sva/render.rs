use super::ast::{Clocking, Edge, Expr, ExprKind, Literal, Select, SvaAst, UnaryOp};

/// Fully parenthesized canonical form of an assertion.
pub fn render(ast: &SvaAst) -> String {
    let mut out = String::from("assert property (");
    out.push_str(&render_clocking(&ast.clocking));
    if let Some(d) = &ast.disable {
        out.push_str(" disable iff (");
        out.push_str(&render_expr(d));
        out.push(')');
    }
    out.push_str(" (");
    out.push_str(&render_expr(&ast.body));
    out.push_str("));");
    out
}

pub fn render_clocking(c: &Clocking) -> String {
    let edge = match c.edge {
        Edge::Posedge => "posedge",
        Edge::Negedge => "negedge",
    };
    format!("@({edge} {})", c.clock)
}

/// Body of the assertion without the clocking and wrapper.
pub fn render_property(ast: &SvaAst) -> String {
    render_expr(&ast.body)
}

pub fn render_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Signal(s) => match s.select {
            None => s.name.clone(),
            Some(Select::Bit(i)) => format!("{}[{i}]", s.name),
            Some(Select::Range { msb, lsb }) => format!("{}[{msb}:{lsb}]", s.name),
        },
        ExprKind::Literal(lit) => render_literal(*lit),
        ExprKind::Unary { op, operand } => {
            let sym = match op {
                UnaryOp::Not => "!",
                UnaryOp::BitNot => "~",
            };
            format!("{sym}({})", render_expr(operand))
        }
        ExprKind::Binary { op, lhs, rhs } => {
            format!("({}) {} ({})", render_expr(lhs), op.symbol(), render_expr(rhs))
        }
        ExprKind::Function { func, arg } => match func {
            super::ast::SampledFunction::Past(n) if *n != 1 => {
                format!("$past({}, {n})", render_expr(arg))
            }
            _ => format!("{}({})", func.name(), render_expr(arg)),
        },
        ExprKind::Delay { lhs, cycles, rhs } => match lhs {
            Some(lhs) => format!("({}) ##{cycles} ({})", render_expr(lhs), render_expr(rhs)),
            None => format!("##{cycles} ({})", render_expr(rhs)),
        },
        ExprKind::Implication {
            kind,
            antecedent,
            consequent,
        } => format!(
            "({}) {} ({})",
            render_expr(antecedent),
            kind.symbol(),
            render_expr(consequent)
        ),
        ExprKind::Iff { lhs, rhs } => format!("({}) iff ({})", render_expr(lhs), render_expr(rhs)),
        ExprKind::Eventually(inner) => format!("s_eventually ({})", render_expr(inner)),
        ExprKind::Promote(inner) => render_expr(inner),
    }
}

fn render_literal(lit: Literal) -> String {
    match lit.width {
        None => lit.value.to_string(),
        Some(w) if w <= 8 => format!("{w}'b{:0width$b}", lit.value, width = w as usize),
        Some(w) => format!("{w}'h{:X}", lit.value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sva::parser::parse_assertion;

    #[test]
    fn canonical_nonoverlap() {
        let ast = parse_assertion("assert property (@(posedge clk) a |=> b);").unwrap();
        assert_eq!(render(&ast), "assert property (@(posedge clk) ((a) |=> (b)));");
    }

    #[test]
    fn disable_clause_sits_between_clocking_and_body() {
        let ast =
            parse_assertion("assert property (@(posedge clk) disable iff (rst) a |-> b);").unwrap();
        assert_eq!(
            render(&ast),
            "assert property (@(posedge clk) disable iff (rst) ((a) |-> (b)));"
        );
    }

    #[test]
    fn negedge_is_preserved() {
        let ast = parse_assertion("assert property (@( negedge  clk ) a);").unwrap();
        assert_eq!(render(&ast), "assert property (@(negedge clk) (a));");
    }

    #[test]
    fn literals_normalize() {
        let ast = parse_assertion("assert property (@(posedge clk) x == 4'hA && y == 1'b1 && z == 16'd300);").unwrap();
        let text = render(&ast);
        assert!(text.contains("4'b1010"), "{text}");
        assert!(text.contains("1'b1"), "{text}");
        assert!(text.contains("16'h12C"), "{text}");
        assert_eq!(parse_assertion(&text).unwrap(), ast);
    }
}
