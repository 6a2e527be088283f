//! Recursive-descent parser for `assert property` statements.
//!
//! Precedence, tightest first: bit select, unary (`!`, `~`, system functions),
//! `==`/`!=`, `&&`, `||`, `##N`, `|->`/`|=>`/`iff` (right associative), and
//! finally the `s_eventually` prefix.

use super::ast::{
    BinaryOp, Clocking, Edge, Expr, ImplicationKind, LayerError, SampledFunction, Select, SvaAst,
    UnaryOp,
};
use super::error::{SvaError, SyntaxError};
use super::lexer::{tokenize, Tok, Token};

const OPERAND_START: &[&str] = &[
    "identifier",
    "number",
    "`(`",
    "`!`",
    "`~`",
    "`$rose`/`$fell`/`$past`/`$stable`/`$onehot`/`$onehot0`",
    "`##`",
    "`s_eventually`",
];

/// Keywords of constructs outside the supported subset.
const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "throughout",
    "within",
    "intersect",
    "eventually",
    "until",
    "s_until",
    "until_with",
    "s_until_with",
    "nexttime",
    "s_nexttime",
    "always",
    "s_always",
    "first_match",
    "and",
    "or",
    "not",
    "implies",
    "if",
    "case",
    "sequence",
    "inside",
    "dist",
    "accept_on",
    "reject_on",
    "sync_accept_on",
    "sync_reject_on",
    "followed_by",
];

/// Parses a single `assert property (...)` statement, optionally labelled and
/// optionally terminated by `;`.
pub fn parse_assertion(text: &str) -> Result<SvaAst, SvaError> {
    let mut p = Parser::new(text)?;
    let ast = p.assertion()?;
    Ok(ast)
}

/// Parses a bare clocked property such as `@(posedge clk) a |-> b`.
pub fn parse_clocked_property(text: &str) -> Result<SvaAst, SvaError> {
    let mut p = Parser::new(text)?;
    let clocking = p.clocking()?;
    let disable = p.disable()?;
    let body_at = p.offset();
    let body = p.property()?;
    p.eat(&Tok::Semi);
    p.expect_eof()?;
    SvaAst::new(clocking, disable, body).map_err(|e| layer(body_at, e))
}

/// Accepts either a full `assert property` statement or a bare clocked
/// property.
pub fn parse_assertion_lenient(text: &str) -> Result<SvaAst, SvaError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('@') {
        parse_clocked_property(text)
    } else {
        parse_assertion(text)
    }
}

/// Parses a standalone expression (any layer).
pub fn parse_expression(text: &str) -> Result<Expr, SvaError> {
    let mut p = Parser::new(text)?;
    let e = p.property()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses a clocking event such as `@(posedge clk)`.
pub fn parse_clocking(text: &str) -> Result<Clocking, SvaError> {
    let mut p = Parser::new(text)?;
    let c = p.clocking()?;
    p.expect_eof()?;
    Ok(c)
}

fn layer(offset: usize, source: LayerError) -> SvaError {
    SvaError::Layer { offset, source }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, SvaError> {
        Ok(Parser {
            tokens: tokenize(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn error_here(&self, message: impl Into<String>, expected: &[&str]) -> SvaError {
        let found = self.peek();
        let message = match found {
            Tok::Unsupported(s) => format!("{} (unsupported construct `{s}`)", message.into()),
            _ => format!("{}, found {}", message.into(), found.describe()),
        };
        SyntaxError::new(self.offset(), message, expected).into()
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, SvaError> {
        if self.peek() == &tok {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected {what}"), &[what]))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SvaError> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            let quoted = format!("`{kw}`");
            Err(self.error_here(format!("expected {quoted}"), &[quoted.as_str()]))
        }
    }

    fn expect_eof(&mut self) -> Result<(), SvaError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(self.error_here("unexpected trailing input", &["end of input"]))
        }
    }

    fn assertion(&mut self) -> Result<SvaAst, SvaError> {
        // optional `label:`
        if matches!(self.peek(), Tok::Ident(s) if s != "assert") && self.peek_at(1) == &Tok::Colon {
            self.bump();
            self.bump();
        }
        match self.peek() {
            Tok::Ident(s) if s == "assume" || s == "cover" || s == "restrict" => {
                return Err(self.error_here(
                    "only `assert property` directives are supported",
                    &["`assert`"],
                ));
            }
            _ => {}
        }
        self.expect_keyword("assert")?;
        if self.peek() == &Tok::LParen {
            return Err(self.error_here(
                "immediate assertions are not supported; expected `property`",
                &["`property`"],
            ));
        }
        self.expect_keyword("property")?;
        self.expect(Tok::LParen, "`(`")?;
        let clocking = self.clocking()?;
        let disable = self.disable()?;
        let body_at = self.offset();
        let body = self.property()?;
        self.expect(Tok::RParen, "`)`")?;
        self.eat(&Tok::Semi);
        self.expect_eof()?;
        SvaAst::new(clocking, disable, body).map_err(|e| layer(body_at, e))
    }

    fn clocking(&mut self) -> Result<Clocking, SvaError> {
        if self.peek() != &Tok::At {
            return Err(self.error_here("expected a clocking event", &["`@`"]));
        }
        self.bump();
        self.expect(Tok::LParen, "`(`")?;
        let edge = if self.is_keyword("posedge") {
            Edge::Posedge
        } else if self.is_keyword("negedge") {
            Edge::Negedge
        } else {
            return Err(self.error_here(
                "expected a clock edge",
                &["`posedge`", "`negedge`"],
            ));
        };
        self.bump();
        let clock = match self.peek().clone() {
            Tok::Ident(name) if !is_reserved(&name) => {
                self.bump();
                name
            }
            _ => return Err(self.error_here("expected a clock signal", &["identifier"])),
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(Clocking { edge, clock })
    }

    fn disable(&mut self) -> Result<Option<Expr>, SvaError> {
        if !self.is_keyword("disable") {
            return Ok(None);
        }
        self.bump();
        self.expect_keyword("iff")?;
        self.expect(Tok::LParen, "`(`")?;
        let at = self.offset();
        let cond = self.property()?;
        if !cond.is_value() {
            return Err(layer(
                at,
                LayerError {
                    operator: "disable iff".into(),
                    found: cond.layer,
                    reason: "the disable condition must be a boolean expression".into(),
                },
            ));
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(Some(cond))
    }

    fn property(&mut self) -> Result<Expr, SvaError> {
        if self.is_keyword("s_eventually") {
            let at = self.offset();
            self.bump();
            if self.peek() == &Tok::LBracket {
                return Err(self.error_here("bounded `s_eventually` ranges are not supported", &[]));
            }
            let operand = self.property()?;
            return Expr::eventually(operand).map_err(|e| layer(at, e));
        }
        self.implication()
    }

    fn implication(&mut self) -> Result<Expr, SvaError> {
        let lhs = self.sequence()?;
        let at = self.offset();
        let kind = match self.peek() {
            Tok::Overlap => Some(ImplicationKind::Overlapping),
            Tok::NonOverlap => Some(ImplicationKind::NonOverlapping),
            Tok::Ident(s) if s == "iff" => None,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.property()?;
        let built = match kind {
            Some(kind) => Expr::implication(kind, lhs, rhs),
            None => Expr::iff(lhs, rhs),
        };
        built.map_err(|e| layer(at, e))
    }

    fn delay_cycles(&mut self) -> Result<u32, SvaError> {
        match self.peek().clone() {
            Tok::Number { value, width: None } if value >= 1 && value <= u32::MAX as u64 => {
                self.bump();
                Ok(value as u32)
            }
            Tok::Number { .. } => Err(self.error_here(
                "cycle delay must be a plain integer of at least 1",
                &["number"],
            )),
            _ => Err(self.error_here("expected a cycle count after `##`", &["number"])),
        }
    }

    fn sequence(&mut self) -> Result<Expr, SvaError> {
        let mut acc = self.delay_operand()?;
        while self.peek() == &Tok::HashHash {
            let at = self.offset();
            self.bump();
            let n = self.delay_cycles()?;
            let rhs = self.delay_operand()?;
            acc = Expr::delay(Some(acc), n, rhs).map_err(|e| layer(at, e))?;
        }
        Ok(acc)
    }

    /// A boolean operand, or a prefix delay such as `##1 ##2 a`.
    fn delay_operand(&mut self) -> Result<Expr, SvaError> {
        if self.peek() != &Tok::HashHash {
            return self.or();
        }
        let at = self.offset();
        self.bump();
        let n = self.delay_cycles()?;
        let rhs = self.delay_operand()?;
        Expr::delay(None, n, rhs).map_err(|e| layer(at, e))
    }

    fn or(&mut self) -> Result<Expr, SvaError> {
        let mut acc = self.and()?;
        while self.peek() == &Tok::OrOr {
            let at = self.offset();
            self.bump();
            let rhs = self.and()?;
            acc = Expr::binary(BinaryOp::Or, acc, rhs).map_err(|e| layer(at, e))?;
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Expr, SvaError> {
        let mut acc = self.equality()?;
        while self.peek() == &Tok::AndAnd {
            let at = self.offset();
            self.bump();
            let rhs = self.equality()?;
            acc = Expr::binary(BinaryOp::And, acc, rhs).map_err(|e| layer(at, e))?;
        }
        Ok(acc)
    }

    fn equality(&mut self) -> Result<Expr, SvaError> {
        let mut acc = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::EqEq => BinaryOp::Eq,
                Tok::NotEq => BinaryOp::Neq,
                _ => return Ok(acc),
            };
            let at = self.offset();
            self.bump();
            let rhs = self.unary()?;
            acc = Expr::binary(op, acc, rhs).map_err(|e| layer(at, e))?;
        }
    }

    fn unary(&mut self) -> Result<Expr, SvaError> {
        let op = match self.peek() {
            Tok::Bang => UnaryOp::Not,
            Tok::Tilde => UnaryOp::BitNot,
            _ => return self.primary(),
        };
        let at = self.offset();
        self.bump();
        let operand = self.unary()?;
        Expr::unary(op, operand).map_err(|e| layer(at, e))
    }

    fn primary(&mut self) -> Result<Expr, SvaError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Ident(name) => {
                if name == "s_eventually" {
                    return Err(self.error_here(
                        "`s_eventually` must start a property operand; parenthesize it",
                        &["`(`"],
                    ));
                }
                if is_reserved(&name) {
                    return Err(SyntaxError::new(
                        at,
                        format!("unsupported construct `{name}`"),
                        OPERAND_START,
                    )
                    .into());
                }
                self.bump();
                if self.peek() == &Tok::LBracket {
                    self.bump();
                    let hi = self.index_number()?;
                    let select = if self.eat(&Tok::Colon) {
                        let lo = self.index_number()?;
                        if hi < lo {
                            return Err(SyntaxError::new(
                                at,
                                "part select must be written [msb:lsb] with msb >= lsb",
                                &[],
                            )
                            .into());
                        }
                        Select::Range { msb: hi, lsb: lo }
                    } else {
                        Select::Bit(hi)
                    };
                    self.expect(Tok::RBracket, "`]`")?;
                    Ok(Expr::selected(name, select))
                } else {
                    Ok(Expr::signal(name))
                }
            }
            Tok::Number { value, width } => {
                self.bump();
                Ok(Expr::literal(value, width))
            }
            Tok::SysFunc(name) => {
                let func = match name.as_str() {
                    "$rose" => SampledFunction::Rose,
                    "$fell" => SampledFunction::Fell,
                    "$stable" => SampledFunction::Stable,
                    "$onehot" => SampledFunction::Onehot,
                    "$onehot0" => SampledFunction::Onehot0,
                    "$past" => SampledFunction::Past(1),
                    other => {
                        return Err(SyntaxError::new(
                            at,
                            format!("unsupported system function `{other}`"),
                            &["`$rose`", "`$fell`", "`$past`", "`$stable`", "`$onehot`", "`$onehot0`"],
                        )
                        .into())
                    }
                };
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let arg = self.property()?;
                let func = if func == SampledFunction::Past(1) && self.eat(&Tok::Comma) {
                    match self.peek().clone() {
                        Tok::Number { value, width: None } if value >= 1 && value <= u32::MAX as u64 => {
                            self.bump();
                            SampledFunction::Past(value as u32)
                        }
                        _ => {
                            return Err(self.error_here(
                                "`$past` depth must be a plain integer of at least 1",
                                &["number"],
                            ))
                        }
                    }
                } else {
                    func
                };
                self.expect(Tok::RParen, "`)`")?;
                Expr::function(func, arg).map_err(|e| layer(at, e))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.property()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.error_here("expected an operand", OPERAND_START)),
        }
    }

    fn index_number(&mut self) -> Result<u32, SvaError> {
        match self.peek().clone() {
            Tok::Number { value, .. } if value <= u32::MAX as u64 => {
                self.bump();
                Ok(value as u32)
            }
            _ => Err(self.error_here("expected a constant bit index", &["number"])),
        }
    }
}

fn is_reserved(name: &str) -> bool {
    UNSUPPORTED_KEYWORDS.contains(&name)
        || matches!(
            name,
            "assert" | "property" | "disable" | "iff" | "posedge" | "negedge" | "s_eventually"
        )
}
