//! Four-layer expression tree for concurrent assertions.
//!
//! Every [`Expr`] carries the layer it lives in. Nodes are only built through
//! the checked constructors below, which compute the layer tag, insert
//! explicit [`ExprKind::Promote`] nodes where an operand sits two layers below
//! its operator, and reject operands that come from a layer the operator does
//! not accept (e.g. a property under `&&`).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::operators::OperatorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Boolean = 0,
    Sequence = 1,
    Property = 2,
    Verification = 3,
}

impl Layer {
    pub fn index(self) -> u8 {
        self as u8
    }

    fn above(self) -> Layer {
        match self {
            Layer::Boolean => Layer::Sequence,
            Layer::Sequence => Layer::Property,
            Layer::Property | Layer::Verification => Layer::Verification,
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Layer::Boolean => "boolean",
            Layer::Sequence => "sequence",
            Layer::Property => "property",
            Layer::Verification => "verification",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Select {
    Bit(u32),
    Range { msb: u32, lsb: u32 },
}

impl Select {
    pub fn width(self) -> u32 {
        match self {
            Select::Bit(_) => 1,
            Select::Range { msb, lsb } => msb - lsb + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignalRef {
    pub name: String,
    pub select: Option<Select>,
}

/// An integer literal. Unsized literals (`0`, `42`) keep `width = None` and
/// evaluate as 32-bit values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub value: u64,
    pub width: Option<u32>,
}

impl Literal {
    pub const UNSIZED_WIDTH: u32 = 32;

    pub fn effective_width(self) -> u32 {
        self.width.unwrap_or(Self::UNSIZED_WIDTH)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnaryOp {
    /// Logical `!`.
    Not,
    /// Bitwise `~`.
    BitNot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryOp {
    And,
    Or,
    Eq,
    Neq,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
            BinaryOp::Eq => "==",
            BinaryOp::Neq => "!=",
        }
    }
}

/// Sampled-value system functions of the sequence layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampledFunction {
    Rose,
    Fell,
    Stable,
    Onehot,
    Onehot0,
    Past(u32),
}

impl SampledFunction {
    pub fn name(self) -> &'static str {
        match self {
            SampledFunction::Rose => "$rose",
            SampledFunction::Fell => "$fell",
            SampledFunction::Stable => "$stable",
            SampledFunction::Onehot => "$onehot",
            SampledFunction::Onehot0 => "$onehot0",
            SampledFunction::Past(_) => "$past",
        }
    }

    pub fn operator(self) -> OperatorKind {
        match self {
            SampledFunction::Rose => OperatorKind::Rose,
            SampledFunction::Fell => OperatorKind::Fell,
            SampledFunction::Stable => OperatorKind::Stable,
            SampledFunction::Onehot => OperatorKind::Onehot,
            SampledFunction::Onehot0 => OperatorKind::Onehot0,
            SampledFunction::Past(_) => OperatorKind::Past,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplicationKind {
    /// `|->`
    Overlapping,
    /// `|=>`
    NonOverlapping,
}

impl ImplicationKind {
    pub fn symbol(self) -> &'static str {
        match self {
            ImplicationKind::Overlapping => "|->",
            ImplicationKind::NonOverlapping => "|=>",
        }
    }

    pub fn operator(self) -> OperatorKind {
        match self {
            ImplicationKind::Overlapping => OperatorKind::OverlapImpl,
            ImplicationKind::NonOverlapping => OperatorKind::NonOverlapImpl,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExprKind {
    Signal(SignalRef),
    Literal(Literal),
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Function {
        func: SampledFunction,
        arg: Box<Expr>,
    },
    /// `lhs ##N rhs`, or the prefix form `##N rhs` when `lhs` is absent.
    Delay {
        lhs: Option<Box<Expr>>,
        cycles: u32,
        rhs: Box<Expr>,
    },
    Implication {
        kind: ImplicationKind,
        antecedent: Box<Expr>,
        consequent: Box<Expr>,
    },
    Iff {
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Eventually(Box<Expr>),
    /// Lifts its operand one layer up without changing its meaning.
    Promote(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub layer: Layer,
}

/// Operand rejected by an operator because of its layer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("operator {operator} cannot take a {found} operand: {reason}")]
pub struct LayerError {
    pub operator: String,
    pub found: Layer,
    pub reason: String,
}

impl LayerError {
    fn new(operator: impl Into<String>, found: Layer, reason: impl Into<String>) -> Self {
        LayerError {
            operator: operator.into(),
            found,
            reason: reason.into(),
        }
    }
}

impl Expr {
    pub fn signal(name: impl Into<String>) -> Expr {
        Expr {
            kind: ExprKind::Signal(SignalRef {
                name: name.into(),
                select: None,
            }),
            layer: Layer::Boolean,
        }
    }

    pub fn selected(name: impl Into<String>, select: Select) -> Expr {
        Expr {
            kind: ExprKind::Signal(SignalRef {
                name: name.into(),
                select: Some(select),
            }),
            layer: Layer::Boolean,
        }
    }

    pub fn literal(value: u64, width: Option<u32>) -> Expr {
        Expr {
            kind: ExprKind::Literal(Literal { value, width }),
            layer: Layer::Boolean,
        }
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Result<Expr, LayerError> {
        let symbol = match op {
            UnaryOp::Not => "!",
            UnaryOp::BitNot => "~",
        };
        require_value(symbol, &operand)?;
        let layer = operand.layer;
        Ok(Expr {
            kind: ExprKind::Unary {
                op,
                operand: Box::new(operand),
            },
            layer,
        })
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Result<Expr, LayerError> {
        require_value(op.symbol(), &lhs)?;
        require_value(op.symbol(), &rhs)?;
        let layer = lhs.layer.max(rhs.layer);
        Ok(Expr {
            kind: ExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            layer,
        })
    }

    pub fn function(func: SampledFunction, arg: Expr) -> Result<Expr, LayerError> {
        require_value(func.name(), &arg)?;
        Ok(Expr {
            kind: ExprKind::Function {
                func,
                arg: Box::new(arg),
            },
            layer: Layer::Sequence,
        })
    }

    pub fn delay(lhs: Option<Expr>, cycles: u32, rhs: Expr) -> Result<Expr, LayerError> {
        let name = format!("##{cycles}");
        if let Some(lhs) = &lhs {
            require_sequence(&name, lhs)?;
        }
        require_sequence(&name, &rhs)?;
        Ok(Expr {
            kind: ExprKind::Delay {
                lhs: lhs.map(Box::new),
                cycles,
                rhs: Box::new(rhs),
            },
            layer: Layer::Sequence,
        })
    }

    pub fn implication(
        kind: ImplicationKind,
        antecedent: Expr,
        consequent: Expr,
    ) -> Result<Expr, LayerError> {
        if antecedent.layer > Layer::Sequence {
            return Err(LayerError::new(
                kind.symbol(),
                antecedent.layer,
                "the antecedent of an implication must be a sequence",
            ));
        }
        require_property_operand(kind.symbol(), &consequent)?;
        Ok(Expr {
            kind: ExprKind::Implication {
                kind,
                antecedent: Box::new(lift_to(antecedent, Layer::Sequence)),
                consequent: Box::new(lift_to(consequent, Layer::Sequence)),
            },
            layer: Layer::Property,
        })
    }

    pub fn iff(lhs: Expr, rhs: Expr) -> Result<Expr, LayerError> {
        require_property_operand("iff", &lhs)?;
        require_property_operand("iff", &rhs)?;
        Ok(Expr {
            kind: ExprKind::Iff {
                lhs: Box::new(lift_to(lhs, Layer::Sequence)),
                rhs: Box::new(lift_to(rhs, Layer::Sequence)),
            },
            layer: Layer::Property,
        })
    }

    pub fn eventually(operand: Expr) -> Result<Expr, LayerError> {
        require_property_operand("s_eventually", &operand)?;
        Ok(Expr {
            kind: ExprKind::Eventually(Box::new(lift_to(operand, Layer::Sequence))),
            layer: Layer::Property,
        })
    }

    /// Promotes a sequence or boolean expression until it is a property.
    pub fn into_property(self) -> Result<Expr, LayerError> {
        if self.layer > Layer::Property {
            return Err(LayerError::new(
                "assert property",
                self.layer,
                "body must be a property expression",
            ));
        }
        Ok(lift_to(self, Layer::Property))
    }

    /// Strips promotion wrappers.
    pub fn unpromoted(&self) -> &Expr {
        let mut e = self;
        while let ExprKind::Promote(inner) = &e.kind {
            e = inner;
        }
        e
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Signal(_) | ExprKind::Literal(_) => vec![],
            ExprKind::Unary { operand, .. } => vec![operand],
            ExprKind::Binary { lhs, rhs, .. } | ExprKind::Iff { lhs, rhs } => vec![lhs, rhs],
            ExprKind::Function { arg, .. } => vec![arg],
            ExprKind::Delay { lhs, rhs, .. } => match lhs {
                Some(lhs) => vec![lhs, rhs],
                None => vec![rhs],
            },
            ExprKind::Implication {
                antecedent,
                consequent,
                ..
            } => vec![antecedent, consequent],
            ExprKind::Eventually(inner) | ExprKind::Promote(inner) => vec![inner],
        }
    }

    /// The operator this node applies, if any. Leaves and promotions have none.
    pub fn operator(&self) -> Option<OperatorKind> {
        match &self.kind {
            ExprKind::Signal(SignalRef {
                select: Some(_), ..
            }) => Some(OperatorKind::Select),
            ExprKind::Signal(_) | ExprKind::Literal(_) | ExprKind::Promote(_) => None,
            ExprKind::Unary { op, .. } => Some(match op {
                UnaryOp::Not => OperatorKind::Not,
                UnaryOp::BitNot => OperatorKind::BitNot,
            }),
            ExprKind::Binary { op, .. } => Some(match op {
                BinaryOp::And => OperatorKind::And,
                BinaryOp::Or => OperatorKind::Or,
                BinaryOp::Eq => OperatorKind::Eq,
                BinaryOp::Neq => OperatorKind::Neq,
            }),
            ExprKind::Function { func, .. } => Some(func.operator()),
            ExprKind::Delay { .. } => Some(OperatorKind::Delay),
            ExprKind::Implication { kind, .. } => Some(kind.operator()),
            ExprKind::Iff { .. } => Some(OperatorKind::Iff),
            ExprKind::Eventually(_) => Some(OperatorKind::SEventually),
        }
    }

    /// True when the expression produces a value at a single cycle: no cycle
    /// delays and nothing from the property layer.
    pub fn is_value(&self) -> bool {
        match &self.kind {
            ExprKind::Signal(_) | ExprKind::Literal(_) => true,
            ExprKind::Unary { operand, .. } => operand.is_value(),
            ExprKind::Binary { lhs, rhs, .. } => lhs.is_value() && rhs.is_value(),
            ExprKind::Function { arg, .. } => arg.is_value(),
            ExprKind::Delay { .. }
            | ExprKind::Implication { .. }
            | ExprKind::Iff { .. }
            | ExprKind::Eventually(_)
            | ExprKind::Promote(_) => false,
        }
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        for child in self.children() {
            child.walk(visit);
        }
    }

    pub fn signal_names(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let ExprKind::Signal(s) = &e.kind {
                if seen.insert(s.name.as_str()) {
                    out.push(s.name.as_str());
                }
            }
        });
        out
    }

    /// Checks layer tags and parent/child layer distances across the tree.
    pub fn validate(&self) -> Result<(), LayerError> {
        for child in self.children() {
            child.validate()?;
            let gap = self.layer.index() as i16 - child.layer.index() as i16;
            if !(0..=1).contains(&gap) {
                return Err(LayerError::new(
                    self.operator()
                        .map(|o| o.to_string())
                        .unwrap_or_else(|| "promotion".into()),
                    child.layer,
                    format!("operand is {gap} layers below a {} node", self.layer),
                ));
            }
        }
        let expected = match &self.kind {
            ExprKind::Signal(_) | ExprKind::Literal(_) => Layer::Boolean,
            ExprKind::Unary { operand, .. } => operand.layer,
            ExprKind::Binary { lhs, rhs, .. } => lhs.layer.max(rhs.layer),
            ExprKind::Function { .. } | ExprKind::Delay { .. } => Layer::Sequence,
            ExprKind::Implication { .. } | ExprKind::Iff { .. } | ExprKind::Eventually(_) => {
                Layer::Property
            }
            ExprKind::Promote(inner) => inner.layer.above(),
        };
        if expected != self.layer {
            return Err(LayerError::new(
                self.operator()
                    .map(|o| o.to_string())
                    .unwrap_or_else(|| "promotion".into()),
                self.layer,
                format!("node is tagged {} but its operands make it {expected}", self.layer),
            ));
        }
        Ok(())
    }
}

fn require_value(op: &str, operand: &Expr) -> Result<(), LayerError> {
    if operand.is_value() {
        Ok(())
    } else {
        Err(LayerError::new(
            op,
            operand.layer,
            "operand must be a boolean value, not a temporal sequence or property",
        ))
    }
}

fn require_sequence(op: &str, operand: &Expr) -> Result<(), LayerError> {
    if operand.layer <= Layer::Sequence {
        Ok(())
    } else {
        Err(LayerError::new(
            op,
            operand.layer,
            "cycle delay operands must be sequences",
        ))
    }
}

fn require_property_operand(op: &str, operand: &Expr) -> Result<(), LayerError> {
    if operand.layer <= Layer::Property {
        Ok(())
    } else {
        Err(LayerError::new(op, operand.layer, "operand above the property layer"))
    }
}

fn lift_to(mut expr: Expr, target: Layer) -> Expr {
    while expr.layer < target {
        let layer = expr.layer.above();
        expr = Expr {
            kind: ExprKind::Promote(Box::new(expr)),
            layer,
        };
    }
    expr
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Posedge,
    Negedge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clocking {
    pub edge: Edge,
    pub clock: String,
}

/// A parsed `assert property (...)` statement. The verification layer is the
/// clocking event, the optional `disable iff` condition and the assert wrapper.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SvaAst {
    pub clocking: Clocking,
    pub disable: Option<Expr>,
    pub body: Expr,
}

impl SvaAst {
    pub fn new(clocking: Clocking, disable: Option<Expr>, body: Expr) -> Result<Self, LayerError> {
        if let Some(d) = &disable {
            require_value("disable iff", d)?;
        }
        Ok(SvaAst {
            clocking,
            disable,
            body: body.into_property()?,
        })
    }

    /// Signals referenced by the body and disable condition, first occurrence
    /// first. The clock is not included.
    pub fn signal_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let disable = self.disable.iter().flat_map(|d| d.signal_names());
        for n in disable.chain(self.body.signal_names()) {
            if !out.contains(&n) {
                out.push(n);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), LayerError> {
        if self.body.layer != Layer::Property {
            return Err(LayerError::new(
                "assert property",
                self.body.layer,
                "body root must be a property-layer expression",
            ));
        }
        self.body.validate()?;
        if let Some(d) = &self.disable {
            d.validate()?;
            require_value("disable iff", d)?;
        }
        Ok(())
    }
}
