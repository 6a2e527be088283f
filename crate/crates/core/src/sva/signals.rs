use serde::{Deserialize, Serialize};

use super::ast::{Expr, ExprKind, Select, SvaAst};
use super::error::SvaError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalDecl {
    pub name: String,
    pub width: u32,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignalTableError {
    #[error("signal `{0}` declared more than once")]
    Duplicate(String),
    #[error("signal `{0}` must be at least one bit wide")]
    ZeroWidth(String),
    #[error("signal `{0}` is wider than 64 bits")]
    TooWide(String),
}

/// Declared design signals with their widths and plain-language descriptions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SignalTable {
    entries: Vec<SignalDecl>,
}

impl<'de> Deserialize<'de> for SignalTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let entries = Vec::<SignalDecl>::deserialize(d)?;
        SignalTable::new(entries).map_err(serde::de::Error::custom)
    }
}

impl SignalTable {
    pub fn new(entries: Vec<SignalDecl>) -> Result<Self, SignalTableError> {
        for (i, e) in entries.iter().enumerate() {
            if e.width == 0 {
                return Err(SignalTableError::ZeroWidth(e.name.clone()));
            }
            if e.width > 64 {
                return Err(SignalTableError::TooWide(e.name.clone()));
            }
            if entries[..i].iter().any(|o| o.name == e.name) {
                return Err(SignalTableError::Duplicate(e.name.clone()));
            }
        }
        Ok(SignalTable { entries })
    }

    /// Convenience constructor from `(name, width)` pairs.
    pub fn from_widths<'a>(pairs: impl IntoIterator<Item = (&'a str, u32)>) -> Result<Self, SignalTableError> {
        Self::new(
            pairs
                .into_iter()
                .map(|(name, width)| SignalDecl {
                    name: name.to_string(),
                    width,
                    description: String::new(),
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[SignalDecl] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&SignalDecl> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn width(&self, name: &str) -> Option<u32> {
        self.get(name).map(|e| e.width)
    }

    /// One line per signal: `name [width]: description`.
    pub fn describe(&self) -> String {
        self.entries
            .iter()
            .map(|e| {
                if e.description.is_empty() {
                    format!("- {} [{} bit{}]", e.name, e.width, if e.width == 1 { "" } else { "s" })
                } else {
                    format!(
                        "- {} [{} bit{}]: {}",
                        e.name,
                        e.width,
                        if e.width == 1 { "" } else { "s" },
                        e.description
                    )
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Checks that every referenced signal (clock included) is declared and that
/// bit selects are in range.
pub fn check_signals(ast: &SvaAst, table: &SignalTable) -> Result<(), SvaError> {
    if table.get(&ast.clocking.clock).is_none() {
        return Err(SvaError::UnknownSignal(ast.clocking.clock.clone()));
    }
    if let Some(d) = &ast.disable {
        check_expr_signals(d, table)?;
    }
    check_expr_signals(&ast.body, table)
}

pub fn check_expr_signals(expr: &Expr, table: &SignalTable) -> Result<(), SvaError> {
    let mut result = Ok(());
    expr.walk(&mut |e| {
        if result.is_err() {
            return;
        }
        if let ExprKind::Signal(s) = &e.kind {
            let Some(decl) = table.get(&s.name) else {
                result = Err(SvaError::UnknownSignal(s.name.clone()));
                return;
            };
            let out_of_range = match s.select {
                None => None,
                Some(Select::Bit(i)) if i >= decl.width => Some(format!("[{i}]")),
                Some(Select::Range { msb, lsb }) if msb >= decl.width => {
                    Some(format!("[{msb}:{lsb}]"))
                }
                Some(_) => None,
            };
            if let Some(select) = out_of_range {
                result = Err(SvaError::SelectOutOfRange {
                    signal: s.name.clone(),
                    select,
                    width: decl.width,
                });
            }
        }
    });
    result
}
