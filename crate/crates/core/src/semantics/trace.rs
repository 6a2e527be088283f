use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("a trace needs at least one cycle")]
    Empty,
    #[error("signal `{0}` listed twice")]
    DuplicateSignal(String),
    #[error("signal `{0}` must be 1..=64 bits wide")]
    BadWidth(String),
    #[error("cycle {cycle}: value {value} does not fit `{signal}` ({width} bits)")]
    ValueTooWide {
        signal: String,
        cycle: usize,
        value: u64,
        width: u32,
    },
    #[error("cycle {cycle}: expected {expected} values, found {found}")]
    RowLength {
        cycle: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Two-state sampled values, one row per clock tick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    signals: Vec<(String, u32)>,
    len: usize,
    /// Row-major: `values[cycle * signals.len() + signal]`.
    values: Vec<u64>,
}

pub(crate) fn width_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl Trace {
    pub fn new(signals: Vec<(String, u32)>, rows: Vec<Vec<u64>>) -> Result<Self, TraceError> {
        if rows.is_empty() {
            return Err(TraceError::Empty);
        }
        for (i, (name, width)) in signals.iter().enumerate() {
            if *width == 0 || *width > 64 {
                return Err(TraceError::BadWidth(name.clone()));
            }
            if signals[..i].iter().any(|(n, _)| n == name) {
                return Err(TraceError::DuplicateSignal(name.clone()));
            }
        }
        let mut values = Vec::with_capacity(rows.len() * signals.len());
        for (cycle, row) in rows.iter().enumerate() {
            if row.len() != signals.len() {
                return Err(TraceError::RowLength {
                    cycle,
                    expected: signals.len(),
                    found: row.len(),
                });
            }
            for ((name, width), &value) in signals.iter().zip(row) {
                if value & !width_mask(*width) != 0 {
                    return Err(TraceError::ValueTooWide {
                        signal: name.clone(),
                        cycle,
                        value,
                        width: *width,
                    });
                }
                values.push(value);
            }
        }
        Ok(Trace {
            signals,
            len: rows.len(),
            values,
        })
    }

    /// Builds a trace from per-signal columns, e.g. `[("a", 1, vec![1, 0])]`.
    pub fn from_columns(columns: &[(&str, u32, Vec<u64>)]) -> Result<Self, TraceError> {
        let len = columns.first().map(|c| c.2.len()).unwrap_or(0);
        let signals = columns
            .iter()
            .map(|(n, w, _)| (n.to_string(), *w))
            .collect();
        let mut rows = vec![Vec::with_capacity(columns.len()); len];
        for (name, _, col) in columns {
            if col.len() != len {
                return Err(TraceError::Parse {
                    line: 0,
                    message: format!("column `{name}` has {} cycles, expected {len}", col.len()),
                });
            }
            for (row, v) in rows.iter_mut().zip(col) {
                row.push(*v);
            }
        }
        Trace::new(signals, rows)
    }

    pub(crate) fn from_raw(signals: Vec<(String, u32)>, len: usize, values: Vec<u64>) -> Self {
        debug_assert_eq!(values.len(), len * signals.len());
        Trace {
            signals,
            len,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn signals(&self) -> &[(String, u32)] {
        &self.signals
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.signals.iter().position(|(n, _)| n == name)
    }

    pub fn value(&self, signal: usize, cycle: usize) -> u64 {
        self.values[cycle * self.signals.len() + signal]
    }

    pub fn value_of(&self, name: &str, cycle: usize) -> Option<u64> {
        self.index_of(name).map(|i| self.value(i, cycle))
    }

    pub(crate) fn raw(&self) -> &[u64] {
        &self.values
    }

    /// Appends one cycle.
    pub fn push_row(&mut self, row: &[u64]) -> Result<(), TraceError> {
        if row.len() != self.signals.len() {
            return Err(TraceError::RowLength {
                cycle: self.len,
                expected: self.signals.len(),
                found: row.len(),
            });
        }
        for ((name, width), &value) in self.signals.iter().zip(row) {
            if value & !width_mask(*width) != 0 {
                return Err(TraceError::ValueTooWide {
                    signal: name.clone(),
                    cycle: self.len,
                    value,
                    width: *width,
                });
            }
        }
        self.values.extend_from_slice(row);
        self.len += 1;
        Ok(())
    }

    /// Parses the plain-text table format: a header of `name:width` columns
    /// followed by one whitespace-separated row per cycle. Values may be
    /// decimal or `0x`/`0b` prefixed; `#` starts a comment.
    pub fn parse_table(text: &str) -> Result<Self, TraceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (header_line, header) = lines.next().ok_or(TraceError::Empty)?;
        let mut signals = Vec::new();
        for col in header.split_whitespace() {
            let (name, width) = col.split_once(':').ok_or_else(|| TraceError::Parse {
                line: header_line,
                message: format!("header column `{col}` is not `name:width`"),
            })?;
            let width = width.parse::<u32>().map_err(|_| TraceError::Parse {
                line: header_line,
                message: format!("bad width in `{col}`"),
            })?;
            signals.push((name.to_string(), width));
        }
        let mut rows = Vec::new();
        for (line, l) in lines {
            let row = l
                .split_whitespace()
                .map(|v| parse_value(v).ok_or_else(|| TraceError::Parse {
                    line,
                    message: format!("bad value `{v}`"),
                }))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Trace::new(signals, rows)
    }

    /// Renders the table format accepted by [`Trace::parse_table`].
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self
            .signals
            .iter()
            .map(|(n, w)| format!("{n}:{w}"))
            .collect();
        out.push_str(&header.join(" "));
        out.push('\n');
        for cycle in 0..self.len {
            let row: Vec<String> = (0..self.signals.len())
                .map(|s| self.value(s, cycle).to_string())
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

fn parse_value(v: &str) -> Option<u64> {
    if let Some(hex) = v.strip_prefix("0x") {
        u64::from_str_radix(hex, 16).ok()
    } else if let Some(bin) = v.strip_prefix("0b") {
        u64::from_str_radix(bin, 2).ok()
    } else {
        v.parse().ok()
    }
}
