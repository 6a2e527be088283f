use serde::{Deserialize, Serialize};

use super::eval::{AttemptStatus, Compiled, EndOfTrace, Rows};
use super::trace::{width_mask, Trace};
use super::SemanticsError;
use crate::sva::{Clocking, SignalTable, SvaAst};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EquivOptions {
    /// Longest trace enumerated; every length from 1 up is checked.
    pub max_len: usize,
    /// Upper bound on `sum(signal widths) * max_len`.
    pub bit_budget: u32,
    pub mode: EndOfTrace,
}

impl Default for EquivOptions {
    fn default() -> Self {
        EquivOptions {
            max_len: 5,
            bit_budget: 26,
            mode: EndOfTrace::Weak,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trace: Trace,
    pub cycle: usize,
    pub golden: AttemptStatus,
    pub candidate: AttemptStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent { traces_checked: u64 },
    Inequivalent(Counterexample),
    ClockMismatch { golden: Clocking, candidate: Clocking },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent { .. })
    }
}

/// Exhaustive bounded check that `golden iff candidate` holds at every start
/// cycle of every trace up to `max_len` cycles. Traces are visited by length,
/// then in lexicographic order with the first cycle most significant, so the
/// reported counterexample is the shortest and lexicographically smallest.
pub fn equivalent(
    golden: &SvaAst,
    candidate: &SvaAst,
    signals: &SignalTable,
    options: EquivOptions,
) -> Result<Equivalence, SemanticsError> {
    if golden.clocking != candidate.clocking {
        return Ok(Equivalence::ClockMismatch {
            golden: golden.clocking.clone(),
            candidate: candidate.clocking.clone(),
        });
    }
    if options.max_len == 0 {
        return Err(SemanticsError::InvalidBound("max_len must be at least 1".into()));
    }

    let mut layout: Vec<(String, u32)> = Vec::new();
    for name in golden.signal_names().into_iter().chain(candidate.signal_names()) {
        if layout.iter().any(|(n, _)| n == name) {
            continue;
        }
        let width = signals
            .width(name)
            .ok_or_else(|| SemanticsError::UnknownSignal(name.to_string()))?;
        layout.push((name.to_string(), width));
    }
    let row_bits: u64 = layout.iter().map(|(_, w)| *w as u64).sum();
    let bits = row_bits * options.max_len as u64;
    if bits > options.bit_budget as u64 {
        return Err(SemanticsError::BudgetExceeded {
            bits,
            budget: options.bit_budget,
        });
    }

    if golden.body == candidate.body && golden.disable == candidate.disable {
        return Ok(Equivalence::Equivalent { traces_checked: 0 });
    }

    let g = Compiled::new(golden, layout.as_slice())?;
    let c = Compiled::new(candidate, layout.as_slice())?;
    let shared_disable = golden.disable == candidate.disable;
    let ncols = layout.len();
    let widths: Vec<u32> = layout.iter().map(|(_, w)| *w).collect();
    let mut checked = 0u64;

    for len in 1..=options.max_len {
        let total_bits = row_bits * len as u64;
        let count = 1u64 << total_bits;
        let mut values = vec![0u64; ncols * len];
        for index in 0..count {
            decode(index, &widths, &mut values);
            checked += 1;
            let rows = Rows {
                values: &values,
                ncols,
                len,
            };
            for t in 0..len {
                let differs = if shared_disable {
                    let go = g.outcome(rows, t);
                    let co = c.outcome(rows, t);
                    match (go.truth.resolve(options.mode), co.truth.resolve(options.mode)) {
                        (Some(x), Some(y)) if x != y => {
                            !g.disabled(rows, t, go.span_end.max(co.span_end))
                        }
                        _ => false,
                    }
                } else {
                    let ga = g.attempt(rows, t, options.mode);
                    let ca = c.attempt(rows, t, options.mode);
                    let settle = |a: AttemptStatus| match a {
                        AttemptStatus::Pending => None,
                        other => Some(other.passes()),
                    };
                    matches!((settle(ga), settle(ca)), (Some(x), Some(y)) if x != y)
                };
                if differs {
                    let trace = Trace::from_raw(layout.clone(), len, values.clone());
                    return Ok(Equivalence::Inequivalent(Counterexample {
                        golden: g.attempt(rows, t, options.mode),
                        candidate: c.attempt(rows, t, options.mode),
                        trace,
                        cycle: t,
                    }));
                }
            }
        }
    }
    Ok(Equivalence::Equivalent {
        traces_checked: checked,
    })
}

/// Unpacks a lexicographic index; the last value of the last cycle occupies
/// the least significant bits.
fn decode(mut index: u64, widths: &[u32], values: &mut [u64]) {
    let ncols = widths.len();
    for pos in (0..values.len()).rev() {
        let w = widths[pos % ncols];
        values[pos] = index & width_mask(w);
        index >>= w;
    }
}
