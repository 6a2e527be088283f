//! Exhaustive generator of small expressions over three one-bit signals.

use svagen::sva::{parse_expression, Expr};

const LEAVES: [&str; 3] = ["a", "b", "c"];

/// Applies one table operator to every operand (or operand pair) drawn from
/// `pool`, keeping only layer-legal results.
fn one_step(pool: &[String], leaves: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for x in pool {
        for f in ["$rose", "$fell", "$stable", "$onehot", "$onehot0", "$past"] {
            out.push(format!("{f}({x})"));
        }
        out.push(format!("$past({x}, 2)"));
        out.push(format!("s_eventually ({x})"));
        for n in [1, 2] {
            out.push(format!("##{n} ({x})"));
        }
    }
    // Binary operators pair a pool member with a leaf on either side so the
    // result still has at most one more table operator.
    for x in pool {
        for y in leaves {
            for n in [1, 2] {
                out.push(format!("({x}) ##{n} ({y})"));
                out.push(format!("({y}) ##{n} ({x})"));
            }
            for imp in ["|->", "|=>"] {
                out.push(format!("({x}) {imp} ({y})"));
                out.push(format!("({y}) {imp} ({x})"));
            }
        }
    }
    out
}

/// All layer-legal expressions with at most two table operators. Boolean
/// connectives appear through the compound leaves.
pub fn small_expressions() -> Vec<Expr> {
    let mut leaves: Vec<String> = LEAVES.iter().map(|s| s.to_string()).collect();
    leaves.extend(["!a", "a && b", "b || c", "a == c"].iter().map(|s| s.to_string()));
    let plain: Vec<String> = LEAVES.iter().map(|s| s.to_string()).collect();
    let level1 = one_step(&leaves, &plain);
    let mut texts: Vec<String> = leaves.clone();
    texts.extend(level1.iter().cloned());
    texts.extend(one_step(&level1, &plain));
    let mut seen = std::collections::HashSet::new();
    texts
        .into_iter()
        .filter_map(|t| parse_expression(&t).ok())
        .filter(|e| seen.insert(e.clone()))
        .collect()
}
