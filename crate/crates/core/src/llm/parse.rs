//! Parsing of free-form model replies.

use serde::{Deserialize, Serialize};

use super::LlmError;

/// Contents of each ``` fenced block, in order. An unterminated fence runs
/// to the end of the text.
fn fences(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut rest_at = 0;
    while let Some(open) = text[rest_at..].find("```").map(|i| i + rest_at) {
        let body_start = match text[open..].find('\n') {
            Some(nl) => open + nl + 1,
            None => break,
        };
        match text[body_start..].find("```").map(|i| i + body_start) {
            Some(close) => {
                out.push((body_start, &text[body_start..close]));
                rest_at = close + 3;
            }
            None => {
                out.push((body_start, &text[body_start..]));
                break;
            }
        }
    }
    out
}

/// Cuts one statement starting at `assert property`: balanced parentheses
/// plus a trailing `;` when present. Falls back to the end of the line run.
fn statement(text: &str, start: usize) -> &str {
    let rest = &text[start..];
    let mut depth = 0i32;
    let mut opened = false;
    for (i, c) in rest.char_indices() {
        match c {
            '(' => {
                depth += 1;
                opened = true;
            }
            ')' => {
                depth -= 1;
                if opened && depth == 0 {
                    let end = i + 1;
                    let after = &rest[end..];
                    let semi = after.len() - after.trim_start().len();
                    return if after.trim_start().starts_with(';') {
                        &rest[..end + semi + 1]
                    } else {
                        &rest[..end]
                    };
                }
            }
            ';' if depth <= 0 => return &rest[..=i],
            _ => {}
        }
    }
    // Unbalanced: keep the run of non-blank lines.
    let end = rest.find("\n\n").unwrap_or(rest.len());
    rest[..end].trim_end()
}

/// Pulls the assertion out of a model reply. Fenced blocks mentioning
/// `assert property` win over bare text. The result is always a substring of
/// `text`.
pub fn extract_sva_from_response(text: &str) -> Result<String, LlmError> {
    const KEY: &str = "assert property";
    for (offset, body) in fences(text) {
        if let Some(i) = body.find(KEY) {
            return Ok(statement(text, offset + i).to_string());
        }
    }
    match text.find(KEY) {
        Some(i) => Ok(statement(text, i).to_string()),
        None => Err(LlmError::NoAssertionFound { raw: text.to_string() }),
    }
}

/// The first JSON value in the reply: a fenced block if present, otherwise
/// the outermost bracketed span.
fn json_value(text: &str) -> Option<serde_json::Value> {
    for (_, body) in fences(text) {
        if let Ok(v) = serde_json::from_str(body.trim()) {
            return Some(v);
        }
    }
    if let Ok(v) = serde_json::from_str(text.trim()) {
        return Some(v);
    }
    for (open, close) in [('[', ']'), ('{', '}')] {
        if let (Some(a), Some(b)) = (text.find(open), text.rfind(close)) {
            if a < b {
                if let Ok(v) = serde_json::from_str(&text[a..=b]) {
                    return Some(v);
                }
            }
        }
    }
    None
}

fn bullet(line: &str) -> Option<&str> {
    let l = line.trim();
    let l = l
        .strip_prefix("- ")
        .or_else(|| l.strip_prefix("* "))
        .or_else(|| {
            let digits = l.chars().take_while(|c| c.is_ascii_digit()).count();
            (digits > 0).then(|| l[digits..].strip_prefix(['.', ')'])).flatten()
        })?;
    let l = l.trim().trim_matches('"').trim();
    (!l.is_empty()).then_some(l)
}

/// Keyword phrases from a JSON list (optionally under a `keywords` key) or a
/// bullet list.
pub fn parse_keywords(text: &str) -> Result<Vec<String>, LlmError> {
    let malformed = || LlmError::Malformed {
        expected: "a JSON list of keyword phrases",
        raw: text.to_string(),
    };
    let list = match json_value(text) {
        Some(serde_json::Value::Object(mut m)) => m.remove("keywords"),
        other => other,
    };
    if let Some(v) = list {
        let serde_json::Value::Array(items) = v else {
            return Err(malformed());
        };
        return items
            .into_iter()
            .map(|i| match i {
                serde_json::Value::String(s) => Ok(s.trim().to_string()),
                _ => Err(malformed()),
            })
            .filter(|r| r.as_ref().map(|s| !s.is_empty()).unwrap_or(true))
            .collect();
    }
    let bullets: Vec<String> = text.lines().filter_map(bullet).map(str::to_string).collect();
    if bullets.is_empty() && !text.trim().is_empty() {
        return Err(malformed());
    }
    Ok(bullets)
}

/// `(keyword, operator name)` pairs from a JSON object, a JSON list of
/// `{keyword, operator}` objects, or `keyword -> operator` lines. Operator
/// names are returned as written.
pub fn parse_operator_map(text: &str) -> Result<Vec<(String, String)>, LlmError> {
    let malformed = || LlmError::Malformed {
        expected: "a JSON object mapping keyword phrases to operators",
        raw: text.to_string(),
    };
    if let Some(v) = json_value(text) {
        return match v {
            serde_json::Value::Object(m) => m
                .into_iter()
                .map(|(k, v)| match v {
                    serde_json::Value::String(op) => Ok((k, op)),
                    _ => Err(malformed()),
                })
                .collect(),
            serde_json::Value::Array(items) => items
                .into_iter()
                .map(|i| {
                    let k = i.get("keyword").and_then(|x| x.as_str());
                    let o = i.get("operator").and_then(|x| x.as_str());
                    match (k, o) {
                        (Some(k), Some(o)) => Ok((k.to_string(), o.to_string())),
                        _ => Err(malformed()),
                    }
                })
                .collect(),
            _ => Err(malformed()),
        };
    }
    let mut out = Vec::new();
    for line in text.lines() {
        let l = bullet(line).unwrap_or(line.trim());
        if let Some((k, op)) = l.rsplit_once(" -> ") {
            let k = k.trim().trim_matches('"').trim();
            let op = op.trim().trim_matches(['"', '`']).trim();
            if !k.is_empty() && !op.is_empty() {
                out.push((k.to_string(), op.to_string()));
            }
        }
    }
    if out.is_empty() && !text.trim().is_empty() {
        return Err(malformed());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecheckVerdict {
    Correct,
    Revised,
    /// The reply carried no sentinel line.
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecheckReply {
    pub verdict: RecheckVerdict,
    pub sva: Option<String>,
}

/// Reads the `VERDICT: CORRECT` / `VERDICT: REVISED` sentinel and the
/// assertion that follows it.
pub fn parse_recheck_reply(text: &str) -> RecheckReply {
    let verdict = text
        .lines()
        .find_map(|l| {
            let l = l.trim().trim_matches(['*', '`']).trim();
            let v = l.strip_prefix("VERDICT:")?.trim().to_ascii_uppercase();
            Some(if v.starts_with("CORRECT") {
                RecheckVerdict::Correct
            } else if v.starts_with("REVISED") {
                RecheckVerdict::Revised
            } else {
                RecheckVerdict::Missing
            })
        })
        .unwrap_or(RecheckVerdict::Missing);
    RecheckReply {
        verdict,
        sva: extract_sva_from_response(text).ok(),
    }
}

/// Fragment list for the derivation prompt: a JSON list of strings.
pub fn parse_fragments(text: &str) -> Result<Vec<String>, LlmError> {
    match json_value(text) {
        Some(serde_json::Value::Array(items)) => items
            .into_iter()
            .map(|i| match i {
                serde_json::Value::String(s) => Ok(s),
                _ => Err(LlmError::Malformed {
                    expected: "a JSON list of strings",
                    raw: text.to_string(),
                }),
            })
            .collect(),
        _ => Err(LlmError::Malformed {
            expected: "a JSON list of strings",
            raw: text.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_assertion() {
        let r = "Here it is:\n```systemverilog\nassert property (@(posedge clk) a |=> b);\n```\nDone.";
        assert_eq!(
            extract_sva_from_response(r).unwrap(),
            "assert property (@(posedge clk) a |=> b);"
        );
    }

    #[test]
    fn bare_assertion_after_prose() {
        let r = "The assertion is assert property (@(posedge clk) (a |-> (b)));\nHope this helps.";
        assert_eq!(
            extract_sva_from_response(r).unwrap(),
            "assert property (@(posedge clk) (a |-> (b)));"
        );
    }

    #[test]
    fn missing_assertion() {
        assert!(matches!(
            extract_sva_from_response("no idea"),
            Err(LlmError::NoAssertionFound { .. })
        ));
    }

    #[test]
    fn unbalanced_keeps_line_run() {
        let r = "assert property (@(posedge clk) a |-> )\n\nbye";
        let got = extract_sva_from_response(r).unwrap();
        assert_eq!(got, "assert property (@(posedge clk) a |-> )");
    }

    #[test]
    fn keyword_shapes() {
        assert_eq!(parse_keywords("[\"rising edge\", \"after 2 cycles\"]").unwrap().len(), 2);
        assert_eq!(parse_keywords("```json\n[]\n```").unwrap(), Vec::<String>::new());
        assert_eq!(
            parse_keywords("- in the previous clock cycle\n- rising edge").unwrap(),
            vec!["in the previous clock cycle", "rising edge"]
        );
        assert!(parse_keywords("I cannot help").is_err());
        assert!(parse_keywords("{\"keywords\": [1]}").is_err());
    }

    #[test]
    fn operator_map_shapes() {
        let m = parse_operator_map("{\"in the previous clock cycle\": \"$past\"}").unwrap();
        assert_eq!(m, vec![("in the previous clock cycle".into(), "$past".into())]);
        let m = parse_operator_map("rising edge -> $rose\nnext cycle -> |=>").unwrap();
        assert_eq!(m[1], ("next cycle".into(), "|=>".into()));
        assert!(parse_operator_map("nothing here").is_err());
    }

    #[test]
    fn recheck_sentinel() {
        let r = parse_recheck_reply("VERDICT: REVISED\n```\nassert property (@(posedge clk) a |=> b);\n```");
        assert_eq!(r.verdict, RecheckVerdict::Revised);
        assert!(r.sva.unwrap().contains("|=>"));
        assert_eq!(parse_recheck_reply("looks fine").verdict, RecheckVerdict::Missing);
    }
}
