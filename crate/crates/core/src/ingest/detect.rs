use super::{DocFormat, SourceDocument, Span};

/// Line openers that mark a plaintext line as code.
pub const PLAINTEXT_KEYWORDS: [&str; 10] = [
    "module", "assert", "always", "assign", "property", "endmodule", "initial", "wire", "reg",
    "logic",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) struct Line<'a> {
    pub start: usize,
    /// End of the content, excluding the line terminator.
    pub end: usize,
    pub text: &'a str,
}

pub(super) fn lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    let mut start = 0;
    for piece in text.split_inclusive('\n') {
        let content = piece.strip_suffix('\n').unwrap_or(piece);
        let content = content.strip_suffix('\r').unwrap_or(content);
        out.push(Line {
            start,
            end: start + content.len(),
            text: content,
        });
        start += piece.len();
    }
    out
}

pub(super) fn is_blank(line: &str) -> bool {
    line.trim().is_empty()
}

/// The fence marker a line opens or closes with, if any.
fn fence(line: &str) -> Option<&'static str> {
    let t = line.trim_start();
    ["```", "~~~"].into_iter().find(|m| t.starts_with(m))
}

fn starts_with_keyword(line: &str) -> bool {
    let t = line.trim_start();
    PLAINTEXT_KEYWORDS.iter().any(|k| {
        t.strip_prefix(k)
            .is_some_and(|rest| !rest.starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_'))
    })
}

fn is_indented(line: &str) -> bool {
    !is_blank(line) && (line.starts_with("    ") || line.starts_with('\t'))
}

/// A detected block: the code span plus the line range it occupies
/// (fence lines included for markdown).
#[derive(Debug, Clone, Copy)]
pub(super) struct Block {
    pub span: Span,
    pub first_line: usize,
    pub last_line: usize,
}

pub(super) fn blocks(doc: &SourceDocument) -> Vec<Block> {
    let ls = lines(&doc.text);
    match doc.format {
        DocFormat::Markdown => markdown_blocks(&ls, &doc.text),
        DocFormat::Plaintext => plaintext_blocks(&ls),
    }
}

fn markdown_blocks(ls: &[Line<'_>], text: &str) -> Vec<Block> {
    let doc_len = text.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < ls.len() {
        let Some(marker) = fence(ls[i].text) else {
            i += 1;
            continue;
        };
        let open = i;
        let close = (open + 1..ls.len()).find(|&j| fence(ls[j].text) == Some(marker));
        let body_start = ls.get(open + 1).map(|l| l.start).unwrap_or(doc_len);
        let (body_end, last_line) = match close {
            Some(c) if c > open + 1 => (ls[c - 1].end, c),
            Some(c) => (body_start, c),
            None => (ls.last().map(|l| l.end).unwrap_or(doc_len), ls.len() - 1),
        };
        let span = Span::new(body_start, body_end.max(body_start));
        // Empty fences produce no chunk: code must be non-empty.
        if !span.slice(text).trim().is_empty() {
            out.push(Block {
                span,
                first_line: open,
                last_line,
            });
        }
        i = last_line + 1;
    }
    out
}

fn plaintext_blocks(ls: &[Line<'_>]) -> Vec<Block> {
    let candidate = |l: &Line<'_>| is_indented(l.text) || starts_with_keyword(l.text);
    let mut out = Vec::new();
    let mut i = 0;
    while i < ls.len() {
        if !candidate(&ls[i]) {
            i += 1;
            continue;
        }
        let first = i;
        let mut last = i;
        let mut j = i + 1;
        while j < ls.len() {
            if candidate(&ls[j]) {
                last = j;
                j += 1;
            } else if is_blank(ls[j].text) {
                j += 1;
            } else {
                break;
            }
        }
        let run = &ls[first..=last];
        let keywords = run.iter().filter(|l| starts_with_keyword(l.text)).count();
        let indented = run.iter().filter(|l| is_indented(l.text)).count();
        if keywords >= 1 || indented >= 2 {
            out.push(Block {
                span: Span::new(ls[first].start, ls[last].end),
                first_line: first,
                last_line: last,
            });
        }
        i = last + 1;
    }
    out
}

/// Byte spans of code blocks in document order. Markdown spans cover the
/// content between fences; plaintext spans cover whole lines.
pub fn detect_code_blocks(doc: &SourceDocument) -> Vec<Span> {
    blocks(doc).into_iter().map(|b| b.span).collect()
}
