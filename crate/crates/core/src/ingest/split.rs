use serde::{Deserialize, Serialize};

use super::detect::{blocks, is_blank, lines, Line};
use super::{Chunk, CodeChunk, DocFormat, IngestError, SourceDocument, Span, TextChunk};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitMode {
    Dynamic,
    Static { size: usize, overlap: usize },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Blank,
    Heading,
    Code,
    Prose,
}

/// One chunk per detected code block with the paragraph directly before and
/// after it. A paragraph between two blocks belongs to both chunks; prose not
/// adjacent to any code is dropped.
pub fn dynamic_split(doc: &SourceDocument) -> Vec<CodeChunk> {
    let ls = lines(&doc.text);
    let found = blocks(doc);
    let mut kinds: Vec<Kind> = ls
        .iter()
        .map(|l| {
            if is_blank(l.text) {
                Kind::Blank
            } else if doc.format == DocFormat::Markdown && l.text.trim_start().starts_with('#') {
                Kind::Heading
            } else {
                Kind::Prose
            }
        })
        .collect();
    for b in &found {
        for k in &mut kinds[b.first_line..=b.last_line] {
            *k = Kind::Code;
        }
    }

    found
        .iter()
        .enumerate()
        .map(|(i, b)| CodeChunk {
            chunk_id: format!("{}:code:{:04}", doc.doc_id, i),
            doc_id: doc.doc_id.clone(),
            pre_paragraph: paragraph(&doc.text, &ls, &kinds, b.first_line, Direction::Up),
            code: b.span.slice(&doc.text).to_string(),
            post_paragraph: paragraph(&doc.text, &ls, &kinds, b.last_line, Direction::Down),
            position: b.span,
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Direction {
    Up,
    Down,
}

fn paragraph(text: &str, ls: &[Line<'_>], kinds: &[Kind], from: usize, dir: Direction) -> String {
    let step = |k: usize| -> Option<usize> {
        match dir {
            Direction::Up => k.checked_sub(1),
            Direction::Down => (k + 1 < ls.len()).then_some(k + 1),
        }
    };
    let mut k = step(from);
    while let Some(i) = k {
        if kinds[i] != Kind::Blank {
            break;
        }
        k = step(i);
    }
    let Some(edge) = k.filter(|&i| kinds[i] == Kind::Prose) else {
        return String::new();
    };
    let mut far = edge;
    while let Some(i) = step(far).filter(|&i| kinds[i] == Kind::Prose) {
        far = i;
    }
    let (top, bottom) = match dir {
        Direction::Up => (far, edge),
        Direction::Down => (edge, far),
    };
    text[ls[top].start..ls[bottom].end].to_string()
}

/// Fixed windows of `size` characters advancing by `size - overlap`. Spans
/// are byte offsets and never split a code point. The last window ends at
/// the end of the document and may be shorter.
pub fn static_split(doc: &SourceDocument, size: usize, overlap: usize) -> Result<Vec<TextChunk>, IngestError> {
    if size == 0 || size <= overlap {
        return Err(IngestError::InvalidConfig(format!(
            "size ({size}) must exceed overlap ({overlap})"
        )));
    }
    let mut bounds: Vec<usize> = doc.text.char_indices().map(|(b, _)| b).collect();
    bounds.push(doc.text.len());
    let chars = bounds.len() - 1;
    let stride = size - overlap;
    let mut out = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + size).min(chars);
        let span = Span::new(bounds[start], bounds[end]);
        out.push(TextChunk {
            chunk_id: format!("{}:text:{:04}", doc.doc_id, out.len()),
            doc_id: doc.doc_id.clone(),
            text: span.slice(&doc.text).to_string(),
            span,
        });
        if end == chars {
            break;
        }
        start += stride;
    }
    Ok(out)
}

/// Splits every document in order. Document ids must be unique.
pub fn split_corpus(docs: &[SourceDocument], mode: SplitMode) -> Result<Vec<Chunk>, IngestError> {
    let mut out = Vec::new();
    for (i, d) in docs.iter().enumerate() {
        if docs[..i].iter().any(|o| o.doc_id == d.doc_id) {
            return Err(IngestError::DuplicateDocId(d.doc_id.clone()));
        }
        match mode {
            SplitMode::Dynamic => out.extend(dynamic_split(d).into_iter().map(Chunk::Code)),
            SplitMode::Static { size, overlap } => {
                out.extend(static_split(d, size, overlap)?.into_iter().map(Chunk::Text))
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_part_chunk() {
        let text = "P1 line one\nP1 line two\n\n```\nassert property (@(posedge clk) a);\n```\n\nP2 text\n";
        let doc = SourceDocument::markdown("d", text).unwrap();
        let chunks = dynamic_split(&doc);
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].pre_paragraph, "P1 line one\nP1 line two");
        assert_eq!(chunks[0].code, "assert property (@(posedge clk) a);");
        assert_eq!(chunks[0].post_paragraph, "P2 text");
        assert_eq!(
            chunks[0].text(),
            "P1 line one\nP1 line two\n\nassert property (@(posedge clk) a);\n\nP2 text"
        );
    }

    #[test]
    fn shared_paragraph_and_heading_break() {
        let text = "P1\n\n```\nc1\n```\nP2\n\n```\nc2\n```\n\n# Next\n\n```\nc3\n```\n";
        let doc = SourceDocument::markdown("d", text).unwrap();
        let chunks = dynamic_split(&doc);
        assert_eq!(chunks.len(), 3);
        assert_eq!(chunks[0].post_paragraph, "P2");
        assert_eq!(chunks[1].pre_paragraph, "P2");
        assert_eq!(chunks[1].post_paragraph, "");
        assert_eq!(chunks[2].pre_paragraph, "");
    }

    #[test]
    fn code_first_has_empty_pre() {
        let doc = SourceDocument::markdown("d", "```\nx\n```\nafter\n").unwrap();
        let chunks = dynamic_split(&doc);
        assert_eq!(chunks[0].pre_paragraph, "");
        assert_eq!(chunks[0].post_paragraph, "after");
    }

    #[test]
    fn static_windows() {
        let doc = SourceDocument::plaintext("d", &"x".repeat(1000)).unwrap();
        let spans: Vec<_> = static_split(&doc, 400, 100)
            .unwrap()
            .iter()
            .map(|c| (c.span.start, c.span.end))
            .collect();
        assert_eq!(spans, vec![(0, 400), (300, 700), (600, 1000)]);
        assert_eq!(static_split(&doc, 2000, 0).unwrap().len(), 1);
        assert!(matches!(static_split(&doc, 5, 5), Err(IngestError::InvalidConfig(_))));
    }

    #[test]
    fn static_windows_respect_code_points() {
        let doc = SourceDocument::plaintext("d", "aé😀bc").unwrap();
        let chunks = static_split(&doc, 2, 1).unwrap();
        let texts: Vec<_> = chunks.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(texts, vec!["aé", "é😀", "😀b", "bc"]);
    }
}
