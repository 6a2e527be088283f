use super::error::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number { value: u64, width: Option<u32> },
    SysFunc(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Semi,
    At,
    Bang,
    Tilde,
    AndAnd,
    OrOr,
    EqEq,
    NotEq,
    Overlap,
    NonOverlap,
    HashHash,
    /// Recognized but unsupported syntax, carried with a description.
    Unsupported(String),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number { .. } => "number".into(),
            Tok::SysFunc(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::At => "`@`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::OrOr => "`||`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::NotEq => "`!=`".into(),
            Tok::Overlap => "`|->`".into(),
            Tok::NonOverlap => "`|=>`".into(),
            Tok::HashHash => "`##`".into(),
            Tok::Unsupported(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'$'
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let start = i;
            i += 2;
            loop {
                if i + 1 >= bytes.len() {
                    return Err(SyntaxError::new(start, "unterminated block comment", &[]));
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }
        let start = i;
        let rest = &src[i..];
        let (tok, len) = if is_ident_start(c) {
            let mut j = i + 1;
            while j < bytes.len() && is_ident_char(bytes[j]) {
                j += 1;
            }
            (Tok::Ident(src[i..j].to_string()), j - i)
        } else if c == b'$' {
            let mut j = i + 1;
            while j < bytes.len() && is_ident_char(bytes[j]) {
                j += 1;
            }
            (Tok::SysFunc(src[i..j].to_string()), j - i)
        } else if c.is_ascii_digit() || c == b'\'' {
            lex_number(src, i)?
        } else if rest.starts_with("|->") {
            (Tok::Overlap, 3)
        } else if rest.starts_with("|=>") {
            (Tok::NonOverlap, 3)
        } else if rest.starts_with("##[") {
            (Tok::Unsupported("##[".into()), 3)
        } else if rest.starts_with("##") {
            (Tok::HashHash, 2)
        } else if rest.starts_with("&&") {
            (Tok::AndAnd, 2)
        } else if rest.starts_with("||") {
            (Tok::OrOr, 2)
        } else if rest.starts_with("==") {
            if rest.starts_with("===") {
                (Tok::Unsupported("===".into()), 3)
            } else {
                (Tok::EqEq, 2)
            }
        } else if rest.starts_with("!=") {
            if rest.starts_with("!==") {
                (Tok::Unsupported("!==".into()), 3)
            } else {
                (Tok::NotEq, 2)
            }
        } else if rest.starts_with("[*")
            || rest.starts_with("[=")
            || rest.starts_with("[->")
            || rest.starts_with("[+")
        {
            let len = if rest.starts_with("[->") { 3 } else { 2 };
            (Tok::Unsupported(rest[..len].to_string()), len)
        } else {
            let tok = match c {
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b'[' => Tok::LBracket,
                b']' => Tok::RBracket,
                b':' => Tok::Colon,
                b',' => Tok::Comma,
                b';' => Tok::Semi,
                b'@' => Tok::At,
                b'!' => Tok::Bang,
                b'~' => Tok::Tilde,
                _ => Tok::Unsupported(rest.chars().next().unwrap_or('?').to_string()),
            };
            let len = match &tok {
                Tok::Unsupported(s) => s.len(),
                _ => 1,
            };
            (tok, len)
        };
        out.push(Token { tok, offset: start });
        i = start + len;
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: src.len(),
    });
    Ok(out)
}

/// Decimal (`42`), sized (`1'b0`, `4'hF`) and unsized based (`'d3`) literals.
fn lex_number(src: &str, start: usize) -> Result<(Tok, usize), SyntaxError> {
    let bytes = src.as_bytes();
    let mut j = start;
    while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'_') {
        j += 1;
    }
    let size_text: String = src[start..j].chars().filter(|&c| c != '_').collect();
    if j >= bytes.len() || bytes[j] != b'\'' {
        let value = size_text
            .parse::<u64>()
            .map_err(|_| SyntaxError::new(start, "integer literal out of range", &[]))?;
        return Ok((Tok::Number { value, width: None }, j - start));
    }
    // based literal
    let width = if size_text.is_empty() {
        None
    } else {
        let w = size_text
            .parse::<u32>()
            .map_err(|_| SyntaxError::new(start, "literal width out of range", &[]))?;
        if w == 0 || w > 64 {
            return Err(SyntaxError::new(
                start,
                "literal width must be between 1 and 64 bits",
                &[],
            ));
        }
        Some(w)
    };
    j += 1;
    if j < bytes.len() && (bytes[j] == b's' || bytes[j] == b'S') {
        j += 1;
    }
    let radix = match bytes.get(j).map(|b| b.to_ascii_lowercase()) {
        Some(b'b') => 2,
        Some(b'o') => 8,
        Some(b'd') => 10,
        Some(b'h') => 16,
        _ => {
            return Err(SyntaxError::new(
                j.min(src.len()),
                "expected a base letter after `'`",
                &["b", "o", "d", "h"],
            ))
        }
    };
    j += 1;
    let digits_start = j;
    while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_' || bytes[j] == b'?') {
        j += 1;
    }
    let digits: String = src[digits_start..j].chars().filter(|&c| c != '_').collect();
    if digits.is_empty() {
        return Err(SyntaxError::new(digits_start, "missing literal digits", &["digit"]));
    }
    if digits.chars().any(|c| matches!(c, 'x' | 'X' | 'z' | 'Z' | '?')) {
        return Err(SyntaxError::new(
            digits_start,
            "four-state literal digits (x/z) are not supported",
            &[],
        ));
    }
    let value = u64::from_str_radix(&digits, radix)
        .map_err(|_| SyntaxError::new(digits_start, "invalid literal digits", &[]))?;
    if let Some(w) = width {
        if w < 64 && value >> w != 0 {
            return Err(SyntaxError::new(
                start,
                format!("literal value {value} does not fit in {w} bits"),
                &[],
            ));
        }
    }
    Ok((Tok::Number { value, width }, j - start))
}
