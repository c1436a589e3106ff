use crate::error::{Diagnostic, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    /// `@label`
    Label(String),
    Op(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

// Longest first so that maximal munch falls out of a linear scan.
const OPS: &[&str] = &[
    "/<<:", "<<|", "|>>", "|->", "<->", "-->", "+->", ">+>", "<=>", "<<:", "/<:", ":=", "<|", "|>",
    "<+", "<:", "<=", ">=", "=>", "/=", "/:", "\\/", "/\\", "**", "\\", "~", "=", ":", "<", ">",
    "!", "#", ".", ",", "(", ")", "[", "]", "{", "}", "&", ";", "|",
];

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! advance {
        ($n:expr) => {{
            for _ in 0..$n {
                if bytes[i] == b'\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        }};
    }

    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            advance!(1);
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                advance!(1);
            }
            continue;
        }
        if src[i..].starts_with("/*") {
            let start = Pos { line, col };
            advance!(2);
            loop {
                if i >= bytes.len() {
                    return Err(Diagnostic::error(
                        "E_SYNTAX",
                        start,
                        "unterminated block comment",
                    ));
                }
                if src[i..].starts_with("*/") {
                    advance!(2);
                    break;
                }
                advance!(1);
            }
            continue;
        }
        let pos = Pos { line, col };
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                advance!(1);
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                advance!(1);
            }
            let n = src[start..i]
                .parse::<i64>()
                .map_err(|_| Diagnostic::error("E_SYNTAX", pos, "integer literal out of range"))?;
            out.push(Token {
                tok: Tok::Int(n),
                pos,
            });
            continue;
        }
        if c == b'@' {
            advance!(1);
            let start = i;
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.')
            {
                advance!(1);
            }
            if start == i {
                return Err(Diagnostic::error("E_SYNTAX", pos, "empty label after `@`"));
            }
            out.push(Token {
                tok: Tok::Label(src[start..i].to_string()),
                pos,
            });
            continue;
        }
        match OPS.iter().find(|op| src[i..].starts_with(**op)) {
            Some(op) => {
                advance!(op.len());
                out.push(Token {
                    tok: Tok::Op(op),
                    pos,
                });
            }
            None => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(Diagnostic::error(
                    "E_SYNTAX",
                    pos,
                    format!("unexpected character `{ch}`"),
                ));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}
