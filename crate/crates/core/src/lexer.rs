//! Tokenizer shared by both dialects. Quoting rules come from the profile.

use crate::ast::Span;
use crate::dialect::{DialectProfile, IdentifierQuote};
use crate::parser::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Bare word: keyword or identifier.
    Word(String),
    /// Quoted identifier, quotes removed.
    QuotedIdent(String),
    Str(String),
    Number(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => w.clone(),
            Tok::QuotedIdent(w) => format!("quoted identifier {w}"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Number(n) => n.clone(),
            Tok::Sym(s) => (*s).to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const SYMBOLS: [&str; 17] = [
    "<>", "!=", "<=", ">=", "||", "(", ")", ",", ".", "+", "-", "*", "/", "=", "<", ">", ";",
];

pub fn tokenize(text: &str, dialect: &DialectProfile) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let err = |start: usize, end: usize, line: usize, msg: &str, expected: &[&str]| ParseError {
        span: Span::new(start, end, line),
        found: text.get(start..end).unwrap_or("").to_string(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
        message: msg.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if text[i..].starts_with("--") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if text[i..].starts_with("/*") {
            let start = i;
            let start_line = line;
            i += 2;
            loop {
                if i >= bytes.len() {
                    return Err(err(
                        start,
                        bytes.len(),
                        start_line,
                        "unterminated comment",
                        &["*/"],
                    ));
                }
                if text[i..].starts_with("*/") {
                    i += 2;
                    break;
                }
                if bytes[i] == b'\n' {
                    line += 1;
                }
                i += 1;
            }
            continue;
        }
        let start = i;
        let start_line = line;
        let quote_close = match (c, dialect.identifier_quote) {
            (b'[', IdentifierQuote::Brackets) => Some((b']', true)),
            (b'`', IdentifierQuote::Backticks) => Some((b'`', true)),
            (b'"', _) => Some((b'"', false)),
            (b'\'', _) if dialect.accepts_single_quoted_strings() => Some((b'\'', false)),
            _ => None,
        };
        if let Some((close, is_ident)) = quote_close {
            let mut value = String::new();
            i += 1;
            loop {
                if i >= bytes.len() {
                    return Err(err(
                        start,
                        bytes.len(),
                        start_line,
                        "unterminated quoted text",
                        &[],
                    ));
                }
                if bytes[i] == close {
                    if i + 1 < bytes.len() && bytes[i + 1] == close {
                        value.push(close as char);
                        i += 2;
                        continue;
                    }
                    i += 1;
                    break;
                }
                let ch = text[i..].chars().next().unwrap();
                if ch == '\n' {
                    line += 1;
                }
                value.push(ch);
                i += ch.len_utf8();
            }
            let tok = if is_ident {
                if value.is_empty() {
                    return Err(err(start, i, start_line, "empty quoted identifier", &[]));
                }
                Tok::QuotedIdent(value)
            } else {
                Tok::Str(value)
            };
            out.push(Token {
                tok,
                span: Span::new(start, i, start_line),
            });
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push(Token {
                tok: Tok::Number(text[start..i].to_string()),
                span: Span::new(start, i, start_line),
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' || c == b'@' {
            i += 1;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Word(text[start..i].to_string()),
                span: Span::new(start, i, start_line),
            });
            continue;
        }
        if let Some(sym) = SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            i += sym.len();
            out.push(Token {
                tok: Tok::Sym(sym),
                span: Span::new(start, i, start_line),
            });
            continue;
        }
        let ch_len = text[i..].chars().next().map_or(1, char::len_utf8);
        return Err(err(
            start,
            start + ch_len,
            start_line,
            "unexpected character",
            &[],
        ));
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(text.len(), text.len(), line),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str, d: &DialectProfile) -> Vec<Tok> {
        tokenize(text, d)
            .unwrap()
            .into_iter()
            .map(|t| t.tok)
            .collect()
    }

    #[test]
    fn brackets_quote_identifiers_only_in_src() {
        let src = DialectProfile::src();
        assert_eq!(
            toks("[my col] + \"x\"", src),
            vec![
                Tok::QuotedIdent("my col".into()),
                Tok::Sym("+"),
                Tok::Str("x".into()),
                Tok::Eof
            ]
        );
        assert!(tokenize("[x]", DialectProfile::tgt()).is_err());
        assert_eq!(
            toks("`a`", DialectProfile::tgt())[0],
            Tok::QuotedIdent("a".into())
        );
    }

    #[test]
    fn comments_are_trivia_and_lines_are_counted() {
        let t = tokenize("-- hi\nSELECT /* x\n */ 1", DialectProfile::src()).unwrap();
        assert_eq!(t[0].tok, Tok::Word("SELECT".into()));
        assert_eq!(t[0].span.line, 2);
        assert_eq!(t[1].tok, Tok::Number("1".into()));
        assert_eq!(t[1].span.line, 3);
    }

    #[test]
    fn doubled_quotes_escape() {
        assert_eq!(
            toks("'it''s'", DialectProfile::src())[0],
            Tok::Str("it's".into())
        );
        assert_eq!(
            toks("12.50", DialectProfile::src())[0],
            Tok::Number("12.50".into())
        );
    }

    #[test]
    fn unterminated_string_reports_span() {
        let e = tokenize("SELECT \"abc", DialectProfile::src()).unwrap_err();
        assert_eq!(e.span.byte_start, 7);
    }
}
