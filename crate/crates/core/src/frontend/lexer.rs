use super::ast::Span;
use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Decimal digits, possibly dotted (`0.4.22` inside pragmas).
    Number(String),
    /// `0x...`; 40 hex digits denote an address literal.
    HexNumber(String),
    Str(String),
    Symbol(&'static str),
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Number(s) => format!("number `{s}`"),
            TokenKind::HexNumber(s) => format!("number `0x{s}`"),
            TokenKind::Str(_) => "string literal".to_string(),
            TokenKind::Symbol(s) => format!("`{s}`"),
            TokenKind::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

// Longest first so that `>=` wins over `>`.
const SYMBOLS: &[&str] = &[
    "=>", "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=", "++", "--", "{", "}", "(",
    ")", "[", "]", ";", ",", ".", "=", "<", ">", "+", "-", "*", "/", "%", "!", "^", "~", "?", ":",
    "&", "|",
];

pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let start = Span::new(line, col);
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(FrontendError::Parse {
                        line: start.line,
                        column: start.column,
                        expected: "`*/`".into(),
                        found: "end of input inside block comment".into(),
                    });
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }

        let span = Span::new(line, col);
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let mut s = String::new();
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$')
            {
                s.push(chars[i]);
                bump!();
            }
            tokens.push(Token {
                kind: TokenKind::Ident(s),
                span,
            });
            continue;
        }
        if c.is_ascii_digit() {
            if c == '0' && matches!(chars.get(i + 1), Some('x') | Some('X')) {
                bump!();
                bump!();
                let mut s = String::new();
                while i < chars.len() && chars[i].is_ascii_hexdigit() {
                    s.push(chars[i]);
                    bump!();
                }
                if s.is_empty() {
                    return Err(FrontendError::Parse {
                        line: span.line,
                        column: span.column,
                        expected: "hex digits".into(),
                        found: "`0x`".into(),
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::HexNumber(s),
                    span,
                });
                continue;
            }
            let mut s = String::new();
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || (chars[i] == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())))
            {
                s.push(chars[i]);
                bump!();
            }
            tokens.push(Token {
                kind: TokenKind::Number(s),
                span,
            });
            continue;
        }
        if c == '"' || c == '\'' {
            let quote = c;
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(FrontendError::Parse {
                            line: span.line,
                            column: span.column,
                            expected: "closing quote".into(),
                            found: "end of line inside string literal".into(),
                        })
                    }
                    Some(&ch) if ch == quote => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        let escaped = match chars.get(i) {
                            Some('n') => '\n',
                            Some('t') => '\t',
                            Some(&other) => other,
                            None => continue,
                        };
                        s.push(escaped);
                        bump!();
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            tokens.push(Token {
                kind: TokenKind::Str(s),
                span,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|sym| rest.starts_with(**sym)) {
            Some(sym) => {
                for _ in 0..sym.len() {
                    bump!();
                }
                tokens.push(Token {
                    kind: TokenKind::Symbol(sym),
                    span,
                });
            }
            None => {
                return Err(FrontendError::Parse {
                    line: span.line,
                    column: span.column,
                    expected: "a token".into(),
                    found: format!("character `{c}`"),
                })
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        span: Span::new(line, col),
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn lexes_pragma_versions_as_single_numbers() {
        assert_eq!(
            kinds(">=0.4.22 <0.6.0;"),
            vec![
                TokenKind::Symbol(">="),
                TokenKind::Number("0.4.22".into()),
                TokenKind::Symbol("<"),
                TokenKind::Number("0.6.0".into()),
                TokenKind::Symbol(";"),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn skips_comments_and_tracks_positions() {
        let toks = tokenize("// c\n/* a\n b */ x").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Ident("x".into()));
        assert_eq!((toks[0].span.line, toks[0].span.column), (3, 7));
    }

    #[test]
    fn member_dot_after_number_is_separate() {
        assert_eq!(
            kinds("a.b(1)"),
            vec![
                TokenKind::Ident("a".into()),
                TokenKind::Symbol("."),
                TokenKind::Ident("b".into()),
                TokenKind::Symbol("("),
                TokenKind::Number("1".into()),
                TokenKind::Symbol(")"),
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn unterminated_string_is_positioned_error() {
        match tokenize("x = \"abc") {
            Err(FrontendError::Parse { line, column, .. }) => assert_eq!((line, column), (1, 5)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn strings_and_hex() {
        assert_eq!(
            kinds("'a\\'b' 0xFF"),
            vec![
                TokenKind::Str("a'b".into()),
                TokenKind::HexNumber("FF".into()),
                TokenKind::Eof
            ]
        );
    }
}
