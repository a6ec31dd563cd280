use std::fmt;

use super::ast::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Text(String),
    Let,
    LParen,
    RParen,
    Comma,
    Assign,
    Dot,
    Plus,
    Minus,
    Star,
    Slash,
    Semicolon,
    Newline,
    Eof,
}

impl TokenKind {
    /// Human-readable name used in "expected ..." messages.
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Number(v) => format!("number `{v}`"),
            TokenKind::Text(_) => "text literal".into(),
            TokenKind::Let => "`let`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::Assign => "`=`".into(),
            TokenKind::Dot => "`.`".into(),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Semicolon => "`;`".into(),
            TokenKind::Newline => "end of line".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

impl fmt::Display for LexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

impl std::error::Error for LexError {}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: u32,
    column: u32,
    paren_depth: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }

    fn error(&self, span: Span, message: impl Into<String>) -> LexError {
        LexError {
            span,
            message: message.into(),
        }
    }

    fn number(&mut self, start: usize, span: Span) -> Result<Token, LexError> {
        let digits = |lx: &mut Self| {
            let mut n = 0;
            while lx.peek().is_some_and(|c| c.is_ascii_digit()) {
                lx.bump();
                n += 1;
            }
            n
        };
        digits(self);
        // A fractional part needs at least one digit after the dot, so that
        // `1.x` style inputs are not swallowed.
        let mut look = self.chars.clone();
        if look.next().is_some_and(|(_, c)| c == '.')
            && look.next().is_some_and(|(_, c)| c.is_ascii_digit())
        {
            self.bump();
            digits(self);
        }
        let mut look = self.chars.clone();
        if look.next().is_some_and(|(_, c)| c == 'e' || c == 'E') {
            let mut next = look.next();
            if next.is_some_and(|(_, c)| c == '+' || c == '-') {
                next = look.next();
            }
            if next.is_some_and(|(_, c)| c.is_ascii_digit()) {
                self.bump();
                if self.peek().is_some_and(|c| c == '+' || c == '-') {
                    self.bump();
                }
                digits(self);
            }
        }
        let end = self.offset();
        let lexeme = &self.src[start..end];
        let value: f64 = lexeme
            .parse()
            .map_err(|_| self.error(span, format!("invalid number `{lexeme}`")))?;
        Ok(Token {
            kind: TokenKind::Number(value),
            lexeme: lexeme.to_string(),
            span,
        })
    }

    fn text(&mut self, start: usize, span: Span) -> Result<Token, LexError> {
        self.bump(); // opening quote
        let mut value = String::new();
        loop {
            let here = Span::new(self.line, self.column);
            match self.bump() {
                None | Some('\n') => return Err(self.error(span, "unterminated text literal")),
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('"') => value.push('"'),
                    Some('\\') => value.push('\\'),
                    Some('n') => value.push('\n'),
                    Some('t') => value.push('\t'),
                    Some(c) => return Err(self.error(here, format!("unknown escape `\\{c}`"))),
                    None => return Err(self.error(span, "unterminated text literal")),
                },
                Some(c) => value.push(c),
            }
        }
        let end = self.offset();
        Ok(Token {
            kind: TokenKind::Text(value),
            lexeme: self.src[start..end].to_string(),
            span,
        })
    }
}

/// Splits source text into tokens. Newlines inside parentheses are treated as
/// whitespace so that long calls may wrap.
pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut lx = Lexer {
        chars: src.char_indices().peekable(),
        src,
        line: 1,
        column: 1,
        paren_depth: 0,
    };
    let mut tokens = Vec::new();
    loop {
        let span = Span::new(lx.line, lx.column);
        let start = lx.offset();
        let Some(c) = lx.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                lexeme: String::new(),
                span,
            });
            return Ok(tokens);
        };
        let simple = match c {
            ' ' | '\t' | '\r' => {
                lx.bump();
                continue;
            }
            '#' => {
                while lx.peek().is_some_and(|c| c != '\n') {
                    lx.bump();
                }
                continue;
            }
            '\n' => {
                lx.bump();
                if lx.paren_depth > 0 {
                    continue;
                }
                Some(TokenKind::Newline)
            }
            '(' => {
                lx.paren_depth += 1;
                Some(TokenKind::LParen)
            }
            ')' => {
                lx.paren_depth = lx.paren_depth.saturating_sub(1);
                Some(TokenKind::RParen)
            }
            ',' => Some(TokenKind::Comma),
            '=' => Some(TokenKind::Assign),
            '.' => Some(TokenKind::Dot),
            '+' => Some(TokenKind::Plus),
            '-' => Some(TokenKind::Minus),
            '*' => Some(TokenKind::Star),
            '/' => Some(TokenKind::Slash),
            ';' => Some(TokenKind::Semicolon),
            _ => None,
        };
        if let Some(kind) = simple {
            if kind != TokenKind::Newline {
                lx.bump();
            }
            tokens.push(Token {
                lexeme: src[start..lx.offset()].to_string(),
                kind,
                span,
            });
            continue;
        }
        let token = if c.is_ascii_digit() {
            lx.number(start, span)?
        } else if c == '"' {
            lx.text(start, span)?
        } else if c.is_ascii_alphabetic() || c == '_' {
            while lx
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                lx.bump();
            }
            let word = &src[start..lx.offset()];
            let kind = if word == "let" {
                TokenKind::Let
            } else {
                TokenKind::Ident(word.to_string())
            };
            Token {
                kind,
                lexeme: word.to_string(),
                span,
            }
        } else {
            return Err(lx.error(span, format!("unexpected character {c:?}")));
        };
        tokens.push(token);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn numbers_and_field_access() {
        assert_eq!(
            kinds("p.x 1.5 2e3 7."),
            vec![
                TokenKind::Ident("p".into()),
                TokenKind::Dot,
                TokenKind::Ident("x".into()),
                TokenKind::Number(1.5),
                TokenKind::Number(2000.0),
                TokenKind::Number(7.0),
                TokenKind::Dot,
                TokenKind::Eof,
            ]
        );
    }

    #[test]
    fn newlines_inside_parens_are_skipped() {
        let k = kinds("f(1,\n 2)\ng()");
        assert_eq!(k.iter().filter(|t| **t == TokenKind::Newline).count(), 1);
    }

    #[test]
    fn comments_run_to_end_of_line() {
        assert_eq!(
            kinds("# hello\nlet # trailing"),
            vec![TokenKind::Newline, TokenKind::Let, TokenKind::Eof]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("a\n  b").unwrap();
        assert_eq!(toks[0].span, Span::new(1, 1));
        assert_eq!(toks[2].span, Span::new(2, 3));
    }

    #[test]
    fn text_escapes_and_errors() {
        assert_eq!(kinds(r#""a\"b""#)[0], TokenKind::Text("a\"b".into()));
        let err = tokenize("\"open").unwrap_err();
        assert_eq!(err.span, Span::new(1, 1));
        assert!(tokenize(r#""\q""#).is_err());
    }

    #[test]
    fn unknown_characters_are_located_errors() {
        let err = tokenize("set_yaw(90)\nimport os; os.system('x')").unwrap_err();
        assert_eq!(err.span, Span::new(2, 22));
        let err = tokenize("x = ü").unwrap_err();
        assert_eq!(err.span, Span::new(1, 5));
    }
}
