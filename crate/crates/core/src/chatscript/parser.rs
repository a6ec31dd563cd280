//! Recursive-descent parser.
//!
//! ```text
//! script  := { stmt (NEWLINE | ';') } ;
//! stmt    := 'let' IDENT '=' expr | call ;
//! call    := IDENT '(' [ expr { ',' expr } ] ')' ;
//! expr    := term { ('+'|'-') term } ;
//! term    := factor { ('*'|'/') factor } ;
//! factor  := NUMBER | TEXT | '-' factor | IDENT ['.' ('x'|'y'|'z')] | call
//!          | '(' expr ',' expr [',' expr] ')' | '(' expr ')' ;
//! ```

use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Call, Component, Expr, ExprKind, Script, Span, Stmt, StmtKind};
use super::lexer::{tokenize, LexError, Token, TokenKind};

/// Deepest expression tree the parser will build.
pub const MAX_EXPR_DEPTH: usize = 96;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: expected {}, found {}",
            self.span,
            self.expected.join(" or "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{0}")]
    Lex(LexError),
    #[error("{0}")]
    Parse(ParseError),
}

impl SyntaxError {
    pub fn span(&self) -> Span {
        match self {
            SyntaxError::Lex(e) => e.span,
            SyntaxError::Parse(e) => e.span,
        }
    }
}

impl From<LexError> for SyntaxError {
    fn from(e: LexError) -> Self {
        SyntaxError::Lex(e)
    }
}

type PResult<T> = Result<T, SyntaxError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    nesting: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &TokenKind {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn advance(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
        }
        tok
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let tok = self.peek();
        Err(SyntaxError::Parse(ParseError {
            span: tok.span,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.kind.describe(),
        }))
    }

    fn too_deep<T>(&self) -> PResult<T> {
        self.error(&["a less deeply nested expression"])
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<Token> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            self.error(&[what])
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                let span = self.advance().span;
                Ok((name, span))
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn script(&mut self) -> PResult<Vec<Stmt>> {
        let mut stmts = Vec::new();
        loop {
            while matches!(self.peek().kind, TokenKind::Newline | TokenKind::Semicolon) {
                self.advance();
            }
            if self.peek().kind == TokenKind::Eof {
                return Ok(stmts);
            }
            stmts.push(self.stmt()?);
            match self.peek().kind {
                TokenKind::Newline | TokenKind::Semicolon | TokenKind::Eof => {}
                _ => return self.error(&["end of line", "`;`"]),
            }
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.peek().span;
        match self.peek().kind {
            TokenKind::Let => {
                self.advance();
                let (name, _) = self.ident()?;
                self.expect(TokenKind::Assign, "`=`")?;
                let (value, _) = self.expr()?;
                Ok(Stmt {
                    kind: StmtKind::Assign { name, value },
                    span,
                })
            }
            TokenKind::Ident(_) if *self.peek_at(1) == TokenKind::LParen => {
                let (call, _) = self.call()?;
                Ok(Stmt {
                    kind: StmtKind::Call(call),
                    span,
                })
            }
            TokenKind::Ident(_) => {
                self.advance();
                self.error(&["`(`"])
            }
            _ => self.error(&["`let`", "function call"]),
        }
    }

    fn call(&mut self) -> PResult<(Call, usize)> {
        let (name, span) = self.ident()?;
        self.expect(TokenKind::LParen, "`(`")?;
        let mut args = Vec::new();
        let mut depth = 0;
        if self.peek().kind != TokenKind::RParen {
            loop {
                let (arg, d) = self.nested(Self::expr)?;
                depth = depth.max(d);
                args.push(arg);
                if self.peek().kind == TokenKind::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)` or `,`")?;
        Ok((Call { name, args, span }, depth + 1))
    }

    /// Runs `f` one nesting level deeper, refusing to recurse past the limit.
    fn nested(&mut self, f: fn(&mut Self) -> PResult<(Expr, usize)>) -> PResult<(Expr, usize)> {
        if self.nesting >= MAX_EXPR_DEPTH {
            return self.too_deep();
        }
        self.nesting += 1;
        let out = f(self);
        self.nesting -= 1;
        out
    }

    fn binary_chain(
        &mut self,
        operand: fn(&mut Self) -> PResult<(Expr, usize)>,
        op_for: fn(&TokenKind) -> Option<BinOp>,
    ) -> PResult<(Expr, usize)> {
        let (mut lhs, mut depth) = operand(self)?;
        while let Some(op) = op_for(&self.peek().kind) {
            let span = self.advance().span;
            let (rhs, rd) = operand(self)?;
            depth = depth.max(rd) + 1;
            if depth > MAX_EXPR_DEPTH {
                return self.too_deep();
            }
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok((lhs, depth))
    }

    fn expr(&mut self) -> PResult<(Expr, usize)> {
        self.binary_chain(Self::term, |k| match k {
            TokenKind::Plus => Some(BinOp::Add),
            TokenKind::Minus => Some(BinOp::Sub),
            _ => None,
        })
    }

    fn term(&mut self) -> PResult<(Expr, usize)> {
        self.binary_chain(Self::factor, |k| match k {
            TokenKind::Star => Some(BinOp::Mul),
            TokenKind::Slash => Some(BinOp::Div),
            _ => None,
        })
    }

    fn factor(&mut self) -> PResult<(Expr, usize)> {
        let tok = self.peek().clone();
        let span = tok.span;
        match tok.kind {
            TokenKind::Number(v) => {
                self.advance();
                Ok((Expr::new(ExprKind::Number(v), span), 1))
            }
            TokenKind::Text(s) => {
                self.advance();
                Ok((Expr::new(ExprKind::Text(s), span), 1))
            }
            TokenKind::Minus => {
                self.advance();
                let (inner, d) = self.nested(Self::factor)?;
                Ok((Expr::new(ExprKind::Neg(Box::new(inner)), span), d + 1))
            }
            TokenKind::Ident(name) => {
                if *self.peek_at(1) == TokenKind::LParen {
                    let (call, d) = self.call()?;
                    return Ok((Expr::new(ExprKind::Call(call), span), d));
                }
                self.advance();
                if self.peek().kind != TokenKind::Dot {
                    return Ok((Expr::new(ExprKind::Var(name), span), 1));
                }
                self.advance();
                let component = match &self.peek().kind {
                    TokenKind::Ident(c) if c == "x" => Component::X,
                    TokenKind::Ident(c) if c == "y" => Component::Y,
                    TokenKind::Ident(c) if c == "z" => Component::Z,
                    _ => return self.error(&["`x`", "`y`", "`z`"]),
                };
                self.advance();
                let base = Expr::new(ExprKind::Var(name), span);
                Ok((
                    Expr::new(ExprKind::Field(Box::new(base), component), span),
                    2,
                ))
            }
            TokenKind::LParen => {
                self.advance();
                let (first, mut depth) = self.nested(Self::expr)?;
                if self.peek().kind != TokenKind::Comma {
                    self.expect(TokenKind::RParen, "`)` or `,`")?;
                    return Ok((first, depth));
                }
                let mut items = vec![first];
                while self.peek().kind == TokenKind::Comma && items.len() < 3 {
                    self.advance();
                    let (item, d) = self.nested(Self::expr)?;
                    depth = depth.max(d);
                    items.push(item);
                }
                let closing = if items.len() < 3 { "`)` or `,`" } else { "`)`" };
                self.expect(TokenKind::RParen, closing)?;
                Ok((Expr::new(ExprKind::Tuple(items), span), depth + 1))
            }
            _ => self.error(&["expression"]),
        }
    }
}

/// Parses ChatScript source. Statements are separated by newlines or `;`.
pub fn parse(source: &str) -> Result<Script, SyntaxError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        nesting: 0,
    };
    let stmts = parser.script()?;
    Ok(Script::new(stmts, source))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(v: f64) -> Expr {
        Expr::new(ExprKind::Number(v), Span::default())
    }

    fn var(name: &str) -> Expr {
        Expr::new(ExprKind::Var(name.into()), Span::default())
    }

    fn field(name: &str, c: Component) -> Expr {
        Expr::new(ExprKind::Field(Box::new(var(name)), c), Span::default())
    }

    fn tuple(items: Vec<Expr>) -> Expr {
        Expr::new(ExprKind::Tuple(items), Span::default())
    }

    fn call(name: &str, args: Vec<Expr>) -> Call {
        Call {
            name: name.into(),
            args,
            span: Span::default(),
        }
    }

    fn stmt(kind: StmtKind) -> Stmt {
        Stmt {
            kind,
            span: Span::default(),
        }
    }

    #[test]
    fn single_call_with_tuple() {
        let s = parse("set_bot_position((15, 25, 0))").unwrap();
        let expected = vec![stmt(StmtKind::Call(call(
            "set_bot_position",
            vec![tuple(vec![num(15.0), num(25.0), num(0.0)])],
        )))];
        assert_eq!(s.stmts, expected);
    }

    #[test]
    fn empty_source_is_an_empty_script() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("\n ; # nothing\n").unwrap().is_empty());
    }

    #[test]
    fn assignment_then_field_arithmetic() {
        let s = parse("let p = get_bot_position()\nset_bot_position((p.x + 1, p.y, p.z))").unwrap();
        let sum = Expr::new(
            ExprKind::Binary(
                BinOp::Add,
                Box::new(field("p", Component::X)),
                Box::new(num(1.0)),
            ),
            Span::default(),
        );
        let expected = vec![
            stmt(StmtKind::Assign {
                name: "p".into(),
                value: Expr::new(
                    ExprKind::Call(call("get_bot_position", vec![])),
                    Span::default(),
                ),
            }),
            stmt(StmtKind::Call(call(
                "set_bot_position",
                vec![tuple(vec![
                    sum,
                    field("p", Component::Y),
                    field("p", Component::Z),
                ])],
            ))),
        ];
        assert_eq!(s.stmts, expected);
        assert_eq!(s.stmts[1].span, Span::new(2, 1));
    }

    #[test]
    fn precedence_and_left_associativity() {
        let s = parse("let a = 1 - 2 - 3 * 4 / 5").unwrap();
        let StmtKind::Assign { value, .. } = &s.stmts[0].kind else {
            panic!()
        };
        // ((1 - 2) - ((3 * 4) / 5))
        let ExprKind::Binary(BinOp::Sub, lhs, rhs) = &value.kind else {
            panic!()
        };
        assert!(matches!(lhs.kind, ExprKind::Binary(BinOp::Sub, _, _)));
        let ExprKind::Binary(BinOp::Div, l2, _) = &rhs.kind else {
            panic!()
        };
        assert!(matches!(l2.kind, ExprKind::Binary(BinOp::Mul, _, _)));
    }

    #[test]
    fn negative_literals_and_pairs() {
        let s = parse("delete_objects_in_range((-7.5,-7.5),(7.5,7.5))").unwrap();
        let StmtKind::Call(c) = &s.stmts[0].kind else {
            panic!()
        };
        let ExprKind::Tuple(items) = &c.args[0].kind else {
            panic!()
        };
        assert_eq!(items.len(), 2);
        assert!(
            matches!(&items[0].kind, ExprKind::Neg(inner) if inner.kind == ExprKind::Number(7.5))
        );
    }

    #[test]
    fn semicolons_separate_statements() {
        assert_eq!(
            parse("set_yaw(1); set_yaw(2);set_roll(3)")
                .unwrap()
                .stmts
                .len(),
            3
        );
    }

    #[test]
    fn errors_are_located() {
        let err = parse("set_yaw(90)\nset_yaw(90 90)").unwrap_err();
        assert_eq!(err.span(), Span::new(2, 12));
        let SyntaxError::Parse(p) = err else { panic!() };
        assert!(p.expected.iter().any(|e| e.contains(')')));

        assert!(parse("set_yaw(1) set_yaw(2)").is_err());
        assert!(parse("(1, 2, 3, 4)").is_err());
        assert!(parse("let = 3").is_err());
        assert!(parse("print").is_err());
        assert!(parse("let a = p.w").is_err());
        assert!(parse("let a = (1, 2, 3, 4)").is_err());
        assert!(parse("let a = (1)").is_ok());
    }

    #[test]
    fn deep_nesting_is_refused_not_overflowed() {
        let src = format!("let a = {}1{}", "(".repeat(50_000), ")".repeat(50_000));
        assert!(parse(&src).is_err());
        let src = format!("let a = {}1", "-".repeat(50_000));
        assert!(parse(&src).is_err());
        let src = format!("let a = 1{}", " + 1".repeat(50_000));
        assert!(parse(&src).is_err());
        let src = format!("let a = {}1{}", "f(".repeat(50_000), ")".repeat(50_000));
        assert!(parse(&src).is_err());
        let ok = format!("let a = {}1{}", "(".repeat(40), ")".repeat(40));
        assert!(parse(&ok).is_ok());
    }
}
