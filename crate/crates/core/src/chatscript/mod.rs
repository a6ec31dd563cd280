//! ChatScript: the small command language model replies must be written in.
//!
//! `extract_script` → [`parse`] → [`validate`] → [`evaluate`] turns a raw
//! reply into [`Command`](crate::command::Command)s. [`pretty_print`] renders
//! the canonical form.

mod ast;
mod catalog;
mod eval;
mod extract;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::{BinOp, Call, Component, Expr, ExprKind, Script, Span, Stmt, StmtKind};
pub use catalog::{Catalog, FunctionSpec, Param, ParamType, STANDARD_FUNCTIONS};
pub use eval::{evaluate, EvalError};
pub use extract::extract_script;
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse, ParseError, SyntaxError, MAX_EXPR_DEPTH};
pub use printer::{pretty_print, print_call, print_expr, print_stmt};
pub use validate::{validate, Finding, FindingCode, Severity, ValidationReport};
