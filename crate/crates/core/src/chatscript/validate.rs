//! Static checks run before a script is allowed anywhere near the scene.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{BinOp, Call, Expr, ExprKind, Script, Span, StmtKind};
use super::catalog::{Catalog, ParamType};
use crate::scene::ObjectKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
}

/// Finding codes. The first six come from [`validate`]; the rest are raised
/// by later pipeline stages and reported in the same shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FindingCode {
    UnknownFunction,
    ArityMismatch,
    TypeMismatch,
    UnboundVariable,
    NonFiniteLiteral,
    UnknownKind,
    LexError,
    ParseError,
    EmptyScript,
    DivisionByZero,
    UnknownObject,
    NonFiniteValue,
    InvalidArgument,
}

impl FindingCode {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingCode::UnknownFunction => "UnknownFunction",
            FindingCode::ArityMismatch => "ArityMismatch",
            FindingCode::TypeMismatch => "TypeMismatch",
            FindingCode::UnboundVariable => "UnboundVariable",
            FindingCode::NonFiniteLiteral => "NonFiniteLiteral",
            FindingCode::UnknownKind => "UnknownKind",
            FindingCode::LexError => "LexError",
            FindingCode::ParseError => "ParseError",
            FindingCode::EmptyScript => "EmptyScript",
            FindingCode::DivisionByZero => "DivisionByZero",
            FindingCode::UnknownObject => "UnknownObject",
            FindingCode::NonFiniteValue => "NonFiniteValue",
            FindingCode::InvalidArgument => "InvalidArgument",
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: FindingCode,
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl Finding {
    pub fn error(code: FindingCode, span: Span, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            code,
            line: span.line,
            column: span.column,
            message: message.into(),
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{} {} {}",
            self.line, self.column, self.code, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn codes(&self) -> Vec<FindingCode> {
        self.findings.iter().map(|f| f.code).collect()
    }
}

/// Static value type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Number,
    Text,
    Vec3,
    Pair,
    /// Already reported; suppresses follow-on findings.
    Unknown,
}

impl Ty {
    fn describe(self) -> &'static str {
        match self {
            Ty::Number => "a number",
            Ty::Text => "text",
            Ty::Vec3 => "an (x, y, z) tuple",
            Ty::Pair => "an (x, y) tuple",
            Ty::Unknown => "an unknown value",
        }
    }
}

struct Checker<'a> {
    catalog: &'a Catalog,
    env: HashMap<String, Ty>,
    findings: Vec<Finding>,
}

impl Checker<'_> {
    fn report(&mut self, code: FindingCode, span: Span, message: String) {
        self.findings.push(Finding::error(code, span, message));
    }

    fn mismatch(&mut self, span: Span, message: String) -> Ty {
        self.report(FindingCode::TypeMismatch, span, message);
        Ty::Unknown
    }

    fn infer(&mut self, e: &Expr) -> Ty {
        match &e.kind {
            ExprKind::Number(v) => {
                if !v.is_finite() {
                    self.report(
                        FindingCode::NonFiniteLiteral,
                        e.span,
                        "number literal is too large".into(),
                    );
                }
                Ty::Number
            }
            ExprKind::Text(_) => Ty::Text,
            ExprKind::Tuple(items) => {
                let mut ok = true;
                for item in items {
                    match self.infer(item) {
                        Ty::Number => {}
                        Ty::Unknown => ok = false,
                        other => {
                            self.mismatch(
                                item.span,
                                format!(
                                    "tuple components must be numbers, found {}",
                                    other.describe()
                                ),
                            );
                            ok = false;
                        }
                    }
                }
                match (ok, items.len()) {
                    (false, _) => Ty::Unknown,
                    (true, 2) => Ty::Pair,
                    _ => Ty::Vec3,
                }
            }
            ExprKind::Var(name) => match self.env.get(name) {
                Some(&ty) => ty,
                None => {
                    self.report(
                        FindingCode::UnboundVariable,
                        e.span,
                        format!("`{name}` is used before any `let {name} = ...`"),
                    );
                    Ty::Unknown
                }
            },
            ExprKind::Field(base, c) => match self.infer(base) {
                Ty::Vec3 | Ty::Unknown => Ty::Number,
                other => self.mismatch(
                    e.span,
                    format!(
                        ".{} needs an (x, y, z) value, found {}",
                        c.name(),
                        other.describe()
                    ),
                ),
            },
            ExprKind::Neg(inner) => match self.infer(inner) {
                ty @ (Ty::Number | Ty::Vec3 | Ty::Unknown) => ty,
                other => self.mismatch(e.span, format!("cannot negate {}", other.describe())),
            },
            ExprKind::Binary(op, lhs, rhs) => {
                let (l, r) = (self.infer(lhs), self.infer(rhs));
                binary_type(*op, l, r).unwrap_or_else(|| {
                    self.mismatch(
                        e.span,
                        format!(
                            "cannot apply `{}` to {} and {}",
                            op.symbol(),
                            l.describe(),
                            r.describe()
                        ),
                    )
                })
            }
            ExprKind::Call(call) => self.call(call, true),
        }
    }

    fn call(&mut self, call: &Call, as_value: bool) -> Ty {
        let Some(spec) = self.catalog.get(&call.name).copied() else {
            self.report(
                FindingCode::UnknownFunction,
                call.span,
                format!("`{}` is not an available function", call.name),
            );
            for arg in &call.args {
                self.infer(arg);
            }
            return Ty::Unknown;
        };
        if as_value && !spec.returns_vec3 {
            self.report(
                FindingCode::TypeMismatch,
                call.span,
                format!("`{}` does not return a value", call.name),
            );
        }
        if call.args.len() != spec.params.len() {
            self.report(
                FindingCode::ArityMismatch,
                call.span,
                format!(
                    "`{}` takes {} argument(s) but {} were given",
                    call.name,
                    spec.params.len(),
                    call.args.len()
                ),
            );
            for arg in &call.args {
                self.infer(arg);
            }
        } else {
            for (arg, param) in call.args.iter().zip(spec.params) {
                self.argument(&call.name, arg, param.ty);
            }
        }
        if spec.returns_vec3 {
            Ty::Vec3
        } else {
            Ty::Unknown
        }
    }

    fn argument(&mut self, function: &str, arg: &Expr, expected: ParamType) {
        let wrong = |this: &mut Self, found: &str| {
            this.mismatch(
                arg.span,
                format!(
                    "`{function}` expects {}, found {found}",
                    expected.describe()
                ),
            );
        };
        match expected {
            ParamType::Kind => match &arg.kind {
                ExprKind::Text(name) => self.kind_name(name, arg.span),
                ExprKind::Var(name) if !self.env.contains_key(name) => {
                    if name.parse::<ObjectKind>().is_err() {
                        // neither a variable nor a catalog word
                        self.infer(arg);
                    }
                }
                _ => {
                    let ty = self.infer(arg);
                    if ty != Ty::Unknown {
                        wrong(self, ty.describe());
                    }
                }
            },
            ParamType::ObjectRef => match &arg.kind {
                ExprKind::Text(_) => {}
                _ => {
                    let ty = self.infer(arg);
                    if ty != Ty::Unknown {
                        wrong(self, ty.describe());
                    }
                }
            },
            ParamType::Scalar | ParamType::Vec3 | ParamType::Color | ParamType::Corner => {
                let ty = self.infer(arg);
                let ok = match expected {
                    ParamType::Scalar => ty == Ty::Number,
                    ParamType::Corner => matches!(ty, Ty::Vec3 | Ty::Pair),
                    _ => ty == Ty::Vec3,
                };
                if !ok && ty != Ty::Unknown {
                    wrong(self, ty.describe());
                }
            }
        }
    }

    fn kind_name(&mut self, name: &str, span: Span) {
        if name.parse::<ObjectKind>().is_err() {
            let known: Vec<_> = ObjectKind::ALL.iter().map(|k| k.name()).collect();
            self.report(
                FindingCode::UnknownKind,
                span,
                format!(
                    "unknown object kind \"{name}\" (available: {})",
                    known.join(", ")
                ),
            );
        }
    }
}

fn binary_type(op: BinOp, l: Ty, r: Ty) -> Option<Ty> {
    use Ty::*;
    match (op, l, r) {
        (_, Unknown, Number | Vec3 | Unknown) | (_, Number | Vec3, Unknown) => Some(Unknown),
        (_, Number, Number) => Some(Number),
        (BinOp::Add | BinOp::Sub, Vec3, Vec3) => Some(Vec3),
        (BinOp::Mul, Vec3, Number) | (BinOp::Mul, Number, Vec3) | (BinOp::Div, Vec3, Number) => {
            Some(Vec3)
        }
        _ => None,
    }
}

/// Checks every call against `catalog` (name, arity, argument types) and
/// every variable against the assignments that precede it.
pub fn validate(script: &Script, catalog: &Catalog) -> ValidationReport {
    let mut checker = Checker {
        catalog,
        env: HashMap::new(),
        findings: Vec::new(),
    };
    for stmt in &script.stmts {
        match &stmt.kind {
            StmtKind::Assign { name, value } => {
                let ty = match checker.infer(value) {
                    Ty::Text => checker.mismatch(
                        value.span,
                        "text can only be passed directly to a function".into(),
                    ),
                    ty => ty,
                };
                checker.env.insert(name.clone(), ty);
            }
            StmtKind::Call(call) => {
                checker.call(call, false);
            }
        }
    }
    ValidationReport {
        findings: checker.findings,
    }
}
