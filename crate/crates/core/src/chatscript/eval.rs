//! Lowering of a validated script to [`Command`]s.

use std::collections::HashMap;
use std::fmt;

use super::ast::{BinOp, Call, Component, Expr, ExprKind, Script, Span, StmtKind};
use super::printer::print_call;
use super::validate::{Finding, FindingCode};
use crate::command::Command;
use crate::scene::{ObjectKind, Orientation, Scene, SceneError, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalError {
    pub code: FindingCode,
    pub span: Span,
    pub message: String,
}

impl EvalError {
    fn new(code: FindingCode, span: Span, message: impl Into<String>) -> Self {
        Self {
            code,
            span,
            message: message.into(),
        }
    }

    pub fn to_finding(&self) -> Finding {
        Finding::error(self.code, self.span, self.message.clone())
    }
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.span, self.code, self.message)
    }
}

impl std::error::Error for EvalError {}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Text(String),
    Vec3(Vec3),
    Pair(f64, f64),
}

impl Value {
    fn describe(&self) -> &'static str {
        match self {
            Value::Number(_) => "a number",
            Value::Text(_) => "text",
            Value::Vec3(_) => "an (x, y, z) tuple",
            Value::Pair(..) => "an (x, y) tuple",
        }
    }
}

struct Evaluator {
    /// The caller's scene with this script's earlier commands already applied,
    /// so getters observe them.
    shadow: Scene,
    env: HashMap<String, Value>,
    commands: Vec<Command>,
}

fn mismatch(span: Span, expected: &str, found: &Value) -> EvalError {
    EvalError::new(
        FindingCode::TypeMismatch,
        span,
        format!("expected {expected}, found {}", found.describe()),
    )
}

impl Evaluator {
    fn eval(&mut self, e: &Expr) -> Result<Value, EvalError> {
        Ok(match &e.kind {
            ExprKind::Number(v) => Value::Number(*v),
            ExprKind::Text(s) => Value::Text(s.clone()),
            ExprKind::Tuple(items) => {
                let mut xs = Vec::with_capacity(items.len());
                for item in items {
                    xs.push(self.number(item)?);
                }
                match xs[..] {
                    [x, y] => Value::Pair(x, y),
                    [x, y, z] => Value::Vec3(Vec3::new(x, y, z)),
                    _ => {
                        return Err(EvalError::new(
                            FindingCode::TypeMismatch,
                            e.span,
                            "tuples have two or three components",
                        ))
                    }
                }
            }
            ExprKind::Var(name) => self.env.get(name).cloned().ok_or_else(|| {
                EvalError::new(
                    FindingCode::UnboundVariable,
                    e.span,
                    format!("`{name}` is not bound"),
                )
            })?,
            ExprKind::Field(base, c) => {
                let v = self.vec3(base)?;
                Value::Number(match c {
                    Component::X => v.x,
                    Component::Y => v.y,
                    Component::Z => v.z,
                })
            }
            ExprKind::Neg(inner) => match self.eval(inner)? {
                Value::Number(v) => Value::Number(-v),
                Value::Vec3(v) => Value::Vec3(-v),
                other => return Err(mismatch(e.span, "a number or (x, y, z) tuple", &other)),
            },
            ExprKind::Binary(op, lhs, rhs) => {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                binary(*op, l, r, e.span)?
            }
            ExprKind::Call(call) => Value::Vec3(self.getter(call)?),
        })
    }

    fn number(&mut self, e: &Expr) -> Result<f64, EvalError> {
        match self.eval(e)? {
            Value::Number(v) => Ok(v),
            other => Err(mismatch(e.span, "a number", &other)),
        }
    }

    fn vec3(&mut self, e: &Expr) -> Result<Vec3, EvalError> {
        match self.eval(e)? {
            Value::Vec3(v) => Ok(v),
            other => Err(mismatch(e.span, "an (x, y, z) tuple", &other)),
        }
    }

    fn text(&mut self, e: &Expr) -> Result<String, EvalError> {
        match self.eval(e)? {
            Value::Text(s) => Ok(s),
            other => Err(mismatch(e.span, "quoted text", &other)),
        }
    }

    fn corner(&mut self, e: &Expr, z: f64) -> Result<Vec3, EvalError> {
        match self.eval(e)? {
            Value::Vec3(v) => Ok(v),
            Value::Pair(x, y) => Ok(Vec3::new(x, y, z)),
            other => Err(mismatch(e.span, "an (x, y, z) or (x, y) tuple", &other)),
        }
    }

    fn kind(&mut self, e: &Expr) -> Result<ObjectKind, EvalError> {
        let name = match &e.kind {
            ExprKind::Var(name) if !self.env.contains_key(name) => name.clone(),
            _ => self.text(e)?,
        };
        name.parse().map_err(|_| {
            EvalError::new(
                FindingCode::UnknownKind,
                e.span,
                format!("unknown object kind \"{name}\""),
            )
        })
    }

    fn arity(call: &Call, n: usize) -> Result<(), EvalError> {
        if call.args.len() == n {
            Ok(())
        } else {
            Err(EvalError::new(
                FindingCode::ArityMismatch,
                call.span,
                format!("`{}` takes {n} argument(s)", call.name),
            ))
        }
    }

    fn getter(&mut self, call: &Call) -> Result<Vec3, EvalError> {
        match call.name.as_str() {
            "get_bot_position" => {
                Self::arity(call, 0)?;
                Ok(self.shadow.get_bot_position())
            }
            "get_position" => {
                Self::arity(call, 1)?;
                let name = self.text(&call.args[0])?;
                self.shadow.get_position(&name).map_err(|err| {
                    EvalError::new(FindingCode::UnknownObject, call.span, err.to_string())
                })
            }
            _ => Err(EvalError::new(
                FindingCode::TypeMismatch,
                call.span,
                format!("`{}` does not return a value", call.name),
            )),
        }
    }

    fn lower(&mut self, call: &Call) -> Result<Command, EvalError> {
        let args = &call.args;
        let cmd = match call.name.as_str() {
            "set_bot_position" => {
                Self::arity(call, 1)?;
                Command::SetBotPosition {
                    position: self.vec3(&args[0])?,
                }
            }
            "set_yaw" | "set_pitch" | "set_roll" => {
                Self::arity(call, 1)?;
                let degrees = self.number(&args[0])?;
                match call.name.as_str() {
                    "set_yaw" => Command::SetYaw { degrees },
                    "set_pitch" => Command::SetPitch { degrees },
                    _ => Command::SetRoll { degrees },
                }
            }
            "put_object" => {
                Self::arity(call, 3)?;
                let kind = self.kind(&args[0])?;
                let position = self.vec3(&args[1])?;
                let o = self.vec3(&args[2])?;
                Command::PutObject {
                    kind,
                    position,
                    orientation: Orientation::new(o.x, o.y, o.z),
                }
            }
            "delete_objects_in_range" => {
                Self::arity(call, 2)?;
                // (x, y) corners span the whole water column
                Command::DeleteObjectsInRange {
                    lower: self.corner(&args[0], f64::MIN)?,
                    upper: self.corner(&args[1], f64::MAX)?,
                }
            }
            "put_bot_switch" => {
                Self::arity(call, 1)?;
                Command::PutBotSwitch {
                    position: self.vec3(&args[0])?,
                }
            }
            "set_water" => {
                Self::arity(call, 2)?;
                let c = self.vec3(&args[0])?;
                Command::SetWater {
                    color: c.to_array(),
                    turbidity: self.number(&args[1])?,
                }
            }
            "get_bot_position" | "get_position" => Command::LogValue {
                label: print_call(call),
                value: self.getter(call)?,
            },
            other => {
                return Err(EvalError::new(
                    FindingCode::UnknownFunction,
                    call.span,
                    format!("`{other}` is not an available function"),
                ))
            }
        };
        if !cmd.is_finite() {
            return Err(EvalError::new(
                FindingCode::NonFiniteValue,
                call.span,
                format!("`{}` received a value that is not finite", call.name),
            ));
        }
        cmd.apply(&mut self.shadow).map_err(|err| {
            let code = match err {
                SceneError::UnknownObject(_) => FindingCode::UnknownObject,
                SceneError::UnknownKind(_) => FindingCode::UnknownKind,
                _ => FindingCode::InvalidArgument,
            };
            EvalError::new(code, call.span, err.to_string())
        })?;
        Ok(cmd)
    }
}

fn binary(op: BinOp, l: Value, r: Value, span: Span) -> Result<Value, EvalError> {
    let div_zero = || EvalError::new(FindingCode::DivisionByZero, span, "division by zero");
    Ok(match (op, l, r) {
        (BinOp::Div, _, Value::Number(0.0)) => return Err(div_zero()),
        (op, Value::Number(a), Value::Number(b)) => Value::Number(match op {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
        }),
        (BinOp::Add, Value::Vec3(a), Value::Vec3(b)) => Value::Vec3(a + b),
        (BinOp::Sub, Value::Vec3(a), Value::Vec3(b)) => Value::Vec3(a - b),
        (BinOp::Mul, Value::Vec3(a), Value::Number(k))
        | (BinOp::Mul, Value::Number(k), Value::Vec3(a)) => Value::Vec3(a * k),
        (BinOp::Div, Value::Vec3(a), Value::Number(k)) => Value::Vec3(a * (1.0 / k)),
        (op, l, r) => {
            return Err(EvalError::new(
                FindingCode::TypeMismatch,
                span,
                format!(
                    "cannot apply `{}` to {} and {}",
                    op.symbol(),
                    l.describe(),
                    r.describe()
                ),
            ))
        }
    })
}

/// Evaluates statements top to bottom against a private copy of `scene`.
/// The caller's scene is never touched; every effect is in the returned
/// commands.
pub fn evaluate(script: &Script, scene: &Scene) -> Result<Vec<Command>, EvalError> {
    let mut ev = Evaluator {
        shadow: scene.clone(),
        env: HashMap::new(),
        commands: Vec::new(),
    };
    for stmt in &script.stmts {
        match &stmt.kind {
            StmtKind::Assign { name, value } => {
                let v = ev.eval(value)?;
                ev.env.insert(name.clone(), v);
            }
            StmtKind::Call(call) => {
                let cmd = ev.lower(call)?;
                ev.commands.push(cmd);
            }
        }
    }
    Ok(ev.commands)
}
