//! Canonical rendering: one statement per line, single spaces around binary
//! operators, `, ` between arguments, parentheses only where precedence needs
//! them.

use std::fmt::Write;

use super::ast::{Call, Expr, ExprKind, Script, Stmt, StmtKind};

pub fn pretty_print(script: &Script) -> String {
    script
        .stmts
        .iter()
        .map(print_stmt)
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn print_stmt(stmt: &Stmt) -> String {
    let mut out = String::new();
    match &stmt.kind {
        StmtKind::Assign { name, value } => {
            let _ = write!(out, "let {name} = ");
            write_expr(&mut out, value);
        }
        StmtKind::Call(call) => write_call(&mut out, call),
    }
    out
}

pub fn print_call(call: &Call) -> String {
    let mut out = String::new();
    write_call(&mut out, call);
    out
}

pub fn print_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr);
    out
}

fn write_call(out: &mut String, call: &Call) {
    out.push_str(&call.name);
    out.push('(');
    write_list(out, &call.args);
    out.push(')');
}

fn write_list(out: &mut String, items: &[Expr]) {
    for (i, e) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, e);
    }
}

fn write_number(out: &mut String, v: f64) {
    if v.is_finite() {
        let _ = write!(out, "{v}");
    } else {
        // only reachable from overflowing literals such as `1e999`
        out.push_str("1e999");
    }
}

fn write_text(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, _, _) => op.precedence(),
        _ => 3,
    }
}

fn write_wrapped(out: &mut String, e: &Expr, wrap: bool) {
    if wrap {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Number(v) => write_number(out, *v),
        ExprKind::Text(s) => write_text(out, s),
        ExprKind::Tuple(items) => {
            out.push('(');
            write_list(out, items);
            out.push(')');
        }
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::Field(base, c) => {
            write_expr(out, base);
            out.push('.');
            out.push_str(c.name());
        }
        ExprKind::Neg(inner) => {
            out.push('-');
            write_wrapped(out, inner, precedence(inner) < 3);
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let p = op.precedence();
            write_wrapped(out, lhs, precedence(lhs) < p);
            let _ = write!(out, " {} ", op.symbol());
            write_wrapped(out, rhs, precedence(rhs) <= p);
        }
        ExprKind::Call(call) => write_call(out, call),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn roundtrip(src: &str) -> String {
        pretty_print(&parse(src).unwrap())
    }

    #[test]
    fn whitespace_is_normalized() {
        assert_eq!(roundtrip("set_yaw( 90 )"), "set_yaw(90)");
        assert_eq!(
            roundtrip("put_object( \"oyster\" ,(3,0 ,0),( 0,0,0) )"),
            "put_object(\"oyster\", (3, 0, 0), (0, 0, 0))"
        );
    }

    #[test]
    fn parentheses_only_where_needed() {
        assert_eq!(roundtrip("let a = (1 + 2) * 3"), "let a = (1 + 2) * 3");
        assert_eq!(roundtrip("let a = 1 + (2 * 3)"), "let a = 1 + 2 * 3");
        assert_eq!(roundtrip("let a = 1 - (2 - 3)"), "let a = 1 - (2 - 3)");
        assert_eq!(roundtrip("let a = (1 - 2) - 3"), "let a = 1 - 2 - 3");
        assert_eq!(roundtrip("let a = -(1 + 2)"), "let a = -(1 + 2)");
        assert_eq!(roundtrip("let a = 1 - -2"), "let a = 1 - -2");
    }

    #[test]
    fn deletion_script_reaches_fixpoint() {
        let src = "# clear the square\ndelete_objects_in_range( (-7.5,-7.5) ,(7.5, 7.5))";
        let once = roundtrip(src);
        assert_eq!(once, "delete_objects_in_range((-7.5, -7.5), (7.5, 7.5))");
        assert_eq!(roundtrip(&once), once);
    }

    #[test]
    fn text_and_overflow_literals_round_trip() {
        let s = parse(r#"get_position("a\"b\\c")"#).unwrap();
        assert_eq!(parse(&pretty_print(&s)).unwrap(), s);
        let s = parse("set_yaw(1e999)").unwrap();
        assert_eq!(parse(&pretty_print(&s)).unwrap(), s);
    }
}
