//! Canonical pretty-printing. `parse(&program.to_string())` reproduces the
//! same tree for any parsed program.

use std::fmt::{self, Write};

use super::ast::{Expr, Program, Stmt, UnOp};

const UNARY_PREC: u8 = 7;

fn expr_prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, _, _) => op.precedence(),
        Expr::Unary(..) => UNARY_PREC,
        // negative literals print with a leading `-`
        Expr::Int(n) if *n < 0 => UNARY_PREC,
        _ => u8::MAX,
    }
}

fn write_expr(f: &mut impl Write, e: &Expr, min_prec: u8) -> fmt::Result {
    let needs_parens = expr_prec(e) < min_prec;
    if needs_parens {
        f.write_char('(')?;
    }
    match e {
        Expr::Int(n) => write!(f, "{n}")?,
        Expr::Bool(b) => write!(f, "{b}")?,
        Expr::Var(v) => f.write_str(v)?,
        Expr::Unary(op, inner) => {
            f.write_str(op.symbol())?;
            // `- -x` must not print as `--x`
            let nested_neg = *op == UnOp::Neg
                && matches!(**inner, Expr::Unary(UnOp::Neg, _) | Expr::Int(i64::MIN..=-1));
            if nested_neg {
                f.write_char('(')?;
                write_expr(f, inner, 0)?;
                f.write_char(')')?;
            } else {
                write_expr(f, inner, UNARY_PREC)?;
            }
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            write_expr(f, a, p)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, b, p + 1)?;
        }
    }
    if needs_parens {
        f.write_char(')')?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

fn indent(f: &mut impl Write, depth: usize) -> fmt::Result {
    for _ in 0..depth {
        f.write_str("    ")?;
    }
    Ok(())
}

fn write_block(f: &mut impl Write, stmts: &[Stmt], depth: usize) -> fmt::Result {
    f.write_str("{\n")?;
    for s in stmts {
        write_stmt(f, s, depth + 1)?;
    }
    indent(f, depth)?;
    f.write_char('}')
}

fn write_if(f: &mut impl Write, cond: &Expr, then_block: &[Stmt], else_block: &[Stmt], depth: usize) -> fmt::Result {
    write!(f, "if ({cond}) ")?;
    write_block(f, then_block, depth)?;
    match else_block {
        [] => {}
        [Stmt::If {
            cond,
            then_block,
            else_block,
        }] => {
            f.write_str(" else ")?;
            write_if(f, cond, then_block, else_block, depth)?;
        }
        _ => {
            f.write_str(" else ")?;
            write_block(f, else_block, depth)?;
        }
    }
    Ok(())
}

fn write_stmt(f: &mut impl Write, s: &Stmt, depth: usize) -> fmt::Result {
    indent(f, depth)?;
    match s {
        Stmt::Var { name, init } => writeln!(f, "var {name} = {init};"),
        Stmt::Assign { name, value } => writeln!(f, "{name} = {value};"),
        Stmt::If {
            cond,
            then_block,
            else_block,
        } => {
            write_if(f, cond, then_block, else_block, depth)?;
            f.write_char('\n')
        }
        Stmt::While { cond, body } => {
            write!(f, "while ({cond}) ")?;
            write_block(f, body, depth)?;
            f.write_char('\n')
        }
        Stmt::Return(e) => writeln!(f, "return {e};"),
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_stmt(f, self, 0)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "program {}(", self.name)?;
        for (i, input) in self.inputs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {}", input.name, input.domain)?;
        }
        write!(f, ") -> {}", self.output)?;
        if self.has_precondition() {
            write!(f, "\n    requires {};\n", self.precondition)?;
        } else {
            f.write_char(' ')?;
        }
        write_block(f, &self.body, 0)?;
        f.write_char('\n')
    }
}
