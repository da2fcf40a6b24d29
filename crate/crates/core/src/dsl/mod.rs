//! The minimiser-input language: a small imperative language over bounded
//! integer and boolean inputs with a single scalar result.
//!
//! ```text
//! program   := "program" IDENT "(" params ")" "->" ("int" | "bool")
//!              ("requires" expr ";")? block
//! params    := param ("," param)*
//! param     := IDENT ":" ("int" "[" INT ".." INT "]" | "bool")
//! block     := "{" stmt* "}"
//! stmt      := "var" IDENT "=" expr ";" | IDENT "=" expr ";"
//!            | "if" "(" expr ")" block ("else" (block | if-stmt))?
//!            | "while" "(" expr ")" block
//!            | "return" expr ";"
//! ```
//!
//! `INT` in a domain bound may carry a leading `-`. Expressions use C
//! precedence (`||` < `&&` < `== !=` < `< <= > >=` < `+ -` < `* / %` <
//! unary `- !`), all binary operators associate to the left, and `//`
//! starts a line comment. `else if` is shorthand for an `else` block holding
//! a single `if`.

mod ast;
mod check;
mod eval;
mod lexer;
mod parser;
mod print;

use std::fmt;

pub use ast::{BinOp, Expr, Input, Program, Stmt, UnOp};
pub use check::{type_of, validate};
pub use eval::{evaluate, EvalError, Interpreter, DEFAULT_LOOP_LIMIT};
pub use lexer::Token;
pub use parser::{parse, parse_expr};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    Type(String),
    DuplicateInput(String),
    DuplicateVariable(String),
    UndeclaredVariable(String),
    UnboundedDomain(String),
    EmptyDomain { name: String, lo: i64, hi: i64 },
    DivisionByZero,
    ReturnInLoop,
    MissingReturn,
    UnreachableCode,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::Type(m) => write!(f, "type error: {m}"),
            ParseErrorKind::DuplicateInput(n) => write!(f, "duplicate input `{n}`"),
            ParseErrorKind::DuplicateVariable(n) => {
                write!(f, "variable `{n}` is already declared in this scope")
            }
            ParseErrorKind::UndeclaredVariable(n) => {
                write!(f, "variable `{n}` is used before it is declared")
            }
            ParseErrorKind::UnboundedDomain(n) => {
                write!(f, "input `{n}` needs a bounded domain such as int[0..9]")
            }
            ParseErrorKind::EmptyDomain { name, lo, hi } => {
                write!(f, "input `{name}` has an empty domain [{lo}..{hi}]")
            }
            ParseErrorKind::DivisionByZero => f.write_str("division by the literal 0"),
            ParseErrorKind::ReturnInLoop => f.write_str("`return` is not allowed inside a loop"),
            ParseErrorKind::MissingReturn => f.write_str("some execution path does not return a value"),
            ParseErrorKind::UnreachableCode => f.write_str("statement after `return` is unreachable"),
        }
    }
}

/// A diagnostic. `pos` is absent for programs that were built in memory
/// rather than parsed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub pos: Option<Pos>,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{p}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}
