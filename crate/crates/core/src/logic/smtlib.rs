//! SMT-LIB2 export for cross-checking against an external solver.

use std::fmt::Write;

use super::{Env, Formula};
use crate::dsl::{BinOp, Expr, UnOp};
use crate::value::Domain;

// Truncating division and remainder with the same totality conventions as
// the internal solver (`x / 0 = 0`, `x % 0 = x`).
const PRELUDE: &str = "\
(set-logic ALL)
(define-fun tdiv ((a Int) (b Int)) Int
  (ite (= b 0) 0 (ite (= (>= a 0) (> b 0)) (div (abs a) (abs b)) (- (div (abs a) (abs b))))))
(define-fun trem ((a Int) (b Int)) Int
  (ite (= b 0) a (- a (* b (tdiv a b)))))
";

const RESERVED: &[&str] = &[
    "abs", "and", "assert", "as", "distinct", "div", "exists", "false", "forall", "ite", "let", "mod", "not", "or",
    "par", "tdiv", "trem", "true", "xor", "Int", "Bool",
];

/// Renders `f` as a script that is `sat` iff `f` is satisfiable over `env`.
pub fn to_smtlib(f: &Formula, env: &Env) -> String {
    let mut out = String::from(PRELUDE);
    for (name, dom) in env.iter() {
        let sym = symbol(name);
        match dom {
            Domain::Bool => writeln!(out, "(declare-const {sym} Bool)").expect("write to string"),
            Domain::Int { lo, hi } => {
                writeln!(out, "(declare-const {sym} Int)").expect("write to string");
                writeln!(out, "(assert (and (<= {} {sym}) (<= {sym} {})))", int(lo), int(hi)).expect("write to string");
            }
        }
    }
    writeln!(out, "(assert {})", formula(f)).expect("write to string");
    out.push_str("(check-sat)\n");
    out
}

fn symbol(name: &str) -> String {
    if RESERVED.contains(&name) {
        format!("|{name}|")
    } else {
        name.to_string()
    }
}

fn int(n: i64) -> String {
    if n < 0 {
        format!("(- {})", n.unsigned_abs())
    } else {
        n.to_string()
    }
}

fn formula(f: &Formula) -> String {
    match f {
        Formula::Const(b) => b.to_string(),
        Formula::Atom(e) => expr(e),
        Formula::Not(g) => format!("(not {})", formula(g)),
        Formula::And(ps) | Formula::Or(ps) => {
            let (op, unit) = if matches!(f, Formula::And(_)) { ("and", "true") } else { ("or", "false") };
            match ps.len() {
                0 => unit.to_string(),
                1 => formula(&ps[0]),
                _ => format!("({op} {})", ps.iter().map(formula).collect::<Vec<_>>().join(" ")),
            }
        }
        Formula::Implies(a, b) => format!("(=> {} {})", formula(a), formula(b)),
        Formula::Forall(bd, body) | Formula::Exists(bd, body) => {
            let forall = matches!(f, Formula::Forall(..));
            let q = if forall { "forall" } else { "exists" };
            let sym = symbol(&bd.var);
            let body = formula(body);
            match bd.domain {
                Domain::Bool => format!("({q} (({sym} Bool)) {body})"),
                Domain::Int { lo, hi } => {
                    let range = format!("(and (<= {} {sym}) (<= {sym} {}))", int(lo), int(hi));
                    let inner = if forall {
                        format!("(=> {range} {body})")
                    } else {
                        format!("(and {range} {body})")
                    };
                    format!("({q} (({sym} Int)) {inner})")
                }
            }
        }
    }
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(n) => int(*n),
        Expr::Bool(b) => b.to_string(),
        Expr::Var(v) => symbol(v),
        Expr::Unary(UnOp::Neg, a) => format!("(- {})", expr(a)),
        Expr::Unary(UnOp::Not, a) => format!("(not {})", expr(a)),
        Expr::Binary(op, a, b) => {
            let (a, b) = (expr(a), expr(b));
            match op {
                BinOp::Ne => format!("(not (= {a} {b}))"),
                _ => {
                    let head = match op {
                        BinOp::Add => "+",
                        BinOp::Sub => "-",
                        BinOp::Mul => "*",
                        BinOp::Div => "tdiv",
                        BinOp::Rem => "trem",
                        BinOp::Lt => "<",
                        BinOp::Le => "<=",
                        BinOp::Gt => ">",
                        BinOp::Ge => ">=",
                        BinOp::Eq => "=",
                        BinOp::And => "and",
                        BinOp::Or => "or",
                        BinOp::Ne => unreachable!(),
                    };
                    format!("({head} {a} {b})")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_expr;

    #[test]
    fn transcribes_bounds_and_atoms() {
        let env = Env::new().with("s", Domain::int(0, 100_000));
        let f = Formula::from_expr(&parse_expr("s < 10000").unwrap());
        let text = to_smtlib(&f, &env);
        assert!(text.contains("(assert (and (<= 0 s) (<= s 100000)))"));
        assert!(text.contains("(assert (< s 10000))"));
        assert!(text.ends_with("(check-sat)\n"));
    }

    #[test]
    fn quotes_reserved_names_and_negatives() {
        let env = Env::new().with("div", Domain::int(-2, 2));
        let f = Formula::from_expr(&parse_expr("div % 2 != -1").unwrap());
        let text = to_smtlib(&f, &env);
        assert!(text.contains("(declare-const |div| Int)"));
        assert!(text.contains("(<= (- 2) |div|)"));
        assert!(text.contains("(not (= (trem |div| 2) (- 1)))"));
    }
}
