use std::collections::BTreeSet;

use crate::value::{Domain, Type, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter. All binary operators are
    /// left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    /// Result type given operand types, or `None` when ill-typed.
    pub fn result_type(self, lhs: Type, rhs: Type) -> Option<Type> {
        use BinOp::*;
        match self {
            Add | Sub | Mul | Div | Rem => (lhs == Type::Int && rhs == Type::Int).then_some(Type::Int),
            Lt | Le | Gt | Ge => (lhs == Type::Int && rhs == Type::Int).then_some(Type::Bool),
            Eq | Ne => (lhs == rhs).then_some(Type::Bool),
            And | Or => (lhs == Type::Bool && rhs == Type::Bool).then_some(Type::Bool),
        }
    }
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Not => "!",
        }
    }

    pub fn result_type(self, operand: Type) -> Option<Type> {
        match (self, operand) {
            (UnOp::Neg, Type::Int) => Some(Type::Int),
            (UnOp::Not, Type::Bool) => Some(Type::Bool),
            _ => None,
        }
    }
}

/// Side-effect free expressions. The same type doubles as the term language
/// of the solver, where variables name input symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn value(v: Value) -> Expr {
        match v {
            Value::Int(n) => Expr::Int(n),
            Value::Bool(b) => Expr::Bool(b),
        }
    }

    pub fn as_value(&self) -> Option<Value> {
        match self {
            Expr::Int(n) => Some(Value::Int(*n)),
            Expr::Bool(b) => Some(Value::Bool(*b)),
            _ => None,
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Var(n) => {
                out.insert(n.clone());
            }
            Expr::Unary(_, e) => e.free_vars(out),
            Expr::Binary(_, a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    /// Replaces every variable for which `lookup` returns a term.
    pub fn substitute_with(&self, lookup: &impl Fn(&str) -> Option<Expr>) -> Expr {
        match self {
            Expr::Int(_) | Expr::Bool(_) => self.clone(),
            Expr::Var(n) => lookup(n).unwrap_or_else(|| self.clone()),
            Expr::Unary(op, e) => Expr::Unary(*op, Box::new(e.substitute_with(lookup))),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(a.substitute_with(lookup)),
                Box::new(b.substitute_with(lookup)),
            ),
        }
    }

    pub fn substitute(&self, name: &str, by: &Expr) -> Expr {
        self.substitute_with(&|n: &str| (n == name).then(|| by.clone()))
    }

    /// Constant folding. Division and remainder by a literal zero are left
    /// untouched so that callers can still report them.
    pub fn fold(&self) -> Expr {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, e) => {
                let e = e.fold();
                match (op, &e) {
                    (UnOp::Neg, Expr::Int(n)) => Expr::Int(n.wrapping_neg()),
                    (UnOp::Not, Expr::Bool(b)) => Expr::Bool(!b),
                    (UnOp::Not, Expr::Unary(UnOp::Not, inner)) => (**inner).clone(),
                    _ => Expr::Unary(*op, Box::new(e)),
                }
            }
            Expr::Binary(op, a, b) => {
                let a = a.fold();
                let b = b.fold();
                if let (Some(x), Some(y)) = (a.as_value(), b.as_value()) {
                    if let Some(v) = fold_binary(*op, x, y) {
                        return Expr::value(v);
                    }
                }
                match (op, &a, &b) {
                    (BinOp::And, Expr::Bool(false), _) | (BinOp::And, _, Expr::Bool(false)) => {
                        Expr::Bool(false)
                    }
                    (BinOp::And, Expr::Bool(true), _) => b,
                    (BinOp::And, _, Expr::Bool(true)) => a,
                    (BinOp::Or, Expr::Bool(true), _) | (BinOp::Or, _, Expr::Bool(true)) => {
                        Expr::Bool(true)
                    }
                    (BinOp::Or, Expr::Bool(false), _) => b,
                    (BinOp::Or, _, Expr::Bool(false)) => a,
                    _ => Expr::binary(*op, a, b),
                }
            }
        }
    }
}

fn fold_binary(op: BinOp, x: Value, y: Value) -> Option<Value> {
    use BinOp::*;
    Some(match (op, x, y) {
        (Add, Value::Int(a), Value::Int(b)) => Value::Int(a.checked_add(b)?),
        (Sub, Value::Int(a), Value::Int(b)) => Value::Int(a.checked_sub(b)?),
        (Mul, Value::Int(a), Value::Int(b)) => Value::Int(a.checked_mul(b)?),
        (Div, Value::Int(a), Value::Int(b)) => Value::Int(a.checked_div(b)?),
        (Rem, Value::Int(a), Value::Int(b)) => Value::Int(a.checked_rem(b)?),
        (Lt, Value::Int(a), Value::Int(b)) => Value::Bool(a < b),
        (Le, Value::Int(a), Value::Int(b)) => Value::Bool(a <= b),
        (Gt, Value::Int(a), Value::Int(b)) => Value::Bool(a > b),
        (Ge, Value::Int(a), Value::Int(b)) => Value::Bool(a >= b),
        (Eq, a, b) => Value::Bool(a == b),
        (Ne, a, b) => Value::Bool(a != b),
        (And, Value::Bool(a), Value::Bool(b)) => Value::Bool(a && b),
        (Or, Value::Bool(a), Value::Bool(b)) => Value::Bool(a || b),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    /// `var name = init;`
    Var { name: String, init: Expr },
    /// `name = value;`
    Assign { name: String, value: Expr },
    If {
        cond: Expr,
        then_block: Vec<Stmt>,
        else_block: Vec<Stmt>,
    },
    While { cond: Expr, body: Vec<Stmt> },
    Return(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Input {
    pub name: String,
    pub domain: Domain,
}

impl Input {
    pub fn new(name: impl Into<String>, domain: Domain) -> Self {
        Input {
            name: name.into(),
            domain,
        }
    }
}

/// A validated program: bounded inputs, an optional precondition and a body
/// returning one scalar.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub name: String,
    pub inputs: Vec<Input>,
    pub output: Type,
    /// `Expr::Bool(true)` when no `requires` clause was given.
    pub precondition: Expr,
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn input(&self, name: &str) -> Option<&Input> {
        self.inputs.iter().find(|i| i.name == name)
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|i| i.name == name)
    }

    /// Number of points in the input product space, saturating.
    pub fn product_size(&self) -> u64 {
        self.inputs
            .iter()
            .fold(1u64, |acc, i| acc.saturating_mul(i.domain.cardinality()))
    }

    pub fn has_precondition(&self) -> bool {
        self.precondition != Expr::Bool(true)
    }
}
