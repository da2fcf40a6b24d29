//! Concrete semantics.
//!
//! Integer division truncates toward zero and `%` takes the sign of the
//! dividend. Arithmetic overflow is an error rather than wrapping.

use super::ast::{BinOp, Expr, Program, Stmt, UnOp};
use crate::value::{Valuation, Value};

/// Iteration limit applied to each loop when none is given.
pub const DEFAULT_LOOP_LIMIT: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("no value given for input `{0}`")]
    MissingInput(String),
    #[error("`{0}` is not an input of the program")]
    UnknownInput(String),
    #[error("value {value} is outside the domain of input `{name}`")]
    OutOfDomain { name: String, value: Value },
    #[error("input {0} violates the program precondition")]
    PreconditionViolated(Valuation),
    #[error("division by zero")]
    DivisionByZero,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("loop exceeded {0} iterations")]
    LoopLimitExceeded(u64),
    #[error("execution finished without returning a value")]
    NoReturn,
}

/// Evaluates `program` on `input` with the default loop limit.
pub fn evaluate(program: &Program, input: &Valuation) -> Result<Value, EvalError> {
    Interpreter::default().evaluate(program, input)
}

#[derive(Debug, Clone, Copy)]
pub struct Interpreter {
    pub loop_limit: u64,
}

impl Default for Interpreter {
    fn default() -> Self {
        Interpreter {
            loop_limit: DEFAULT_LOOP_LIMIT,
        }
    }
}

enum Flow {
    Next,
    Return(Value),
}

struct Frame<'p> {
    vars: Vec<(&'p str, Value)>,
    marks: Vec<usize>,
}

impl<'p> Frame<'p> {
    fn get(&self, name: &str) -> Value {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("unbound variable `{name}` in a validated program"))
    }

    fn set(&mut self, name: &str, value: Value) {
        let slot = self
            .vars
            .iter_mut()
            .rev()
            .find(|(n, _)| *n == name)
            .unwrap_or_else(|| panic!("assignment to undeclared `{name}` in a validated program"));
        slot.1 = value;
    }

    fn enter(&mut self) {
        self.marks.push(self.vars.len());
    }

    fn leave(&mut self) {
        let m = self.marks.pop().expect("balanced scopes");
        self.vars.truncate(m);
    }
}

impl Interpreter {
    pub fn new(loop_limit: u64) -> Self {
        Interpreter { loop_limit }
    }

    /// Checks that `input` binds exactly the program inputs, in domain, and
    /// satisfies the precondition.
    pub fn admit(&self, program: &Program, input: &Valuation) -> Result<(), EvalError> {
        self.bind(program, input).map(|_| ())
    }

    fn bind<'p>(&self, program: &'p Program, input: &Valuation) -> Result<Frame<'p>, EvalError> {
        for (name, _) in input.iter() {
            if program.input(name).is_none() {
                return Err(EvalError::UnknownInput(name.to_string()));
            }
        }
        let mut vars = Vec::with_capacity(program.inputs.len() + 4);
        for i in &program.inputs {
            let v = input
                .get(&i.name)
                .ok_or_else(|| EvalError::MissingInput(i.name.clone()))?;
            if !i.domain.contains(v) {
                return Err(EvalError::OutOfDomain {
                    name: i.name.clone(),
                    value: v,
                });
            }
            vars.push((i.name.as_str(), v));
        }
        let frame = Frame {
            vars,
            marks: Vec::new(),
        };
        if program.has_precondition() && eval_expr(&program.precondition, &frame)? != Value::Bool(true) {
            return Err(EvalError::PreconditionViolated(input.clone()));
        }
        Ok(frame)
    }

    pub fn evaluate(&self, program: &Program, input: &Valuation) -> Result<Value, EvalError> {
        let mut frame = self.bind(program, input)?;
        frame.enter();
        match self.exec_block(&program.body, &mut frame)? {
            Flow::Return(v) => Ok(v),
            Flow::Next => Err(EvalError::NoReturn),
        }
    }

    fn exec_block<'p>(&self, stmts: &'p [Stmt], frame: &mut Frame<'p>) -> Result<Flow, EvalError> {
        for s in stmts {
            if let Flow::Return(v) = self.exec(s, frame)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn scoped<'p>(&self, stmts: &'p [Stmt], frame: &mut Frame<'p>) -> Result<Flow, EvalError> {
        frame.enter();
        let r = self.exec_block(stmts, frame);
        frame.leave();
        r
    }

    fn exec<'p>(&self, stmt: &'p Stmt, frame: &mut Frame<'p>) -> Result<Flow, EvalError> {
        match stmt {
            Stmt::Var { name, init } => {
                let v = eval_expr(init, frame)?;
                frame.vars.push((name.as_str(), v));
            }
            Stmt::Assign { name, value } => {
                let v = eval_expr(value, frame)?;
                frame.set(name, v);
            }
            Stmt::If {
                cond,
                then_block,
                else_block,
            } => {
                let branch = if truthy(eval_expr(cond, frame)?) {
                    then_block
                } else {
                    else_block
                };
                return self.scoped(branch, frame);
            }
            Stmt::While { cond, body } => {
                let mut iterations = 0u64;
                while truthy(eval_expr(cond, frame)?) {
                    if iterations == self.loop_limit {
                        return Err(EvalError::LoopLimitExceeded(self.loop_limit));
                    }
                    iterations += 1;
                    self.scoped(body, frame)?;
                }
            }
            Stmt::Return(e) => return Ok(Flow::Return(eval_expr(e, frame)?)),
        }
        Ok(Flow::Next)
    }
}

fn truthy(v: Value) -> bool {
    v == Value::Bool(true)
}

fn eval_expr(e: &Expr, frame: &Frame<'_>) -> Result<Value, EvalError> {
    Ok(match e {
        Expr::Int(n) => Value::Int(*n),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Var(n) => frame.get(n),
        Expr::Unary(op, inner) => match (op, eval_expr(inner, frame)?) {
            (UnOp::Neg, Value::Int(n)) => Value::Int(n.checked_neg().ok_or(EvalError::Overflow)?),
            (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
            _ => unreachable!("ill-typed unary operand in a validated program"),
        },
        Expr::Binary(BinOp::And, a, b) => {
            Value::Bool(truthy(eval_expr(a, frame)?) && truthy(eval_expr(b, frame)?))
        }
        Expr::Binary(BinOp::Or, a, b) => {
            Value::Bool(truthy(eval_expr(a, frame)?) || truthy(eval_expr(b, frame)?))
        }
        Expr::Binary(op, a, b) => {
            let x = eval_expr(a, frame)?;
            let y = eval_expr(b, frame)?;
            binary(*op, x, y)?
        }
    })
}

pub(crate) fn binary(op: BinOp, x: Value, y: Value) -> Result<Value, EvalError> {
    use BinOp::*;
    let ints = || match (x, y) {
        (Value::Int(a), Value::Int(b)) => (a, b),
        _ => unreachable!("ill-typed arithmetic in a validated program"),
    };
    Ok(match op {
        Add => Value::Int(ints().0.checked_add(ints().1).ok_or(EvalError::Overflow)?),
        Sub => Value::Int(ints().0.checked_sub(ints().1).ok_or(EvalError::Overflow)?),
        Mul => Value::Int(ints().0.checked_mul(ints().1).ok_or(EvalError::Overflow)?),
        Div | Rem => {
            let (a, b) = ints();
            if b == 0 {
                return Err(EvalError::DivisionByZero);
            }
            let r = if op == Div { a.checked_div(b) } else { a.checked_rem(b) };
            Value::Int(r.ok_or(EvalError::Overflow)?)
        }
        Lt => Value::Bool(ints().0 < ints().1),
        Le => Value::Bool(ints().0 <= ints().1),
        Gt => Value::Bool(ints().0 > ints().1),
        Ge => Value::Bool(ints().0 >= ints().1),
        Eq => Value::Bool(x == y),
        Ne => Value::Bool(x != y),
        And | Or => unreachable!("short-circuit operators are handled by the caller"),
    })
}
