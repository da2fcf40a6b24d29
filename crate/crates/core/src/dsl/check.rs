use super::ast::{BinOp, Expr, Program, Stmt};
use super::{ParseError, ParseErrorKind, Pos};
use crate::value::Type;

/// Validates a program built in memory (scoping, typing, returns).
pub fn validate(program: &Program) -> Result<(), ParseError> {
    Checker::new().program(program)
}

/// Type of an expression under the given variable typing.
pub fn type_of(expr: &Expr, var_type: &dyn Fn(&str) -> Option<Type>) -> Result<Type, ParseError> {
    let mut c = Checker::new();
    c.lookup_override = Some(var_type);
    c.expr(expr)
}

pub(super) struct Checker<'a> {
    positions: Option<&'a [Pos]>,
    end: Option<Pos>,
    next: usize,
    scopes: Vec<Vec<(String, Type)>>,
    loop_depth: usize,
    output: Type,
    lookup_override: Option<&'a dyn Fn(&str) -> Option<Type>>,
}

impl<'a> Checker<'a> {
    fn new() -> Self {
        Checker {
            positions: None,
            end: None,
            next: 0,
            scopes: Vec::new(),
            loop_depth: 0,
            output: Type::Int,
            lookup_override: None,
        }
    }

    pub(super) fn with_positions(positions: &'a [Pos], end: Pos) -> Self {
        Checker {
            positions: Some(positions),
            end: Some(end),
            ..Checker::new()
        }
    }

    /// Claims the next post-order node slot and returns its position.
    fn node(&mut self) -> Option<Pos> {
        let pos = self.positions.and_then(|p| p.get(self.next).copied());
        self.next += 1;
        pos
    }

    fn lookup(&self, name: &str) -> Option<Type> {
        if let Some(f) = self.lookup_override {
            return f(name);
        }
        self.scopes
            .iter()
            .rev()
            .flat_map(|s| s.iter())
            .find(|(n, _)| n == name)
            .map(|(_, t)| *t)
    }

    pub(super) fn program(&mut self, program: &Program) -> Result<(), ParseError> {
        self.output = program.output;
        self.scopes = vec![program
            .inputs
            .iter()
            .map(|i| (i.name.clone(), i.domain.ty()))
            .collect()];
        let pre_pos = self.positions.and_then(|p| p.get(self.next).copied());
        let pre = self.expr(&program.precondition)?;
        if pre != Type::Bool {
            return Err(ParseError {
                pos: pre_pos,
                kind: ParseErrorKind::Type("the precondition must be a boolean expression".into()),
            });
        }
        self.scopes.push(Vec::new());
        let returns = self.block(&program.body)?;
        if !returns {
            return Err(ParseError {
                pos: self.end,
                kind: ParseErrorKind::MissingReturn,
            });
        }
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<bool, ParseError> {
        let mut returned = false;
        for s in stmts {
            let (pos, r) = self.stmt(s)?;
            if returned {
                return Err(ParseError {
                    pos,
                    kind: ParseErrorKind::UnreachableCode,
                });
            }
            returned = r;
        }
        Ok(returned)
    }

    fn scoped_block(&mut self, stmts: &[Stmt]) -> Result<bool, ParseError> {
        self.scopes.push(Vec::new());
        let r = self.block(stmts);
        self.scopes.pop();
        r
    }

    fn stmt(&mut self, stmt: &Stmt) -> Result<(Option<Pos>, bool), ParseError> {
        let type_err = |pos, msg: String| {
            Err(ParseError {
                pos,
                kind: ParseErrorKind::Type(msg),
            })
        };
        match stmt {
            Stmt::Var { name, init } => {
                let t = self.expr(init)?;
                let pos = self.node();
                if self.lookup(name).is_some() {
                    return Err(ParseError {
                        pos,
                        kind: ParseErrorKind::DuplicateVariable(name.clone()),
                    });
                }
                self.scopes.last_mut().expect("scope").push((name.clone(), t));
                Ok((pos, false))
            }
            Stmt::Assign { name, value } => {
                let t = self.expr(value)?;
                let pos = self.node();
                match self.lookup(name) {
                    None => Err(ParseError {
                        pos,
                        kind: ParseErrorKind::UndeclaredVariable(name.clone()),
                    }),
                    Some(vt) if vt != t => {
                        type_err(pos, format!("cannot assign a {t} value to `{name}` of type {vt}"))
                    }
                    Some(_) => Ok((pos, false)),
                }
            }
            Stmt::If {
                cond,
                then_block,
                else_block,
            } => {
                let t = self.expr(cond)?;
                let a = self.scoped_block(then_block)?;
                let b = self.scoped_block(else_block)?;
                let pos = self.node();
                if t != Type::Bool {
                    return type_err(pos, format!("`if` condition has type {t}, expected bool"));
                }
                Ok((pos, a && b))
            }
            Stmt::While { cond, body } => {
                let t = self.expr(cond)?;
                self.loop_depth += 1;
                let r = self.scoped_block(body);
                self.loop_depth -= 1;
                r?;
                let pos = self.node();
                if t != Type::Bool {
                    return type_err(pos, format!("`while` condition has type {t}, expected bool"));
                }
                Ok((pos, false))
            }
            Stmt::Return(e) => {
                let t = self.expr(e)?;
                let pos = self.node();
                if self.loop_depth > 0 {
                    return Err(ParseError {
                        pos,
                        kind: ParseErrorKind::ReturnInLoop,
                    });
                }
                if t != self.output {
                    return type_err(
                        pos,
                        format!("returned value has type {t}, the program returns {}", self.output),
                    );
                }
                Ok((pos, true))
            }
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<Type, ParseError> {
        match e {
            Expr::Int(_) => {
                self.node();
                Ok(Type::Int)
            }
            Expr::Bool(_) => {
                self.node();
                Ok(Type::Bool)
            }
            Expr::Var(n) => {
                let pos = self.node();
                self.lookup(n).ok_or_else(|| ParseError {
                    pos,
                    kind: ParseErrorKind::UndeclaredVariable(n.clone()),
                })
            }
            Expr::Unary(op, inner) => {
                let t = self.expr(inner)?;
                let pos = self.node();
                op.result_type(t).ok_or_else(|| ParseError {
                    pos,
                    kind: ParseErrorKind::Type(format!("operator `{}` cannot be applied to {t}", op.symbol())),
                })
            }
            Expr::Binary(op, a, b) => {
                let ta = self.expr(a)?;
                let tb = self.expr(b)?;
                let pos = self.node();
                if matches!(op, BinOp::Div | BinOp::Rem) && **b == Expr::Int(0) {
                    return Err(ParseError {
                        pos,
                        kind: ParseErrorKind::DivisionByZero,
                    });
                }
                op.result_type(ta, tb).ok_or_else(|| ParseError {
                    pos,
                    kind: ParseErrorKind::Type(format!(
                        "operator `{}` cannot be applied to {ta} and {tb}",
                        op.symbol()
                    )),
                })
            }
        }
    }
}
