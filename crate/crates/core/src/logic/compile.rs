//! Slot-indexed evaluation of formulas.
//!
//! Formulas are compiled once against an [`Env`]; free variables occupy the
//! first slots in declaration order and every binder gets a slot of its own.
//! Values are carried as ordinals (`false = 0`, `true = 1`).
//!
//! Arithmetic here is total so that formulas always have a truth value:
//! `x / 0 = 0`, `x % 0 = x`, and overflow wraps. Symbolic execution rejects
//! programs in which a division by zero is reachable, so these conventions
//! never decide the meaning of a program.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use super::{Env, Formula, LogicError};
use crate::dsl::{BinOp, Expr, UnOp};
use crate::value::Type;

#[derive(Debug)]
pub(crate) enum Term {
    Const(i64),
    Slot(usize),
    Neg(Box<Term>),
    Not(Box<Term>),
    Bin(BinOp, Box<Term>, Box<Term>),
}

impl Term {
    #[inline]
    pub(crate) fn eval(&self, slots: &[i64]) -> i64 {
        match self {
            Term::Const(c) => *c,
            Term::Slot(i) => slots[*i],
            Term::Neg(a) => a.eval(slots).wrapping_neg(),
            Term::Not(a) => (a.eval(slots) == 0) as i64,
            Term::Bin(BinOp::And, a, b) => (a.eval(slots) != 0 && b.eval(slots) != 0) as i64,
            Term::Bin(BinOp::Or, a, b) => (a.eval(slots) != 0 || b.eval(slots) != 0) as i64,
            Term::Bin(op, a, b) => arith(*op, a.eval(slots), b.eval(slots)),
        }
    }

    fn slots_used(&self, out: &mut BTreeSet<usize>) {
        match self {
            Term::Const(_) => {}
            Term::Slot(i) => {
                out.insert(*i);
            }
            Term::Neg(a) | Term::Not(a) => a.slots_used(out),
            Term::Bin(_, a, b) => {
                a.slots_used(out);
                b.slots_used(out);
            }
        }
    }
}

#[inline]
fn arith(op: BinOp, x: i64, y: i64) -> i64 {
    match op {
        BinOp::Add => x.wrapping_add(y),
        BinOp::Sub => x.wrapping_sub(y),
        BinOp::Mul => x.wrapping_mul(y),
        BinOp::Div => {
            if y == 0 {
                0
            } else {
                x.wrapping_div(y)
            }
        }
        BinOp::Rem => {
            if y == 0 {
                x
            } else {
                x.wrapping_rem(y)
            }
        }
        BinOp::Lt => (x < y) as i64,
        BinOp::Le => (x <= y) as i64,
        BinOp::Gt => (x > y) as i64,
        BinOp::Ge => (x >= y) as i64,
        BinOp::Eq => (x == y) as i64,
        BinOp::Ne => (x != y) as i64,
        BinOp::And => (x != 0 && y != 0) as i64,
        BinOp::Or => (x != 0 || y != 0) as i64,
    }
}

struct Memo {
    keys: Vec<usize>,
    table: RefCell<HashMap<Vec<i64>, bool>>,
}

enum Node {
    Const(bool),
    Atom(Term),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Implies(Box<Node>, Box<Node>),
    Quant {
        forall: bool,
        slot: usize,
        lo: i64,
        hi: i64,
        body: Box<Node>,
        memo: Option<Memo>,
    },
}

impl Node {
    fn eval(&self, slots: &mut [i64]) -> bool {
        match self {
            Node::Const(b) => *b,
            Node::Atom(t) => t.eval(slots) != 0,
            Node::Not(n) => !n.eval(slots),
            Node::And(ns) => ns.iter().all(|n| n.eval(slots)),
            Node::Or(ns) => ns.iter().any(|n| n.eval(slots)),
            Node::Implies(a, b) => !a.eval(slots) || b.eval(slots),
            Node::Quant {
                forall,
                slot,
                lo,
                hi,
                body,
                memo,
            } => {
                let key = memo.as_ref().map(|m| m.keys.iter().map(|&k| slots[k]).collect::<Vec<_>>());
                if let (Some(m), Some(k)) = (memo, &key) {
                    if let Some(&hit) = m.table.borrow().get(k) {
                        return hit;
                    }
                }
                // early exit on the first witness (exists) or counterexample (forall)
                let mut result = *forall;
                for v in *lo..=*hi {
                    slots[*slot] = v;
                    if body.eval(slots) != *forall {
                        result = !*forall;
                        break;
                    }
                }
                if let (Some(m), Some(k)) = (memo, key) {
                    m.table.borrow_mut().insert(k, result);
                }
                result
            }
        }
    }

    fn slots_used(&self, out: &mut BTreeSet<usize>) {
        match self {
            Node::Const(_) => {}
            Node::Atom(t) => t.slots_used(out),
            Node::Not(n) => n.slots_used(out),
            Node::And(ns) | Node::Or(ns) => ns.iter().for_each(|n| n.slots_used(out)),
            Node::Implies(a, b) => {
                a.slots_used(out);
                b.slots_used(out);
            }
            Node::Quant { slot, body, .. } => {
                let mut inner = BTreeSet::new();
                body.slots_used(&mut inner);
                inner.remove(slot);
                out.extend(inner);
            }
        }
    }
}

/// A formula ready for repeated evaluation.
pub(crate) struct Compiled {
    root: Node,
    pub(crate) slot_count: usize,
    /// Largest product of quantifier domain sizes along one nesting chain,
    /// saturating.
    pub(crate) bound_work: u64,
}

impl Compiled {
    /// Evaluates with the free variables set in `slots[..env.len()]`. The
    /// remaining slots are scratch space for binders.
    #[inline]
    pub(crate) fn eval(&self, slots: &mut [i64]) -> bool {
        self.root.eval(slots)
    }
}

struct Compiler<'e> {
    scope: Vec<(&'e str, usize, Type)>,
    next_slot: usize,
    nest: u64,
    bound_work: u64,
}

pub(crate) fn compile(formula: &Formula, env: &Env) -> Result<Compiled, LogicError> {
    let mut c = Compiler {
        scope: env
            .iter()
            .enumerate()
            .map(|(i, (n, d))| (n, i, d.ty()))
            .collect(),
        next_slot: env.len(),
        nest: 1,
        bound_work: 1,
    };
    let root = c.formula(formula)?;
    Ok(Compiled {
        root,
        slot_count: c.next_slot,
        bound_work: c.bound_work,
    })
}

/// Compiles a bare term (integer or boolean valued) against `env`.
pub(crate) fn compile_term(e: &Expr, env: &Env) -> Result<(Term, Type), LogicError> {
    let mut c = Compiler {
        scope: env
            .iter()
            .enumerate()
            .map(|(i, (n, d))| (n, i, d.ty()))
            .collect(),
        next_slot: env.len(),
        nest: 1,
        bound_work: 1,
    };
    c.term(e)
}

impl<'e> Compiler<'e> {
    fn formula(&mut self, f: &'e Formula) -> Result<Node, LogicError> {
        Ok(match f {
            Formula::Const(b) => Node::Const(*b),
            Formula::Atom(e) => {
                let (t, ty) = self.term(e)?;
                if ty != Type::Bool {
                    return Err(LogicError::Type(format!("atom `{e}` is not boolean")));
                }
                Node::Atom(t)
            }
            Formula::Not(g) => Node::Not(Box::new(self.formula(g)?)),
            Formula::And(ps) => Node::And(ps.iter().map(|p| self.formula(p)).collect::<Result<_, _>>()?),
            Formula::Or(ps) => Node::Or(ps.iter().map(|p| self.formula(p)).collect::<Result<_, _>>()?),
            Formula::Implies(a, b) => Node::Implies(Box::new(self.formula(a)?), Box::new(self.formula(b)?)),
            Formula::Forall(bd, body) | Formula::Exists(bd, body) => {
                let slot = self.next_slot;
                self.next_slot += 1;
                let outer = self.nest;
                self.nest = outer.saturating_mul(bd.domain.cardinality());
                self.bound_work = self.bound_work.max(self.nest);
                self.scope.push((&bd.var, slot, bd.domain.ty()));
                let body = self.formula(body);
                self.scope.pop();
                self.nest = outer;
                let body = body?;
                let (lo, hi) = bd.domain.bounds();
                let mut free = BTreeSet::new();
                body.slots_used(&mut free);
                free.remove(&slot);
                // memoise only when some enclosing slot is irrelevant to
                // this node, otherwise every key is fresh
                let in_scope = self.scope.len();
                let memo = (free.len() < in_scope).then(|| Memo {
                    keys: free.into_iter().collect(),
                    table: RefCell::new(HashMap::new()),
                });
                Node::Quant {
                    forall: matches!(f, Formula::Forall(..)),
                    slot,
                    lo,
                    hi,
                    body: Box::new(body),
                    memo,
                }
            }
        })
    }

    fn term(&mut self, e: &Expr) -> Result<(Term, Type), LogicError> {
        Ok(match e {
            Expr::Int(n) => (Term::Const(*n), Type::Int),
            Expr::Bool(b) => (Term::Const(*b as i64), Type::Bool),
            Expr::Var(n) => {
                let (_, slot, ty) = self
                    .scope
                    .iter()
                    .rev()
                    .find(|(name, _, _)| name == n)
                    .ok_or_else(|| LogicError::UndeclaredVariable(n.clone()))?;
                (Term::Slot(*slot), *ty)
            }
            Expr::Unary(op, inner) => {
                let (t, ty) = self.term(inner)?;
                let rty = op
                    .result_type(ty)
                    .ok_or_else(|| LogicError::Type(format!("operator `{}` applied to {ty} in `{e}`", op.symbol())))?;
                let t = match op {
                    UnOp::Neg => Term::Neg(Box::new(t)),
                    UnOp::Not => Term::Not(Box::new(t)),
                };
                (t, rty)
            }
            Expr::Binary(op, a, b) => {
                let (ta, tya) = self.term(a)?;
                let (tb, tyb) = self.term(b)?;
                let rty = op.result_type(tya, tyb).ok_or_else(|| {
                    LogicError::Type(format!("operator `{}` applied to {tya} and {tyb} in `{e}`", op.symbol()))
                })?;
                (Term::Bin(*op, Box::new(ta), Box::new(tb)), rty)
            }
        })
    }
}
