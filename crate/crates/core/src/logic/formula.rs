use std::collections::BTreeSet;
use std::fmt;

use crate::dsl::{BinOp, Expr, Input, UnOp};
use crate::value::Domain;

/// A variable bound by a quantifier, with the finite domain it ranges over.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Binder {
    pub var: String,
    pub domain: Domain,
}

/// First-order formulas over bounded integer and boolean symbols.
///
/// Atoms are boolean-valued [`Expr`] terms. Quantifiers range over finite
/// domains, which is what makes every formula decidable by enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Atom(Expr),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Binder, Box<Formula>),
    Exists(Binder, Box<Formula>),
}

impl Formula {
    pub fn atom(e: Expr) -> Formula {
        Formula::Atom(e)
    }

    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::And(parts.into_iter().collect())
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::Or(parts.into_iter().collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(var: impl Into<String>, domain: Domain, body: Formula) -> Formula {
        Formula::Forall(
            Binder {
                var: var.into(),
                domain,
            },
            Box::new(body),
        )
    }

    pub fn exists(var: impl Into<String>, domain: Domain, body: Formula) -> Formula {
        Formula::Exists(
            Binder {
                var: var.into(),
                domain,
            },
            Box::new(body),
        )
    }

    /// Universally quantifies `body` over each input, innermost last.
    pub fn forall_inputs<'a>(inputs: impl IntoIterator<Item = &'a Input>, body: Formula) -> Formula {
        let inputs: Vec<&Input> = inputs.into_iter().collect();
        inputs
            .into_iter()
            .rev()
            .fold(body, |acc, i| Formula::forall(i.name.clone(), i.domain, acc))
    }

    /// Decomposes the boolean connectives at the top of `e` into formula
    /// structure; everything below a comparison stays an atom.
    pub fn from_expr(e: &Expr) -> Formula {
        match e {
            Expr::Bool(b) => Formula::Const(*b),
            Expr::Unary(UnOp::Not, inner) => Formula::not(Formula::from_expr(inner)),
            Expr::Binary(BinOp::And, a, b) => Formula::And(vec![Formula::from_expr(a), Formula::from_expr(b)]),
            Expr::Binary(BinOp::Or, a, b) => Formula::Or(vec![Formula::from_expr(a), Formula::from_expr(b)]),
            _ => Formula::Atom(e.clone()),
        }
    }

    /// The equivalent boolean expression, if the formula is quantifier-free.
    pub fn to_expr(&self) -> Option<Expr> {
        fn fold_op(op: BinOp, unit: bool, parts: &[Formula]) -> Option<Expr> {
            let mut it = parts.iter();
            let Some(first) = it.next() else {
                return Some(Expr::Bool(unit));
            };
            let mut acc = first.to_expr()?;
            for p in it {
                acc = Expr::binary(op, acc, p.to_expr()?);
            }
            Some(acc)
        }
        Some(match self {
            Formula::Const(b) => Expr::Bool(*b),
            Formula::Atom(e) => e.clone(),
            Formula::Not(f) => Expr::not(f.to_expr()?),
            Formula::And(ps) => fold_op(BinOp::And, true, ps)?,
            Formula::Or(ps) => fold_op(BinOp::Or, false, ps)?,
            Formula::Implies(a, b) => Expr::binary(BinOp::Or, Expr::not(a.to_expr()?), b.to_expr()?),
            Formula::Forall(..) | Formula::Exists(..) => return None,
        })
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Const(_) | Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().all(Formula::is_quantifier_free),
            Formula::Implies(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Const(_) => {}
            Formula::Atom(e) => {
                let mut vs = BTreeSet::new();
                e.free_vars(&mut vs);
                out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(ps) | Formula::Or(ps) => ps.iter().for_each(|p| p.collect_free(bound, out)),
            Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(bd, body) | Formula::Exists(bd, body) => {
                bound.push(bd.var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Replaces free occurrences of `name`. The replacement must not mention
    /// variables bound inside `self`.
    pub fn substitute(&self, name: &str, by: &Expr) -> Formula {
        self.map_atoms_unbound(name, &|e| e.substitute(name, by))
    }

    fn map_atoms_unbound(&self, name: &str, f: &impl Fn(&Expr) -> Expr) -> Formula {
        match self {
            Formula::Const(_) => self.clone(),
            Formula::Atom(e) => Formula::Atom(f(e)),
            Formula::Not(g) => Formula::not(g.map_atoms_unbound(name, f)),
            Formula::And(ps) => Formula::And(ps.iter().map(|p| p.map_atoms_unbound(name, f)).collect()),
            Formula::Or(ps) => Formula::Or(ps.iter().map(|p| p.map_atoms_unbound(name, f)).collect()),
            Formula::Implies(a, b) => {
                Formula::implies(a.map_atoms_unbound(name, f), b.map_atoms_unbound(name, f))
            }
            Formula::Forall(bd, _) | Formula::Exists(bd, _) if bd.var == name => self.clone(),
            Formula::Forall(bd, body) => Formula::Forall(bd.clone(), Box::new(body.map_atoms_unbound(name, f))),
            Formula::Exists(bd, body) => Formula::Exists(bd.clone(), Box::new(body.map_atoms_unbound(name, f))),
        }
    }

    /// Constant folding and flattening. Never changes the truth value under
    /// any valuation.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::Const(_) => self.clone(),
            Formula::Atom(e) => match e.fold() {
                Expr::Bool(b) => Formula::Const(b),
                e => Formula::Atom(e),
            },
            Formula::Not(f) => match f.simplify() {
                Formula::Const(b) => Formula::Const(!b),
                Formula::Not(inner) => *inner,
                g => Formula::not(g),
            },
            Formula::And(ps) => simplify_junction(ps, true),
            Formula::Or(ps) => simplify_junction(ps, false),
            Formula::Implies(a, b) => match (a.simplify(), b.simplify()) {
                (Formula::Const(false), _) | (_, Formula::Const(true)) => Formula::Const(true),
                (Formula::Const(true), b) => b,
                (a, Formula::Const(false)) => Formula::not(a).simplify(),
                (a, b) => Formula::implies(a, b),
            },
            // domains are never empty, so a quantifier over a constant body
            // is that constant
            Formula::Forall(bd, body) => match body.simplify() {
                Formula::Const(b) => Formula::Const(b),
                b => Formula::Forall(bd.clone(), Box::new(b)),
            },
            Formula::Exists(bd, body) => match body.simplify() {
                Formula::Const(b) => Formula::Const(b),
                b => Formula::Exists(bd.clone(), Box::new(b)),
            },
        }
    }
}

fn simplify_junction(parts: &[Formula], is_and: bool) -> Formula {
    let mut out = Vec::with_capacity(parts.len());
    for p in parts {
        match p.simplify() {
            Formula::Const(b) if b == is_and => {}
            Formula::Const(b) => return Formula::Const(b),
            Formula::And(inner) if is_and => out.extend(inner),
            Formula::Or(inner) if !is_and => out.extend(inner),
            g => out.push(g),
        }
    }
    match out.len() {
        0 => Formula::Const(is_and),
        1 => out.pop().expect("one element"),
        _ if is_and => Formula::And(out),
        _ => Formula::Or(out),
    }
}

const FORMULA_PREC_IMPLIES: u8 = 0;
const FORMULA_PREC_OR: u8 = 1;
const FORMULA_PREC_AND: u8 = 2;
const FORMULA_PREC_CMP: u8 = 3;
const FORMULA_PREC_NOT: u8 = 4;
const FORMULA_PREC_ATOM: u8 = 5;

impl Formula {
    fn prec(&self) -> u8 {
        match self {
            Formula::Implies(..) | Formula::Forall(..) | Formula::Exists(..) => FORMULA_PREC_IMPLIES,
            Formula::Or(ps) if ps.len() > 1 => FORMULA_PREC_OR,
            Formula::And(ps) if ps.len() > 1 => FORMULA_PREC_AND,
            Formula::Not(_) => FORMULA_PREC_NOT,
            Formula::Atom(Expr::Binary(op, _, _)) => match op {
                BinOp::Or => FORMULA_PREC_OR,
                BinOp::And => FORMULA_PREC_AND,
                _ => FORMULA_PREC_CMP,
            },
            Formula::Atom(Expr::Unary(..)) => FORMULA_PREC_NOT,
            _ => FORMULA_PREC_ATOM,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.prec() < min;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Formula::Const(b) => write!(f, "{b}")?,
            Formula::Atom(e) => write!(f, "{e}")?,
            Formula::Not(g) => {
                f.write_str("!")?;
                g.write(f, FORMULA_PREC_NOT)?;
            }
            Formula::And(ps) | Formula::Or(ps) => {
                let (sep, p, unit) = if matches!(self, Formula::And(_)) {
                    (" && ", FORMULA_PREC_AND, "true")
                } else {
                    (" || ", FORMULA_PREC_OR, "false")
                };
                if ps.is_empty() {
                    f.write_str(unit)?;
                }
                for (i, part) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    // single-element junctions print their element at the
                    // caller's precedence
                    part.write(f, if ps.len() == 1 { min } else { p + u8::from(i > 0) })?;
                }
            }
            Formula::Implies(a, b) => {
                a.write(f, FORMULA_PREC_OR)?;
                f.write_str(" ==> ")?;
                b.write(f, FORMULA_PREC_IMPLIES)?;
            }
            Formula::Forall(bd, body) | Formula::Exists(bd, body) => {
                let q = if matches!(self, Formula::Forall(..)) { "forall" } else { "exists" };
                write!(f, "{q} {}: {}. ", bd.var, bd.domain)?;
                body.write(f, FORMULA_PREC_IMPLIES)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, FORMULA_PREC_IMPLIES)
    }
}
