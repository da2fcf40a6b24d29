use std::sync::atomic::{AtomicU64, Ordering};

use super::compile::{compile, compile_term, Compiled};
use super::{Env, Formula, LogicError, Region};
use crate::dsl::{BinOp, Expr, UnOp};
use crate::value::{Type, Valuation};

/// Default cap on enumerated points per query.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Call counters, for checking how much solver work an algorithm does.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub checks: u64,
    pub models: u64,
    pub eliminations: u64,
}

/// Finite-domain decision procedure.
///
/// A query is refused when the number of free points it would visit, times
/// the sizes of all quantifier domains inside the formula, exceeds the
/// budget.
#[derive(Debug)]
pub struct Solver {
    budget: u64,
    checks: AtomicU64,
    models: AtomicU64,
    eliminations: AtomicU64,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(DEFAULT_BUDGET)
    }
}

impl Solver {
    pub fn new(budget: u64) -> Solver {
        Solver {
            budget,
            checks: AtomicU64::new(0),
            models: AtomicU64::new(0),
            eliminations: AtomicU64::new(0),
        }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn stats(&self) -> SolverStats {
        SolverStats {
            checks: self.checks.load(Ordering::Relaxed),
            models: self.models.load(Ordering::Relaxed),
            eliminations: self.eliminations.load(Ordering::Relaxed),
        }
    }

    pub fn check(&self, f: &Formula, env: &Env) -> Result<bool, LogicError> {
        self.checks.fetch_add(1, Ordering::Relaxed);
        Ok(self.first(f, env)?.is_some())
    }

    /// The lexicographically smallest satisfying valuation, in declaration
    /// order of `env` and domain order within each variable.
    pub fn model(&self, f: &Formula, env: &Env) -> Result<Valuation, LogicError> {
        self.find_model(f, env)?.ok_or(LogicError::Unsatisfiable)
    }

    pub fn find_model(&self, f: &Formula, env: &Env) -> Result<Option<Valuation>, LogicError> {
        self.models.fetch_add(1, Ordering::Relaxed);
        Ok(self.first(f, env)?.map(|p| env.valuation(&p)))
    }

    /// The set of points of `env` satisfying `f`.
    pub fn project(&self, f: &Formula, env: &Env) -> Result<Region, LogicError> {
        self.eliminations.fetch_add(1, Ordering::Relaxed);
        let Some(q) = self.prepare(f, env, false)? else {
            return Ok(Region::empty(env));
        };
        let mut bits = vec![false; env.product_size() as usize];
        q.scan(env.len(), |point, holds| {
            if holds {
                bits[env.index_of(point) as usize] = true;
            }
            true
        });
        Ok(Region::from_bitmap(env, &bits))
    }

    /// An equivalent quantifier-free formula over the free variables of `f`,
    /// in interval form.
    pub fn quantifier_eliminate(&self, f: &Formula, env: &Env) -> Result<Formula, LogicError> {
        let free = f.free_vars();
        if let Some(v) = free.iter().find(|v| env.get(v).is_none()) {
            return Err(LogicError::UndeclaredVariable(v.clone()));
        }
        let sub = env.restrict(free.iter().map(String::as_str));
        Ok(self.project(f, &sub)?.to_formula())
    }

    /// Minimum and maximum of an integer term over the points satisfying
    /// `constraint`, or `None` when there are none.
    pub fn term_bounds(&self, term: &Expr, constraint: &Formula, env: &Env) -> Result<Option<(i64, i64)>, LogicError> {
        let (t, ty) = compile_term(term, env)?;
        if ty != Type::Int {
            return Err(LogicError::Type(format!("`{term}` is not an integer term")));
        }
        let Some(q) = self.prepare(constraint, env, false)? else {
            return Ok(None);
        };
        let mut bounds: Option<(i64, i64)> = None;
        q.scan(env.len(), |point, holds| {
            if holds {
                let x = t.eval(point);
                bounds = Some(match bounds {
                    None => (x, x),
                    Some((lo, hi)) => (lo.min(x), hi.max(x)),
                });
            }
            true
        });
        Ok(bounds)
    }

    fn first(&self, f: &Formula, env: &Env) -> Result<Option<Vec<i64>>, LogicError> {
        let Some(q) = self.prepare(f, env, true)? else {
            return Ok(None);
        };
        let mut found = None;
        q.scan(env.len(), |point, holds| {
            if holds {
                found = Some(point[..env.len()].to_vec());
            }
            !holds
        });
        Ok(found)
    }

    /// Compiles `f` and computes the box to enumerate. With `pin_unused`,
    /// variables that do not occur in `f` are fixed to their least value,
    /// which is sound for existence and minimal-model queries.
    fn prepare(&self, f: &Formula, env: &Env, pin_unused: bool) -> Result<Option<Query>, LogicError> {
        let compiled = compile(f, env)?;
        let Some(mut bounds) = narrow(f, env) else {
            return Ok(None);
        };
        if pin_unused {
            let free = f.free_vars();
            for ((name, _), b) in env.iter().zip(bounds.iter_mut()) {
                if !free.contains(name) {
                    b.1 = b.0;
                }
            }
        }
        let size = bounds
            .iter()
            .fold(1u64, |acc, &(lo, hi)| acc.saturating_mul((hi - lo + 1) as u64))
            .saturating_mul(compiled.bound_work);
        if size > self.budget {
            return Err(LogicError::BudgetExceeded {
                size,
                budget: self.budget,
            });
        }
        Ok(Some(Query { compiled, bounds }))
    }
}

struct Query {
    compiled: Compiled,
    bounds: Vec<(i64, i64)>,
}

impl Query {
    /// Visits the box in lexicographic order, last variable fastest, until
    /// `visit` returns false.
    fn scan(&self, nfree: usize, mut visit: impl FnMut(&[i64], bool) -> bool) {
        let mut slots = vec![0i64; self.compiled.slot_count.max(nfree)];
        for (s, &(lo, _)) in slots.iter_mut().zip(&self.bounds) {
            *s = lo;
        }
        loop {
            let holds = self.compiled.eval(&mut slots);
            if !visit(&slots[..nfree], holds) {
                return;
            }
            let mut k = nfree;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if slots[k] < self.bounds[k].1 {
                    slots[k] += 1;
                    break;
                }
                slots[k] = self.bounds[k].0;
            }
        }
    }
}

/// Intersects the domains with the bounds implied by top-level conjuncts of
/// the forms `x op c`, `c op x`, `b` and `!b`. `None` means some variable
/// has no admissible value left.
fn narrow(f: &Formula, env: &Env) -> Option<Vec<(i64, i64)>> {
    let mut bounds: Vec<(i64, i64)> = env.iter().map(|(_, d)| d.bounds()).collect();
    let mut conjuncts = Vec::new();
    collect_conjuncts(f, &mut conjuncts);
    for c in conjuncts {
        if *c == Formula::Const(false) {
            return None;
        }
        let Some((name, lo, hi)) = interval_of(c) else {
            continue;
        };
        if let Some(k) = env.position(name) {
            let b = &mut bounds[k];
            b.0 = b.0.max(lo);
            b.1 = b.1.min(hi);
            if b.0 > b.1 {
                return None;
            }
        }
    }
    Some(bounds)
}

fn collect_conjuncts<'f>(f: &'f Formula, out: &mut Vec<&'f Formula>) {
    match f {
        Formula::And(ps) => ps.iter().for_each(|p| collect_conjuncts(p, out)),
        _ => out.push(f),
    }
}

fn interval_of(f: &Formula) -> Option<(&str, i64, i64)> {
    match f {
        Formula::Atom(Expr::Var(b)) => Some((b, 1, 1)),
        Formula::Atom(Expr::Unary(UnOp::Not, inner)) => match &**inner {
            Expr::Var(b) => Some((b, 0, 0)),
            _ => None,
        },
        Formula::Not(inner) => match &**inner {
            Formula::Atom(Expr::Var(b)) => Some((b, 0, 0)),
            _ => None,
        },
        Formula::Atom(Expr::Binary(op, a, b)) => match (&**a, &**b) {
            (Expr::Var(x), Expr::Int(c)) => cmp_interval(*op, *c).map(|(lo, hi)| (x.as_str(), lo, hi)),
            (Expr::Int(c), Expr::Var(x)) => cmp_interval(flip(*op)?, *c).map(|(lo, hi)| (x.as_str(), lo, hi)),
            (Expr::Var(x), Expr::Bool(v)) | (Expr::Bool(v), Expr::Var(x)) if *op == BinOp::Eq => {
                Some((x.as_str(), *v as i64, *v as i64))
            }
            _ => None,
        },
        _ => None,
    }
}

fn cmp_interval(op: BinOp, c: i64) -> Option<(i64, i64)> {
    Some(match op {
        BinOp::Lt => (i64::MIN, c.checked_sub(1)?),
        BinOp::Le => (i64::MIN, c),
        BinOp::Gt => (c.checked_add(1)?, i64::MAX),
        BinOp::Ge => (c, i64::MAX),
        BinOp::Eq => (c, c),
        _ => return None,
    })
}

/// The operator with its operands swapped: `c op x` iff `x flip(op) c`.
fn flip(op: BinOp) -> Option<BinOp> {
    Some(match op {
        BinOp::Lt => BinOp::Gt,
        BinOp::Le => BinOp::Ge,
        BinOp::Gt => BinOp::Lt,
        BinOp::Ge => BinOp::Le,
        BinOp::Eq => BinOp::Eq,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_expr;
    use crate::value::Domain;

    fn f(src: &str) -> Formula {
        Formula::from_expr(&parse_expr(src).unwrap())
    }

    fn salary() -> Env {
        Env::new().with("s", Domain::int(0, 100_000))
    }

    #[test]
    fn contradiction_is_unsat() {
        let s = Solver::default();
        assert!(!s.check(&f("s < 10000 && s >= 10000"), &salary()).unwrap());
        assert_eq!(s.model(&f("s < 10000 && s >= 10000"), &salary()), Err(LogicError::Unsatisfiable));
    }

    #[test]
    fn nonlinear_unsat() {
        let env = Env::new().with("x", Domain::int(0, 3));
        assert!(!Solver::default().check(&f("x * x == 2"), &env).unwrap());
    }

    #[test]
    fn minimal_models() {
        let s = Solver::default();
        assert_eq!(s.model(&f("s >= 10000 && 0 <= s && s <= 100000"), &salary()).unwrap().to_string(), "s=10000");
        let b = Env::new().with("x", Domain::Bool);
        assert_eq!(s.model(&Formula::Const(true), &b).unwrap().to_string(), "x=false");
        let fl = Env::new().with("flights", Domain::int(0, 100));
        assert_eq!(s.model(&f("flights >= 25 && flights <= 29"), &fl).unwrap().to_string(), "flights=25");
        assert_eq!(s.stats().models, 3);
    }

    #[test]
    fn projection_of_identity() {
        let env = Env::new().with("y", Domain::int(0, 3));
        let q = Formula::exists("x", Domain::int(0, 3), f("x == y"));
        assert_eq!(Solver::default().quantifier_eliminate(&q, &env).unwrap().to_string(), "true");
    }

    #[test]
    fn undeclared_variable() {
        assert_eq!(
            Solver::default().check(&f("z > 0"), &salary()),
            Err(LogicError::UndeclaredVariable("z".into()))
        );
    }

    #[test]
    fn budget_counts_binders() {
        let s = Solver::new(1000);
        let q = Formula::forall("t", Domain::int(0, 99), f("s + t >= 0"));
        let env = Env::new().with("s", Domain::int(0, 99));
        assert!(matches!(s.check(&q, &env), Err(LogicError::BudgetExceeded { size: 10_000, .. })));
    }

    #[test]
    fn narrowing_respects_flipped_comparisons() {
        let s = Solver::default();
        assert_eq!(s.model(&f("10 < s && s * 2 > 50"), &salary()).unwrap().to_string(), "s=26");
        let b = Env::new().with("a", Domain::Bool).with("b", Domain::Bool);
        assert_eq!(s.model(&f("a && !b"), &b).unwrap().to_string(), "a=true b=false");
    }

    #[test]
    fn term_bounds_under_constraint() {
        let env = Env::new().with("x", Domain::int(0, 15));
        let t = parse_expr("x % 4").unwrap();
        assert_eq!(Solver::default().term_bounds(&t, &f("x >= 2"), &env).unwrap(), Some((0, 3)));
        assert_eq!(Solver::default().term_bounds(&t, &Formula::Const(false), &env).unwrap(), None);
    }
}
