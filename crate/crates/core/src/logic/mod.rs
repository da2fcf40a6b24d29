//! Formulas over bounded symbols and an enumeration-based solver.
//!
//! Every variable ranges over a finite [`Domain`], so satisfiability, model
//! extraction and quantifier elimination are all decided by walking the
//! product of the domains. The solver narrows the walk using interval
//! constraints it finds among the top-level conjuncts and stops early
//! wherever the answer is settled.
//!
//! ```
//! use datamin::dsl::parse_expr;
//! use datamin::logic::{self, Env, Formula};
//! use datamin::Domain;
//!
//! let env = Env::new().with("s", Domain::int(0, 100_000));
//! let f = Formula::from_expr(&parse_expr("s >= 10000").unwrap());
//! let m = logic::model(&f, &env).unwrap();
//! assert_eq!(m.to_string(), "s=10000");
//! ```

pub(crate) mod compile;
mod formula;
mod region;
mod smtlib;
mod solver;

pub use formula::{Binder, Formula};
pub use region::{Interval, Region};
pub use smtlib::to_smtlib;
pub use solver::{Solver, SolverStats, DEFAULT_BUDGET};

use crate::dsl::Input;
use crate::value::{Domain, Valuation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("variable `{0}` is not declared")]
    UndeclaredVariable(String),
    #[error("ill-typed formula: {0}")]
    Type(String),
    #[error("formula is unsatisfiable")]
    Unsatisfiable,
    #[error("enumeration of {size} points exceeds the budget of {budget}")]
    BudgetExceeded { size: u64, budget: u64 },
}

/// Declarations of the free variables of a formula, in order.
///
/// The order fixes the lexicographic order used for models and the variable
/// order of regions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Env {
    vars: Vec<(String, Domain)>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn from_inputs<'a>(inputs: impl IntoIterator<Item = &'a Input>) -> Env {
        Env::from_pairs(inputs.into_iter().map(|i| (i.name.clone(), i.domain)))
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Domain)>) -> Env {
        let mut env = Env::new();
        for (n, d) in pairs {
            env.declare(n, d);
        }
        env
    }

    /// Declares `name`, replacing an earlier declaration of the same name.
    pub fn declare(&mut self, name: impl Into<String>, domain: Domain) {
        let name = name.into();
        match self.vars.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = domain,
            None => self.vars.push((name, domain)),
        }
    }

    pub fn with(mut self, name: impl Into<String>, domain: Domain) -> Env {
        self.declare(name, domain);
        self
    }

    pub fn get(&self, name: &str) -> Option<Domain> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, d)| *d)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|(n, _)| n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Domain)> {
        self.vars.iter().map(|(n, d)| (n.as_str(), *d))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// The sub-environment of the given variables, kept in this order.
    pub fn restrict<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Env {
        let keep: Vec<&str> = names.into_iter().collect();
        Env {
            vars: self.vars.iter().filter(|(n, _)| keep.contains(&n.as_str())).cloned().collect(),
        }
    }

    /// Number of points in the product of the domains, saturating.
    pub fn product_size(&self) -> u64 {
        self.vars
            .iter()
            .fold(1u64, |acc, (_, d)| acc.saturating_mul(d.cardinality()))
    }

    /// Lexicographic index of an ordinal tuple.
    pub fn index_of(&self, point: &[i64]) -> u64 {
        self.vars.iter().zip(point).fold(0u64, |acc, ((_, d), &x)| {
            let (lo, _) = d.bounds();
            acc * d.cardinality() + (x - lo) as u64
        })
    }

    pub fn valuation(&self, point: &[i64]) -> Valuation {
        self.vars
            .iter()
            .zip(point)
            .map(|((n, d), &o)| (n.clone(), crate::value::Value::from_ordinal(d.ty(), o)))
            .collect()
    }
}

/// [`Solver::check`] with the default budget.
pub fn check(f: &Formula, env: &Env) -> Result<bool, LogicError> {
    Solver::default().check(f, env)
}

/// [`Solver::model`] with the default budget.
pub fn model(f: &Formula, env: &Env) -> Result<Valuation, LogicError> {
    Solver::default().model(f, env)
}

/// [`Solver::quantifier_eliminate`] with the default budget.
pub fn quantifier_eliminate(f: &Formula, env: &Env) -> Result<Formula, LogicError> {
    Solver::default().quantifier_eliminate(f, env)
}
