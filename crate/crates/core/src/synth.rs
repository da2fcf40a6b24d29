//! Minimiser synthesis from a symbolic characterisation.
//!
//! For each input `i` (distributed) or for all inputs at once (monolithic)
//! the synthesiser repeats:
//!
//! 1. take the least admissible input `r` not yet covered (`model`);
//! 2. build the formula stating that a value `x` of the focused inputs
//!    behaves like `r` in every context of the remaining inputs, and
//!    eliminate the context quantifiers, which yields the guard of the class
//!    of `r`;
//! 3. record `(guard, r)` and exclude the guard from further search.
//!
//! Because each model is the least uncovered point, representatives are
//! class minima and rows come out in ascending representative order.
//!
//! Two values are considered equivalent in a context only if either both or
//! neither satisfy the precondition there, and when both do, the outputs are
//! equal. A value that never satisfies the precondition is outside every
//! class and has no row.

use std::fmt;

use rayon::prelude::*;

use crate::dsl::{BinOp, EvalError, Expr, Input, Interpreter, Program};
use crate::logic::{Env, Formula, LogicError, Region, Solver};
use crate::symexec::SymbolicCharacterisation;
use crate::value::{Valuation, Value};

/// Default limit on classes per table.
pub const DEFAULT_CLASS_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One table over all inputs jointly.
    Monolithic,
    /// One table per input, applied independently.
    Distributed,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Monolithic => "monolithic",
            Mode::Distributed => "distributed",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "monolithic" => Ok(Mode::Monolithic),
            "distributed" => Ok(Mode::Distributed),
            _ => Err(format!("unknown mode `{s}` (expected `monolithic` or `distributed`)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("more than {cap} classes for `{input}`")]
    ClassCapExceeded { input: String, cap: usize },
    #[error("no guard matches {0}")]
    NoMatchingGuard(Valuation),
    #[error(transparent)]
    Input(#[from] EvalError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// A class guard and the representative that every member is mapped to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedRepresentative {
    pub guard: Region,
    /// Values of the table's columns, in column order.
    pub representative: Vec<Value>,
}

/// A decision table over some of the inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    /// Indices into the program inputs.
    pub columns: Vec<usize>,
    pub rows: Vec<GuardedRepresentative>,
}

impl Table {
    /// The representative for a point given as ordinals of the columns.
    pub fn lookup(&self, point: &[i64]) -> Option<&[Value]> {
        self.rows
            .iter()
            .find(|r| r.guard.contains(point))
            .map(|r| r.representative.as_slice())
    }

    pub fn class_count(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Minimiser {
    pub mode: Mode,
    pub program: String,
    pub inputs: Vec<Input>,
    pub precondition: Formula,
    pub tables: Vec<Table>,
}

impl Minimiser {
    pub fn table_for(&self, input: &str) -> Option<&Table> {
        let k = self.inputs.iter().position(|i| i.name == input)?;
        self.tables.iter().find(|t| t.columns.contains(&k))
    }

    /// Maps an admissible input to its representative.
    pub fn apply(&self, v: &Valuation) -> Result<Valuation, SynthError> {
        let point = self.admit(v)?;
        let mut out = vec![Value::Int(0); self.inputs.len()];
        for t in &self.tables {
            let sub: Vec<i64> = t.columns.iter().map(|&k| point[k]).collect();
            let rep = t.lookup(&sub).ok_or_else(|| SynthError::NoMatchingGuard(v.clone()))?;
            for (&k, &x) in t.columns.iter().zip(rep) {
                out[k] = x;
            }
        }
        Ok(self.inputs.iter().map(|i| i.name.clone()).zip(out).collect())
    }

    fn admit(&self, v: &Valuation) -> Result<Vec<i64>, SynthError> {
        let mut point = Vec::with_capacity(self.inputs.len());
        for i in &self.inputs {
            let x = v.get(&i.name).ok_or_else(|| EvalError::MissingInput(i.name.clone()))?;
            if !i.domain.contains(x) {
                return Err(EvalError::OutOfDomain {
                    name: i.name.clone(),
                    value: x,
                }
                .into());
            }
            point.push(x.ordinal());
        }
        if let Some((name, _)) = v.iter().find(|(n, _)| !self.inputs.iter().any(|i| i.name == *n)) {
            return Err(EvalError::UnknownInput(name.to_string()).into());
        }
        if self.precondition != Formula::Const(true) && !self.admits(&point)? {
            return Err(EvalError::PreconditionViolated(v.clone()).into());
        }
        Ok(point)
    }

    fn admits(&self, point: &[i64]) -> Result<bool, SynthError> {
        let env = Env::from_inputs(&self.inputs);
        let value = |name: &str| {
            let k = env.position(name)?;
            Some(Expr::value(Value::from_ordinal(self.inputs[k].domain.ty(), point[k])))
        };
        if let Some(e) = self.precondition.to_expr() {
            if let Expr::Bool(b) = e.substitute_with(&value).fold() {
                return Ok(b);
            }
        }
        let pinned = Formula::and(
            std::iter::once(self.precondition.clone())
                .chain(env.iter().map(|(n, _)| Formula::Atom(Expr::binary(BinOp::Eq, Expr::var(n), value(n).expect("declared"))))),
        );
        Ok(Solver::default().check(&pinned, &env)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthOptions {
    pub class_cap: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            class_cap: DEFAULT_CLASS_CAP,
        }
    }
}

pub fn synthesize_distributed(program: &Program, gamma: &SymbolicCharacterisation) -> Result<Minimiser, SynthError> {
    synthesize(program, gamma, Mode::Distributed, &Solver::default(), &SynthOptions::default())
}

pub fn synthesize_monolithic(program: &Program, gamma: &SymbolicCharacterisation) -> Result<Minimiser, SynthError> {
    synthesize(program, gamma, Mode::Monolithic, &Solver::default(), &SynthOptions::default())
}

pub fn synthesize(
    program: &Program,
    gamma: &SymbolicCharacterisation,
    mode: Mode,
    solver: &Solver,
    options: &SynthOptions,
) -> Result<Minimiser, SynthError> {
    let tables = match mode {
        Mode::Monolithic => vec![table(gamma, (0..program.inputs.len()).collect(), solver, options)?],
        Mode::Distributed => (0..program.inputs.len())
            .into_par_iter()
            .map(|i| table(gamma, vec![i], solver, options))
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(Minimiser {
        mode,
        program: program.name.clone(),
        inputs: program.inputs.clone(),
        precondition: gamma.precondition.clone(),
        tables,
    })
}

fn table(
    gamma: &SymbolicCharacterisation,
    columns: Vec<usize>,
    solver: &Solver,
    options: &SynthOptions,
) -> Result<Table, SynthError> {
    let search_env = focus_first_env(gamma, &columns);
    let mut gamma_conj = vec![gamma.reachable()];
    let mut rows = Vec::new();
    while let Some(m) = solver.find_model(&Formula::and(gamma_conj.iter().cloned()), &search_env)? {
        if rows.len() == options.class_cap {
            let names: Vec<&str> = columns.iter().map(|&k| gamma.inputs[k].name.as_str()).collect();
            return Err(SynthError::ClassCapExceeded {
                input: names.join(","),
                cap: options.class_cap,
            });
        }
        let representative: Vec<Value> = columns
            .iter()
            .map(|&k| m.get(&gamma.inputs[k].name).expect("model binds every input"))
            .collect();
        let guard = class_guard(gamma, &columns, &representative, solver)?;
        debug_assert!(guard.contains(&representative.iter().map(|v| v.ordinal()).collect::<Vec<_>>()));
        gamma_conj.push(Formula::not(guard.to_formula()));
        rows.push(GuardedRepresentative { guard, representative });
    }
    Ok(Table { columns, rows })
}

/// The inputs with the focused ones first, so that minimal models minimise
/// the focused coordinates before anything else.
fn focus_first_env(gamma: &SymbolicCharacterisation, columns: &[usize]) -> Env {
    let order = columns
        .iter()
        .copied()
        .chain((0..gamma.inputs.len()).filter(|k| !columns.contains(k)));
    Env::from_inputs(order.map(|k| &gamma.inputs[k]))
}

/// The formula, free in the focused inputs, that holds of exactly the points
/// equivalent to `rep`:
///
/// ```text
/// forall w. (Pre(x,w) || Pre(rep,w)) ==> Pre(x,w) && Pre(rep,w)
///           && OR_l (PC_l(x,w) && OR_k (PC_k(rep,w) && e_l(x,w) == e_k(rep,w)))
/// ```
///
/// where `w` ranges over the other inputs. The output symbol of the
/// characterisation is eliminated by substituting each leaf's output term,
/// and the second copy of the focused inputs is fixed to `rep`.
pub fn class_formula(gamma: &SymbolicCharacterisation, columns: &[usize], rep: &[Value]) -> Formula {
    let pin = |f: &Formula| -> Formula {
        columns
            .iter()
            .zip(rep)
            .fold(f.clone(), |acc, (&k, &v)| acc.substitute(&gamma.inputs[k].name, &Expr::value(v)))
    };
    let pin_expr = |e: &Expr| -> Expr {
        e.substitute_with(&|n: &str| {
            columns
                .iter()
                .zip(rep)
                .find(|(&k, _)| gamma.inputs[k].name == n)
                .map(|(_, &v)| Expr::value(v))
        })
        .fold()
    };
    let pre = gamma.precondition.clone();
    let pre_rep = pin(&pre).simplify();
    let pinned: Vec<(Formula, Expr)> = gamma
        .leaves
        .iter()
        .map(|l| (pin(&l.path_condition).simplify(), pin_expr(&l.output)))
        .filter(|(pc, _)| *pc != Formula::Const(false))
        .collect();
    let same_output = Formula::or(gamma.leaves.iter().map(|l| {
        Formula::and([
            l.path_condition.clone(),
            Formula::or(pinned.iter().map(|(pc, e)| {
                Formula::and([
                    pc.clone(),
                    Formula::Atom(Expr::binary(BinOp::Eq, l.output.clone(), e.clone())),
                ])
            })),
        ])
    }));
    let body = Formula::implies(
        Formula::or([pre.clone(), pre_rep.clone()]),
        Formula::and([pre, pre_rep, same_output]),
    );
    let context = (0..gamma.inputs.len())
        .filter(|k| !columns.contains(k))
        .map(|k| &gamma.inputs[k]);
    Formula::forall_inputs(context, body).simplify()
}

/// Eliminates the context quantifiers from [`class_formula`], giving the
/// class of `rep` as a region over the focused inputs.
pub fn class_guard(
    gamma: &SymbolicCharacterisation,
    columns: &[usize],
    rep: &[Value],
    solver: &Solver,
) -> Result<Region, LogicError> {
    let env = Env::from_inputs(columns.iter().map(|&k| &gamma.inputs[k]));
    solver.project(&class_formula(gamma, columns, rep), &env)
}

/// The distributed representative of a single admissible input, computed
/// with one class extraction and one model query per input rather than by
/// building whole tables.
pub fn online_representative(
    program: &Program,
    gamma: &SymbolicCharacterisation,
    v: &Valuation,
) -> Result<Valuation, SynthError> {
    online_representative_with(program, gamma, v, &Solver::default())
}

pub fn online_representative_with(
    program: &Program,
    gamma: &SymbolicCharacterisation,
    v: &Valuation,
    solver: &Solver,
) -> Result<Valuation, SynthError> {
    Interpreter::default().admit(program, v)?;
    let reach = gamma.reachable();
    let mut out = Valuation::new();
    for (k, input) in program.inputs.iter().enumerate() {
        let x = v.get(&input.name).expect("admitted valuations bind every input");
        let guard = class_guard(gamma, &[k], &[x], solver)?;
        let env = focus_first_env(gamma, &[k]);
        let m = solver.model(&Formula::and([reach.clone(), guard.to_formula()]), &env)?;
        out.insert(input.name.clone(), m.get(&input.name).expect("model binds every input"));
    }
    Ok(out)
}

/// The representative of a single admissible input in either mode. The
/// monolithic representative is the least member of the input's kernel
/// class.
pub fn online_representative_in(
    program: &Program,
    gamma: &SymbolicCharacterisation,
    v: &Valuation,
    mode: Mode,
    solver: &Solver,
) -> Result<Valuation, SynthError> {
    if mode == Mode::Distributed {
        return online_representative_with(program, gamma, v, solver);
    }
    Interpreter::default().admit(program, v)?;
    let columns: Vec<usize> = (0..program.inputs.len()).collect();
    let values: Vec<Value> = program
        .inputs
        .iter()
        .map(|i| v.get(&i.name).expect("admitted valuations bind every input"))
        .collect();
    let guard = class_guard(gamma, &columns, &values, solver)?;
    let env = focus_first_env(gamma, &columns);
    let m = solver.model(&Formula::and([gamma.reachable(), guard.to_formula()]), &env)?;
    Ok(program
        .inputs
        .iter()
        .map(|i| (i.name.clone(), m.get(&i.name).expect("model binds every input")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::symexec::symbolic_execute;

    fn setup(src: &str) -> (Program, SymbolicCharacterisation) {
        let p = parse(src).unwrap();
        let g = symbolic_execute(&p, 64).unwrap();
        (p, g)
    }

    fn guards(t: &Table) -> Vec<String> {
        t.rows
            .iter()
            .map(|r| {
                let reps: Vec<String> = r.representative.iter().map(Value::to_string).collect();
                format!("{} -> {}", r.guard.to_formula(), reps.join(","))
            })
            .collect()
    }

    #[test]
    fn constant_program_has_one_class() {
        let (p, g) = setup("program c(x: int[0..9]) -> int { return 7; }");
        let m = synthesize_distributed(&p, &g).unwrap();
        assert_eq!(guards(&m.tables[0]), ["true -> 0"]);
        let v = online_representative(&p, &g, &Valuation::new().with("x", 5)).unwrap();
        assert_eq!(v.to_string(), "x=0");
    }

    #[test]
    fn benefits_class_formula_eliminates_to_interval() {
        let (_, g) = setup(
            "program benefits(salary: int[0..100000]) -> bool {
                if (salary < 10000) { return true; } else { return false; }
            }",
        );
        let f = crate::logic::quantifier_eliminate(&class_formula(&g, &[0], &[Value::Int(0)]), &g.env()).unwrap();
        assert_eq!(f.to_string(), "salary <= 9999");
    }

    #[test]
    fn representatives_are_coordinate_minima_under_precondition() {
        // b = 0 only pairs with a = 1, so the least model has b = 5 while
        // b = 0 is still admissible
        let (p, g) = setup(
            "program q(a: int[0..1], b: int[0..9]) -> bool requires a == 1 || b >= 5; {
                return b > 2;
            }",
        );
        let m = synthesize_distributed(&p, &g).unwrap();
        assert_eq!(
            guards(&m.tables[1]),
            ["b <= 2 -> 0", "3 <= b && b <= 4 -> 3", "5 <= b -> 5"]
        );
        assert_eq!(guards(&m.tables[0]), ["a == 0 -> 0", "a == 1 -> 1"]);
    }

    #[test]
    fn apply_and_cap() {
        let (p, g) = setup("program id(x: int[0..3]) -> int { return x; }");
        let m = synthesize_monolithic(&p, &g).unwrap();
        assert_eq!(m.tables[0].class_count(), 4);
        assert_eq!(m.apply(&Valuation::new().with("x", 2)).unwrap().to_string(), "x=2");
        assert!(matches!(
            m.apply(&Valuation::new().with("x", 9)),
            Err(SynthError::Input(EvalError::OutOfDomain { .. }))
        ));
        let capped = synthesize(&p, &g, Mode::Distributed, &Solver::default(), &SynthOptions { class_cap: 3 });
        assert_eq!(capped, Err(SynthError::ClassCapExceeded { input: "x".into(), cap: 3 }));
    }

    #[test]
    fn online_uses_one_elimination_and_one_model_per_input() {
        let (p, g) = setup(
            "program s(a: int[0..3], b: int[0..3], c: bool) -> int {
                if (c) { return a + b; }
                return a;
            }",
        );
        let solver = Solver::default();
        let v = Valuation::new().with("a", 2).with("b", 3).with("c", false);
        let r = online_representative_with(&p, &g, &v, &solver).unwrap();
        assert_eq!(r.to_string(), "a=2 b=3 c=false");
        let st = solver.stats();
        assert_eq!((st.eliminations, st.models), (3, 3));
    }
}
