//! Symbolic execution into path conditions and output terms.
//!
//! Every input starts as its own symbol. Statements update a symbolic store
//! by substituting the current store into the right-hand side, so at a
//! `return` the output is a term over input symbols only. Branches fork the
//! path condition and are kept only when the solver finds them feasible
//! under the precondition. Loops are unrolled one iteration at a time up to
//! a fixed bound; a path that still wants to iterate at the bound is an
//! error.
//!
//! ```
//! use datamin::dsl::parse;
//! use datamin::symexec::symbolic_execute;
//!
//! let p = parse("program f(x: int[0..9]) -> bool { return x < 3; }").unwrap();
//! let gamma = symbolic_execute(&p, 8).unwrap();
//! assert_eq!(gamma.leaves.len(), 1);
//! assert_eq!(gamma.leaves[0].output.to_string(), "x < 3");
//! ```

use serde::Serialize;

use crate::dsl::{BinOp, EvalError, Expr, Input, Program, Stmt};
use crate::logic::compile::{compile, compile_term, Compiled, Term};
use crate::logic::{Env, Formula, LogicError, Solver};
use crate::value::{Type, Valuation, Value};

/// Default per-loop unroll bound.
pub const DEFAULT_UNROLL: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymexecError {
    #[error("a loop may iterate more than {bound} times under path condition `{path}`")]
    UnrollBoundExceeded { bound: u64, path: Formula },
    #[error("division by zero is reachable in `{expr}` under path condition `{path}`")]
    PossibleDivisionByZero { expr: Expr, path: Formula },
    #[error("input {0} satisfies no leaf path condition")]
    NoMatchingLeaf(Valuation),
    #[error(transparent)]
    Input(#[from] EvalError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// One terminal path: the condition under which it is taken and the output
/// it returns, both over input symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicLeaf {
    pub path_condition: Formula,
    pub output: Expr,
}

/// The precondition and the leaves of the symbolic execution tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicCharacterisation {
    pub program: String,
    pub inputs: Vec<Input>,
    pub output: Type,
    pub precondition: Formula,
    pub leaves: Vec<SymbolicLeaf>,
}

impl SymbolicCharacterisation {
    pub fn env(&self) -> Env {
        Env::from_inputs(&self.inputs)
    }

    /// `Pre ∧ (PC_1 ∨ … ∨ PC_n)`: the inputs on which the program runs.
    pub fn reachable(&self) -> Formula {
        Formula::and([
            self.precondition.clone(),
            Formula::or(self.leaves.iter().map(|l| l.path_condition.clone())),
        ])
        .simplify()
    }

    /// `Pre ∧ ⋁ (PC_l ∧ out == e_l)`, relating inputs to the output symbol
    /// `out`.
    pub fn relation(&self, out: &str) -> Formula {
        let o = Expr::var(out);
        Formula::and([
            self.precondition.clone(),
            Formula::or(self.leaves.iter().map(|l| {
                Formula::and([
                    l.path_condition.clone(),
                    Formula::Atom(Expr::binary(BinOp::Eq, o.clone(), l.output.clone())),
                ])
            })),
        ])
    }

    /// Output of the leaf whose path condition `v` satisfies.
    pub fn concretise(&self, v: &Valuation) -> Result<Value, SymexecError> {
        self.concretiser()?.concretise(v)
    }

    /// Compiles the leaves once for repeated concretisation.
    pub fn concretiser(&self) -> Result<Concretiser<'_>, SymexecError> {
        let env = self.env();
        let precondition = compile(&self.precondition, &env)?;
        let leaves = self
            .leaves
            .iter()
            .map(|l| Ok((compile(&l.path_condition, &env)?, compile_term(&l.output, &env)?.0)))
            .collect::<Result<Vec<_>, LogicError>>()?;
        let slots = leaves
            .iter()
            .map(|(c, _)| c.slot_count)
            .chain([precondition.slot_count, env.len()])
            .max()
            .unwrap_or(0);
        Ok(Concretiser {
            gamma: self,
            precondition,
            leaves,
            slots: vec![0; slots],
        })
    }

    /// JSON rendering of the leaves, for debugging.
    pub fn dump_json(&self) -> String {
        #[derive(Serialize)]
        struct Leaf {
            path_condition: String,
            output: String,
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            program: &'a str,
            precondition: String,
            leaves: Vec<Leaf>,
        }
        let dump = Dump {
            program: &self.program,
            precondition: self.precondition.to_string(),
            leaves: self
                .leaves
                .iter()
                .map(|l| Leaf {
                    path_condition: l.path_condition.to_string(),
                    output: l.output.to_string(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dump).expect("dump is serialisable")
    }
}

/// A characterisation compiled for evaluation at concrete points.
pub struct Concretiser<'g> {
    gamma: &'g SymbolicCharacterisation,
    precondition: Compiled,
    leaves: Vec<(Compiled, Term)>,
    slots: Vec<i64>,
}

impl Concretiser<'_> {
    pub fn concretise(&mut self, v: &Valuation) -> Result<Value, SymexecError> {
        for (k, input) in self.gamma.inputs.iter().enumerate() {
            let x = v.get(&input.name).ok_or_else(|| EvalError::MissingInput(input.name.clone()))?;
            if !input.domain.contains(x) {
                return Err(EvalError::OutOfDomain {
                    name: input.name.clone(),
                    value: x,
                }
                .into());
            }
            self.slots[k] = x.ordinal();
        }
        if !self.precondition.eval(&mut self.slots) {
            return Err(EvalError::PreconditionViolated(v.clone()).into());
        }
        for (pc, out) in &self.leaves {
            if pc.eval(&mut self.slots) {
                return Ok(Value::from_ordinal(self.gamma.output, out.eval(&self.slots)));
            }
        }
        Err(SymexecError::NoMatchingLeaf(v.clone()))
    }
}

/// Symbolically executes `program`, unrolling each loop at most `unroll`
/// times along any path.
pub fn symbolic_execute(program: &Program, unroll: u64) -> Result<SymbolicCharacterisation, SymexecError> {
    symbolic_execute_with(program, unroll, &Solver::default())
}

pub fn symbolic_execute_with(
    program: &Program,
    unroll: u64,
    solver: &Solver,
) -> Result<SymbolicCharacterisation, SymexecError> {
    let env = Env::from_inputs(&program.inputs);
    let precondition = Formula::from_expr(&program.precondition.fold()).simplify();
    let mut engine = Engine {
        env: &env,
        solver,
        unroll,
        precondition: precondition.clone(),
        leaves: Vec::new(),
    };
    // the precondition itself must not divide by zero on admissible inputs
    engine.check_divisions(&program.precondition, &[])?;
    let state = State {
        store: program.inputs.iter().map(|i| (i.name.clone(), Expr::var(i.name.clone()))).collect(),
        marks: vec![program.inputs.len()],
        path: Vec::new(),
    };
    if solver.check(&precondition, &env)? {
        engine.run(state, vec![Cont::Block(&program.body)])?;
    }
    Ok(SymbolicCharacterisation {
        program: program.name.clone(),
        inputs: program.inputs.clone(),
        output: program.output,
        precondition,
        leaves: engine.leaves,
    })
}

#[derive(Clone)]
struct State {
    store: Vec<(String, Expr)>,
    marks: Vec<usize>,
    path: Vec<Formula>,
}

impl State {
    fn eval(&self, e: &Expr) -> Expr {
        e.substitute_with(&|n: &str| self.store.iter().rev().find(|(v, _)| v == n).map(|(_, x)| x.clone()))
            .fold()
    }

    fn path_formula(&self) -> Formula {
        Formula::and(self.path.iter().cloned()).simplify()
    }
}

/// Work remaining on a path, innermost first when popped from the end.
#[derive(Clone)]
enum Cont<'p> {
    Block(&'p [Stmt]),
    CloseScope,
    Loop { cond: &'p Expr, body: &'p [Stmt], done: u64 },
}

struct Engine<'a> {
    env: &'a Env,
    solver: &'a Solver,
    unroll: u64,
    precondition: Formula,
    leaves: Vec<SymbolicLeaf>,
}

impl<'a> Engine<'a> {
    fn feasible(&self, path: &[Formula], extra: &Formula) -> Result<bool, SymexecError> {
        if let Formula::Const(b) = extra {
            return Ok(*b);
        }
        let f = Formula::and(
            std::iter::once(self.precondition.clone())
                .chain(path.iter().cloned())
                .chain([extra.clone()]),
        );
        Ok(self.solver.check(&f, self.env)?)
    }

    /// Rejects `e` (already over input symbols) if some admissible input on
    /// `path` divides by zero while evaluating it. `&&` and `||` only
    /// evaluate their right operand when the left one does not decide.
    fn check_divisions(&self, e: &Expr, path: &[Formula]) -> Result<(), SymexecError> {
        match e {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(_) => Ok(()),
            Expr::Unary(_, a) => self.check_divisions(a, path),
            Expr::Binary(op @ (BinOp::And | BinOp::Or), a, b) => {
                self.check_divisions(a, path)?;
                let left = Formula::from_expr(a);
                let guard = if *op == BinOp::And { left } else { Formula::not(left) };
                let mut inner = path.to_vec();
                inner.push(guard);
                self.check_divisions(b, &inner)
            }
            Expr::Binary(op, a, b) => {
                self.check_divisions(a, path)?;
                self.check_divisions(b, path)?;
                if matches!(op, BinOp::Div | BinOp::Rem) {
                    let zero = Formula::Atom(Expr::binary(BinOp::Eq, (**b).clone(), Expr::Int(0))).simplify();
                    if self.feasible(path, &zero)? {
                        return Err(SymexecError::PossibleDivisionByZero {
                            expr: e.clone(),
                            path: Formula::and(path.iter().cloned()).simplify(),
                        });
                    }
                }
                Ok(())
            }
        }
    }

    /// Substitutes the store into `e` after checking it for reachable
    /// division by zero.
    fn eval(&self, state: &State, e: &Expr) -> Result<Expr, SymexecError> {
        let unfolded = e.substitute_with(&|n: &str| {
            state.store.iter().rev().find(|(v, _)| v == n).map(|(_, x)| x.clone())
        });
        self.check_divisions(&unfolded, &state.path)?;
        Ok(state.eval(e))
    }

    /// Splits `state` on `cond`, returning the feasible sides.
    fn branch(&self, state: &State, cond: &Expr) -> Result<(Option<State>, Option<State>), SymexecError> {
        let c = Formula::from_expr(&self.eval(state, cond)?).simplify();
        let not_c = Formula::not(c.clone()).simplify();
        let side = |f: Formula| -> Result<Option<State>, SymexecError> {
            if !self.feasible(&state.path, &f)? {
                return Ok(None);
            }
            let mut s = state.clone();
            if f != Formula::Const(true) {
                s.path.push(f);
            }
            Ok(Some(s))
        };
        Ok((side(c)?, side(not_c)?))
    }

    fn run(&mut self, mut state: State, mut conts: Vec<Cont<'a>>) -> Result<(), SymexecError> {
        while let Some(cont) = conts.pop() {
            match cont {
                Cont::CloseScope => {
                    let m = state.marks.pop().expect("balanced scopes");
                    state.store.truncate(m);
                }
                Cont::Block([]) => {}
                Cont::Block([first, rest @ ..]) => {
                    conts.push(Cont::Block(rest));
                    match first {
                        Stmt::Var { name, init } => {
                            let v = self.eval(&state, init)?;
                            state.store.push((name.clone(), v));
                        }
                        Stmt::Assign { name, value } => {
                            let v = self.eval(&state, value)?;
                            let slot = state
                                .store
                                .iter_mut()
                                .rev()
                                .find(|(n, _)| n == name)
                                .expect("assignment to a declared variable");
                            slot.1 = v;
                        }
                        Stmt::Return(e) => {
                            let output = self.eval(&state, e)?;
                            self.leaves.push(SymbolicLeaf {
                                path_condition: state.path_formula(),
                                output,
                            });
                            return Ok(());
                        }
                        Stmt::If {
                            cond,
                            then_block,
                            else_block,
                        } => {
                            let (then_state, else_state) = self.branch(&state, cond)?;
                            for (s, block) in [(then_state, then_block), (else_state, else_block)] {
                                if let Some(mut s) = s {
                                    s.marks.push(s.store.len());
                                    let mut k = conts.clone();
                                    k.push(Cont::CloseScope);
                                    k.push(Cont::Block(block));
                                    self.run(s, k)?;
                                }
                            }
                            return Ok(());
                        }
                        Stmt::While { cond, body } => conts.push(Cont::Loop { cond, body, done: 0 }),
                    }
                }
                Cont::Loop { cond, body, done } => {
                    let (enter, exit) = self.branch(&state, cond)?;
                    if let Some(mut s) = enter {
                        if done == self.unroll {
                            return Err(SymexecError::UnrollBoundExceeded {
                                bound: self.unroll,
                                path: s.path_formula(),
                            });
                        }
                        s.marks.push(s.store.len());
                        let mut k = conts.clone();
                        k.push(Cont::Loop { cond, body, done: done + 1 });
                        k.push(Cont::CloseScope);
                        k.push(Cont::Block(body));
                        self.run(s, k)?;
                    }
                    match exit {
                        Some(s) => state = s,
                        None => return Ok(()),
                    }
                }
            }
        }
        unreachable!("validated programs return on every path")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{evaluate, parse};

    const BENEFITS: &str = "program benefits(salary: int[0..100000]) -> bool {
        if (salary < 10000) { return true; } else { return false; }
    }";

    #[test]
    fn benefits_has_two_leaves() {
        let g = symbolic_execute(&parse(BENEFITS).unwrap(), 16).unwrap();
        let rendered: Vec<String> = g.leaves.iter().map(|l| format!("{} => {}", l.path_condition, l.output)).collect();
        assert_eq!(rendered, ["salary < 10000 => true", "!(salary < 10000) => false"]);
        assert_eq!(g.concretise(&Valuation::new().with("salary", 8000)).unwrap(), Value::Bool(true));
    }

    #[test]
    fn constant_program() {
        let g = symbolic_execute(&parse("program c(x: int[0..9]) -> int { return 7; }").unwrap(), 16).unwrap();
        assert_eq!(g.leaves, [SymbolicLeaf { path_condition: Formula::Const(true), output: Expr::Int(7) }]);
    }

    #[test]
    fn infeasible_branches_are_pruned() {
        let src = "program p(x: int[0..9]) -> int requires x > 4; {
            if (x < 3) { return 0; }
            return 1;
        }";
        let g = symbolic_execute(&parse(src).unwrap(), 16).unwrap();
        assert_eq!(g.leaves.len(), 1);
        assert_eq!(g.leaves[0].output, Expr::Int(1));
    }

    #[test]
    fn loops_unroll_and_match_evaluation() {
        let src = "program l(n: int[0..6]) -> int {
            var s = 0; var i = 0;
            while (i < n) { var d = i * 2; s = s + d; i = i + 1; }
            return s;
        }";
        let p = parse(src).unwrap();
        let g = symbolic_execute(&p, 6).unwrap();
        assert_eq!(g.leaves.len(), 7);
        for n in 0..=6 {
            let v = Valuation::new().with("n", n);
            assert_eq!(g.concretise(&v).unwrap(), evaluate(&p, &v).unwrap());
        }
        assert!(matches!(
            symbolic_execute(&p, 5),
            Err(SymexecError::UnrollBoundExceeded { bound: 5, .. })
        ));
    }

    #[test]
    fn reachable_division_by_zero_is_rejected() {
        let bad = parse("program d(x: int[0..3]) -> int { return 8 / x; }").unwrap();
        assert!(matches!(symbolic_execute(&bad, 4), Err(SymexecError::PossibleDivisionByZero { .. })));
        let guarded = parse("program d(x: int[0..3]) -> bool { return x != 0 && 8 / x > 2; }").unwrap();
        assert!(symbolic_execute(&guarded, 4).is_ok());
        let pre = parse("program d(x: int[0..3]) -> int requires x > 0; { return 8 / x; }").unwrap();
        assert!(symbolic_execute(&pre, 4).is_ok());
    }

    #[test]
    fn concretise_rejects_inadmissible_inputs() {
        let p = parse("program p(x: int[0..9]) -> int requires x > 4; { return x; }").unwrap();
        let g = symbolic_execute(&p, 1).unwrap();
        assert!(matches!(
            g.concretise(&Valuation::new().with("x", 2)),
            Err(SymexecError::Input(EvalError::PreconditionViolated(_)))
        ));
        assert!(matches!(
            g.concretise(&Valuation::new().with("x", 12)),
            Err(SymexecError::Input(EvalError::OutOfDomain { .. }))
        ));
    }

    #[test]
    fn dump_lists_leaves() {
        let g = symbolic_execute(&parse(BENEFITS).unwrap(), 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&g.dump_json()).unwrap();
        assert_eq!(v["leaves"].as_array().unwrap().len(), 2);
        assert_eq!(v["leaves"][0]["path_condition"], "salary < 10000");
    }
}
