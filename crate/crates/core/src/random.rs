//! Seeded generation of small random programs for property tests.
//!
//! Generated programs use only non-negative literals and divide only by
//! positive constants, so they are valid and free of runtime errors. Outputs
//! are drawn from few distinct values, which keeps class counts small.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::{validate, BinOp, Expr, Input, Program, Stmt};
use crate::value::{Domain, Type};

/// Deterministic generator.
pub struct ProgramGenerator {
    rng: ChaCha8Rng,
    counter: u32,
    precondition_rate: f64,
}

impl ProgramGenerator {
    pub fn new(seed: u64) -> Self {
        ProgramGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            counter: 0,
            precondition_rate: 0.0,
        }
    }

    /// Gives each program a random `requires` clause with probability
    /// `rate`.
    pub fn with_preconditions(mut self, rate: f64) -> Self {
        self.precondition_rate = rate;
        self
    }

    /// Between one and `max_inputs` inputs whose product has at most
    /// `max_points` points.
    pub fn signature(&mut self, max_inputs: usize, max_points: u64) -> Vec<Input> {
        let n = self.rng.gen_range(1..=max_inputs.max(1));
        let names = ["a", "b", "c", "d"];
        let mut inputs = Vec::with_capacity(n);
        let mut budget = max_points.max(2);
        for (k, name) in names.iter().take(n).enumerate() {
            let remaining = (n - k - 1) as u32;
            // leave room for at least two values per later input
            let cap = (budget / 2u64.pow(remaining)).max(2);
            let domain = if cap >= 2 && self.rng.gen_bool(0.2) {
                Domain::Bool
            } else {
                let size = self.rng.gen_range(2..=cap.min(64)) as i64;
                let lo = self.rng.gen_range(0..=3);
                Domain::int(lo, lo + size - 1)
            };
            budget /= domain.cardinality();
            inputs.push(Input::new(*name, domain));
        }
        inputs
    }

    /// A random program over `inputs`.
    pub fn program(&mut self, inputs: &[Input]) -> Program {
        self.counter += 1;
        let output = if self.rng.gen_bool(0.25) { Type::Bool } else { Type::Int };
        let precondition = if self.rng.gen_bool(self.precondition_rate) {
            self.condition(inputs, 1)
        } else {
            Expr::Bool(true)
        };
        let branches = self.rng.gen_range(0..=3);
        let mut body = Vec::new();
        let int_inputs: Vec<&Input> = inputs.iter().filter(|i| i.domain.ty() == Type::Int).collect();
        if !int_inputs.is_empty() && self.rng.gen_bool(0.5) {
            let t = self.int_term(inputs, 1);
            body.push(Stmt::Var { name: "t".into(), init: t });
        }
        let scope: Vec<Input> = if body.is_empty() {
            inputs.to_vec()
        } else {
            let mut s = inputs.to_vec();
            s.push(Input::new("t", Domain::int(0, 0)));
            s
        };
        let mut chain = vec![Stmt::Return(self.output_expr(&scope, output))];
        for _ in 0..branches {
            let cond = self.condition(&scope, 1);
            let then_block = vec![Stmt::Return(self.output_expr(&scope, output))];
            chain = vec![Stmt::If {
                cond,
                then_block,
                else_block: chain,
            }];
        }
        body.extend(chain);
        let program = Program {
            name: format!("r{}", self.counter),
            inputs: inputs.to_vec(),
            output,
            precondition,
            body,
        };
        debug_assert!(validate(&program).is_ok(), "generated invalid program:\n{program}");
        program
    }

    fn var_of(&mut self, scope: &[Input], ty: Type) -> Option<Expr> {
        let vs: Vec<&Input> = scope.iter().filter(|i| i.domain.ty() == ty).collect();
        vs.choose(&mut self.rng).map(|i| Expr::var(i.name.clone()))
    }

    fn int_term(&mut self, scope: &[Input], depth: u32) -> Expr {
        let Some(x) = self.var_of(scope, Type::Int) else {
            return Expr::Int(self.rng.gen_range(0..4));
        };
        if depth == 0 {
            return x;
        }
        match self.rng.gen_range(0..6) {
            0 => x,
            1 => {
                let y = self.int_term(scope, depth - 1);
                Expr::binary(BinOp::Add, x, y)
            }
            2 => Expr::binary(BinOp::Sub, x, Expr::Int(self.rng.gen_range(0..5))),
            3 => Expr::binary(BinOp::Mul, x, Expr::Int(self.rng.gen_range(1..4))),
            4 => Expr::binary(BinOp::Div, x, Expr::Int(self.rng.gen_range(1..6))),
            _ => Expr::binary(BinOp::Rem, x, Expr::Int(self.rng.gen_range(2..6))),
        }
    }

    fn condition(&mut self, scope: &[Input], depth: u32) -> Expr {
        if depth > 0 && self.rng.gen_bool(0.25) {
            let op = if self.rng.gen_bool(0.5) { BinOp::And } else { BinOp::Or };
            let a = self.condition(scope, depth - 1);
            let b = self.condition(scope, depth - 1);
            return Expr::binary(op, a, b);
        }
        if let Some(b) = self.rng.gen_bool(0.2).then(|| self.var_of(scope, Type::Bool)).flatten() {
            return if self.rng.gen_bool(0.5) { b } else { Expr::not(b) };
        }
        let lhs = self.int_term(scope, 1);
        let op = *[BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne]
            .choose(&mut self.rng)
            .expect("nonempty");
        Expr::binary(op, lhs, Expr::Int(self.rng.gen_range(0..12)))
    }

    fn output_expr(&mut self, scope: &[Input], ty: Type) -> Expr {
        match ty {
            Type::Bool => match self.rng.gen_range(0..3) {
                0 => Expr::Bool(self.rng.gen_bool(0.5)),
                _ => self.condition(scope, 0),
            },
            Type::Int => match self.rng.gen_range(0..4) {
                0 | 1 => Expr::Int(self.rng.gen_range(0..4)),
                2 => {
                    let x = self.int_term(scope, 0);
                    Expr::binary(BinOp::Rem, x, Expr::Int(self.rng.gen_range(2..4)))
                }
                _ => {
                    let x = self.int_term(scope, 1);
                    Expr::binary(BinOp::Div, x, Expr::Int(self.rng.gen_range(4..12)))
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let mut a = ProgramGenerator::new(7);
        let mut b = ProgramGenerator::new(7);
        for _ in 0..50 {
            let sa = a.signature(3, 500);
            let sb = b.signature(3, 500);
            assert_eq!(sa, sb);
            let prod: u64 = sa.iter().map(|i| i.domain.cardinality()).product();
            assert!(prod <= 500, "{prod}");
            let pa = a.program(&sa);
            assert_eq!(pa, b.program(&sb));
            assert!(!pa.has_precondition());
            validate(&pa).unwrap();
            assert_eq!(crate::dsl::parse(&pa.to_string()).unwrap(), pa);
        }
        let mut g = ProgramGenerator::new(1).with_preconditions(1.0);
        let sig = g.signature(2, 100);
        assert!(g.program(&sig).has_precondition());
    }
}
