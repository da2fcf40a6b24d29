//! Brute-force ground truth by enumerating the input space.
//!
//! Everything here evaluates the program concretely on every point of the
//! input product and derives kernels, per-coordinate relations and reference
//! minimisers directly from the resulting table of outputs. No symbolic
//! reasoning is involved, which is what makes it a useful check on
//! [`crate::synth`].
//!
//! Points that violate the precondition are kept in the output table as
//! `None`. Coordinate relations compare these entries too, so two values of
//! an input are related only if they agree on admissibility as well as on
//! outputs in every context.

mod properties;

use std::collections::HashMap;

use rayon::prelude::*;

pub use properties::{
    check_minimiser, maximality, product_within_kernel, IndexedMinimiser, MaximalityReport, Property, PropertyResult, TableIndex,
    Violation,
};

use crate::dsl::{EvalError, Input, Interpreter, Program};
use crate::logic::{Env, Formula, Region};
use crate::synth::{GuardedRepresentative, Minimiser, Mode, Table};
use crate::value::{Valuation, Value};

pub use crate::logic::DEFAULT_BUDGET;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("input space of {size} points exceeds the enumeration budget of {budget}")]
    BudgetExceeded { size: u64, budget: u64 },
    #[error("evaluation failed on {input}: {error}")]
    Eval { input: Valuation, error: EvalError },
    #[error("cannot compare a {0} minimiser with a {1} minimiser")]
    ModeMismatch(Mode, Mode),
    #[error("minimisers are over different inputs")]
    SignatureMismatch,
}

/// The product of the input domains, indexed lexicographically (first input
/// most significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Space {
    inputs: Vec<Input>,
    env: Env,
    size: u64,
}

impl Space {
    pub fn new(inputs: &[Input]) -> Space {
        let env = Env::from_inputs(inputs);
        Space {
            inputs: inputs.to_vec(),
            size: env.product_size(),
            env,
        }
    }

    pub fn inputs(&self) -> &[Input] {
        &self.inputs
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn point(&self, mut index: u64) -> Vec<i64> {
        let mut p = vec![0; self.inputs.len()];
        for (k, i) in self.inputs.iter().enumerate().rev() {
            let (lo, _) = i.domain.bounds();
            let card = i.domain.cardinality();
            p[k] = lo + (index % card) as i64;
            index /= card;
        }
        p
    }

    pub fn index(&self, point: &[i64]) -> u64 {
        self.env.index_of(point)
    }

    pub fn valuation(&self, index: u64) -> Valuation {
        self.env.valuation(&self.point(index))
    }

    /// Index of the point `v` binds, if it binds every input in domain.
    pub fn index_of_valuation(&self, v: &Valuation) -> Option<u64> {
        let p: Option<Vec<i64>> = self
            .inputs
            .iter()
            .map(|i| v.get(&i.name).filter(|x| i.domain.contains(*x)).map(Value::ordinal))
            .collect();
        p.map(|p| self.index(&p))
    }

    fn check_budget(&self, budget: u64) -> Result<(), OracleError> {
        if self.size > budget {
            return Err(OracleError::BudgetExceeded {
                size: self.size,
                budget,
            });
        }
        Ok(())
    }
}

/// The program's output at every point of its input space, `None` where the
/// precondition fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputTable {
    pub space: Space,
    pub outputs: Vec<Option<Value>>,
}

impl OutputTable {
    pub fn compute(program: &Program, budget: u64) -> Result<OutputTable, OracleError> {
        let space = Space::new(&program.inputs);
        space.check_budget(budget)?;
        let interp = Interpreter::default();
        let outputs = (0..space.size())
            .into_par_iter()
            .map(|k| {
                let v = space.valuation(k);
                match interp.evaluate(program, &v) {
                    Ok(x) => Ok(Some(x)),
                    Err(EvalError::PreconditionViolated(_)) => Ok(None),
                    Err(error) => Err(OracleError::Eval { input: v, error }),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OutputTable { space, outputs })
    }

    pub fn get(&self, index: u64) -> Option<Value> {
        self.outputs[index as usize]
    }

    /// Indices of the points satisfying the precondition.
    pub fn admissible(&self) -> impl Iterator<Item = u64> + '_ {
        self.outputs
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_some())
            .map(|(k, _)| k as u64)
    }

    /// Output-or-`None` at every context of input `i` set to `ordinal`, in
    /// context order.
    pub fn column(&self, i: usize, ordinal: i64) -> Vec<Option<Value>> {
        self.contexts(i)
            .map(|mut p| {
                p[i] = ordinal;
                self.get(self.space.index(&p))
            })
            .collect()
    }

    /// All points with coordinate `i` at its least value, in index order.
    pub fn contexts(&self, i: usize) -> impl Iterator<Item = Vec<i64>> + '_ {
        let mut rest = self.space.inputs.clone();
        let (lo, _) = rest.remove(i).domain.bounds();
        let others = Space::new(&rest);
        (0..others.size()).map(move |k| {
            let mut p = others.point(k);
            p.insert(i, lo);
            p
        })
    }
}

/// A partition of a set of points, in canonical form: each class sorted,
/// classes ordered by least member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    /// Indices of the partitioned points, ascending.
    pub universe: Vec<u64>,
    pub classes: Vec<Vec<u64>>,
}

impl Partition {
    /// Groups `(point, label)` pairs by label. Points must be given in
    /// ascending order.
    pub fn from_labels<L: std::hash::Hash + Eq>(items: impl IntoIterator<Item = (u64, L)>) -> Partition {
        let mut universe = Vec::new();
        let mut class_of: HashMap<L, usize> = HashMap::new();
        let mut classes: Vec<Vec<u64>> = Vec::new();
        for (k, label) in items {
            debug_assert!(universe.last().is_none_or(|&l| l < k), "points must ascend");
            universe.push(k);
            let next = classes.len();
            let c = *class_of.entry(label).or_insert(next);
            if c == next {
                classes.push(Vec::new());
            }
            classes[c].push(k);
        }
        Partition { universe, classes }
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// The class containing `point`.
    pub fn class_of(&self, point: u64) -> Option<&[u64]> {
        self.classes.iter().find(|c| c.binary_search(&point).is_ok()).map(Vec::as_slice)
    }

    /// Whether every class of `self` lies inside a class of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        if self.universe != other.universe {
            return false;
        }
        let mut owner = HashMap::with_capacity(other.universe.len());
        for (c, class) in other.classes.iter().enumerate() {
            for &k in class {
                owner.insert(k, c);
            }
        }
        self.classes.iter().all(|class| class.iter().all(|k| owner[k] == owner[&class[0]]))
    }
}

/// The kernel of the program on its admissible inputs: classes of inputs
/// with equal outputs.
pub fn kernel(program: &Program, budget: u64) -> Result<Partition, OracleError> {
    Ok(kernel_of(&OutputTable::compute(program, budget)?))
}

pub fn kernel_of(table: &OutputTable) -> Partition {
    Partition::from_labels(table.admissible().map(|k| (k, table.get(k).expect("admissible"))))
}

/// The coarsest equivalence on the values of one input such that related
/// values are interchangeable in every context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateRelation {
    pub input: usize,
    pub name: String,
    /// Classes of admissible values, each ascending, ordered by least member.
    pub classes: Vec<Vec<Value>>,
}

impl CoordinateRelation {
    pub fn class_of(&self, v: Value) -> Option<usize> {
        self.classes.iter().position(|c| c.binary_search(&v).is_ok())
    }
}

pub fn coordinate_relations(program: &Program, budget: u64) -> Result<Vec<CoordinateRelation>, OracleError> {
    Ok(coordinate_relations_of(&OutputTable::compute(program, budget)?))
}

pub fn coordinate_relations_of(table: &OutputTable) -> Vec<CoordinateRelation> {
    (0..table.space.inputs.len())
        .into_par_iter()
        .map(|i| {
            let input = &table.space.inputs[i];
            let mut index: HashMap<Vec<Option<Value>>, usize> = HashMap::new();
            let mut classes: Vec<Vec<Value>> = Vec::new();
            for v in input.domain.values() {
                let sig = table.column(i, v.ordinal());
                if sig.iter().all(Option::is_none) {
                    continue;
                }
                let next = classes.len();
                let c = *index.entry(sig).or_insert(next);
                if c == next {
                    classes.push(Vec::new());
                }
                classes[c].push(v);
            }
            CoordinateRelation {
                input: i,
                name: input.name.clone(),
                classes,
            }
        })
        .collect()
}

/// The best distributed minimiser built directly from the coordinate
/// relations, mapping each class to its least member.
pub fn reference_best_distributed(program: &Program, budget: u64) -> Result<Minimiser, OracleError> {
    let table = OutputTable::compute(program, budget)?;
    let tables = coordinate_relations_of(&table)
        .into_iter()
        .map(|rel| {
            let env = Env::from_inputs([&program.inputs[rel.input]]);
            Table {
                columns: vec![rel.input],
                rows: rel
                    .classes
                    .iter()
                    .map(|class| {
                        let pts: Vec<[i64; 1]> = class.iter().map(|v| [v.ordinal()]).collect();
                        GuardedRepresentative {
                            guard: Region::from_points(&env, pts.iter().map(|p| p.as_slice())),
                            representative: vec![class[0]],
                        }
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(minimiser(program, Mode::Distributed, tables))
}

/// The best monolithic minimiser built from the kernel classes.
pub fn reference_best_monolithic(program: &Program, budget: u64) -> Result<Minimiser, OracleError> {
    let table = OutputTable::compute(program, budget)?;
    let env = table.space.env().clone();
    let rows = kernel_of(&table)
        .classes
        .iter()
        .map(|class| {
            let pts: Vec<Vec<i64>> = class.iter().map(|&k| table.space.point(k)).collect();
            GuardedRepresentative {
                guard: Region::from_points(&env, pts.iter().map(Vec::as_slice)),
                representative: table.space.valuation(class[0]).values().collect(),
            }
        })
        .collect();
    let columns = (0..program.inputs.len()).collect();
    Ok(minimiser(program, Mode::Monolithic, vec![Table { columns, rows }]))
}

/// The distributed minimiser that maps every admissible value to itself.
pub fn identity_minimiser(program: &Program, budget: u64) -> Result<Minimiser, OracleError> {
    let table = OutputTable::compute(program, budget)?;
    let tables = coordinate_relations_of(&table)
        .into_iter()
        .map(|rel| {
            let env = Env::from_inputs([&program.inputs[rel.input]]);
            let mut values: Vec<Value> = rel.classes.into_iter().flatten().collect();
            values.sort();
            Table {
                columns: vec![rel.input],
                rows: values
                    .into_iter()
                    .map(|v| GuardedRepresentative {
                        guard: Region::from_box(&env, vec![(v.ordinal(), v.ordinal())]),
                        representative: vec![v],
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(minimiser(program, Mode::Distributed, tables))
}

fn minimiser(program: &Program, mode: Mode, tables: Vec<Table>) -> Minimiser {
    Minimiser {
        mode,
        program: program.name.clone(),
        inputs: program.inputs.clone(),
        precondition: Formula::from_expr(&program.precondition.fold()).simplify(),
        tables,
    }
}

/// The partition each table induces on the points its guards cover, grouping
/// points by representative.
pub fn induced_partitions(m: &Minimiser) -> Vec<Partition> {
    m.tables
        .iter()
        .map(|t| {
            let env = Env::from_inputs(t.columns.iter().map(|&k| &m.inputs[k]));
            let space = Space::new(&t.columns.iter().map(|&k| m.inputs[k].clone()).collect::<Vec<_>>());
            Partition::from_labels((0..space.size()).filter_map(|k| {
                let p = space.point(k);
                t.lookup(&p).map(|rep| (env.index_of(&p), rep.to_vec()))
            }))
        })
        .collect()
}

/// Whether two minimisers induce the same partitions, whatever members they
/// pick as representatives.
pub fn same_partition(a: &Minimiser, b: &Minimiser) -> Result<bool, OracleError> {
    if a.mode != b.mode {
        return Err(OracleError::ModeMismatch(a.mode, b.mode));
    }
    if a.inputs != b.inputs {
        return Err(OracleError::SignatureMismatch);
    }
    let cols = |m: &Minimiser| m.tables.iter().map(|t| t.columns.clone()).collect::<Vec<_>>();
    Ok(cols(a) == cols(b) && induced_partitions(a) == induced_partitions(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn space_indexing_round_trips() {
        let p = corpus::get("credit.dm").unwrap();
        let s = Space::new(&p.inputs);
        assert_eq!(s.size(), 12);
        for k in 0..12 {
            assert_eq!(s.index(&s.point(k)), k);
        }
        assert_eq!(s.point(0), vec![0, 1]);
        assert_eq!(s.point(11), vec![3, 3]);
    }

    #[test]
    fn credit_kernel_and_relations() {
        let p = corpus::get("credit.dm").unwrap();
        let k = kernel(&p, DEFAULT_BUDGET).unwrap();
        let mut sizes: Vec<usize> = k.classes.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, [1, 5, 6]);
        let rels = coordinate_relations(&p, DEFAULT_BUDGET).unwrap();
        let show = |r: &CoordinateRelation| format!("{:?}", r.classes.iter().map(|c| c.iter().map(|v| v.ordinal()).collect::<Vec<_>>()).collect::<Vec<_>>());
        assert_eq!(show(&rels[0]), "[[0], [1], [2, 3]]");
        assert_eq!(show(&rels[1]), "[[1, 2], [3]]");
    }

    #[test]
    fn refinement() {
        let fine = Partition::from_labels([(0, 0), (1, 1), (2, 2)]);
        let coarse = Partition::from_labels([(0, 0), (1, 0), (2, 1)]);
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(coarse.refines(&coarse));
    }

    #[test]
    fn same_partition_ignores_representatives() {
        let p = corpus::get("credit.dm").unwrap();
        let a = reference_best_distributed(&p, DEFAULT_BUDGET).unwrap();
        let mut b = a.clone();
        for t in &mut b.tables {
            for r in &mut t.rows {
                let max = r.guard.points().pop().unwrap();
                r.representative = vec![Value::from_ordinal(r.representative[0].ty(), max[0])];
            }
        }
        assert!(same_partition(&a, &b).unwrap());
        let id = identity_minimiser(&p, DEFAULT_BUDGET).unwrap();
        assert!(!same_partition(&a, &id).unwrap());
        let mono = reference_best_monolithic(&p, DEFAULT_BUDGET).unwrap();
        assert_eq!(same_partition(&a, &mono), Err(OracleError::ModeMismatch(Mode::Distributed, Mode::Monolithic)));
    }

    #[test]
    fn budget_is_enforced() {
        let p = corpus::get("benefits.dm").unwrap();
        assert_eq!(
            kernel(&p, 1000),
            Err(OracleError::BudgetExceeded { size: 100_001, budget: 1000 })
        );
    }
}
