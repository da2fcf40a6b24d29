//! Exhaustive checks of the defining properties of (best) minimisers.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::{coordinate_relations_of, CoordinateRelation, OutputTable, Space};
use crate::logic::Env;
use crate::synth::{Minimiser, Mode, Table};
use crate::value::{Valuation, Value};

/// The properties checked by [`check_minimiser`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    /// Running the program on the representative gives the same output.
    Correctness,
    /// Representatives map to themselves.
    Idempotency,
    /// Guards are disjoint and cover exactly the admissible values.
    Totality,
    /// Values sharing a guard are interchangeable in every context.
    ProperDistribution,
    /// Any two representatives of an input are told apart by some point of
    /// the minimiser's range.
    BestDistributed,
    /// Distinct representatives have distinct outputs.
    Injectivity,
    /// The induced partitions equal the brute-force best ones.
    Best,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("serialisable");
        f.write_str(s.as_str().expect("string variant"))
    }
}

/// A concrete counterexample to a property.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    OutputChanged {
        input: Valuation,
        minimised: Valuation,
        expected: Value,
        actual: Option<Value>,
    },
    NotIdempotent {
        input: Valuation,
        once: Valuation,
        twice: Valuation,
    },
    Uncovered {
        input: Valuation,
    },
    Overlap {
        input: Valuation,
    },
    Extraneous {
        input: Valuation,
    },
    Distinguishable {
        input: String,
        first: Value,
        second: Value,
        context: Valuation,
    },
    Indistinguishable {
        input: String,
        first: Value,
        second: Value,
    },
    SameOutput {
        first: Valuation,
        second: Valuation,
        output: Value,
    },
    SplitClass {
        first: Valuation,
        second: Valuation,
    },
    MergedClasses {
        first: Valuation,
        second: Valuation,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutputChanged {
                input,
                minimised,
                expected,
                actual,
            } => match actual {
                Some(a) => write!(f, "{input} yields {expected} but its representative {minimised} yields {a}"),
                None => write!(f, "representative {minimised} of {input} violates the precondition"),
            },
            Violation::NotIdempotent { input, once, twice } => {
                write!(f, "{input} minimises to {once}, which minimises to {twice}")
            }
            Violation::Uncovered { input } => write!(f, "no guard covers {input}"),
            Violation::Overlap { input } => write!(f, "several guards cover {input}"),
            Violation::Extraneous { input } => write!(f, "a guard covers {input}, which is never admissible"),
            Violation::Distinguishable {
                input,
                first,
                second,
                context,
            } if context.is_empty() => write!(f, "{input}={first} and {input}={second} share a guard but differ in output"),
            Violation::Distinguishable {
                input,
                first,
                second,
                context,
            } => write!(f, "{input}={first} and {input}={second} share a guard but differ in context {context}"),
            Violation::Indistinguishable { input, first, second } => write!(
                f,
                "representatives {input}={first} and {input}={second} are not told apart by any minimised input"
            ),
            Violation::SameOutput { first, second, output } => {
                write!(f, "representatives {first} and {second} both yield {output}")
            }
            Violation::SplitClass { first, second } => {
                write!(f, "{first} and {second} are interchangeable but have different representatives")
            }
            Violation::MergedClasses { first, second } => {
                write!(f, "{first} and {second} are distinguishable but share a representative")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyResult {
    pub property: Property,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Violation>,
}

impl PropertyResult {
    fn new(property: Property, witness: Option<Violation>) -> Self {
        PropertyResult {
            property,
            passed: witness.is_none(),
            witness,
        }
    }
}

/// Row lookup for a table by point index, built once per check.
pub struct TableIndex {
    space: Space,
    row_of: Vec<Option<usize>>,
    overlap: Option<u64>,
}

impl TableIndex {
    pub fn new(m: &Minimiser, table: &Table) -> TableIndex {
        let space = Space::new(&table.columns.iter().map(|&k| m.inputs[k].clone()).collect::<Vec<_>>());
        let mut row_of = vec![None; space.size() as usize];
        let mut overlap = None;
        for (r, row) in table.rows.iter().enumerate() {
            for p in row.guard.points() {
                let k = space.index(&p);
                if row_of[k as usize].replace(r).is_some() && overlap.is_none() {
                    overlap = Some(k);
                }
            }
        }
        TableIndex { space, row_of, overlap }
    }

    pub fn row(&self, point: &[i64]) -> Option<usize> {
        self.row_of[self.space.index(point) as usize]
    }
}

/// A minimiser with every table indexed, for repeated application on
/// points of the input space. Skips the precondition check.
pub struct IndexedMinimiser<'m> {
    m: &'m Minimiser,
    indices: Vec<TableIndex>,
}

impl<'m> IndexedMinimiser<'m> {
    pub fn new(m: &'m Minimiser) -> Self {
        IndexedMinimiser {
            m,
            indices: m.tables.iter().map(|t| TableIndex::new(m, t)).collect(),
        }
    }

    /// The representative of `point`, or `None` when a guard is missing.
    pub fn apply(&self, point: &[i64]) -> Option<Vec<i64>> {
        let mut out = point.to_vec();
        for (t, idx) in self.m.tables.iter().zip(&self.indices) {
            let sub: Vec<i64> = t.columns.iter().map(|&k| point[k]).collect();
            let r = idx.row(&sub)?;
            for (&k, v) in t.columns.iter().zip(&t.rows[r].representative) {
                out[k] = v.ordinal();
            }
        }
        Some(out)
    }
}

/// Checks every property that applies to the minimiser's mode against the
/// program's output table.
pub fn check_minimiser(table: &OutputTable, m: &Minimiser) -> Vec<PropertyResult> {
    let space = &table.space;
    let applier = IndexedMinimiser::new(m);
    let val = |p: &[i64]| space.env().valuation(p);

    let mut correctness = None;
    let mut idempotency = None;
    let mut totality = None;
    let mut range: Vec<Vec<i64>> = Vec::new();
    for k in table.admissible() {
        let p = space.point(k);
        let Some(r) = applier.apply(&p) else {
            totality.get_or_insert(Violation::Uncovered { input: val(&p) });
            continue;
        };
        let actual = table.get(space.index(&r));
        let expected = table.get(k).expect("admissible");
        if correctness.is_none() && actual != Some(expected) {
            correctness = Some(Violation::OutputChanged {
                input: val(&p),
                minimised: val(&r),
                expected,
                actual,
            });
        }
        match applier.apply(&r) {
            Some(rr) if rr == r => {}
            rr => {
                idempotency.get_or_insert(Violation::NotIdempotent {
                    input: val(&p),
                    once: val(&r),
                    twice: rr.map(|x| val(&x)).unwrap_or_default(),
                });
            }
        }
        range.push(r);
    }
    range.sort();
    range.dedup();
    if totality.is_none() {
        totality = guard_canonicality(table, m, &applier);
    }

    let mut results = vec![
        PropertyResult::new(Property::Correctness, correctness),
        PropertyResult::new(Property::Idempotency, idempotency),
        PropertyResult::new(Property::Totality, totality),
    ];
    match m.mode {
        Mode::Distributed => {
            let rels = coordinate_relations_of(table);
            results.push(PropertyResult::new(
                Property::ProperDistribution,
                proper_distribution(table, m),
            ));
            results.push(PropertyResult::new(
                Property::BestDistributed,
                best_distributed(table, m, &range),
            ));
            results.push(PropertyResult::new(Property::Best, best_vs_relations(m, &applier, &rels)));
        }
        Mode::Monolithic => {
            results.push(PropertyResult::new(Property::Injectivity, injectivity(table, &range)));
            results.push(PropertyResult::new(Property::Best, best_vs_kernel(table, &applier)));
        }
    }
    results
}

fn guard_canonicality(table: &OutputTable, m: &Minimiser, applier: &IndexedMinimiser<'_>) -> Option<Violation> {
    for (t, idx) in m.tables.iter().zip(&applier.indices) {
        let cols = &idx.space;
        if let Some(k) = idx.overlap {
            return Some(Violation::Overlap {
                input: cols.valuation(k),
            });
        }
        let mut in_scope = vec![false; cols.size() as usize];
        for k in table.admissible() {
            let p = table.space.point(k);
            let sub: Vec<i64> = t.columns.iter().map(|&c| p[c]).collect();
            in_scope[cols.index(&sub) as usize] = true;
        }
        for (k, &scope) in in_scope.iter().enumerate() {
            match (scope, idx.row_of[k].is_some()) {
                (true, false) => {
                    return Some(Violation::Uncovered {
                        input: cols.valuation(k as u64),
                    })
                }
                (false, true) => {
                    return Some(Violation::Extraneous {
                        input: cols.valuation(k as u64),
                    })
                }
                _ => {}
            }
        }
    }
    None
}

fn proper_distribution(table: &OutputTable, m: &Minimiser) -> Option<Violation> {
    for t in &m.tables {
        let &[i] = t.columns.as_slice() else { continue };
        let name = &m.inputs[i].name;
        for row in &t.rows {
            let values: Vec<i64> = row.guard.points().into_iter().map(|p| p[0]).collect();
            let Some((&first, rest)) = values.split_first() else { continue };
            let base = table.column(i, first);
            for &other in rest {
                let col = table.column(i, other);
                if let Some(c) = base.iter().zip(&col).position(|(a, b)| a != b) {
                    let mut ctx = table.contexts(i).nth(c).expect("context index in range");
                    ctx.remove(i);
                    let env = Env::from_pairs(
                        m.inputs.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, x)| (x.name.clone(), x.domain)),
                    );
                    let ty = m.inputs[i].domain.ty();
                    return Some(Violation::Distinguishable {
                        input: name.clone(),
                        first: Value::from_ordinal(ty, first),
                        second: Value::from_ordinal(ty, other),
                        context: env.valuation(&ctx),
                    });
                }
            }
        }
    }
    None
}

/// For each input, two representatives are told apart when swapping one for
/// the other at some point of the range changes the output (or
/// admissibility). Compares per-representative signatures over the range's
/// contexts.
fn best_distributed(table: &OutputTable, m: &Minimiser, range: &[Vec<i64>]) -> Option<Violation> {
    let space = &table.space;
    for t in &m.tables {
        let &[i] = t.columns.as_slice() else { continue };
        let mut contexts: Vec<Vec<i64>> = range.to_vec();
        for c in &mut contexts {
            c[i] = 0;
        }
        contexts.sort();
        contexts.dedup();
        let mut reps: Vec<i64> = t.rows.iter().map(|r| r.representative[0].ordinal()).collect();
        reps.sort();
        reps.dedup();
        let mut seen: HashMap<Vec<Option<Value>>, i64> = HashMap::new();
        for v in reps {
            let sig = contexts
                .iter()
                .map(|w| {
                    let mut p = w.clone();
                    p[i] = v;
                    table.get(space.index(&p))
                })
                .collect();
            if let Some(first) = seen.insert(sig, v) {
                let ty = m.inputs[i].domain.ty();
                return Some(Violation::Indistinguishable {
                    input: m.inputs[i].name.clone(),
                    first: Value::from_ordinal(ty, first),
                    second: Value::from_ordinal(ty, v),
                });
            }
        }
    }
    None
}

fn injectivity(table: &OutputTable, range: &[Vec<i64>]) -> Option<Violation> {
    let space = &table.space;
    let mut seen: HashMap<Value, &Vec<i64>> = HashMap::new();
    for r in range {
        let Some(out) = table.get(space.index(r)) else { continue };
        if let Some(prev) = seen.insert(out, r) {
            return Some(Violation::SameOutput {
                first: space.env().valuation(prev),
                second: space.env().valuation(r),
                output: out,
            });
        }
    }
    None
}

fn best_vs_relations(m: &Minimiser, applier: &IndexedMinimiser<'_>, rels: &[CoordinateRelation]) -> Option<Violation> {
    for (t, idx) in m.tables.iter().zip(&applier.indices) {
        let &[i] = t.columns.as_slice() else { continue };
        let rel = &rels[i];
        let one = |v: Value| Env::from_inputs([&m.inputs[i]]).valuation(&[v.ordinal()]);
        let mut rep_of_class: HashMap<usize, (Value, Option<&Vec<Value>>)> = HashMap::new();
        let mut class_of_row: HashMap<&Vec<Value>, (Value, usize)> = HashMap::new();
        for v in m.inputs[i].domain.values() {
            let Some(c) = rel.class_of(v) else { continue };
            let row = idx.row(&[v.ordinal()]).map(|r| &t.rows[r].representative);
            match rep_of_class.get(&c) {
                Some((u, r)) if *r != row => return Some(Violation::SplitClass { first: one(*u), second: one(v) }),
                Some(_) => {}
                None => {
                    rep_of_class.insert(c, (v, row));
                }
            }
            if let Some(row) = row {
                match class_of_row.get(&row) {
                    Some((u, c0)) if *c0 != c => {
                        return Some(Violation::MergedClasses { first: one(*u), second: one(v) })
                    }
                    Some(_) => {}
                    None => {
                        class_of_row.insert(row, (v, c));
                    }
                }
            }
        }
    }
    None
}

fn best_vs_kernel(table: &OutputTable, applier: &IndexedMinimiser<'_>) -> Option<Violation> {
    let space = &table.space;
    let mut rep_of_class: HashMap<Value, (u64, Option<Vec<i64>>)> = HashMap::new();
    let mut class_of_rep: HashMap<Vec<i64>, (u64, Value)> = HashMap::new();
    for k in table.admissible() {
        let p = space.point(k);
        let out = table.get(k).expect("admissible");
        let rep = applier.apply(&p);
        match rep_of_class.get(&out) {
            Some((first, r)) if *r != rep => {
                return Some(Violation::SplitClass {
                    first: space.valuation(*first),
                    second: space.valuation(k),
                })
            }
            Some(_) => {}
            None => {
                rep_of_class.insert(out, (k, rep.clone()));
            }
        }
        if let Some(rep) = rep {
            match class_of_rep.get(&rep) {
                Some((first, o)) if *o != out => {
                    return Some(Violation::MergedClasses {
                        first: space.valuation(*first),
                        second: space.valuation(k),
                    })
                }
                Some(_) => {}
                None => {
                    class_of_rep.insert(rep, (k, out));
                }
            }
        }
    }
    None
}

/// Checks that the product of the coordinate relations, over the points
/// whose every coordinate is admissible for some context, only relates
/// points with equal output-or-`None`. Returns a related pair that differs.
pub fn product_within_kernel(table: &OutputTable, rels: &[CoordinateRelation]) -> Option<(Valuation, Valuation)> {
    let space = &table.space;
    let mut groups: HashMap<Vec<usize>, (u64, Option<Value>)> = HashMap::new();
    for k in 0..space.size() {
        let v = space.valuation(k);
        let Some(key) = class_tuple(&v, rels) else { continue };
        let out = table.get(k);
        match groups.get(&key) {
            Some((first, o)) if *o != out => return Some((space.valuation(*first), v)),
            Some(_) => {}
            None => {
                groups.insert(key, (k, out));
            }
        }
    }
    None
}

fn class_tuple(v: &Valuation, rels: &[CoordinateRelation]) -> Option<Vec<usize>> {
    v.values().zip(rels).map(|(x, r)| r.class_of(x)).collect()
}

/// Outcome of trying every merge of two classes within a coordinate
/// relation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MaximalityReport {
    pub merges_checked: usize,
    /// Merges `(input, class, class)` after which the product relation
    /// still lies within the kernel.
    pub unbroken: Vec<(usize, usize, usize)>,
}

/// Merges every pair of classes of every coordinate relation in turn and
/// searches for two related points with different outputs.
pub fn maximality(table: &OutputTable, rels: &[CoordinateRelation]) -> MaximalityReport {
    let space = &table.space;
    let mut report = MaximalityReport::default();
    for rel in rels {
        let i = rel.input;
        let contexts: Vec<Vec<i64>> = table
            .contexts(i)
            .filter(|p| {
                space
                    .env()
                    .valuation(p)
                    .values()
                    .zip(rels)
                    .enumerate()
                    .all(|(k, (x, r))| k == i || r.class_of(x).is_some())
            })
            .collect();
        for c1 in 0..rel.classes.len() {
            for c2 in c1 + 1..rel.classes.len() {
                report.merges_checked += 1;
                let broken = rel.classes[c1].iter().any(|a| {
                    rel.classes[c2].iter().any(|b| {
                        contexts.iter().any(|w| {
                            let mut p = w.clone();
                            let mut q = w.clone();
                            p[i] = a.ordinal();
                            q[i] = b.ordinal();
                            table.get(space.index(&p)) != table.get(space.index(&q))
                        })
                    })
                });
                if !broken {
                    report.unbroken.push((i, c1, c2));
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::oracle::kernel_of;
    use crate::oracle::{identity_minimiser, reference_best_distributed, reference_best_monolithic, DEFAULT_BUDGET};

    fn failing(results: &[PropertyResult]) -> Vec<Property> {
        results.iter().filter(|r| !r.passed).map(|r| r.property).collect()
    }

    #[test]
    fn references_pass_everything() {
        for p in corpus::all() {
            let t = OutputTable::compute(&p, DEFAULT_BUDGET).unwrap();
            let d = reference_best_distributed(&p, DEFAULT_BUDGET).unwrap();
            assert!(failing(&check_minimiser(&t, &d)).is_empty(), "{}", p.name);
            let m = reference_best_monolithic(&p, DEFAULT_BUDGET).unwrap();
            assert!(failing(&check_minimiser(&t, &m)).is_empty(), "{}", p.name);
        }
    }

    #[test]
    fn identity_is_correct_but_not_best() {
        let p = corpus::get("benefits.dm").unwrap();
        let t = OutputTable::compute(&p, DEFAULT_BUDGET).unwrap();
        let id = identity_minimiser(&p, DEFAULT_BUDGET).unwrap();
        let results = check_minimiser(&t, &id);
        assert_eq!(failing(&results), [Property::BestDistributed, Property::Best]);
        let best = results.iter().find(|r| r.property == Property::Best).unwrap();
        assert_eq!(best.witness.as_ref().unwrap().to_string(), "salary=0 and salary=1 are interchangeable but have different representatives");
    }

    #[test]
    fn relations_are_maximal_and_contained() {
        for name in ["credit.dm", "syntactic.dm", "window.dm", "or.dm"] {
            let p = corpus::get(name).unwrap();
            let t = OutputTable::compute(&p, DEFAULT_BUDGET).unwrap();
            let rels = coordinate_relations_of(&t);
            assert_eq!(product_within_kernel(&t, &rels), None);
            assert!(maximality(&t, &rels).unbroken.is_empty());
            // kernel classes are unions of product classes
            let k = kernel_of(&t);
            assert!(k.class_count() <= t.space.size() as usize);
        }
    }
}
