//! What an observer learns from a program's output.
//!
//! The knowledge an observer of `f(u)` has about `u` is the set of inputs
//! `f` cannot tell apart from `u`; `f` discloses no more than `g` when every
//! such set for `f` contains the corresponding one for `g`, i.e. when the
//! kernel of `g` refines the kernel of `f`. Knowledge equivalence is
//! mutual disclosure, which is equality of kernels.
//!
//! ```
//! use datamin::corpus;
//! use datamin::knowledge::discloses_leq;
//! use datamin::oracle::DEFAULT_BUDGET;
//!
//! let mod2 = corpus::get("mod2.dm").unwrap();
//! let mod4 = corpus::get("mod4.dm").unwrap();
//! assert!(discloses_leq(&mod2, &mod4, DEFAULT_BUDGET).unwrap());
//! assert!(!discloses_leq(&mod4, &mod2, DEFAULT_BUDGET).unwrap());
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dsl::{BinOp, Expr, Program, Stmt};
use crate::logic::{Formula, LogicError, Solver};
use crate::oracle::{kernel_of, IndexedMinimiser, OracleError, OutputTable, Partition};
use crate::symexec::{symbolic_execute_with, SymexecError, DEFAULT_UNROLL};
use crate::synth::Minimiser;
use crate::value::{Type, Valuation, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KnowledgeError {
    #[error("programs `{0}` and `{1}` have different inputs")]
    SignatureMismatch(String, String),
    #[error("programs `{0}` and `{1}` admit different sets of inputs")]
    UniverseMismatch(String, String),
    #[error("{0} is not an admissible input")]
    Inadmissible(Valuation),
    #[error("hidden program `{program}` is undefined on admissible input {input}")]
    HiddenUndefined { program: String, input: Valuation },
    #[error("log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Symexec(#[from] SymexecError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// The inputs an observer of `program` cannot distinguish from `at`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeSet {
    pub program: String,
    pub at: Valuation,
    /// Ascending.
    pub members: Vec<Valuation>,
}

pub fn knowledge_set(program: &Program, v: &Valuation, budget: u64) -> Result<KnowledgeSet, KnowledgeError> {
    let table = OutputTable::compute(program, budget)?;
    let inadmissible = || KnowledgeError::Inadmissible(v.clone());
    let k = table.space.index_of_valuation(v).ok_or_else(inadmissible)?;
    let out = table.get(k).ok_or_else(inadmissible)?;
    let members = table
        .admissible()
        .filter(|&j| table.get(j) == Some(out))
        .map(|j| table.space.valuation(j))
        .collect();
    Ok(KnowledgeSet {
        program: program.name.clone(),
        at: table.space.valuation(k),
        members,
    })
}

/// A function on a fixed set of points, kept only up to the equality of
/// its results. Labels are dense ids, so observations of different
/// programs can be paired and composed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    /// Point indices, ascending.
    pub universe: Vec<u64>,
    pub labels: Vec<u32>,
}

impl Observation {
    /// Labels each point by `f`, numbering distinct results in order of
    /// first appearance.
    pub fn from_fn<L: std::hash::Hash + Eq>(universe: Vec<u64>, mut f: impl FnMut(u64) -> L) -> Observation {
        let mut ids: HashMap<L, u32> = HashMap::new();
        let labels = universe
            .iter()
            .map(|&k| {
                let next = ids.len() as u32;
                *ids.entry(f(k)).or_insert(next)
            })
            .collect();
        Observation { universe, labels }
    }

    /// The outputs of a program on its admissible inputs.
    pub fn of(table: &OutputTable) -> Observation {
        Observation::from_fn(table.admissible().collect(), |k| table.get(k))
    }

    /// `⟨self, other⟩`: observing both.
    pub fn pair(&self, other: &Observation) -> Option<Observation> {
        (self.universe == other.universe).then(|| {
            let mut k = 0;
            Observation::from_fn(self.universe.clone(), |_| {
                k += 1;
                (self.labels[k - 1], other.labels[k - 1])
            })
        })
    }

    /// Post-composition with a function on labels.
    pub fn then<L: std::hash::Hash + Eq>(&self, mut g: impl FnMut(u32) -> L) -> Observation {
        let mut k = 0;
        Observation::from_fn(self.universe.clone(), |_| {
            k += 1;
            g(self.labels[k - 1])
        })
    }

    pub fn kernel(&self) -> Partition {
        Partition::from_labels(self.universe.iter().copied().zip(self.labels.iter().copied()))
    }

    /// Number of distinct results.
    pub fn range_size(&self) -> usize {
        self.labels.iter().collect::<BTreeSet<_>>().len()
    }

    /// Whether `self` discloses no more than `other`; `None` when the
    /// universes differ.
    pub fn leq(&self, other: &Observation) -> Option<bool> {
        (self.universe == other.universe).then(|| other.kernel().refines(&self.kernel()))
    }

    pub fn equivalent(&self, other: &Observation) -> Option<bool> {
        (self.universe == other.universe).then(|| self.kernel() == other.kernel())
    }
}

fn observe_both(f: &Program, g: &Program, budget: u64) -> Result<(Observation, Observation), KnowledgeError> {
    if f.inputs != g.inputs {
        return Err(KnowledgeError::SignatureMismatch(f.name.clone(), g.name.clone()));
    }
    let of = Observation::of(&OutputTable::compute(f, budget)?);
    let og = Observation::of(&OutputTable::compute(g, budget)?);
    if of.universe != og.universe {
        return Err(KnowledgeError::UniverseMismatch(f.name.clone(), g.name.clone()));
    }
    Ok((of, og))
}

/// `f ⊑ g`: the kernel of `g` refines the kernel of `f`.
pub fn discloses_leq(f: &Program, g: &Program, budget: u64) -> Result<bool, KnowledgeError> {
    let (of, og) = observe_both(f, g, budget)?;
    Ok(og.kernel().refines(&of.kernel()))
}

/// How two programs compare under the disclosure ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Disclosure {
    Equivalent,
    Less,
    Greater,
    Incomparable,
}

impl fmt::Display for Disclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Disclosure::Equivalent => "f ≡ g",
            Disclosure::Less => "f ⊑ g",
            Disclosure::Greater => "g ⊑ f",
            Disclosure::Incomparable => "incomparable",
        })
    }
}

/// The comparison of `f` and `g` with their kernels' class counts.
pub fn compare(f: &Program, g: &Program, budget: u64) -> Result<(Disclosure, usize, usize), KnowledgeError> {
    let (of, og) = observe_both(f, g, budget)?;
    let (kf, kg) = (of.kernel(), og.kernel());
    let d = match (kg.refines(&kf), kf.refines(&kg)) {
        (true, true) => Disclosure::Equivalent,
        (true, false) => Disclosure::Less,
        (false, true) => Disclosure::Greater,
        (false, false) => Disclosure::Incomparable,
    };
    Ok((d, kf.class_count(), kg.class_count()))
}

/// A legitimate program and a hidden use of the same inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackerPair {
    pub legitimate: Program,
    pub hidden: Program,
}

impl AttackerPair {
    pub fn new(legitimate: Program, hidden: Program) -> Result<Self, KnowledgeError> {
        if legitimate.inputs != hidden.inputs {
            return Err(KnowledgeError::SignatureMismatch(legitimate.name, hidden.name));
        }
        Ok(AttackerPair { legitimate, hidden })
    }
}

/// Injective encoding of an output pair into one integer: the pair of
/// ordinals `(p, h)` maps to `p * span + (h - h_min)`, where `[h_min,
/// h_min + span)` covers every output of the hidden program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairEncoding {
    pub span: i64,
    pub h_min: i64,
}

impl PairEncoding {
    pub fn encode(&self, p: i64, h: i64) -> i64 {
        p * self.span + (h - self.h_min)
    }

    pub fn decode(&self, n: i64) -> (i64, i64) {
        (n.div_euclid(self.span), n.rem_euclid(self.span) + self.h_min)
    }
}

/// `⟨p, h⟩` as a single program, together with its output encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    pub program: Program,
    pub encoding: PairEncoding,
}

/// Builds `⟨p, h⟩` from the symbolic leaves of both programs: one guarded
/// return per jointly feasible pair of leaves.
pub fn attacker_compose(pair: &AttackerPair) -> Result<Composition, KnowledgeError> {
    attacker_compose_with(pair, DEFAULT_UNROLL, &Solver::default())
}

pub fn attacker_compose_with(pair: &AttackerPair, unroll: u64, solver: &Solver) -> Result<Composition, KnowledgeError> {
    let (p, h) = (&pair.legitimate, &pair.hidden);
    let gp = symbolic_execute_with(p, unroll, solver)?;
    let gh = symbolic_execute_with(h, unroll, solver)?;
    let env = gp.env();
    let pre = Formula::and([gp.precondition.clone(), gh.precondition.clone()]).simplify();

    let lp = ordinal_leaves(&gp.leaves, gp.output);
    let lh = ordinal_leaves(&gh.leaves, gh.output);
    let mut h_range: Option<(i64, i64)> = None;
    for (pc, e) in &lh {
        let constraint = Formula::and([pre.clone(), pc.clone()]);
        if let Some((lo, hi)) = solver.term_bounds(e, &constraint, &env)? {
            h_range = Some(h_range.map_or((lo, hi), |(a, b)| (a.min(lo), b.max(hi))));
        }
    }
    let (h_min, h_max) = h_range.unwrap_or((0, 0));
    let encoding = PairEncoding {
        span: h_max - h_min + 1,
        h_min,
    };

    let mut body = Vec::new();
    for (pc_p, e_p) in &lp {
        for (pc_h, e_h) in &lh {
            let guard = Formula::and([pc_p.clone(), pc_h.clone()]).simplify();
            if !solver.check(&Formula::and([pre.clone(), guard.clone()]), &env)? {
                continue;
            }
            let cond = guard.to_expr().expect("path conditions are quantifier-free");
            let ret = Stmt::Return(encode_expr(&encoding, e_p.clone(), e_h.clone()).fold());
            body.push(match cond {
                Expr::Bool(true) => ret,
                cond => Stmt::If {
                    cond,
                    then_block: vec![ret],
                    else_block: Vec::new(),
                },
            });
        }
    }
    if !matches!(body.last(), Some(Stmt::Return(_))) {
        body.push(Stmt::Return(Expr::Int(0)));
    }
    let precondition = pre.to_expr().expect("preconditions are quantifier-free");
    let program = Program {
        name: format!("{}_with_{}", p.name, h.name),
        inputs: p.inputs.clone(),
        output: Type::Int,
        precondition,
        body,
    };
    Ok(Composition { program, encoding })
}

/// Leaves with integer outputs; a boolean leaf splits on its output.
fn ordinal_leaves(leaves: &[crate::symexec::SymbolicLeaf], ty: Type) -> Vec<(Formula, Expr)> {
    leaves
        .iter()
        .flat_map(|l| match ty {
            Type::Int => vec![(l.path_condition.clone(), l.output.clone())],
            Type::Bool => {
                let b = Formula::from_expr(&l.output);
                vec![
                    (Formula::and([l.path_condition.clone(), b.clone()]).simplify(), Expr::Int(1)),
                    (Formula::and([l.path_condition.clone(), Formula::not(b)]).simplify(), Expr::Int(0)),
                ]
            }
        })
        .filter(|(pc, _)| *pc != Formula::Const(false))
        .collect()
}

fn encode_expr(enc: &PairEncoding, p: Expr, h: Expr) -> Expr {
    let high = match enc.span {
        1 => p,
        s => Expr::binary(BinOp::Mul, p, Expr::Int(s)),
    };
    let low = match enc.h_min {
        0 => h,
        m if m < 0 => Expr::binary(BinOp::Add, h, Expr::Int(-m)),
        m => Expr::binary(BinOp::Sub, h, Expr::Int(m)),
    };
    Expr::binary(BinOp::Add, high, low)
}

/// Checks `⟨p, h⟩ ∘ m ≡ p` on the admissible inputs of `p`, which `h` must
/// accept as well.
pub fn verify_theorem1(p: &Program, h: &Program, m: &Minimiser, budget: u64) -> Result<bool, KnowledgeError> {
    let composed = attacker_compose(&AttackerPair::new(p.clone(), h.clone())?)?;
    let tp = OutputTable::compute(p, budget)?;
    let tc = OutputTable::compute(&composed.program, budget)?;
    if let Some(k) = tp.admissible().find(|&k| tc.get(k).is_none()) {
        return Err(KnowledgeError::HiddenUndefined {
            program: h.name.clone(),
            input: tp.space.valuation(k),
        });
    }
    let applier = IndexedMinimiser::new(m);
    let mut left = Vec::new();
    for k in tp.admissible() {
        let Some(r) = applier.apply(&tp.space.point(k)) else {
            return Ok(false);
        };
        let Some(out) = tc.get(tc.space.index(&r)) else {
            return Ok(false);
        };
        left.push((k, out));
    }
    Ok(Partition::from_labels(left) == kernel_of(&tp))
}

/// One observed run: the input disclosed and the output computed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub input: Valuation,
    pub output: Value,
}

/// Two distinct disclosed inputs that led to the same output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BreachWitness {
    pub first: Valuation,
    pub second: Valuation,
    pub output: Value,
}

impl fmt::Display for BreachWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} and {} both yield {}", self.first, self.second, self.output)
    }
}

/// Every pair of distinct disclosed inputs with equal outputs, each pair
/// reported once, in log order.
pub fn audit_log(entries: &[LogEntry]) -> Vec<BreachWitness> {
    let mut by_output: Vec<(Value, Vec<Valuation>)> = Vec::new();
    for e in entries {
        let input = e.input.normalized();
        match by_output.iter_mut().find(|(o, _)| *o == e.output) {
            Some((_, seen)) if seen.contains(&input) => {}
            Some((_, seen)) => seen.push(input),
            None => by_output.push((e.output, vec![input])),
        }
    }
    let mut out = Vec::new();
    for (output, inputs) in &by_output {
        for (a, first) in inputs.iter().enumerate() {
            for second in &inputs[a + 1..] {
                out.push(BreachWitness {
                    first: first.clone(),
                    second: second.clone(),
                    output: *output,
                });
            }
        }
    }
    out
}

/// Parses a log of JSON lines `{"input": {...}, "output": v}`. Blank lines
/// are skipped.
pub fn parse_audit_log(text: &str) -> Result<Vec<LogEntry>, KnowledgeError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| KnowledgeError::Log {
                line: n + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::dsl::parse;
    use crate::oracle::{identity_minimiser, kernel, reference_best_monolithic, DEFAULT_BUDGET};

    fn prog(src: &str) -> Program {
        parse(src).unwrap()
    }

    #[test]
    fn benefits_knowledge() {
        let p = corpus::get("benefits.dm").unwrap();
        let k = knowledge_set(&p, &Valuation::new().with("salary", 8000), DEFAULT_BUDGET).unwrap();
        assert_eq!(k.members.len(), 10_000);
        assert_eq!(k.members.first().unwrap().to_string(), "salary=0");
        assert_eq!(k.members.last().unwrap().to_string(), "salary=9999");
        let err = knowledge_set(&p, &Valuation::new().with("salary", -1), DEFAULT_BUDGET);
        assert!(matches!(err, Err(KnowledgeError::Inadmissible(_))));
    }

    #[test]
    fn credit_unique_top_score() {
        let p = corpus::get("credit.dm").unwrap();
        let v = Valuation::new().with("incidents", 0).with("tax", 3);
        assert_eq!(knowledge_set(&p, &v, DEFAULT_BUDGET).unwrap().members, [v]);
    }

    #[test]
    fn mod_examples() {
        let get = |f| corpus::get(f).unwrap();
        let (m2, m4, pos) = (get("mod2.dm"), get("mod4.dm"), get("pos.dm"));
        assert_eq!(compare(&m2, &m4, DEFAULT_BUDGET).unwrap().0, Disclosure::Less);
        assert_eq!(compare(&m4, &m2, DEFAULT_BUDGET).unwrap().0, Disclosure::Greater);
        assert_eq!(compare(&pos, &m2, DEFAULT_BUDGET).unwrap().0, Disclosure::Incomparable);
        assert_eq!(compare(&pos, &pos, DEFAULT_BUDGET).unwrap(), (Disclosure::Equivalent, 2, 2));
        let b = get("benefits.dm");
        assert!(matches!(discloses_leq(&m2, &b, DEFAULT_BUDGET), Err(KnowledgeError::SignatureMismatch(..))));
    }

    #[test]
    fn composition_kernels() {
        let m2 = corpus::get("mod2.dm").unwrap();
        let ge8 = prog("program ge8(x: int[0..15]) -> bool { return x >= 8; }");
        let c = attacker_compose(&AttackerPair::new(m2.clone(), ge8).unwrap()).unwrap();
        assert_eq!(kernel(&c.program, DEFAULT_BUDGET).unwrap().class_count(), 4);
        // decoding recovers both outputs
        let t = OutputTable::compute(&c.program, DEFAULT_BUDGET).unwrap();
        for k in 0..16u64 {
            let (p, h) = c.encoding.decode(t.get(k).unwrap().as_int().unwrap());
            assert_eq!((p, h), ((k % 2) as i64, (k >= 8) as i64));
        }
    }

    #[test]
    fn negative_hidden_outputs() {
        let p = prog("program p(x: int[0..5]) -> int { return x / 2; }");
        let h = prog("program h(x: int[0..5]) -> int { return 0 - x; }");
        let c = attacker_compose(&AttackerPair::new(p, h).unwrap()).unwrap();
        assert_eq!(c.encoding, PairEncoding { span: 6, h_min: -5 });
        let t = OutputTable::compute(&c.program, DEFAULT_BUDGET).unwrap();
        for k in 0..6i64 {
            assert_eq!(c.encoding.decode(t.get(k as u64).unwrap().as_int().unwrap()), (k / 2, -k));
        }
    }

    #[test]
    fn theorem1_on_benefits() {
        let p = corpus::get("benefits.dm").unwrap();
        let id = corpus::get("identity.dm").unwrap();
        let hid = prog("program hid(salary: int[0..100000]) -> int { return salary; }");
        let hconst = prog("program hc(salary: int[0..100000]) -> int { return 3; }");
        let best = reference_best_monolithic(&p, DEFAULT_BUDGET).unwrap();
        let idm = identity_minimiser(&p, DEFAULT_BUDGET).unwrap();
        assert!(verify_theorem1(&p, &hid, &best, DEFAULT_BUDGET).unwrap());
        assert!(verify_theorem1(&p, &hconst, &idm, DEFAULT_BUDGET).unwrap());
        assert!(!verify_theorem1(&p, &hid, &idm, DEFAULT_BUDGET).unwrap());
        assert!(AttackerPair::new(p.clone(), id).is_err());
        let partial = prog("program hp(salary: int[0..100000]) -> int requires salary < 5; { return 1; }");
        assert!(matches!(
            verify_theorem1(&p, &partial, &best, DEFAULT_BUDGET),
            Err(KnowledgeError::HiddenUndefined { .. })
        ));
    }

    #[test]
    fn audit() {
        let e = |s: i64, o: bool| LogEntry {
            input: Valuation::new().with("salary", s),
            output: Value::Bool(o),
        };
        let w = audit_log(&[e(7000, true), e(8000, true)]);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].to_string(), "salary=7000 and salary=8000 both yield true");
        assert!(audit_log(&[e(0, true), e(10000, false)]).is_empty());
        assert!(audit_log(&[e(5, true), e(5, true)]).is_empty());
        assert!(audit_log(&[]).is_empty());
    }

    #[test]
    fn log_parsing() {
        let text = "{\"input\": {\"salary\": 7000}, \"output\": true}\n\n{\"input\": {\"salary\": 8000}, \"output\": true}\n";
        assert_eq!(parse_audit_log(text).unwrap().len(), 2);
        assert!(matches!(parse_audit_log("{}"), Err(KnowledgeError::Log { line: 1, .. })));
    }
}
