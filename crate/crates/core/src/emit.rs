//! Minimisers as JSON decision tables and as mini-language source.
//!
//! ```
//! use datamin::{corpus, emit, symexec, synth};
//!
//! let p = corpus::get("benefits.dm").unwrap();
//! let gamma = symexec::symbolic_execute(&p, 8).unwrap();
//! let m = synth::synthesize_monolithic(&p, &gamma).unwrap();
//! let source = emit::to_source(&m);
//! assert!(source[0].to_string().contains("if (salary <= 9999) {"));
//! let json = emit::to_json(&m, &p);
//! assert_eq!(emit::from_json(&json, &p).unwrap(), m);
//! ```

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dsl::{parse_expr, BinOp, Expr, Program, Stmt};
use crate::logic::{Env, Formula, Interval, LogicError, Region, Solver};
use crate::synth::{GuardedRepresentative, Minimiser, Mode, Table};
use crate::value::{Type, Valuation, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("malformed minimiser document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("document was made for program `{expected}` with digest {digest}, which does not match")]
    DigestMismatch { expected: String, digest: String },
    #[error("table over {0:?} does not match the program's inputs")]
    Columns(Vec<String>),
    #[error("guard `{guard}`: {message}")]
    Guard { guard: String, message: String },
    #[error("representative {0} does not bind the table's inputs within their domains")]
    Representative(Valuation),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimiserDocument {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub program: ProgramInfo,
    pub mode: Mode,
    pub tables: Vec<TableDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramInfo {
    pub name: String,
    /// `sha256:` followed by the hex digest of the program's canonical
    /// source.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDocument {
    pub inputs: Vec<String>,
    pub domain_size: u64,
    pub class_count: usize,
    pub rows: Vec<RowDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDocument {
    pub guard: String,
    pub representative: Valuation,
}

/// Digest of the canonical rendering of `program`, so that formatting and
/// comments do not matter.
pub fn program_digest(program: &Program) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(program.to_string().as_bytes())))
}

/// Rows sorted by representative.
fn sorted_rows(t: &Table) -> Vec<&GuardedRepresentative> {
    let mut rows: Vec<&GuardedRepresentative> = t.rows.iter().collect();
    rows.sort_by(|a, b| a.representative.cmp(&b.representative));
    rows
}

pub fn document(m: &Minimiser, program: &Program) -> MinimiserDocument {
    let tables = m
        .tables
        .iter()
        .map(|t| {
            let names: Vec<String> = t.columns.iter().map(|&k| m.inputs[k].name.clone()).collect();
            let domain_size = t.columns.iter().map(|&k| m.inputs[k].domain.cardinality()).product();
            TableDocument {
                inputs: names.clone(),
                domain_size,
                class_count: t.class_count(),
                rows: sorted_rows(t)
                    .into_iter()
                    .map(|r| RowDocument {
                        guard: guard_expr(&r.guard).to_string(),
                        representative: names.iter().cloned().zip(r.representative.iter().copied()).collect(),
                    })
                    .collect(),
            }
        })
        .collect();
    MinimiserDocument {
        schema_version: SCHEMA_VERSION,
        tool: ToolInfo {
            name: "datamin".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
        program: ProgramInfo {
            name: program.name.clone(),
            digest: program_digest(program),
        },
        mode: m.mode,
        tables,
    }
}

fn guard_expr(guard: &Region) -> Expr {
    guard.to_formula().to_expr().expect("regions are quantifier-free")
}

/// Pretty-printed, deterministic JSON.
pub fn to_json(m: &Minimiser, program: &Program) -> String {
    let mut s = serde_json::to_string_pretty(&document(m, program)).expect("documents serialise");
    s.push('\n');
    s
}

/// Loads a document made for `program`.
pub fn from_json(text: &str, program: &Program) -> Result<Minimiser, EmitError> {
    from_document(&serde_json::from_str(text)?, program)
}

pub fn from_document(doc: &MinimiserDocument, program: &Program) -> Result<Minimiser, EmitError> {
    if doc.schema_version != SCHEMA_VERSION {
        return Err(EmitError::SchemaVersion(doc.schema_version));
    }
    if doc.program.digest != program_digest(program) {
        return Err(EmitError::DigestMismatch {
            expected: doc.program.name.clone(),
            digest: doc.program.digest.clone(),
        });
    }
    let solver = Solver::default();
    let tables = doc
        .tables
        .iter()
        .map(|t| {
            let columns: Vec<usize> = t
                .inputs
                .iter()
                .map(|n| program.input_index(n))
                .collect::<Option<_>>()
                .ok_or_else(|| EmitError::Columns(t.inputs.clone()))?;
            let env = Env::from_inputs(columns.iter().map(|&k| &program.inputs[k]));
            let rows = t
                .rows
                .iter()
                .map(|r| {
                    let representative = columns
                        .iter()
                        .map(|&k| {
                            let i = &program.inputs[k];
                            r.representative.get(&i.name).filter(|v| i.domain.contains(*v))
                        })
                        .collect::<Option<Vec<Value>>>()
                        .filter(|_| r.representative.len() == columns.len())
                        .ok_or_else(|| EmitError::Representative(r.representative.clone()))?;
                    Ok(GuardedRepresentative {
                        guard: load_guard(&r.guard, &env, &solver)?,
                        representative,
                    })
                })
                .collect::<Result<_, EmitError>>()?;
            Ok(Table { columns, rows })
        })
        .collect::<Result<Vec<_>, EmitError>>()?;
    let mut used: Vec<usize> = tables.iter().flat_map(|t| t.columns.iter().copied()).collect();
    used.sort();
    if used != (0..program.inputs.len()).collect::<Vec<_>>() {
        return Err(EmitError::Columns(doc.tables.iter().flat_map(|t| t.inputs.clone()).collect()));
    }
    Ok(Minimiser {
        mode: doc.mode,
        program: program.name.clone(),
        inputs: program.inputs.clone(),
        precondition: Formula::from_expr(&program.precondition.fold()).simplify(),
        tables,
    })
}

fn load_guard(text: &str, env: &Env, solver: &Solver) -> Result<Region, EmitError> {
    let err = |message: String| EmitError::Guard {
        guard: text.to_string(),
        message,
    };
    let expr = parse_expr(text).map_err(|e| err(e.to_string()))?;
    let f = Formula::from_expr(&expr);
    if let Some(b) = as_box(&f, env) {
        return Ok(Region::from_box(env, b));
    }
    solver.project(&f, env).map_err(|e| err(e.to_string()))
}

/// Reads a conjunction of interval atoms as a single box without
/// enumerating the domain.
fn as_box(f: &Formula, env: &Env) -> Option<Vec<Interval>> {
    let mut b: Vec<Interval> = env.iter().map(|(_, d)| d.bounds()).collect();
    let atoms = match f {
        Formula::And(parts) => parts.as_slice(),
        other => std::slice::from_ref(other),
    };
    for a in atoms {
        let (name, lo, hi) = match a {
            Formula::Const(true) => continue,
            Formula::Atom(Expr::Var(x)) => (x, 1, 1),
            Formula::Not(inner) => match &**inner {
                Formula::Atom(Expr::Var(x)) => (x, 0, 0),
                _ => return None,
            },
            Formula::Atom(Expr::Binary(op, l, r)) => match (op, &**l, &**r) {
                (BinOp::Eq, Expr::Var(x), Expr::Int(c)) => (x, *c, *c),
                (BinOp::Le, Expr::Int(c), Expr::Var(x)) => (x, *c, i64::MAX),
                (BinOp::Le, Expr::Var(x), Expr::Int(c)) => (x, i64::MIN, *c),
                _ => return None,
            },
            _ => return None,
        };
        let k = env.position(name)?;
        let ty = env.iter().nth(k)?.1.ty();
        // a bare variable must be boolean and a comparison must be on an integer
        let is_bool_atom = matches!(a, Formula::Atom(Expr::Var(_)) | Formula::Not(_));
        if is_bool_atom != (ty == Type::Bool) {
            return None;
        }
        b[k] = (b[k].0.max(lo), b[k].1.min(hi));
    }
    Some(b)
}

/// One program per input, `<program>_min_<input>`, returning that input's
/// representative. Distributed programs take only their input; monolithic
/// ones take every input.
pub fn to_source(m: &Minimiser) -> Vec<Program> {
    m.tables
        .iter()
        .flat_map(|t| {
            let env = Env::from_inputs(t.columns.iter().map(|&k| &m.inputs[k]));
            let rows = sorted_rows(t);
            let covered = Region::from_bitmap(&env, &{
                let mut bits = vec![false; env.product_size() as usize];
                for r in &rows {
                    for p in r.guard.points() {
                        bits[env.index_of(&p) as usize] = true;
                    }
                }
                bits
            });
            let precondition = guard_expr(&covered);
            t.columns.iter().enumerate().map(move |(pos, &k)| {
                let input = &m.inputs[k];
                let var = format!("repr_{}", input.name);
                let assign = |r: &GuardedRepresentative| {
                    vec![Stmt::Assign {
                        name: var.clone(),
                        value: Expr::value(r.representative[pos]),
                    }]
                };
                let mut chain: Vec<Stmt> = rows.last().map(|r| assign(r)).unwrap_or_default();
                for r in rows.iter().rev().skip(1) {
                    chain = vec![Stmt::If {
                        cond: guard_expr(&r.guard),
                        then_block: assign(r),
                        else_block: chain,
                    }];
                }
                let (lo, _) = input.domain.bounds();
                let init = rows
                    .first()
                    .map_or(Value::from_ordinal(input.domain.ty(), lo), |r| r.representative[pos]);
                let mut body = vec![Stmt::Var {
                    name: var.clone(),
                    init: Expr::value(init),
                }];
                body.extend(chain);
                body.push(Stmt::Return(Expr::var(var.clone())));
                Program {
                    name: format!("{}_min_{}", m.program, input.name),
                    inputs: t.columns.iter().map(|&c| m.inputs[c].clone()).collect(),
                    output: input.domain.ty(),
                    precondition: precondition.clone(),
                    body,
                }
            })
        })
        .collect()
}
