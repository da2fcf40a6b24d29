use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use datamin::dsl::{parse, Program};
use datamin::emit;
use datamin::knowledge::{self, KnowledgeError};
use datamin::logic::{to_smtlib, Formula, Solver};
use datamin::oracle::{check_minimiser, reference_best_monolithic, OracleError, OutputTable, PropertyResult};
use datamin::random::ProgramGenerator;
use datamin::symexec::{symbolic_execute_with, SymbolicCharacterisation};
use datamin::synth::{class_formula, online_representative_in, synthesize, Minimiser, Mode, SynthOptions};
use datamin::{Valuation, Value};
use serde::Serialize;

use crate::smt::{self, Answer};
use crate::{status, Limits};

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

type Outcome = Result<u8, Failure>;

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> Failure {
    move |error| Failure { code, error }
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    fail(status::USAGE)(e.into())
}

fn synthesis<E: Into<anyhow::Error>>(e: E) -> Failure {
    fail(status::SYNTHESIS)(e.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(usage)
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    let src = read(path)?;
    parse(&src)
        .map_err(|e| anyhow!("{}:{e}", path.display()))
        .map_err(usage)
}

fn characterise(p: &Program, limits: &Limits, solver: &Solver) -> Result<SymbolicCharacterisation, Failure> {
    symbolic_execute_with(p, limits.unroll, solver).map_err(synthesis)
}

fn options(limits: &Limits) -> SynthOptions {
    SynthOptions {
        class_cap: usize::try_from(limits.class_cap).unwrap_or(usize::MAX),
    }
}

pub struct SynthArgs {
    pub program: PathBuf,
    pub mode: Mode,
    pub output: PathBuf,
    pub emit_source: bool,
    pub dump_tree: bool,
    pub smt_solver: Option<PathBuf>,
    pub limits: Limits,
    pub verbose: bool,
}

pub fn synth(args: &SynthArgs) -> Outcome {
    let start = Instant::now();
    let p = load_program(&args.program)?;
    fs::create_dir_all(&args.output)
        .with_context(|| format!("cannot create {}", args.output.display()))
        .map_err(usage)?;
    let solver = Solver::new(args.limits.budget);
    let gamma = characterise(&p, &args.limits, &solver)?;
    if args.dump_tree {
        write(&args.output.join(format!("{}.tree.json", p.name)), &gamma.dump_json())?;
    }
    let m = synthesize(&p, &gamma, args.mode, &solver, &options(&args.limits)).map_err(synthesis)?;

    match m.mode {
        Mode::Monolithic => println!("classes={} domain={}", m.tables[0].class_count(), p.product_size()),
        Mode::Distributed => {
            for t in &m.tables {
                let input = &p.inputs[t.columns[0]];
                println!("{}: classes={}/{}", input.name, t.class_count(), input.domain.cardinality());
            }
        }
    }

    if let Some(path) = &args.smt_solver {
        let checked = cross_check(&gamma, &m, path)?;
        println!("smt: {checked} guards confirmed by {}", path.display());
    }

    write(&args.output.join(format!("{}.minimiser.json", p.name)), &emit::to_json(&m, &p))?;
    if args.emit_source {
        for q in emit::to_source(&m) {
            write(&args.output.join(format!("{}.dm", q.name)), &q.to_string())?;
        }
    }
    if args.verbose {
        let s = solver.stats();
        eprintln!(
            "symbolic leaves: {}; solver checks: {}, models: {}, eliminations: {}; {:.3}s",
            gamma.leaves.len(),
            s.checks,
            s.models,
            s.eliminations,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(status::OK)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(usage)
}

/// Asks the external solver whether any guard differs from the class
/// formula it was eliminated from.
fn cross_check(gamma: &SymbolicCharacterisation, m: &Minimiser, solver: &Path) -> Result<usize, Failure> {
    let mut n = 0;
    for t in &m.tables {
        let env = datamin::logic::Env::from_inputs(t.columns.iter().map(|&k| &m.inputs[k]));
        for row in &t.rows {
            let class = class_formula(gamma, &t.columns, &row.representative);
            let guard = row.guard.to_formula();
            let differ = Formula::or([
                Formula::and([guard.clone(), Formula::not(class.clone())]),
                Formula::and([Formula::not(guard), class]),
            ]);
            match smt::run(solver, &to_smtlib(&differ, &env)).map_err(synthesis)? {
                Answer::Unsat => n += 1,
                Answer::Sat => {
                    return Err(synthesis(anyhow!(
                        "external solver disagrees on the guard of representative {:?}",
                        row.representative
                    )))
                }
            }
        }
    }
    Ok(n)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    program: &'a str,
    digest: String,
    mode: Mode,
    passed: bool,
    properties: &'a [PropertyResult],
}

pub fn verify(program: &Path, minimiser: &Path, report: Option<&Path>, limits: &Limits) -> Outcome {
    let p = load_program(program)?;
    let m = emit::from_json(&read(minimiser)?, &p).map_err(usage)?;
    let table = OutputTable::compute(&p, limits.budget).map_err(|e| match e {
        OracleError::BudgetExceeded { .. } => synthesis(e),
        other => usage(other),
    })?;
    let results = check_minimiser(&table, &m);
    for r in &results {
        match &r.witness {
            None => println!("PASS {}", r.property),
            Some(w) => println!("FAIL {}: {w}", r.property),
        }
    }
    let passed = results.iter().all(|r| r.passed);
    if let Some(path) = report {
        let doc = VerifyReport {
            program: &p.name,
            digest: emit::program_digest(&p),
            mode: m.mode,
            passed,
            properties: &results,
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("reports serialise");
        text.push('\n');
        write(path, &text)?;
    }
    Ok(if passed { status::OK } else { status::VERIFICATION })
}

fn parse_binding(p: &Program, s: &str) -> Result<(String, Value), Failure> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| usage(anyhow!("expected NAME=VALUE, got `{s}`")))?;
    let name = name.trim();
    let input = p
        .input(name)
        .ok_or_else(|| usage(anyhow!("program `{}` has no input `{name}`", p.name)))?;
    let v: Value = serde_json::from_str(value.trim())
        .map_err(|_| usage(anyhow!("`{value}` is not a value")))?;
    if v.ty() != input.domain.ty() {
        return Err(usage(anyhow!("`{name}` expects a {} value", input.domain.ty())));
    }
    Ok((name.to_string(), v))
}

pub fn online(program: &Path, bindings: &[String], mode: Mode, limits: &Limits, verbose: bool) -> Outcome {
    let p = load_program(program)?;
    let mut v = Valuation::new();
    for b in bindings {
        let (name, value) = parse_binding(&p, b)?;
        v.insert(name, value);
    }
    let solver = Solver::new(limits.budget);
    let gamma = characterise(&p, limits, &solver)?;
    let r = online_representative_in(&p, &gamma, &v, mode, &solver).map_err(|e| match e {
        datamin::synth::SynthError::Input(_) => usage(e),
        other => synthesis(other),
    })?;
    println!("{r}");
    if verbose {
        let s = solver.stats();
        eprintln!("eliminations: {}, models: {}", s.eliminations, s.models);
    }
    Ok(status::OK)
}

pub fn audit(log: &Path) -> Outcome {
    let entries = knowledge::parse_audit_log(&read(log)?).map_err(usage)?;
    let witnesses = knowledge::audit_log(&entries);
    for w in &witnesses {
        println!("{w}");
    }
    println!("{} breach witnesses in {} entries", witnesses.len(), entries.len());
    Ok(if witnesses.is_empty() { status::OK } else { status::BREACH })
}

fn knowledge_failure(e: KnowledgeError) -> Failure {
    match e {
        KnowledgeError::Oracle(OracleError::BudgetExceeded { .. }) | KnowledgeError::Symexec(_) | KnowledgeError::Logic(_) => {
            synthesis(e)
        }
        other => usage(other),
    }
}

pub fn knowledge(f: &Path, g: &Path, limits: &Limits) -> Outcome {
    let (pf, pg) = (load_program(f)?, load_program(g)?);
    let (d, cf, cg) = knowledge::compare(&pf, &pg, limits.budget).map_err(knowledge_failure)?;
    println!("{d}");
    println!("f: {} classes={cf}", pf.name);
    println!("g: {} classes={cg}", pg.name);
    Ok(status::OK)
}

pub fn theorem1(program: &Path, hidden: Option<&Path>, seed: u64, samples: usize, limits: &Limits) -> Outcome {
    let p = load_program(program)?;
    let hs: Vec<Program> = match hidden {
        Some(h) => vec![load_program(h)?],
        None => {
            let mut gen = ProgramGenerator::new(seed);
            (0..samples).map(|_| gen.program(&p.inputs)).collect()
        }
    };
    let m = reference_best_monolithic(&p, limits.budget).map_err(synthesis)?;
    let mut failed = 0;
    for h in &hs {
        let ok = knowledge::verify_theorem1(&p, h, &m, limits.budget).map_err(knowledge_failure)?;
        if !ok {
            failed += 1;
            println!("FAIL hidden program:\n{h}");
        }
    }
    println!("{} of {} hidden programs learn nothing beyond {}", hs.len() - failed, hs.len(), p.name);
    Ok(if failed == 0 { status::OK } else { status::VERIFICATION })
}

pub fn smt(program: &Path, solver_path: Option<&Path>, limits: &Limits) -> Outcome {
    let p = load_program(program)?;
    let solver = Solver::new(limits.budget);
    let gamma = characterise(&p, limits, &solver)?;
    let reach = gamma.reachable();
    let script = to_smtlib(&reach, &gamma.env());
    print!("{script}");
    if let Some(path) = solver_path {
        let ours = solver.check(&reach, &gamma.env()).map_err(synthesis)?;
        let theirs = smt::run(path, &script).map_err(synthesis)? == Answer::Sat;
        println!("; internal: {}, external: {}", sat(ours), sat(theirs));
        if ours != theirs {
            return Ok(status::VERIFICATION);
        }
    }
    Ok(status::OK)
}

fn sat(b: bool) -> &'static str {
    if b {
        "sat"
    } else {
        "unsat"
    }
}
