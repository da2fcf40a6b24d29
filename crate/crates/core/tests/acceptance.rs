//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use datamin::corpus;
use datamin::dsl::{evaluate, parse, Program};
use datamin::emit;
use datamin::knowledge::verify_theorem1;
use datamin::oracle::{
    check_minimiser, coordinate_relations_of, identity_minimiser, maximality, product_within_kernel,
    reference_best_distributed, reference_best_monolithic, same_partition, OutputTable, Space, DEFAULT_BUDGET,
};
use datamin::random::ProgramGenerator;
use datamin::symexec::{symbolic_execute, DEFAULT_UNROLL};
use datamin::synth::{synthesize_distributed, synthesize_monolithic, Minimiser, Table};
use datamin::Value;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn program(file: &str) -> Result<Program, String> {
    corpus::get(file).ok_or_else(|| format!("{file} missing from the corpus"))
}

fn synth(p: &Program, monolithic: bool) -> Result<Minimiser, String> {
    let gamma = symbolic_execute(p, DEFAULT_UNROLL).map_err(|e| e.to_string())?;
    let m = if monolithic { synthesize_monolithic(p, &gamma) } else { synthesize_distributed(p, &gamma) };
    m.map_err(|e| e.to_string())
}

fn all_pass(table: &OutputTable, m: &Minimiser) -> Result<usize, String> {
    let results = check_minimiser(table, m);
    match results.iter().find(|r| !r.passed) {
        Some(r) => Err(format!("{} fails on {}: {:?}", m.program, r.property, r.witness)),
        None => Ok(results.len()),
    }
}

fn ints(rep: &[Value]) -> Vec<i64> {
    rep.iter().map(|v| v.ordinal()).collect()
}

/// Per-class member points of a single-input table, keyed by representative.
fn classes_1d(t: &Table) -> Vec<(i64, Vec<i64>)> {
    let mut out: Vec<(i64, Vec<i64>)> = t
        .rows
        .iter()
        .map(|r| (r.representative[0].ordinal(), r.guard.points().into_iter().map(|p| p[0]).collect()))
        .collect();
    out.sort();
    out
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

fn benefits() -> Outcome {
    let start = Instant::now();
    let p = program("benefits.dm")?;
    let m = synth(&p, true)?;
    let t = &m.tables[0];
    let classes = classes_1d(t);
    let expected = vec![(0, (0..=9999).collect::<Vec<_>>()), (10000, (10000..=100000).collect())];
    ensure(classes == expected, || format!("classes {:?}", classes.iter().map(|c| c.0).collect::<Vec<_>>()))?;
    let table = OutputTable::compute(&p, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let n = all_pass(&table, &m)?;
    let took = within(Duration::from_secs(5), start)?;
    let guards: Vec<String> = t.rows.iter().map(|r| r.guard.to_formula().to_string()).collect();
    Ok(format!("2 classes [{}], {n} properties on 100001 points, {took:.2?}", guards.join(" | ")))
}

fn loyalty() -> Outcome {
    let start = Instant::now();
    let p = program("loyalty.dm")?;
    let m = synth(&p, true)?;
    let classes = classes_1d(&m.tables[0]);
    let mut expected = vec![(0, (0..=10).collect::<Vec<i64>>())];
    expected.extend((11..=24).map(|x| (x, vec![x])));
    expected.push((25, (25..=29).collect()));
    expected.push((30, (30..=100).collect()));
    ensure(classes == expected, || format!("classes {:?}", classes.iter().map(|c| c.0).collect::<Vec<_>>()))?;
    let took = within(Duration::from_secs(2), start)?;
    Ok(format!("17 classes, structure 1/9/5/1/1, {took:.2?}"))
}

fn credit() -> Outcome {
    let start = Instant::now();
    let p = program("credit.dm")?;
    let m = synth(&p, false)?;
    let inc = m.table_for("incidents").ok_or("no incidents table")?;
    let tax = m.table_for("tax").ok_or("no tax table")?;
    let got = (classes_1d(inc), classes_1d(tax));
    let want = (vec![(0, vec![0]), (1, vec![1]), (2, vec![2, 3])], vec![(1, vec![1, 2]), (3, vec![3])]);
    ensure(got == want, || format!("got {got:?}"))?;
    let table = OutputTable::compute(&p, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    ensure(table.space.size() == 12, || "domain is not 12 points".into())?;
    let n = all_pass(&table, &m)?;
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("incidents {{0}},{{1}},{{2,3}}; tax {{1,2}},{{3}}; {n} properties, {took:.2?}"))
}

fn or_gap() -> Outcome {
    let start = Instant::now();
    let p = program("or.dm")?;
    let d = synth(&p, false)?;
    let counts: Vec<usize> = d.tables.iter().map(Table::class_count).collect();
    ensure(counts == [2, 2], || format!("distributed classes {counts:?}"))?;
    for t in &d.tables {
        for r in &t.rows {
            ensure(r.guard.points() == [ints(&r.representative)], || "not the identity".into())?;
        }
    }
    let m = synth(&p, true)?;
    ensure(m.tables[0].class_count() == 2, || format!("monolithic classes {}", m.tables[0].class_count()))?;
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("distributed 2+2 singletons, monolithic 2 classes, {took:.2?}"))
}

fn random_programs(n: u64, max_points: u64) -> Vec<Program> {
    (0..n)
        .map(|seed| {
            let mut g = ProgramGenerator::new(seed).with_preconditions(0.3);
            let sig = g.signature(3, max_points);
            g.program(&sig)
        })
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let mut progs = corpus::all();
    let named = progs.len();
    progs.extend(random_programs(24, 100_000));
    for p in &progs {
        let pairs = [
            (synth(p, false)?, reference_best_distributed(p, DEFAULT_BUDGET)),
            (synth(p, true)?, reference_best_monolithic(p, DEFAULT_BUDGET)),
        ];
        for (m, reference) in pairs {
            let reference = reference.map_err(|e| e.to_string())?;
            let same = same_partition(&m, &reference).map_err(|e| e.to_string())?;
            ensure(same, || format!("{:?} partitions differ on\n{p}", m.mode))?;
        }
    }
    Ok(format!("{named} corpus + {} random programs, both modes", progs.len() - named))
}

fn theorem1() -> Outcome {
    let mut checked = 0;
    for p in corpus::all() {
        let table = OutputTable::compute(&p, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let m = synth(&p, true)?;
        all_pass(&table, &m)?;
        for seed in 0..20 {
            let h = ProgramGenerator::new(seed).program(&p.inputs);
            let holds = verify_theorem1(&p, &h, &m, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
            ensure(holds, || format!("fails for\n{p}\n{h}"))?;
            checked += 1;
        }
    }
    let p = program("benefits.dm")?;
    let h = parse("program h(salary: int[0..100000]) -> int { return salary; }").map_err(|e| e.to_string())?;
    let id = identity_minimiser(&p, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let control = verify_theorem1(&p, &h, &id, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    ensure(!control, || "negative control holds".into())?;
    Ok(format!("{checked} attacker pairs; identity control fails as expected"))
}

fn disclosure() -> Outcome {
    let mut facts = 0;
    for seed in 0..200 {
        facts += common::disclosure_case(seed).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(format!("200 cases, {facts} facts"))
}

fn maximal() -> Outcome {
    let mut merges = 0;
    for p in corpus::all() {
        let table = OutputTable::compute(&p, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let rels = coordinate_relations_of(&table);
        if let Some((a, b)) = product_within_kernel(&table, &rels) {
            return Err(format!("{}: {a} ~ {b} outside the kernel", p.name));
        }
        let report = maximality(&table, &rels);
        ensure(report.unbroken.is_empty(), || format!("{}: {:?}", p.name, report.unbroken))?;
        merges += report.merges_checked;
    }
    Ok(format!("{merges} single merges all leave the kernel"))
}

fn commutativity() -> Outcome {
    let mut points = 0u64;
    for p in corpus::all() {
        let gamma = symbolic_execute(&p, DEFAULT_UNROLL).map_err(|e| e.to_string())?;
        let mut c = gamma.concretiser().map_err(|e| e.to_string())?;
        let space = Space::new(&p.inputs);
        for k in 0..space.size() {
            let v = space.valuation(k);
            let ok = match evaluate(&p, &v) {
                Ok(out) => c.concretise(&v) == Ok(out),
                Err(e) => c.concretise(&v) == Err(e.into()),
            };
            ensure(ok, || format!("{} at {v}", p.name))?;
        }
        points += space.size();
    }
    Ok(format!("{points} points"))
}

fn emission() -> Outcome {
    let mut points = 0u64;
    for p in corpus::all() {
        for monolithic in [false, true] {
            let m = synth(&p, monolithic)?;
            let json = emit::to_json(&m, &p);
            ensure(json == emit::to_json(&synth(&p, monolithic)?, &p), || format!("{} JSON differs", p.name))?;
            let back = emit::from_json(&json, &p).map_err(|e| e.to_string())?;
            ensure(back == m, || format!("{} JSON does not load back", p.name))?;
            let progs = emit::to_source(&m)
                .iter()
                .map(|q| parse(&q.to_string()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            let space = Space::new(&p.inputs);
            for k in 0..space.size() {
                let v = space.valuation(k);
                let Ok(r) = m.apply(&v) else { continue };
                for q in &progs {
                    let input = q.name.rsplit("_min_").next().unwrap_or_default();
                    let sub = q.inputs.iter().map(|i| (i.name.clone(), v.get(&i.name).unwrap())).collect();
                    let got = evaluate(q, &sub).map_err(|e| format!("{}: {e}", q.name))?;
                    ensure(Some(got) == r.get(input), || format!("{} at {v}", q.name))?;
                }
                points += 1;
            }
        }
    }
    Ok(format!("{points} applications agree, JSON byte-stable"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("benefits", benefits),
        ("loyalty", loyalty),
        ("credit", credit),
        ("or-gap", or_gap),
        ("oracle-equivalence", oracle_equivalence),
        ("attacker-pairs", theorem1),
        ("disclosure-ordering", disclosure),
        ("maximality", maximal),
        ("concretise-commutes", commutativity),
        ("emission-round-trip", emission),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
