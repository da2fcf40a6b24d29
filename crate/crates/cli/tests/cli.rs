use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(file)
}

fn datamin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_datamin"))
        .args(args)
        .env_remove("DATAMIN_SMT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path());
    let o = datamin(&["synth", p(&corpus("benefits.dm")), "--mode", "monolithic", "-o", out]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "classes=2 domain=100001\n");
    assert!(dir.path().join("benefits.minimiser.json").exists());

    let o = datamin(&["synth", p(&corpus("credit.dm")), "--mode", "distributed", "-o", out]);
    assert_eq!(stdout(&o), "incidents: classes=3/4\ntax: classes=2/3\n");

    let o = datamin(&["synth", p(&corpus("const.dm")), "-o", out]);
    assert!(stdout(&o).contains("classes=1"));
}

#[test]
fn synth_writes_sources_and_tree() {
    let dir = tempfile::tempdir().unwrap();
    let o = datamin(&["synth", p(&corpus("credit.dm")), "-o", p(dir.path()), "--emit-source", "--dump-tree"]);
    assert_eq!(code(&o), 0);
    let src = fs::read_to_string(dir.path().join("credit_min_incidents.dm")).unwrap();
    assert!(src.starts_with("program credit_min_incidents(incidents: int[0..3]) -> int {"));
    assert!(dir.path().join("credit_min_tax.dm").exists());
    let tree: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("credit.tree.json")).unwrap()).unwrap();
    assert!(tree.is_object());
}

#[test]
fn synth_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(code(&datamin(&["synth", p(&corpus("loyalty.dm")), "-o", p(d.path())])), 0);
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("loyalty.minimiser.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn synth_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = datamin(&["synth", p(&corpus("loyalty.dm")), "-o", p(dir.path()), "--unroll", "3"]);
    assert_eq!(code(&o), 2);
    let o = datamin(&["synth", p(&corpus("loyalty.dm")), "-o", p(dir.path()), "--class-cap", "5"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&datamin(&["synth", "missing.dm"])), 1);
    assert_eq!(code(&datamin(&["frobnicate"])), 1);
    assert_eq!(code(&datamin(&["synth", p(&corpus("benefits.dm")), "--mode", "both"])), 1);
    assert_eq!(code(&datamin(&["synth", p(&corpus("benefits.dm")), "--budget", "0"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dm");
    fs::write(&bad, "program f(x: int[0..3]) -> int { return y; }").unwrap();
    let o = datamin(&["synth", p(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.dm:"));
    assert_eq!(code(&datamin(&["--help"])), 0);
}

#[test]
fn synth_then_verify_passes_on_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path());
    for entry in fs::read_dir(corpus("")).unwrap() {
        let path = entry.unwrap().path();
        for mode in ["monolithic", "distributed"] {
            assert_eq!(code(&datamin(&["synth", p(&path), "--mode", mode, "-o", out])), 0, "{}", path.display());
            let name = parse_name(&path);
            let doc = dir.path().join(format!("{name}.minimiser.json"));
            let o = datamin(&["verify", p(&path), p(&doc)]);
            assert_eq!(code(&o), 0, "{} {mode}: {}", path.display(), stdout(&o));
        }
    }
}

fn parse_name(path: &Path) -> String {
    datamin::dsl::parse(&fs::read_to_string(path).unwrap()).unwrap().name
}

fn write_doc(dir: &Path, m: &datamin::synth::Minimiser, program: &datamin::dsl::Program) -> PathBuf {
    let path = dir.join("m.json");
    fs::write(&path, datamin::emit::to_json(m, program)).unwrap();
    path
}

#[test]
fn verify_rejects_identity_and_constant_minimisers() {
    use datamin::oracle::{identity_minimiser, DEFAULT_BUDGET};
    let dir = tempfile::tempdir().unwrap();
    let program = datamin::corpus::get("benefits.dm").unwrap();

    let id = identity_minimiser(&program, DEFAULT_BUDGET).unwrap();
    let doc = write_doc(dir.path(), &id, &program);
    let report = dir.path().join("report.json");
    let o = datamin(&["verify", p(&corpus("benefits.dm")), p(&doc), "--report", p(&report)]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("FAIL best: salary=0 and salary=1 are interchangeable"));
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["passed"], false);

    let mut zero = id.clone();
    let t = &mut zero.tables[0];
    t.rows.truncate(1);
    t.rows[0].guard = datamin::logic::Region::from_box(&datamin::logic::Env::from_inputs(&program.inputs), vec![(0, 100_000)]);
    let doc = write_doc(dir.path(), &zero, &program);
    let o = datamin(&["verify", p(&corpus("benefits.dm")), p(&doc)]);
    assert_eq!(code(&o), 3);
    let s = stdout(&o);
    assert!(s.contains("FAIL correctness: salary=10000 yields false but its representative salary=0 yields true"), "{s}");
}

#[test]
fn verify_refuses_documents_for_other_programs() {
    let dir = tempfile::tempdir().unwrap();
    datamin(&["synth", p(&corpus("mod2.dm")), "-o", p(dir.path())]);
    let o = datamin(&["verify", p(&corpus("mod4.dm")), p(&dir.path().join("mod2.minimiser.json"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn online_representatives() {
    let run = |file: &str, ins: &[&str], extra: &[&str]| {
        let c = corpus(file);
        let mut args = vec!["online", p(&c)];
        for i in ins {
            args.extend(["--in", i]);
        }
        args.extend(extra);
        let o = datamin(&args);
        (code(&o), stdout(&o))
    };
    assert_eq!(run("benefits.dm", &["salary=8000"], &[]), (0, "salary=0\n".into()));
    assert_eq!(run("benefits.dm", &["salary=10000"], &[]), (0, "salary=10000\n".into()));
    assert_eq!(run("credit.dm", &["incidents=3", "tax=2"], &[]), (0, "incidents=2 tax=1\n".into()));
    assert_eq!(run("loyalty.dm", &["flights=57"], &["--mode", "monolithic"]), (0, "flights=30\n".into()));
    assert_eq!(run("benefits.dm", &["salary=-3"], &[]).0, 1);
    assert_eq!(run("benefits.dm", &["salary=true"], &[]).0, 1);
    assert_eq!(run("window.dm", &["start=8", "len=5"], &[]).0, 1);
}

#[test]
fn audit_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.jsonl");
    let run = |text: &str| {
        fs::write(&log, text).unwrap();
        let o = datamin(&["audit", p(&log)]);
        (code(&o), stdout(&o))
    };
    let (c, s) = run("{\"input\":{\"salary\":7000},\"output\":true}\n{\"input\":{\"salary\":8000},\"output\":true}\n");
    assert_eq!(c, 4);
    assert!(s.starts_with("salary=7000 and salary=8000 both yield true\n"));
    assert_eq!(run("").0, 0);
    assert_eq!(run("{\"input\":{\"salary\":0},\"output\":true}\n{\"input\":{\"salary\":10000},\"output\":false}\n").0, 0);
    assert_eq!(run("not json\n").0, 1);
}

#[test]
fn knowledge_ordering() {
    let run = |f: &str, g: &str| stdout(&datamin(&["knowledge", p(&corpus(f)), p(&corpus(g))]));
    assert!(run("mod2.dm", "mod4.dm").starts_with("f ⊑ g\n"));
    assert!(run("mod4.dm", "mod2.dm").starts_with("g ⊑ f\n"));
    assert!(run("pos.dm", "mod2.dm").starts_with("incomparable\n"));
    assert!(run("mod4.dm", "mod4.dm").starts_with("f ≡ g\nf: mod4 classes=4\n"));
    assert_eq!(code(&datamin(&["knowledge", p(&corpus("mod2.dm")), p(&corpus("benefits.dm"))])), 1);
}

#[test]
fn theorem1_with_seed() {
    let o = datamin(&["theorem1", p(&corpus("credit.dm")), "--seed", "11", "--samples", "5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "5 of 5 hidden programs learn nothing beyond credit\n");
}

#[test]
fn smt_script() {
    let o = datamin(&["smt", p(&corpus("benefits.dm"))]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("(declare-const salary Int)"));
    assert!(s.trim_end().ends_with("(check-sat)"));
}

fn z3() -> Option<PathBuf> {
    let path = PathBuf::from("/usr/local/bin/z3");
    path.exists().then_some(path)
}

#[test]
fn external_solver_cross_check() {
    let Some(z3) = z3() else {
        eprintln!("skipped: z3 not installed");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let o = datamin(&["synth", p(&corpus("credit.dm")), "-o", p(dir.path()), "--smt-solver", p(&z3)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("smt: 5 guards confirmed"));
    let o = Command::new(env!("CARGO_BIN_EXE_datamin"))
        .args(["smt", p(&corpus("window.dm"))])
        .env("DATAMIN_SMT", &z3)
        .output()
        .unwrap();
    assert!(stdout(&o).contains("; internal: sat, external: sat"));
}
