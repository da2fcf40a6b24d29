//! Shared checks for the property suites and the acceptance run.

#![allow(dead_code)]

use datamin::dsl::{Input, Program};
use datamin::knowledge::{attacker_compose, discloses_leq, AttackerPair, Observation};
use datamin::oracle::{OutputTable, DEFAULT_BUDGET};
use datamin::random::ProgramGenerator;
use datamin::{Domain, Type, Value};

pub fn table(p: &Program) -> OutputTable {
    OutputTable::compute(p, DEFAULT_BUDGET).expect("enumerable")
}

/// `f ⊑ g` straight from the knowledge sets: whenever `g` confuses two
/// inputs, so does `f`.
pub fn leq_by_definition(tf: &OutputTable, tg: &OutputTable) -> bool {
    let adm: Vec<u64> = tf.admissible().collect();
    adm.iter()
        .all(|&u| adm.iter().all(|&v| tg.get(u) != tg.get(v) || tf.get(u) == tf.get(v)))
}

fn ensure(cond: bool, what: &str, progs: &[&Program]) -> Result<(), String> {
    if cond {
        return Ok(());
    }
    let listing: Vec<String> = progs.iter().map(|p| p.to_string()).collect();
    Err(format!("{what} fails on\n{}", listing.join("\n")))
}

/// `k ∘ g` for a random `k` reading `g`'s output.
fn post_compose(gen: &mut ProgramGenerator, g: &Program, tg: &OutputTable) -> (Program, Observation) {
    let outs: Vec<i64> = tg.admissible().map(|k| tg.get(k).unwrap().ordinal()).collect();
    let dom = match g.output {
        Type::Bool => Domain::Bool,
        Type::Int => Domain::int(*outs.iter().min().unwrap_or(&0), *outs.iter().max().unwrap_or(&0)),
    };
    let k = gen.program(&[Input::new("o", dom)]);
    let tk = table(&k);
    let (lo, _) = dom.bounds();
    let obs = Observation::from_fn(tg.admissible().collect(), |i| {
        let o = tg.get(i).unwrap().ordinal();
        tk.get((o - lo) as u64)
    });
    (k, obs)
}

/// The five disclosure-ordering properties and the preorder laws on
/// programs drawn from `seed`. Returns the number of facts checked.
pub fn disclosure_case(seed: u64) -> Result<usize, String> {
    let mut gen = ProgramGenerator::new(seed);
    let sig = gen.signature(2, 256);
    let f = gen.program(&sig);
    let g = gen.program(&sig);
    let h = gen.program(&sig);
    let (tf, tg, th) = (table(&f), table(&g), table(&h));
    let (of, og, oh) = (Observation::of(&tf), Observation::of(&tg), Observation::of(&th));
    let mut n = 0;

    // (1) the kernel characterisation agrees with the definition
    for (a, b, ta, tb) in [(&f, &g, &tf, &tg), (&g, &f, &tg, &tf), (&f, &h, &tf, &th), (&g, &h, &tg, &th)] {
        let fast = discloses_leq(a, b, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        ensure(fast == leq_by_definition(ta, tb), "(1) kernel characterisation", &[a, b])?;
        n += 1;
    }

    // (2) post-composition discloses no more
    let (k, okg) = post_compose(&mut gen, &g, &tg);
    ensure(okg.leq(&og) == Some(true), "(2) k∘g ⊑ g", &[&k, &g])?;
    let parity = og.then(|l| l % 2);
    ensure(parity.leq(&og) == Some(true), "(2) parity∘g ⊑ g", &[&g])?;
    n += 2;

    // (3) pairing with itself adds nothing
    let ff = attacker_compose(&AttackerPair::new(f.clone(), f.clone()).unwrap()).map_err(|e| e.to_string())?;
    let off = Observation::of(&table(&ff.program));
    ensure(off.leq(&of) == Some(true), "(3) ⟨f,f⟩ ⊑ f", &[&f])?;
    ensure(off.equivalent(&of) == Some(true), "(3) ⟨f,f⟩ ≡ f", &[&f])?;
    ensure(of.pair(&of).and_then(|p| p.equivalent(&of)) == Some(true), "(3) pairing", &[&f])?;
    n += 3;

    // (4) a pair discloses at least each component
    let fg = attacker_compose(&AttackerPair::new(f.clone(), g.clone()).unwrap()).map_err(|e| e.to_string())?;
    let ofg = Observation::of(&table(&fg.program));
    ensure(of.leq(&ofg) == Some(true), "(4) f ⊑ ⟨f,g⟩", &[&f, &g])?;
    ensure(og.leq(&ofg) == Some(true), "(4) g ⊑ ⟨f,g⟩", &[&f, &g])?;
    ensure(ofg.equivalent(&of.pair(&og).unwrap()) == Some(true), "(4) encoding", &[&f, &g])?;
    n += 3;

    // (5) less disclosure means no larger range
    let pairs = [(&of, &og), (&og, &of), (&okg, &og), (&of, &ofg), (&oh, &of)];
    for (a, b) in pairs {
        if a.leq(b) == Some(true) {
            ensure(a.range_size() <= b.range_size(), "(5) range sizes", &[&f, &g, &h])?;
        }
        n += 1;
    }

    // preorder
    for (a, b, c) in [(&of, &og, &oh), (&okg, &og, &ofg), (&parity, &og, &ofg), (&og, &oh, &of)] {
        ensure(a.leq(a) == Some(true), "reflexivity", &[&f, &g, &h])?;
        if a.leq(b) == Some(true) && b.leq(c) == Some(true) {
            ensure(a.leq(c) == Some(true), "transitivity", &[&f, &g, &h])?;
        }
        n += 2;
    }
    Ok(n)
}

/// Every value of an output table's admissible points, for display.
pub fn outputs(t: &OutputTable) -> Vec<Value> {
    t.admissible().map(|k| t.get(k).unwrap()).collect()
}
