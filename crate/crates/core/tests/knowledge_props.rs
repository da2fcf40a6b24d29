mod common;

use datamin::corpus;
use datamin::knowledge::{knowledge_set, verify_theorem1};
use datamin::oracle::{kernel, reference_best_monolithic, Space, DEFAULT_BUDGET};
use datamin::random::ProgramGenerator;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn disclosure_ordering(seed in any::<u64>()) {
        common::disclosure_case(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn theorem1_on_random_programs(seed in any::<u64>()) {
        let mut gen = ProgramGenerator::new(seed).with_preconditions(0.3);
        let sig = gen.signature(3, 400);
        let p = gen.program(&sig);
        // hidden uses are total on the inputs
        let h = ProgramGenerator::new(seed ^ 0x5eed).program(&sig);
        let m = reference_best_monolithic(&p, DEFAULT_BUDGET).unwrap();
        prop_assert!(verify_theorem1(&p, &h, &m, DEFAULT_BUDGET).unwrap(), "{}\n{}", p, h);
    }
}

#[test]
fn knowledge_sets_are_kernel_classes() {
    for p in corpus::all() {
        if p.product_size() > 5000 {
            continue;
        }
        let k = kernel(&p, DEFAULT_BUDGET).unwrap();
        let space = Space::new(&p.inputs);
        for class in &k.classes {
            for &u in class {
                let ks = knowledge_set(&p, &space.valuation(u), DEFAULT_BUDGET).unwrap();
                let members: Vec<u64> = ks.members.iter().map(|v| space.index_of_valuation(v).unwrap()).collect();
                assert_eq!(&members, class, "{} at {}", p.name, ks.at);
            }
        }
    }
}
