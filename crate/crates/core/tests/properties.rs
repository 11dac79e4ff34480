//! Randomized properties over small knowledge bases and interpretations.

mod common;

use alcnr::canonical_model::{extract_model, satisfies_system};
use alcnr::encodings::c_of_tbox;
use alcnr::semantics::eval_concept;
use alcnr::services::{concept_satisfiable, instance_of, kb_satisfiable, subsumed_by, Entailment, Verdict};
use alcnr::syntax::{to_simple_form, Concept, KnowledgeBase};
use alcnr::tableau::{applicable_rule_instances, apply_rule_instance, complete, Guards, Outcome};
use alcnr::{is_model, parse_concept, parse_kb, render_kb, translate_kb};
use proptest::prelude::*;

fn strict() -> Guards {
    Guards {
        check_invariants: true,
        trace_capacity: Some(0),
        ..Guards::default()
    }
}

fn sat(s: &alcnr::ConstraintSystem) -> bool {
    match complete(s, &strict()).outcome {
        Outcome::Satisfiable(_) => true,
        Outcome::Unsatisfiable => false,
        Outcome::ResourceExceeded(g) => panic!("guard fired: {g}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn simple_form_preserves_extension(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let c = common::concept(&mut rng, common::MAX_DEPTH);
        let i = common::interpretation(&mut rng, 4);
        let nnf = to_simple_form(&c);
        prop_assert!(nnf.is_simple());
        prop_assert_eq!(to_simple_form(&nnf), nnf.clone());
        prop_assert_eq!(eval_concept(&i, &c), eval_concept(&i, &nnf));
    }

    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>()) {
        let kb = common::kb(seed);
        prop_assert_eq!(parse_kb(&render_kb(&kb)).unwrap(), kb.clone());
        let mut rng = common::rng(seed);
        let c = common::concept(&mut rng, common::MAX_DEPTH);
        prop_assert_eq!(parse_concept(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn c_t_denotes_the_domain_iff_model(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let tbox = common::tbox(&mut rng);
        let i = common::interpretation(&mut rng, 4);
        let kb = KnowledgeBase { tbox: tbox.iter().cloned().collect(), abox: Default::default() };
        let whole = eval_concept(&i, &c_of_tbox(&tbox)) == i.domain();
        prop_assert_eq!(is_model(&i, &kb).unwrap(), whole);
    }

    #[test]
    fn canonical_models_satisfy_their_systems(seed in any::<u64>()) {
        let kb = common::kb(seed);
        let s = translate_kb(&kb);
        let done = complete(&s, &strict());
        prop_assert!(done.stats.max_non_blocked as u128 <= done.stats.non_blocked_bound());
        if let Outcome::Satisfiable(sys) = done.outcome {
            let (m, alpha) = extract_model(&sys).unwrap();
            prop_assert!(satisfies_system(&m, &alpha, &sys));
            prop_assert!(is_model(&m, &kb).unwrap());
        }
    }

    #[test]
    fn backjumping_finds_the_same_completion(seed in any::<u64>()) {
        let s = translate_kb(&common::kb(seed));
        let chrono = Guards { backjumping: false, max_branches: 50_000, ..strict() };
        let a = complete(&s, &strict()).outcome;
        match (a, complete(&s, &chrono).outcome) {
            (Outcome::Satisfiable(x), Outcome::Satisfiable(y)) => prop_assert_eq!(x, y),
            (Outcome::Unsatisfiable, Outcome::Unsatisfiable) => {}
            (_, Outcome::ResourceExceeded(_)) => {}
            (x, y) => prop_assert!(false, "verdicts differ: {:?} vs {:?}", x, y),
        }
    }

    /// A deterministic rule preserves satisfiability; for a branching rule a
    /// satisfiable system has at least one satisfiable alternative.
    #[test]
    fn rules_preserve_satisfiability(seed in any::<u64>()) {
        let s = translate_kb(&common::kb(seed));
        prop_assume!(alcnr::tableau::detect_clash(&s).is_none());
        if let Some(inst) = applicable_rule_instances(&s).into_iter().next() {
            let before = sat(&s);
            let after: Vec<bool> = (0..inst.choice_count())
                .map(|k| {
                    let t = apply_rule_instance(&s, &inst, k).unwrap();
                    alcnr::tableau::detect_clash(&t).is_none() && sat(&t)
                })
                .collect();
            if inst.choice_count() == 1 {
                prop_assert_eq!(before, after[0]);
            } else {
                prop_assert_eq!(before, after.iter().any(|&b| b));
            }
        }
    }

    #[test]
    fn services_match_their_reductions(seed in any::<u64>()) {
        let kb = common::kb(seed);
        let mut rng = common::rng(seed ^ 0x9e37);
        let (c, d) = (common::concept(&mut rng, 2), common::concept(&mut rng, 2));
        let probe = Concept::and(c.clone(), Concept::not(d.clone()));
        let refuted = concept_satisfiable(&kb, &probe) == Verdict::Unsat;
        prop_assert_eq!(subsumed_by(&kb, &c, &d) == Entailment::True, refuted);
        prop_assert_eq!(subsumed_by(&kb, &c, &c), Entailment::True);
        if !kb_satisfiable(&kb).is_sat() {
            prop_assert_eq!(subsumed_by(&kb, &Concept::Top, &d), Entailment::True);
        }
        for a in kb.individuals() {
            let direct = kb_satisfiable(&kb.clone().with_instance(a.as_str(), Concept::not(c.clone())));
            prop_assert_eq!(instance_of(&kb, &a, &c).unwrap() == Entailment::True, direct == Verdict::Unsat);
        }
    }
}
