mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use stanley::indep::{self, SearchLimits};
use stanley::modsets::{enumerate_modular_sets, verify_modular, EnumerationLimits};
use stanley::prover::{
    self, check_trace, concretize, prove_character_impossible, validate_trace, ProofOutcome, ProofTrace,
    Node, ProverLimits, Rule, Status, Term, Terminal,
};
use stanley::seq::stanley_terms;
use stanley::FORBIDDEN_CHARACTERS;

fn term_strategy(bound: i64) -> impl Strategy<Value = Term> {
    prop_oneof![
        (0..=bound).prop_map(Term::small),
        (-bound..=bound).prop_map(Term::high),
        (1..=bound).prop_map(Term::negative),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaluation_homomorphism(
        x in term_strategy(40),
        y in term_strategy(40),
        extra in 0i64..500,
    ) {
        let bound = 80;
        let n = prover::min_n(bound) + extra;
        let m = 2 * n;
        if let Some(z) = Term::ap_target(x, y, bound) {
            prop_assert_eq!(z.eval(n), (2 * y.eval(n) - x.eval(n)).rem_euclid(m));
        }
        prop_assert_eq!(x.cmp(&y), x.eval(n).cmp(&y.eval(n)));
        prop_assert!((0..m).contains(&x.eval(n)));
    }
}

fn impossibility_trace(lambda: u32) -> ProofTrace {
    match prove_character_impossible(lambda, &ProverLimits::default()).unwrap() {
        ProofOutcome::Impossible { trace, .. } => trace,
        other => panic!("character {lambda}: {:?}", other.trace().stats()),
    }
}

#[test]
fn forbidden_characters_have_checked_traces() {
    for &l in &FORBIDDEN_CHARACTERS {
        let trace = impossibility_trace(l);
        assert!(trace.all_contradictions());
        validate_trace(&trace, l).unwrap();
        let round = ProofTrace::from_json(&trace.to_json()).unwrap();
        assert_eq!(round, trace);
        assert!(!check_trace(&trace, l + 2));
    }
}

#[test]
fn root_splits_follow_the_high_terms() {
    assert!(matches!(impossibility_trace(1).root.end, Terminal::Contradiction { .. }));
    assert_eq!(impossibility_trace(1).stats().splits, 0);
    let five = impossibility_trace(5);
    assert!(matches!(five.root.end, Terminal::Split { term, .. } if term == Term::high(1)));
    let fifteen = impossibility_trace(15);
    assert!(matches!(fifteen.root.end, Terminal::Split { term, .. } if term == Term::high(1)));
}

#[test]
fn mutated_traces_are_rejected() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for &l in &FORBIDDEN_CHARACTERS {
        let trace = impossibility_trace(l);
        let sites = common::sites(&trace);
        for _ in 0..100 {
            let m = common::random_mutation(&sites, &mut rng);
            let mut bad = trace.clone();
            common::apply(&mut bad, m);
            assert!(!check_trace(&bad, l), "character {l}: {m:?} accepted");
        }
    }
}

#[test]
fn forged_premises_are_rejected() {
    let trace = impossibility_trace(9);
    let Node::Deduce { steps } = &trace.root.nodes[0] else { panic!("root starts with deductions") };
    for (i, step) in steps.iter().enumerate() {
        let mut bad = trace.clone();
        let Node::Deduce { steps } = &mut bad.root.nodes[0] else { unreachable!() };
        let forged = &mut steps[i];
        match forged.rule {
            Rule::R1 => forged.premises = vec![Term::small(1)],
            Rule::R2 => forged.premises[1] = forged.premises[0],
            Rule::R3 | Rule::R4 => forged.premises.push(Term::ZERO),
        }
        assert!(!check_trace(&bad, 9), "step {i} {:?}", step);
    }
}

#[test]
fn impossible_characters_have_no_small_witnesses() {
    let limits = EnumerationLimits::default();
    for n in (2..=60).step_by(2) {
        for ms in enumerate_modular_sets(n, &limits).unwrap() {
            assert!(!FORBIDDEN_CHARACTERS.contains(&(ms.lambda() as u32)), "{ms:?}");
        }
    }
}

#[test]
fn candidates_match_independent_search() {
    for lambda in [7u32, 13] {
        let ProofOutcome::Candidate { leaf, witness: Some(ms), .. } =
            prove_character_impossible(lambda, &ProverLimits::default()).unwrap()
        else {
            panic!("character {lambda} gave no concrete candidate");
        };
        assert_eq!(ms.lambda(), lambda as i64);
        assert!(verify_modular(ms.elements(), ms.modulus()).unwrap().is_valid());
        assert_eq!(concretize(&leaf, ms.modulus() as i64 / 2).unwrap().as_ref(), Some(&ms));

        let sequence = stanley_terms(ms.elements(), 512).unwrap();
        let hits = indep::search_by_character(lambda as i64, 20, 8, &SearchLimits::default()).unwrap();
        assert!(
            hits.iter().any(|g| stanley_terms(g.elements(), 512).unwrap() == sequence),
            "character {lambda}: no search hit generates {:?}",
            &sequence[..8]
        );
        let enumerated: Vec<_> = (1..=36)
            .flat_map(|n| enumerate_modular_sets(n, &EnumerationLimits::default()).unwrap())
            .filter(|s| s.lambda() == lambda as i64)
            .collect();
        assert!(enumerated.iter().any(|s| stanley_terms(s.elements(), 512).unwrap() == sequence));
    }
}

#[test]
fn concretize_rejects_contradictory_leaves() {
    let ProofOutcome::Candidate { mut leaf, .. } =
        prove_character_impossible(7, &ProverLimits::default()).unwrap()
    else {
        panic!()
    };
    let n = leaf.min_n();
    assert!(concretize(&leaf, n - 1).is_err());
    let pos = leaf.decided.iter().position(|&(t, _)| t == Term::high(3)).unwrap();
    leaf.decided[pos].1 = Status::Out;
    assert!(concretize(&leaf, n).is_err());
}

#[test]
fn tight_budgets_are_inconclusive() {
    let limits = ProverLimits { max_nodes: 2, ..ProverLimits::default() };
    let out = prove_character_impossible(15, &limits).unwrap();
    assert!(matches!(out, ProofOutcome::Inconclusive { .. }));
    assert!(!check_trace(out.trace(), 15));
    let limits = ProverLimits { max_depth: 1, ..ProverLimits::default() };
    assert!(matches!(prove_character_impossible(15, &limits).unwrap(), ProofOutcome::Inconclusive { .. }));
}

#[test]
fn even_characters_are_unsupported() {
    assert!(prove_character_impossible(6, &ProverLimits::default()).is_err());
    assert!(prove_character_impossible(0, &ProverLimits::default()).is_err());
}
