mod common;

use std::collections::BTreeMap;

use common::{random_spec, DISTINCT_PAIRS, EQUIVALENT_PAIRS, FOLDING};
use proptest::prelude::*;
use reformine_core::rewrite::*;
use reformine_core::solve::{brute_force, flatten};
use reformine_core::spec_lang::{ground, parse, pretty, Instance, SpecAst, Value};

fn solutions(ast: &SpecAst, inst: &Instance) -> Vec<BTreeMap<String, Value>> {
    brute_force(&flatten(&ground(ast, inst).unwrap()).unwrap()).unwrap()
}

#[test]
fn every_rule_is_sound_on_generated_specs() {
    for rule in library() {
        let mut hits = 0;
        for seed in 10_000..12_000u64 {
            let (src, inst) = random_spec(seed);
            let ast = parse(&src).unwrap();
            let ms = enumerate_matches(*rule, &ast);
            if ms.is_empty() {
                continue;
            }
            hits += 1;
            let m = &ms[seed as usize % ms.len()];
            let out = apply(*rule, &ast, m).unwrap();
            assert_eq!(solutions(&ast, &inst), solutions(&out, &inst), "{} at {:?}\n{src}", rule.name(), m.path);
        }
        assert!(hits >= 50, "{} matched only {hits} specs", rule.name());
    }
}

#[test]
fn implied_sum_derives_aggregate() {
    let ast = parse("find x : int(0..5) such that forAll i : int(1..3) . x + i <= 6").unwrap();
    let ms = enumerate_matches(&ImpliedSum, &ast);
    assert_eq!(ms.len(), 1);
    let out = apply(&ImpliedSum, &ast, &ms[0]).unwrap();
    assert!(
        pretty(&out, false).contains("(sum i : int(1..3) . x+i) <= (sum i : int(1..3) . 6)"),
        "{}",
        pretty(&out, false)
    );
    assert!(enumerate_matches(&ImpliedSum, &out).is_empty());
}

#[test]
fn strict_premise_over_possibly_empty_set() {
    let ast = parse("find S : set of int(1..3) such that forAll i in S . i < 3").unwrap();
    let out = apply(&ImpliedSum, &ast, &enumerate_matches(&ImpliedSum, &ast)[0]).unwrap();
    assert!(pretty(&out, false).contains("(sum i in S . i) <= (sum i in S . 3)"));
    let ast = parse("find S : set (minSize 1) of int(1..3) such that forAll i in S . i < 3").unwrap();
    let out = apply(&ImpliedSum, &ast, &enumerate_matches(&ImpliedSum, &ast)[0]).unwrap();
    assert!(pretty(&out, false).contains("(sum i in S . i) < (sum i in S . 3)"));
    let inst = Instance::new();
    assert_eq!(solutions(&ast, &inst), solutions(&out, &inst));
}

#[test]
fn cardinality_moves_into_the_domain() {
    let ast = parse("find S : set of int(1..4) such that |S| >= 2, 1 in S").unwrap();
    let out = apply(&CardAttr, &ast, &enumerate_matches(&CardAttr, &ast)[0]).unwrap();
    assert_eq!(pretty(&out, false), "find S : set (minSize 2) of int(1..4)\nsuch that\n    1 in S\n");
    let ast = parse("find S : set of int(1..4) such that 2 = |S|").unwrap();
    let out = apply(&CardAttr, &ast, &enumerate_matches(&CardAttr, &ast)[0]).unwrap();
    assert_eq!(pretty(&out, false), "find S : set (size 2) of int(1..4)\n");
}

#[test]
fn membership_witness_raises_min_size() {
    let ast = parse("find S : set of int(1..4) such that 3 in S").unwrap();
    let out = apply(&MemberMinSize, &ast, &enumerate_matches(&MemberMinSize, &ast)[0]).unwrap();
    assert!(pretty(&out, false).starts_with("find S : set (minSize 1) of int(1..4)"));
    assert!(enumerate_matches(&MemberMinSize, &out).is_empty());
    assert!(enumerate_matches(&MemberMinSize, &parse("find S : set of int(1..4) such that 7 in S").unwrap()).is_empty());
}

#[test]
fn commute_matches_on_folding() {
    let ast = parse(FOLDING).unwrap();
    assert_eq!(enumerate_matches(&Commute, &ast).len(), 4);
}

#[test]
fn hashes_of_crafted_pairs() {
    let h = |s: &str| canonical_hash(&parse(s).unwrap_or_else(|e| panic!("{e}: {s}")));
    for (a, b) in EQUIVALENT_PAIRS {
        assert_eq!(h(a), h(b), "{a} | {b}");
    }
    for (a, b) in DISTINCT_PAIRS {
        assert_ne!(h(a), h(b), "{a} | {b}");
    }
}

#[test]
fn given_side_is_untouched() {
    let ast = parse("given n : int(1..5)\nwhere n + 0 > 1\nfind x : int(0..n) such that x + 0 = n").unwrap();
    let n = normalize(&ast);
    assert!(pretty(&n, false).contains("where n+0 > 1"));
    assert!(pretty(&n, false).contains("n = x"));
    assert!(enumerate_all(library(), &ast).iter().all(|(_, m)| m.path[0] >= 3));
}

proptest! {
    #[test]
    fn normalize_is_idempotent(seed in any::<u64>()) {
        let ast = parse(&random_spec(seed).0).unwrap();
        let n = normalize(&ast);
        prop_assert_eq!(normalize(&n), n.clone());
        prop_assert_eq!(canonical_hash(&n), canonical_hash(&ast));
    }

    #[test]
    fn normalize_preserves_solutions(seed in any::<u64>()) {
        let (src, inst) = random_spec(seed);
        let ast = parse(&src).unwrap();
        prop_assert_eq!(solutions(&normalize(&ast), &inst), solutions(&ast, &inst));
    }

    #[test]
    fn apply_leaves_input_alone(seed in any::<u64>(), pick in any::<usize>()) {
        let ast = parse(&random_spec(seed).0).unwrap();
        let before = ast.clone();
        let all = enumerate_all(library(), &ast);
        prop_assume!(!all.is_empty());
        let (ri, m) = &all[pick % all.len()];
        apply(library()[*ri], &ast, m).unwrap();
        prop_assert_eq!(ast, before);
    }
}
