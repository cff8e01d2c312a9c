mod common;

use common::{HOSTS, LAGS};
use proptest::prelude::*;
use reformine_core::instances::{sample_instances, GeneratorConfig};
use reformine_core::mcts::*;
use reformine_core::rewrite::rule_by_name;
use reformine_core::spec_lang::{parse, Instance, SpecAst};

fn class(src: &str, seed: u64) -> (SpecAst, Vec<Instance>) {
    let spec = parse(src).unwrap();
    let insts = sample_instances(&spec, &GeneratorConfig { count: 5, seed, ..Default::default() }).unwrap();
    (spec, insts)
}

fn conserved(ex: &Explorer) -> bool {
    ex.nodes.iter().all(|n| n.visits == n.own_visits + n.children.iter().map(|&c| ex.nodes[c].visits).sum::<u64>())
}

#[test]
fn implied_sum_beats_the_baseline_on_lags() {
    let (spec, instances) = class(LAGS, 11);
    let ex = explore(&spec, ExploreConfig { iterations: 40, seed: 5, instances, ..Default::default() }).unwrap();
    let r = ex.report(false);
    assert!(r["best"]["nodes"].as_u64() < r["baseline"]["nodes"].as_u64());
    let seq = r["best"]["sequence"].as_array().unwrap();
    assert!(seq.iter().any(|s| s["rule"] == "implied-sum"), "{r}");
}

#[test]
fn same_seed_same_report() {
    let (spec, instances) = class(HOSTS, 2);
    let cfg = ExploreConfig { iterations: 50, seed: 9, instances, ..Default::default() };
    let a = explore(&spec, cfg.clone()).unwrap().report(false).to_string();
    let b = explore(&spec, ExploreConfig { jobs: 3, ..cfg }).unwrap().report(false).to_string();
    assert_eq!(a, b);
}

#[test]
fn strengthening_never_costs_nodes() {
    let (spec, instances) = class(HOSTS, 4);
    let ex = explore(&spec, ExploreConfig { iterations: 80, seed: 1, instances, ..Default::default() }).unwrap();
    let mut checked = 0;
    for n in &ex.nodes {
        let (Some(m), Some(ev)) = (&n.action, &n.evaluation) else { continue };
        if m.rule != "card-attr" && m.rule != "member-minsize" {
            continue;
        }
        let parent = ex.nodes[n.parent.unwrap()].evaluation.as_ref().unwrap();
        assert!(ev.per_instance.iter().zip(&parent.per_instance).all(|(a, b)| a <= b));
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn exploitation_picks_the_better_child() {
    let spec = parse("find x, y : int(0..3) such that x + y = 2").unwrap();
    let mut ex = Explorer::new(&spec, ExploreConfig { c: 0.0, ..Default::default() }).unwrap();
    ex.step();
    ex.step();
    let kids = ex.nodes[0].children.clone();
    assert_eq!(kids.len(), 2);
    ex.nodes[kids[0]].total_reward = 0.3;
    ex.nodes[kids[1]].total_reward = 0.7;
    ex.nodes[0].untried.clear();
    let from = ex.step();
    let mut cur = from;
    while ex.nodes[cur].parent != Some(0) {
        cur = ex.nodes[cur].parent.unwrap();
    }
    assert_eq!(cur, kids[1]);
}

#[test]
fn rejects_instances_that_do_not_fit() {
    let spec = parse(LAGS).unwrap();
    let bad = Instance::new().with("d", reformine_core::spec_lang::Value::Int(9));
    let cfg = ExploreConfig { instances: vec![bad], ..Default::default() };
    assert!(matches!(Explorer::new(&spec, cfg), Err(ExploreError::Ground { index: 0, .. })));
}

#[test]
fn dot_dump_lists_every_node() {
    let spec = parse("find x, y : int(0..3) such that x + y = 2 /\\ true").unwrap();
    let ex = explore(&spec, ExploreConfig { iterations: 10, ..Default::default() }).unwrap();
    let dot = ex.to_dot();
    assert_eq!(dot.matches("[label=").count(), ex.nodes.len());
    assert_eq!(dot.matches(" -> ").count(), ex.nodes.len() - 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn visits_are_conserved(seed in any::<u64>(), iters in 0usize..30) {
        let (src, inst) = common::random_spec(seed);
        let spec = parse(&src).unwrap();
        let rules = ["commute", "const-fold", "implied-sum", "card-attr", "member-minsize"].map(|r| rule_by_name(r).unwrap()).to_vec();
        let cfg = ExploreConfig { iterations: iters, seed, budget: 2000, max_depth: 3, instances: vec![inst], rules, ..Default::default() };
        let ex = explore(&spec, cfg).unwrap();
        prop_assert_eq!(ex.nodes[0].visits, 1 + iters as u64);
        prop_assert!(conserved(&ex));
        for n in &ex.nodes {
            prop_assert!((0.0..=1.0).contains(&n.reward));
            prop_assert!(n.total_reward >= 0.0 && n.total_reward <= n.visits as f64 + 1e-9);
            prop_assert!(n.duplicate_of.is_none() || n.evaluation.is_none());
        }
    }

    #[test]
    fn uct_grows_with_parent_visits(w in 0.0f64..10.0, n in 1u64..10, big in 1u64..1000, c in 0.1f64..3.0) {
        let w = w.min(n as f64);
        prop_assert!(uct_score(w, n, big + 1, c) > uct_score(w, n, big, c));
    }
}
