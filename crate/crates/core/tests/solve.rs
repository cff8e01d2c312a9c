mod common;

use common::{random_spec, FOLDING};
use proptest::prelude::*;
use reformine_core::solve::*;
use reformine_core::spec_lang::{ground, parse, Instance, SpecAst, Value};

fn csp_of(src: &str) -> GroundCsp {
    flatten(&parse(src).unwrap()).unwrap()
}

fn grounded(src: &str, inst: &Instance) -> GroundCsp {
    let ast: SpecAst = parse(src).unwrap();
    flatten(&ground(&ast, inst).unwrap()).unwrap()
}

#[test]
fn folding_flattens_to_one_folded_constraint() {
    let csp = csp_of(FOLDING);
    assert_eq!(csp.vars, vec![CspVar { name: "x".into(), lo: 0, hi: 100 }]);
    assert_eq!(csp.constraints, vec![CExpr::Bin(CBin::Eq, Box::new(CExpr::Const(20)), Box::new(CExpr::Var(0)))]);
    let r = solve(&csp, 1000, Mode::First);
    assert_eq!(r.status, Status::Sat);
    assert_eq!(r.solutions[0]["x"], Value::Int(20));
}

#[test]
fn min_size_lowers_to_a_sum() {
    let csp = csp_of("find S : set (minSize 1) of int(1..3)");
    let names: Vec<&str> = csp.vars.iter().map(|v| v.name.as_str()).collect();
    assert_eq!(names, ["S[1]", "S[2]", "S[3]"]);
    assert!(csp.constraints.is_empty());
    let sum = CExpr::Sum((0..3).map(CExpr::Var).collect());
    assert_eq!(csp.attr_constraints, vec![CExpr::Bin(CBin::Geq, Box::new(sum), Box::new(CExpr::Const(1)))]);
    assert_eq!(brute_force(&csp).unwrap().len(), 7);
}

#[test]
fn quantifier_over_a_set_find_unrolls_with_guards() {
    let csp = csp_of("find S : set of int(1..3) such that forAll x in S . x >= 2");
    let sols = brute_force(&csp).unwrap();
    let expected: Vec<Value> = [vec![], vec![3], vec![2], vec![2, 3]]
        .into_iter()
        .map(|xs: Vec<i64>| Value::Rel(xs.into_iter().map(|x| vec![x]).collect()))
        .collect();
    assert_eq!(sols.iter().map(|s| s["S"].clone()).collect::<Vec<_>>(), expected);
    assert_eq!(solve(&csp, 10_000, Mode::All).solutions, sols);
}

#[test]
fn tuple_cap_is_enforced() {
    let ast = parse("find R : relation of (int(1..100) * int(1..100))").unwrap();
    assert!(matches!(flatten_with_cap(&ast, 1000), Err(FlattenError::DomainTooLarge { .. })));
}

#[test]
fn undefined_division_is_never_a_solution() {
    let csp = csp_of("find x, y : int(0..2) such that x / y = 0");
    let sols = brute_force(&csp).unwrap();
    assert!(sols.iter().all(|s| s["y"] != Value::Int(0)));
    assert_eq!(solve(&csp, 1000, Mode::All).solutions, sols);
    let csp = csp_of("find x, y : int(0..2) such that !(x / y = 0)");
    assert!(brute_force(&csp).unwrap().iter().any(|s| s["y"] == Value::Int(0)));
}

#[test]
fn branch_and_bound_finds_the_optimum() {
    let src = "given k : int(0..3)\nfind x, y : int(0..4)\nmaximising x * y - k\nsuch that x + y <= 5";
    let csp = grounded(src, &Instance::new().with("k", Value::Int(2)));
    let r = solve(&csp, 10_000, Mode::Optimize);
    assert_eq!((r.status, r.objective), (Status::Optimal, Some(4)));
    let best = brute_force(&csp)
        .unwrap()
        .iter()
        .map(|s| match (&s["x"], &s["y"]) {
            (Value::Int(x), Value::Int(y)) => x * y - 2,
            _ => unreachable!(),
        })
        .max();
    assert_eq!(r.objective, best);
}

#[test]
fn implied_sum_prunes_at_the_root() {
    let lags = "given d : int(0..3)\nfind x, y, z : int(0..12)\nsuch that\n    forAll h : int(1..3) . toInt(h = 1)*x + toInt(h = 2)*y + toInt(h = 3)*z + d <= toInt(h = 1)*y + toInt(h = 2)*z + toInt(h = 3)*x";
    let derived = format!("{lags},\n    (sum h : int(1..3) . toInt(h = 1)*x + toInt(h = 2)*y + toInt(h = 3)*z + d) <= (sum h : int(1..3) . toInt(h = 1)*y + toInt(h = 2)*z + toInt(h = 3)*x)");
    let inst = Instance::new().with("d", Value::Int(1));
    let before = solve(&grounded(lags, &inst), 100_000, Mode::First);
    let after = solve(&grounded(&derived, &inst), 100_000, Mode::First);
    assert_eq!((before.status, after.status), (Status::Unsat, Status::Unsat));
    assert_eq!(after.nodes, 1);
    assert!(before.nodes > 100);
}

proptest! {
    #[test]
    fn search_agrees_with_enumeration(seed in any::<u64>()) {
        let (src, inst) = random_spec(seed);
        let csp = grounded(&src, &inst);
        let want = brute_force(&csp).unwrap();
        let r = solve(&csp, u64::MAX, Mode::All);
        prop_assert!(r.nodes >= r.failures);
        prop_assert_eq!(r.status, if want.is_empty() { Status::Unsat } else { Status::Sat });
        prop_assert_eq!(&r.solutions, &want);
        let first = solve(&csp, u64::MAX, Mode::First);
        prop_assert_eq!(first.solutions.first(), want.first());
        if csp.objective.is_some() {
            let opt = solve(&csp, u64::MAX, Mode::Optimize);
            prop_assert_eq!(opt.status == Status::Unsat, want.is_empty());
            if opt.status == Status::Sat {
                prop_assert!(opt.objective.is_none());
            }
        }
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let (src, inst) = random_spec(seed);
        let csp = grounded(&src, &inst);
        let a = solve(&csp, 5000, Mode::All);
        let b = solve(&csp, 5000, Mode::All);
        prop_assert_eq!(a.to_json(false).to_string(), b.to_json(false).to_string());
    }

    #[test]
    fn budget_caps_nodes(seed in any::<u64>(), budget in 1u64..40) {
        let (src, inst) = random_spec(seed);
        let r = solve(&grounded(&src, &inst), budget, Mode::All);
        prop_assert!(r.nodes <= budget);
        if r.status == Status::NodeBudgetExhausted {
            prop_assert_eq!(r.nodes, budget);
        }
    }
}
