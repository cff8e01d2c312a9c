mod common;

use common::{random_spec, FOLDING};
use proptest::prelude::*;
use reformine_core::spec_lang::tree::{from_tree, to_tree};
use reformine_core::spec_lang::*;

const FOLDING_ANNOTATED: &str = "\
└─ root  #Node
   ├─ find  #FindStatement
   │  └─ x  #DecisionVariable
   │     └─ int  #IntDomain
   │        ├─ 0  #Integer
   │        └─ 100  #Integer
   └─ such that  #SuchThatStatement
      └─ =  #BinaryExpression
         ├─ *  #BinaryExpression
         │  ├─ *  #BinaryExpression
         │  │  ├─ 1  #Integer
         │  │  └─ +  #BinaryExpression
         │  │     ├─ 2  #Integer
         │  │     └─ 3  #Integer
         │  └─ 4  #Integer
         └─ x  #ReferenceToDecisionVariable
";

fn squash(s: &str) -> Vec<String> {
    s.lines().map(|l| l.split_whitespace().collect::<Vec<_>>().join(" ")).filter(|l| !l.is_empty()).collect()
}

#[test]
fn annotated_dump_of_folding() {
    let ast = parse(FOLDING).unwrap();
    assert_eq!(squash(&pretty(&ast, true)), squash(FOLDING_ANNOTATED));
    assert_eq!(pretty(&ast, false), FOLDING);
}

#[test]
fn sugar_and_parentheses_are_dropped() {
    let ast = parse("find x, y : int(0..3)\nsuch that ((x + (y))) = 2 $ trailing\n").unwrap();
    assert_eq!(pretty(&ast, false), "find x : int(0..3)\nfind y : int(0..3)\nsuch that\n    x+y = 2\n");
}

#[test]
fn syntax_errors_carry_positions() {
    match parse("find x : int(0..3)\nsuch that x + = 1") {
        Err(SpecError::Syntax { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn grounding_with_instances() {
    let ast =
        parse("given n : int(1..)\nletting m be n * 2\nwhere n < 5\nfind x : int(0..m)\nsuch that x >= n").unwrap();
    let g = ground(&ast, &Instance::new().with("n", Value::Int(3))).unwrap();
    assert_eq!(pretty(&g, false), "find x : int(0..6)\nsuch that\n    x >= 3\n");
    let e = ground(&ast, &Instance::new().with("n", Value::Int(7))).unwrap_err();
    assert!(matches!(e, GroundError::WhereViolated { ref clause } if clause == "n < 5"), "{e}");
    assert!(matches!(ground(&ast, &Instance::new()), Err(GroundError::Unbound(_))));
    assert!(matches!(ground(&ast, &Instance::new().with("n", Value::Int(0))), Err(GroundError::OutOfDomain { .. })));
}

#[test]
fn relation_instances() {
    let ast = parse("given r : relation of (int(1..3) * int(1..3))\nfind S : set of int(1..3)\nsuch that forAll i in S . (i, i) in r")
        .unwrap();
    let inst = Instance::from_param("letting r be relation {(1,1), (2,3)}").unwrap();
    let g = ground(&ast, &inst).unwrap();
    assert!(pretty(&g, false).contains("{(1, 1), (2, 3)}"), "{}", pretty(&g, false));
    let bad = Instance::from_param("letting r be relation {(4,1)}").unwrap();
    assert!(matches!(ground(&ast, &bad), Err(GroundError::OutOfDomain { .. })));
}

#[test]
fn generated_specs_parse() {
    for seed in 0..300 {
        let (src, inst) = random_spec(seed);
        let ast = parse(&src).unwrap_or_else(|e| panic!("{e}\n{src}"));
        ground(&ast, &inst).unwrap_or_else(|e| panic!("{e}\n{src}"));
    }
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let ast = parse(&random_spec(seed).0).unwrap();
        prop_assert_eq!(parse(&pretty(&ast, false)).unwrap(), ast.clone());
        prop_assert_eq!(from_tree(&to_tree(&ast)).unwrap(), ast);
    }

    #[test]
    fn instance_formats_round_trip(n in -50i64..50, xs in proptest::collection::btree_set((0i64..4, 0i64..4), 0..6)) {
        let rel = Value::Rel(xs.into_iter().map(|(a, b)| vec![a, b]).collect());
        let inst = Instance::new().with("n", Value::Int(n)).with("r", rel);
        prop_assert_eq!(Instance::from_param(&inst.to_param()).unwrap(), inst.clone());
        prop_assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }
}
