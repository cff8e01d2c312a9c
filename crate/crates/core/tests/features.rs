mod common;

use common::{random_spec, EQUIVALENT_PAIRS, FOLDING};
use proptest::prelude::*;
use reformine_core::features::*;
use reformine_core::rewrite::normalize;
use reformine_core::spec_lang::parse;

fn fv(src: &str) -> FeatureVector {
    featurize(&parse(src).unwrap())
}

#[test]
fn renamed_spec_is_closer_than_an_unrelated_one() {
    let a = fv(FOLDING);
    let renamed = fv("find y : int(0..100)\nsuch that 1*(2+3)*4 = y");
    let other = fv("given n : int(1..5)\nfind S : set (minSize 1) of int(1..5)\nminimising |S|\nsuch that forAll i in S . i <= n, exists j in S . j > 1");
    let corpus = [a.clone(), renamed.clone(), other.clone()];
    let scale = FeatureScale::of(&corpus);
    assert_eq!(scale.distance(&a, &renamed).unwrap(), 0.0);
    assert!(scale.distance(&a, &renamed).unwrap() < scale.distance(&a, &other).unwrap());
}

#[test]
fn csv_shapes() {
    let labels = vec!["a".to_string(), "b".to_string()];
    let vs = vec![fv(FOLDING), fv("find b : bool such that b")];
    let csv = to_csv(&labels, &vs);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split(',').count() == dimension() + 1));
    assert!(rows[0].starts_with("spec,kind_GivenStatement"));
    let m = pairwise_csv(&labels, &vs);
    assert_eq!(m.lines().nth(1).unwrap().split(',').nth(1), Some("0.000000"));
}

#[test]
fn normal_forms_of_equivalent_pairs_coincide() {
    for (a, b) in EQUIVALENT_PAIRS {
        let (x, y) = (featurize(&normalize(&parse(a).unwrap())), featurize(&normalize(&parse(b).unwrap())));
        assert_eq!(distance(&x, &y).unwrap(), 0.0, "{a} | {b}");
    }
}

proptest! {
    #[test]
    fn metric_axioms(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let vs: Vec<FeatureVector> = [s1, s2, s3].iter().map(|s| fv(&random_spec(*s).0)).collect();
        prop_assert!(vs.iter().all(|v| v.0.iter().all(|x| *x >= 0.0)));
        let d = pairwise(&vs);
        for i in 0..3 {
            prop_assert_eq!(d[i][i], 0.0);
            for j in 0..3 {
                prop_assert_eq!(d[i][j], d[j][i]);
                for k in 0..3 {
                    prop_assert!(d[i][k] <= d[i][j] + d[j][k] + 1e-12);
                }
            }
        }
    }
}
