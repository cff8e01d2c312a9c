mod common;

use proptest::prelude::*;
use reformine_core::instances::*;
use reformine_core::spec_lang::{ground, parse, Value};

const CLASS: &str = "given n : int(1..)\ngiven m : int(1..n)\nwhere (n + m) % 3 != 0\ngiven crew : relation of (int(1..3) * int(1..2))\nfind x : int(0..n) such that x >= m";

#[test]
fn density_extremes() {
    let spec = parse("given r : set of int(1..6)").unwrap();
    let full = sample_instances(&spec, &GeneratorConfig { density: 1.0, ..Default::default() }).unwrap();
    assert_eq!(full[0].bindings["r"], Value::Rel((1..=6).map(|i| vec![i]).collect()));
    let empty = sample_instances(&spec, &GeneratorConfig { density: 0.0, ..Default::default() }).unwrap();
    assert_eq!(empty[0].bindings["r"], Value::Rel(Default::default()));
    assert!(matches!(
        sample_instances(&spec, &GeneratorConfig { density: 1.5, ..Default::default() }),
        Err(GenerateError::Density(_))
    ));
}

#[test]
fn range_overrides_narrow_sampling() {
    let spec = parse("given n : int(1..)").unwrap();
    let mut cfg = GeneratorConfig { count: 30, ..Default::default() };
    cfg.ranges.insert("n".into(), (4, 6));
    for inst in sample_instances(&spec, &cfg).unwrap() {
        assert!(matches!(inst.bindings["n"], Value::Int(v) if (4..=6).contains(&v)));
    }
}

proptest! {
    #[test]
    fn samples_always_ground(seed in any::<u64>(), cap in 1i64..60, density in 0.0f64..=1.0) {
        let spec = parse(CLASS).unwrap();
        let cfg = GeneratorConfig { count: 4, seed, cap, density, ..Default::default() };
        let xs = sample_instances(&spec, &cfg).unwrap();
        prop_assert_eq!(xs.len(), 4);
        for inst in &xs {
            prop_assert!(ground(&spec, inst).is_ok());
            let Value::Int(n) = inst.bindings["n"] else { panic!() };
            prop_assert!(n >= 1 && n <= 1 + cap);
        }
        prop_assert_eq!(sample_instances(&spec, &cfg).unwrap(), xs);
    }
}
