//! Random well-typed specifications for property tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reformine_core::spec_lang::{Instance, Value};

pub const FOLDING: &str = "find x : int(0..100)\nsuch that\n    1*(2+3)*4 = x\n";

pub struct SpecGen {
    rng: ChaCha8Rng,
    ints: Vec<String>,
    bools: Vec<String>,
    /// Set finds with their largest element.
    sets: Vec<(String, i64)>,
    rel: Option<String>,
    params: Vec<String>,
    binders: Vec<String>,
}

const CMP: [&str; 6] = ["=", "!=", "<", "<=", ">", ">="];

impl SpecGen {
    pub fn new(seed: u64) -> SpecGen {
        SpecGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            ints: Vec::new(),
            bools: Vec::new(),
            sets: Vec::new(),
            rel: None,
            params: Vec::new(),
            binders: Vec::new(),
        }
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.rng.random_range(0..xs.len())]
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    fn int_leaf(&mut self) -> String {
        let mut opts: Vec<String> = vec![self.rng.random_range(-2..=5).to_string()];
        opts.extend(self.ints.iter().cloned());
        opts.extend(self.ints.iter().cloned());
        opts.extend(self.params.iter().cloned());
        opts.extend(self.binders.iter().cloned());
        opts.extend(self.binders.iter().cloned());
        let s = self.pick(&opts).clone();
        if s.starts_with('-') {
            format!("({s})")
        } else {
            s
        }
    }

    pub fn int_expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.chance(0.3) {
            return self.int_leaf();
        }
        match self.rng.random_range(0..10) {
            0..=4 => {
                let op = *self.pick(&["+", "-", "*", "+", "*", "/", "%"]);
                format!("({} {op} {})", self.int_expr(depth - 1), self.int_expr(depth - 1))
            }
            5 => format!("-({})", self.int_expr(depth - 1)),
            6 => format!("toInt({})", self.bool_expr(depth - 1)),
            7 if !self.sets.is_empty() => {
                let (s, _) = self.pick(&self.sets.clone()).clone();
                format!("|{s}|")
            }
            8 if self.binders.len() < 2 => {
                let v = self.fresh_binder();
                let range = self.range();
                self.binders.push(v.clone());
                let body = self.int_expr(depth - 1);
                self.binders.pop();
                format!("(sum {v} {range} . {body})")
            }
            _ => format!("({} + {})", self.int_leaf(), self.int_expr(depth - 1)),
        }
    }

    fn fresh_binder(&self) -> String {
        ["i", "j"][self.binders.len()].to_string()
    }

    fn range(&mut self) -> String {
        if !self.sets.is_empty() && self.chance(0.5) {
            let (s, _) = self.pick(&self.sets.clone()).clone();
            format!("in {s}")
        } else {
            let lo = self.rng.random_range(0..=2);
            let hi = lo + self.rng.random_range(-1..=2);
            format!(": int({lo}..{hi})")
        }
    }

    pub fn bool_expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.chance(0.25) {
            return self.bool_leaf(depth);
        }
        match self.rng.random_range(0..8) {
            0..=3 => {
                let op = *self.pick(&["/\\", "\\/", "->", "<->"]);
                format!("({} {op} {})", self.bool_expr(depth - 1), self.bool_expr(depth - 1))
            }
            4 => format!("!({})", self.bool_expr(depth - 1)),
            5 | 6 if self.binders.len() < 2 => {
                let kw = *self.pick(&["forAll", "exists"]);
                let v = self.fresh_binder();
                let range = self.range();
                self.binders.push(v.clone());
                let body = self.bool_expr(depth - 1);
                self.binders.pop();
                format!("({kw} {v} {range} . {body})")
            }
            _ => self.comparison(depth),
        }
    }

    fn comparison(&mut self, depth: u32) -> String {
        let op = *self.pick(&CMP);
        format!("({} {op} {})", self.int_expr(depth.saturating_sub(1)), self.int_expr(depth.saturating_sub(1)))
    }

    fn bool_leaf(&mut self, depth: u32) -> String {
        match self.rng.random_range(0..5) {
            0 => self.pick(&["true", "false"]).to_string(),
            1 | 2 if !self.bools.is_empty() => self.pick(&self.bools.clone()).clone(),
            3 if !self.sets.is_empty() => {
                let (s, _) = self.pick(&self.sets.clone()).clone();
                format!("({} in {s})", self.int_leaf())
            }
            _ => self.comparison(depth.min(1)),
        }
    }

    /// Constraint shapes the derivation and strengthening rules look for.
    fn template(&mut self) -> Option<String> {
        match self.rng.random_range(0..4) {
            0 if self.binders.is_empty() => {
                let v = "i".to_string();
                let range = self.range();
                self.binders.push(v.clone());
                let op = *self.pick(&["<=", ">=", "<", ">", "="]);
                let body = format!("{} {op} {}", self.int_expr(2), self.int_expr(2));
                self.binders.pop();
                Some(format!("forAll {v} {range} . {body}"))
            }
            1 if !self.sets.is_empty() || self.rel.is_some() => {
                let s = self.card_target();
                let k = self.rng.random_range(0..=3);
                let op = *self.pick(&CMP);
                Some(if self.chance(0.5) { format!("|{s}| {op} {k}") } else { format!("{k} {op} |{s}|") })
            }
            2 if self.rel.is_some() => {
                let r = self.rel.clone().unwrap();
                let (a, b) = (self.rng.random_range(1..=2), self.rng.random_range(1..=3));
                Some(format!("({a}, {b}) in {r}"))
            }
            2 | 3 if !self.sets.is_empty() => {
                let (s, m) = self.pick(&self.sets.clone()).clone();
                let e = self.rng.random_range(0..=m + 1);
                Some(format!("{e} in {s}"))
            }
            _ => None,
        }
    }

    fn card_target(&mut self) -> String {
        let mut opts: Vec<String> = self.sets.iter().map(|(s, _)| s.clone()).collect();
        opts.extend(self.rel.clone());
        self.pick(&opts).clone()
    }

    /// Source text and a matching instance. The grounded specification
    /// has at most 2^16 complete assignments.
    pub fn spec(&mut self) -> (String, Instance) {
        let mut src = String::new();
        let mut inst = Instance::new();
        if self.chance(0.4) {
            src.push_str("given k : int(0..3)\n");
            inst = inst.with("k", Value::Int(self.rng.random_range(0..=3)));
            self.params.push("k".into());
        }
        let n_ints = self.rng.random_range(1..=3);
        for i in 1..=n_ints {
            let lo = self.rng.random_range(-1..=1);
            let hi = lo + self.rng.random_range(0..=4);
            src.push_str(&format!("find x{i} : int({lo}..{hi})\n"));
            self.ints.push(format!("x{i}"));
        }
        if self.chance(0.4) {
            src.push_str("find b : bool\n");
            self.bools.push("b".into());
        }
        match self.rng.random_range(0..3) {
            0 => {
                let m = self.rng.random_range(1..=4);
                let attr = match self.rng.random_range(0..4) {
                    0 => " (minSize 1)".to_string(),
                    1 => format!(" (maxSize {})", self.rng.random_range(1..=m)),
                    _ => String::new(),
                };
                src.push_str(&format!("find S : set{attr} of int(1..{m})\n"));
                self.sets.push(("S".into(), m));
            }
            1 => {
                src.push_str("find R : relation of (int(1..2) * int(1..3))\n");
                self.rel = Some("R".into());
            }
            _ => {}
        }
        let mut cs = Vec::new();
        for _ in 0..self.rng.random_range(1..=3) {
            let c = match self.template() {
                Some(t) if self.chance(0.6) => t,
                _ => self.bool_expr(3),
            };
            cs.push(c);
        }
        src.push_str("such that\n    ");
        src.push_str(&cs.join(",\n    "));
        src.push('\n');
        if self.chance(0.2) {
            let dir = *self.pick(&["minimising", "maximising"]);
            src.push_str(&format!("{dir} {}\n", self.int_expr(2)));
        }
        (src, inst)
    }
}

pub fn random_spec(seed: u64) -> (String, Instance) {
    SpecGen::new(seed).spec()
}

/// Pairs that differ only by commuting operands, folding constants or
/// dropping identities.
pub const EQUIVALENT_PAIRS: [(&str, &str); 20] = [
    ("find x, y : int(0..3) such that x + y = 2", "find x, y : int(0..3) such that y + x = 2"),
    (FOLDING, "find x : int(0..100) such that 4*(2+3)*1 = x"),
    ("find x, y : int(0..3) such that x * y >= 3", "find x, y : int(0..3) such that y * x >= 3"),
    ("find a, b : bool such that a /\\ b", "find a, b : bool such that b /\\ a"),
    ("find a, b : bool such that a \\/ !b", "find a, b : bool such that !b \\/ a"),
    ("find x : int(0..9) such that x = 5", "find x : int(0..9) such that 5 = x"),
    ("find x, y : int(0..3) such that x != y", "find x, y : int(0..3) such that y != x"),
    ("find x : int(0..9) such that 2 + 3 = x", "find x : int(0..9) such that 5 = x"),
    ("find x : int(0..9) such that x + 2*3 <= 10", "find x : int(0..9) such that 6 + x <= 10"),
    ("find x, y, z : int(0..3) such that (x + y) + z = 4", "find x, y, z : int(0..3) such that z + (y + x) = 4"),
    ("find x, y : int(0..3) such that x * 1 = y", "find x, y : int(0..3) such that x = y"),
    ("find x : int(0..3) such that toInt(true) + x = 2", "find x : int(0..3) such that x + 1 = 2"),
    (
        "find x : int(0..3) such that forAll i : int(1..3) . x + i >= 2",
        "find x : int(0..3) such that forAll i : int(1..3) . i + x >= 2",
    ),
    (
        "find S : set of int(1..4) such that (sum i in S . i * 2) <= 5",
        "find S : set of int(1..4) such that (sum i in S . 2 * i) <= 5",
    ),
    ("find x, y : int(0..3) minimising x + y", "find x, y : int(0..3) minimising y + x"),
    ("find x, y : int(0..5) such that 3 * 4 = x * y", "find x, y : int(0..5) such that 12 = y * x"),
    ("find S : set of int(1..3) such that |S| + 1 >= 2", "find S : set of int(1..3) such that 1 + |S| >= 2"),
    ("find S : set of int(1..3) such that 1 in S /\\ 2 in S", "find S : set of int(1..3) such that 2 in S /\\ 1 in S"),
    ("find x, y : int(0..9) such that x - (2 + 2) = y", "find x, y : int(0..9) such that x - 4 = y"),
    ("find b, c : bool such that !(!b) /\\ c", "find b, c : bool such that c /\\ b"),
];

/// Pairs with different normal forms.
pub const DISTINCT_PAIRS: [(&str, &str); 20] = [
    ("find x : int(0..1)", "find x : int(0..2)"),
    ("find x, y : int(0..3) such that x - y = 1", "find x, y : int(0..3) such that y - x = 1"),
    ("find x, y : int(0..3) such that x < y", "find x, y : int(0..3) such that y < x"),
    ("find x, y : int(1..3) such that x / y = 1", "find x, y : int(1..3) such that y / x = 1"),
    ("find a, b : bool such that a -> b", "find a, b : bool such that b -> a"),
    ("find x : int(0..9) such that x = 5", "find x : int(0..9) such that x = 6"),
    ("find x : int(0..9) such that x <= 5", "find x : int(0..9) such that x < 5"),
    ("find x, y : int(0..3) such that x + y = 2", "find x, y : int(0..3) such that x * y = 2"),
    ("find a, b : bool such that a /\\ b", "find a, b : bool such that a \\/ b"),
    ("find x : int(0..3) minimising x", "find x : int(0..3) maximising x"),
    ("find S : set of int(1..3)", "find S : set (minSize 1) of int(1..3)"),
    ("find S : set of int(1..3) such that |S| >= 1", "find S : set (minSize 1) of int(1..3)"),
    (
        "find x : int(0..3) such that forAll i : int(1..3) . x >= i",
        "find x : int(0..3) such that exists i : int(1..3) . x >= i",
    ),
    ("find x, y : int(0..3) such that x = 1", "find x, y : int(0..3) such that y = 1"),
    ("find x : int(0..3) such that x % 2 = 1", "find x : int(0..3) such that 2 % x = 1"),
    ("find b : bool such that b", "find b : bool such that !b"),
    ("find x : int(0..3)\nfind b : bool", "find b : bool\nfind x : int(0..3)"),
    ("find x, y : int(0..3) such that x = y, x = 1", "find x, y : int(0..3) such that x = 1, x = y"),
    ("find S : set of int(1..3) such that 1 in S", "find S : set of int(1..3) such that 2 in S"),
    ("find x : int(0..3) such that -x = -1", "find x : int(0..3) such that x = 1"),
];

pub const LAGS: &str = include_str!("../data/lags.emini");
pub const HOSTS: &str = include_str!("../data/hosts.emini");
