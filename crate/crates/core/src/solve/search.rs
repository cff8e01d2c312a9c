//! Depth-first search with interval lookahead and branch-and-bound.

use std::time::Instant;

use super::csp::{CBin, CExpr, GroundCsp};
use super::{Mode, SolveResult, Status};
use crate::spec_lang::eval::{floor_div, floor_mod};
use crate::spec_lang::Direction;

/// Interval of an integer expression under a partial assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Iv {
    /// Values within `lo..=hi`; `maybe_undef` when some completion is undefined.
    Def {
        lo: i128,
        hi: i128,
        maybe_undef: bool,
    },
    Undef,
}

impl Iv {
    fn point(v: i128) -> Iv {
        Iv::Def { lo: v, hi: v, maybe_undef: false }
    }

    fn range(lo: i128, hi: i128) -> Iv {
        Iv::Def { lo, hi, maybe_undef: false }
    }

    fn bool(definitely: bool, possibly: bool) -> Iv {
        Iv::range(definitely as i128, possibly as i128)
    }
}

/// `Σ coef·var + konst + Σ coef·opaque`; variable terms are merged so that
/// opposite occurrences cancel.
#[derive(Debug, Clone)]
struct Lin {
    vars: Vec<(usize, i128)>,
    konst: i128,
    opaque: Vec<(i128, SExpr)>,
}

#[derive(Debug, Clone)]
enum SExpr {
    Const(i128),
    Undef,
    Var(usize),
    Not(Box<SExpr>),
    Arith(CBin, Box<SExpr>, Box<SExpr>),
    Lin(Box<Lin>),
    /// `lin op 0`.
    Cmp(CBin, Box<Lin>),
    Iff(Box<SExpr>, Box<SExpr>),
    And(Vec<SExpr>),
    Or(Vec<SExpr>),
    Guard(usize, Box<SExpr>),
}

fn lin_of(e: &CExpr) -> Lin {
    let mut acc = std::collections::BTreeMap::new();
    let mut lin = Lin { vars: Vec::new(), konst: 0, opaque: Vec::new() };
    collect(e, 1, &mut acc, &mut lin);
    lin.vars = acc.into_iter().filter(|&(_, c)| c != 0).collect();
    lin
}

fn collect(e: &CExpr, scale: i128, acc: &mut std::collections::BTreeMap<usize, i128>, lin: &mut Lin) {
    match e {
        CExpr::Const(v) => lin.konst = lin.konst.saturating_add(scale.saturating_mul(*v as i128)),
        CExpr::Var(v) => *acc.entry(*v).or_insert(0) += scale,
        CExpr::Neg(a) => collect(a, -scale, acc, lin),
        CExpr::Sum(xs) => xs.iter().for_each(|x| collect(x, scale, acc, lin)),
        CExpr::Bin(CBin::Add, a, b) => {
            collect(a, scale, acc, lin);
            collect(b, scale, acc, lin);
        }
        CExpr::Bin(CBin::Sub, a, b) => {
            collect(a, scale, acc, lin);
            collect(b, -scale, acc, lin);
        }
        CExpr::Bin(CBin::Mul, a, b) => match (a.as_ref(), b.as_ref()) {
            (CExpr::Const(c), x) | (x, CExpr::Const(c)) => collect(x, scale.saturating_mul(*c as i128), acc, lin),
            _ => lin.opaque.push((scale, compile(e))),
        },
        _ => lin.opaque.push((scale, compile(e))),
    }
}

fn compile(e: &CExpr) -> SExpr {
    match e {
        CExpr::Const(v) => SExpr::Const(*v as i128),
        CExpr::Undef => SExpr::Undef,
        CExpr::Var(v) => SExpr::Var(*v),
        CExpr::Not(a) => SExpr::Not(Box::new(compile(a))),
        CExpr::Neg(_) | CExpr::Sum(_) | CExpr::Bin(CBin::Add | CBin::Sub, ..) => SExpr::Lin(Box::new(lin_of(e))),
        CExpr::Bin(CBin::Mul, a, b)
            if matches!(a.as_ref(), CExpr::Const(_)) || matches!(b.as_ref(), CExpr::Const(_)) =>
        {
            SExpr::Lin(Box::new(lin_of(e)))
        }
        CExpr::Bin(CBin::Iff, a, b) => SExpr::Iff(Box::new(compile(a)), Box::new(compile(b))),
        CExpr::Bin(op, a, b) if op.is_comparison() => {
            let diff = CExpr::Bin(CBin::Sub, a.clone(), b.clone());
            SExpr::Cmp(*op, Box::new(lin_of(&diff)))
        }
        CExpr::Bin(op, a, b) => SExpr::Arith(*op, Box::new(compile(a)), Box::new(compile(b))),
        CExpr::And(xs) => SExpr::And(xs.iter().map(compile).collect()),
        CExpr::Or(xs) => SExpr::Or(xs.iter().map(compile).collect()),
        CExpr::Guard(g, a) => SExpr::Guard(*g, Box::new(compile(a))),
    }
}

struct State<'a> {
    lo: &'a [i64],
    hi: &'a [i64],
    value: Vec<Option<i64>>,
}

impl State<'_> {
    fn var(&self, v: usize) -> (i128, i128) {
        match self.value[v] {
            Some(x) => (x as i128, x as i128),
            None => (self.lo[v] as i128, self.hi[v] as i128),
        }
    }

    fn lin(&self, l: &Lin) -> Iv {
        let (mut lo, mut hi, mut maybe) = (l.konst, l.konst, false);
        let mut add = |c: i128, a: i128, b: i128| {
            let (p, q) = (c.saturating_mul(a), c.saturating_mul(b));
            lo = lo.saturating_add(p.min(q));
            hi = hi.saturating_add(p.max(q));
        };
        for &(v, c) in &l.vars {
            let (a, b) = self.var(v);
            add(c, a, b);
        }
        for (c, e) in &l.opaque {
            match self.eval(e) {
                Iv::Undef => return Iv::Undef,
                Iv::Def { lo: a, hi: b, maybe_undef } => {
                    maybe |= maybe_undef;
                    add(*c, a, b);
                }
            }
        }
        Iv::Def { lo, hi, maybe_undef: maybe }
    }

    fn truth(&self, e: &SExpr) -> (bool, bool) {
        match self.eval(e) {
            Iv::Def { lo, hi, .. } => (lo >= 1, hi >= 1),
            Iv::Undef => (false, false),
        }
    }

    fn eval(&self, e: &SExpr) -> Iv {
        match e {
            SExpr::Const(v) => Iv::point(*v),
            SExpr::Undef => Iv::Undef,
            SExpr::Var(v) => {
                let (a, b) = self.var(*v);
                Iv::range(a, b)
            }
            SExpr::Not(a) => {
                let (d, p) = self.truth(a);
                Iv::bool(!p, !d)
            }
            SExpr::Lin(l) => self.lin(l),
            SExpr::Cmp(op, l) => match self.lin(l) {
                Iv::Undef => Iv::bool(false, false),
                Iv::Def { lo, hi, maybe_undef } => {
                    let (definite, possible) = match op {
                        CBin::Eq => (lo == 0 && hi == 0, lo <= 0 && 0 <= hi),
                        CBin::Neq => (lo > 0 || hi < 0, !(lo == 0 && hi == 0)),
                        CBin::Lt => (hi < 0, lo < 0),
                        CBin::Leq => (hi <= 0, lo <= 0),
                        CBin::Gt => (lo > 0, hi > 0),
                        CBin::Geq => (lo >= 0, hi >= 0),
                        _ => unreachable!(),
                    };
                    Iv::bool(definite && !maybe_undef, possible)
                }
            },
            SExpr::Iff(a, b) => {
                let (da, pa) = self.truth(a);
                let (db, pb) = self.truth(b);
                if da == pa && db == pb {
                    Iv::point((da == db) as i128)
                } else {
                    Iv::bool(false, true)
                }
            }
            SExpr::And(xs) => {
                let (mut d, mut p) = (true, true);
                for x in xs {
                    let (dx, px) = self.truth(x);
                    d &= dx;
                    p &= px;
                    if !p {
                        break;
                    }
                }
                Iv::bool(d, p)
            }
            SExpr::Or(xs) => {
                let (mut d, mut p) = (false, false);
                for x in xs {
                    let (dx, px) = self.truth(x);
                    d |= dx;
                    p |= px;
                    if d {
                        break;
                    }
                }
                Iv::bool(d, p)
            }
            SExpr::Guard(g, body) => match self.var(*g) {
                (0, 0) => Iv::point(0),
                (1, 1) => self.eval(body),
                _ => match self.eval(body) {
                    Iv::Undef => Iv::Def { lo: 0, hi: 0, maybe_undef: true },
                    Iv::Def { lo, hi, maybe_undef } => Iv::Def { lo: lo.min(0), hi: hi.max(0), maybe_undef },
                },
            },
            SExpr::Arith(op, a, b) => arith(*op, self.eval(a), self.eval(b)),
        }
    }
}

fn arith(op: CBin, a: Iv, b: Iv) -> Iv {
    let (Iv::Def { lo: al, hi: ah, maybe_undef: ma }, Iv::Def { lo: bl, hi: bh, maybe_undef: mb }) = (a, b) else {
        return Iv::Undef;
    };
    let maybe = ma || mb;
    let hull = |xs: &[i128]| (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
    match op {
        CBin::Mul => {
            let (lo, hi) =
                hull(&[al.saturating_mul(bl), al.saturating_mul(bh), ah.saturating_mul(bl), ah.saturating_mul(bh)]);
            Iv::Def { lo, hi, maybe_undef: maybe }
        }
        CBin::Div | CBin::Mod => {
            if bl == 0 && bh == 0 {
                return Iv::Undef;
            }
            let maybe = maybe || (bl <= 0 && 0 <= bh);
            if al == ah && bl == bh {
                let (x, y) = (al as i64, bl as i64);
                let r = if op == CBin::Div { floor_div(x, y) } else { floor_mod(x, y) };
                return match r {
                    Some(r) => Iv::Def { lo: r as i128, hi: r as i128, maybe_undef: maybe },
                    None => Iv::Undef,
                };
            }
            if op == CBin::Mod {
                let lo = if bl < 0 { bl + 1 } else { 0 };
                let hi = if bh > 0 { bh - 1 } else { 0 };
                return Iv::Def { lo, hi, maybe_undef: maybe };
            }
            // Floor division is monotone in each argument on each sign of the divisor.
            let mut corners = Vec::new();
            for (l, h) in [(bl, bh.min(-1)), (bl.max(1), bh)] {
                if l <= h {
                    for d in [l, h] {
                        for n in [al, ah] {
                            corners.push(fdiv(n, d));
                        }
                    }
                }
            }
            let (lo, hi) = hull(&corners);
            Iv::Def { lo, hi, maybe_undef: maybe }
        }
        _ => unreachable!("linear ops are compiled to Lin"),
    }
}

fn fdiv(a: i128, b: i128) -> i128 {
    let q = a / b;
    if a % b != 0 && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

struct Compiled {
    constraints: Vec<SExpr>,
    watch: Vec<Vec<usize>>,
    objective: Option<(Direction, Lin)>,
}

fn prepare(csp: &GroundCsp) -> Compiled {
    let mut watch = vec![Vec::new(); csp.vars.len()];
    let mut constraints = Vec::new();
    for (i, c) in csp.all_constraints().enumerate() {
        let mut vs = Vec::new();
        c.vars(&mut vs);
        vs.sort_unstable();
        vs.dedup();
        for v in vs {
            watch[v].push(i);
        }
        constraints.push(compile(c));
    }
    let objective = csp.objective.as_ref().map(|(d, e)| (*d, lin_of(e)));
    Compiled { constraints, watch, objective }
}

/// Runs the search. In `Optimize` mode without an objective this behaves
/// like `First`.
pub fn solve(csp: &GroundCsp, budget: u64, mode: Mode) -> SolveResult {
    let start = Instant::now();
    let budget = budget.max(1);
    let comp = prepare(csp);
    let lo: Vec<i64> = csp.vars.iter().map(|v| v.lo).collect();
    let hi: Vec<i64> = csp.vars.iter().map(|v| v.hi).collect();
    let mut st = State { lo: &lo, hi: &hi, value: vec![None; csp.vars.len()] };
    let optimizing = mode == Mode::Optimize && comp.objective.is_some();

    let mut nodes: u64 = 1;
    let mut failures: u64 = 0;
    let mut solutions = Vec::new();
    let mut best: Option<i64> = None;
    let mut exhausted = false;

    let obj_value = |st: &State| -> Option<i64> {
        let (_, l) = comp.objective.as_ref()?;
        match st.lin(l) {
            Iv::Def { lo, hi, maybe_undef: false } if lo == hi => Some(lo as i64),
            _ => None,
        }
    };
    let bound_ok = |st: &State, best: Option<i64>| -> bool {
        let (Some(b), Some((dir, l)), true) = (best, comp.objective.as_ref(), optimizing) else { return true };
        match st.lin(l) {
            Iv::Undef => false,
            Iv::Def { lo, hi, .. } => match dir {
                Direction::Minimising => lo < b as i128,
                Direction::Maximising => hi > b as i128,
            },
        }
    };
    let on_leaf = |st: &State, solutions: &mut Vec<_>, best: &mut Option<i64>| -> bool {
        let values: Vec<i64> = st.value.iter().map(|v| v.expect("complete")).collect();
        if optimizing {
            match obj_value(st) {
                Some(v) => {
                    *best = Some(v);
                    solutions.clear();
                    solutions.push(csp.decode(&values));
                }
                None if solutions.is_empty() => solutions.push(csp.decode(&values)),
                None => {}
            }
            false
        } else {
            if solutions.is_empty() {
                *best = obj_value(st);
            }
            solutions.push(csp.decode(&values));
            mode == Mode::First || mode == Mode::Optimize
        }
    };

    let root_ok = comp.constraints.iter().all(|c| st.truth(c).1);
    if !root_ok {
        failures = 1;
    } else if csp.vars.is_empty() {
        on_leaf(&st, &mut solutions, &mut best);
    } else {
        let n = csp.vars.len();
        let mut next = vec![0i64; n];
        next[0] = lo[0];
        let mut level = 0usize;
        'search: loop {
            if next[level] > hi[level] {
                st.value[level] = None;
                if level == 0 {
                    break;
                }
                level -= 1;
                continue;
            }
            if nodes >= budget {
                exhausted = true;
                break;
            }
            nodes += 1;
            st.value[level] = Some(next[level]);
            next[level] += 1;
            let ok = comp.watch[level].iter().all(|&c| st.truth(&comp.constraints[c]).1) && bound_ok(&st, best);
            if !ok {
                failures += 1;
                continue;
            }
            if level + 1 == n {
                if on_leaf(&st, &mut solutions, &mut best) {
                    break 'search;
                }
                continue;
            }
            level += 1;
            next[level] = lo[level];
        }
    }

    let status = if exhausted {
        Status::NodeBudgetExhausted
    } else if solutions.is_empty() {
        Status::Unsat
    } else if optimizing && best.is_some() {
        Status::Optimal
    } else {
        Status::Sat
    };
    let objective = if mode == Mode::All { None } else { best };
    SolveResult { status, solutions, objective, nodes, failures, millis: start.elapsed().as_millis() as u64 }
}
