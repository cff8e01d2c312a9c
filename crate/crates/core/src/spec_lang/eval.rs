//! Evaluation of closed expressions (no decision variables).

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Val {
    Int(i64),
    Bool(bool),
    Tuple(Vec<i64>),
    Rel(BTreeSet<Vec<i64>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("`{0}` has no value here")]
    Unbound(String),
    #[error("type mismatch while evaluating `{0}`")]
    Mismatch(String),
}

/// Floor division, rounding toward negative infinity.
pub fn floor_div(a: i64, b: i64) -> Option<i64> {
    if b == 0 {
        return None;
    }
    let q = a.checked_div(b)?;
    if a % b != 0 && ((a < 0) != (b < 0)) {
        Some(q - 1)
    } else {
        Some(q)
    }
}

/// Remainder matching [`floor_div`]: the result takes the divisor's sign.
pub fn floor_mod(a: i64, b: i64) -> Option<i64> {
    let q = floor_div(a, b)?;
    a.checked_sub(b.checked_mul(q)?)
}

/// Values for parameters, lettings and domain aliases.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub values: HashMap<String, Val>,
    pub domains: HashMap<String, Domain>,
    binders: Vec<(String, Val)>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    fn lookup(&self, name: &str, kind: RefKind) -> Result<Val, EvalError> {
        if kind == RefKind::QuantifiedVariable {
            return self
                .binders
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| EvalError::Unbound(name.to_string()));
        }
        self.values.get(name).cloned().ok_or_else(|| EvalError::Unbound(name.to_string()))
    }

    pub fn push_binder(&mut self, name: &str, v: Val) {
        self.binders.push((name.to_string(), v));
    }

    pub fn pop_binder(&mut self) {
        self.binders.pop();
    }

    pub fn binder(&self, name: &str) -> Option<&Val> {
        self.binders.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn with_binder<T>(&mut self, name: &str, v: Val, f: impl FnOnce(&mut Env) -> T) -> T {
        self.binders.push((name.to_string(), v));
        let r = f(self);
        self.binders.pop();
        r
    }

    pub fn resolve_domain<'a>(&'a self, d: &'a Domain) -> Result<&'a Domain, EvalError> {
        let mut cur = d;
        for _ in 0..=self.domains.len() {
            match cur {
                Domain::Ref(n) => cur = self.domains.get(n).ok_or_else(|| EvalError::Unbound(n.clone()))?,
                other => return Ok(other),
            }
        }
        Err(EvalError::Unbound(format!("{d}")))
    }
}

pub fn eval_int(e: &Expr, env: &mut Env) -> Result<i64, EvalError> {
    match eval(e, env)? {
        Val::Int(v) => Ok(v),
        _ => Err(EvalError::Mismatch(e.to_string())),
    }
}

pub fn eval_bool(e: &Expr, env: &mut Env) -> Result<bool, EvalError> {
    match eval(e, env)? {
        Val::Bool(v) => Ok(v),
        _ => Err(EvalError::Mismatch(e.to_string())),
    }
}

/// Integer bounds of a bounded int domain; `None` upper bound for `int(lo..)`.
pub fn int_bounds(d: &Domain, env: &mut Env) -> Result<(i64, Option<i64>), EvalError> {
    match env.resolve_domain(d)?.clone() {
        Domain::Int { lo, hi } => {
            let lo = eval_int(&lo, env)?;
            let hi = hi.map(|h| eval_int(&h, env)).transpose()?;
            Ok((lo, hi))
        }
        other => Err(EvalError::Mismatch(other.to_string())),
    }
}

/// The values a quantifier binder takes, in ascending order.
pub fn range_values(range: &QuantRange, env: &mut Env) -> Result<Vec<Val>, EvalError> {
    match range {
        QuantRange::Domain(d) => match env.resolve_domain(d)?.clone() {
            Domain::Bool => Ok(vec![Val::Bool(false), Val::Bool(true)]),
            d @ Domain::Int { .. } => {
                let (lo, hi) = int_bounds(&d, env)?;
                let hi = hi.ok_or_else(|| EvalError::Mismatch(d.to_string()))?;
                Ok((lo..=hi).map(Val::Int).collect())
            }
            other => Err(EvalError::Mismatch(other.to_string())),
        },
        QuantRange::Set(s) => match eval(s, env)? {
            Val::Rel(elems) => Ok(elems.into_iter().map(|t| Val::Int(t[0])).collect()),
            _ => Err(EvalError::Mismatch(s.to_string())),
        },
    }
}

fn arith(op: BinOp, a: i64, b: i64) -> Result<i64, EvalError> {
    let r = match op {
        BinOp::Add => a.checked_add(b),
        BinOp::Sub => a.checked_sub(b),
        BinOp::Mul => a.checked_mul(b),
        BinOp::Div => {
            if b == 0 {
                return Err(EvalError::DivisionByZero);
            }
            floor_div(a, b)
        }
        BinOp::Mod => {
            if b == 0 {
                return Err(EvalError::DivisionByZero);
            }
            floor_mod(a, b)
        }
        _ => unreachable!("not arithmetic"),
    };
    r.ok_or(EvalError::Overflow)
}

pub fn eval(e: &Expr, env: &mut Env) -> Result<Val, EvalError> {
    let mismatch = || EvalError::Mismatch(e.to_string());
    match e {
        Expr::Int(v) => Ok(Val::Int(*v)),
        Expr::Bool(b) => Ok(Val::Bool(*b)),
        Expr::Ref { name, kind } => env.lookup(name, *kind),
        Expr::SetLit(s) => Ok(Val::Rel(s.clone())),
        Expr::Tuple(items) => Ok(Val::Tuple(items.iter().map(|i| eval_int(i, env)).collect::<Result<_, _>>()?)),
        Expr::Unary { op, arg } => {
            let v = eval(arg, env)?;
            match (op, v) {
                (UnaryOp::Neg, Val::Int(a)) => a.checked_neg().map(Val::Int).ok_or(EvalError::Overflow),
                (UnaryOp::Not, Val::Bool(b)) => Ok(Val::Bool(!b)),
                (UnaryOp::ToInt, Val::Bool(b)) => Ok(Val::Int(b as i64)),
                (UnaryOp::Card, Val::Rel(s)) => Ok(Val::Int(s.len() as i64)),
                _ => Err(mismatch()),
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            use BinOp::*;
            // Short-circuit so guards like `n > 0 -> 10/n > 1` evaluate.
            match op {
                And | Or | Implies => {
                    let l = eval_bool(lhs, env)?;
                    let decided = match op {
                        And => (!l).then_some(false),
                        Or => l.then_some(true),
                        _ => (!l).then_some(true),
                    };
                    if let Some(v) = decided {
                        return Ok(Val::Bool(v));
                    }
                    return Ok(Val::Bool(eval_bool(rhs, env)?));
                }
                _ => {}
            }
            let l = eval(lhs, env)?;
            let r = eval(rhs, env)?;
            Ok(match (op, l, r) {
                (Add | Sub | Mul | Div | Mod, Val::Int(a), Val::Int(b)) => Val::Int(arith(*op, a, b)?),
                (Eq, a, b) => Val::Bool(a == b),
                (Neq, a, b) => Val::Bool(a != b),
                (Lt, Val::Int(a), Val::Int(b)) => Val::Bool(a < b),
                (Leq, Val::Int(a), Val::Int(b)) => Val::Bool(a <= b),
                (Gt, Val::Int(a), Val::Int(b)) => Val::Bool(a > b),
                (Geq, Val::Int(a), Val::Int(b)) => Val::Bool(a >= b),
                (Iff, Val::Bool(a), Val::Bool(b)) => Val::Bool(a == b),
                (In, Val::Int(a), Val::Rel(s)) => Val::Bool(s.contains(&vec![a])),
                (In, Val::Tuple(t), Val::Rel(s)) => Val::Bool(s.contains(&t)),
                (SubsetEq, Val::Rel(a), Val::Rel(b)) => Val::Bool(a.is_subset(&b)),
                _ => return Err(mismatch()),
            })
        }
        Expr::Quant { kind, var, range, body } => {
            let values = range_values(range, env)?;
            let mut acc: i64 = 0;
            for v in values {
                let r = env.with_binder(var, v, |env| eval(body, env))?;
                match (kind, r) {
                    (QuantKind::ForAll, Val::Bool(false)) => return Ok(Val::Bool(false)),
                    (QuantKind::Exists, Val::Bool(true)) => return Ok(Val::Bool(true)),
                    (QuantKind::Sum, Val::Int(x)) => acc = acc.checked_add(x).ok_or(EvalError::Overflow)?,
                    (QuantKind::ForAll | QuantKind::Exists, Val::Bool(_)) => {}
                    _ => return Err(mismatch()),
                }
            }
            Ok(match kind {
                QuantKind::ForAll => Val::Bool(true),
                QuantKind::Exists => Val::Bool(false),
                QuantKind::Sum => Val::Int(acc),
            })
        }
    }
}

/// Evaluates an expression that mentions nothing but literals and its own
/// binders. Returns `None` when it is not closed or is undefined.
pub fn eval_closed(e: &Expr) -> Option<Val> {
    eval(e, &mut Env::new()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn floor_semantics() {
        assert_eq!(floor_div(7, 2), Some(3));
        assert_eq!(floor_div(-7, 2), Some(-4));
        assert_eq!(floor_div(7, -2), Some(-4));
        assert_eq!(floor_div(-7, -2), Some(3));
        assert_eq!(floor_mod(-7, 2), Some(1));
        assert_eq!(floor_mod(7, -2), Some(-1));
        assert_eq!(floor_div(1, 0), None);
    }

    proptest! {
        #[test]
        fn floor_div_matches_float_floor(a in -1000i64..1000, b in -50i64..50) {
            prop_assume!(b != 0);
            let q = floor_div(a, b).unwrap();
            prop_assert_eq!(q, (a as f64 / b as f64).floor() as i64);
            prop_assert_eq!(a, b * q + floor_mod(a, b).unwrap());
        }
    }

    #[test]
    fn closed_quantifier_evaluates() {
        let ast = crate::spec_lang::parse("find x : bool such that (sum i : int(1..4) . i*i) = 30").unwrap();
        let c = ast.constraints().next().unwrap();
        assert_eq!(eval_closed(c), Some(Val::Bool(true)));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = Expr::binary(BinOp::Div, Expr::Int(1), Expr::Int(0));
        assert_eq!(eval(&e, &mut Env::new()), Err(EvalError::DivisionByZero));
    }
}
