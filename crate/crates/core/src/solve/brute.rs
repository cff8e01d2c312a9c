//! Exhaustive enumeration with a straightforward exact evaluator, kept
//! separate from the search code so it can serve as its oracle.

use thiserror::Error;

use super::csp::{CBin, CExpr, GroundCsp, Solution};
use crate::spec_lang::eval::{floor_div, floor_mod};

pub const BRUTE_FORCE_LIMIT: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{count} assignments exceed the brute-force limit of {limit}")]
pub struct TooLarge {
    pub count: u128,
    pub limit: u128,
}

/// Value of `e` under a complete assignment; `None` when undefined.
pub fn eval_exact(e: &CExpr, values: &[i64]) -> Option<i64> {
    let truth = |e: &CExpr| -> bool { eval_exact(e, values).is_some_and(|v| v != 0) };
    match e {
        CExpr::Const(v) => Some(*v),
        CExpr::Undef => None,
        CExpr::Var(v) => Some(values[*v]),
        CExpr::Neg(a) => eval_exact(a, values)?.checked_neg(),
        CExpr::Not(a) => Some(!truth(a) as i64),
        CExpr::And(xs) => Some(xs.iter().all(truth) as i64),
        CExpr::Or(xs) => Some(xs.iter().any(truth) as i64),
        CExpr::Sum(xs) => xs.iter().try_fold(0i64, |acc, x| acc.checked_add(eval_exact(x, values)?)),
        CExpr::Guard(g, a) => {
            if values[*g] == 0 {
                Some(0)
            } else {
                eval_exact(a, values)
            }
        }
        CExpr::Bin(CBin::Iff, a, b) => Some((truth(a) == truth(b)) as i64),
        CExpr::Bin(op, a, b) => {
            let (x, y) = (eval_exact(a, values), eval_exact(b, values));
            if op.is_comparison() {
                let (Some(x), Some(y)) = (x, y) else { return Some(0) };
                let r = match op {
                    CBin::Eq => x == y,
                    CBin::Neq => x != y,
                    CBin::Lt => x < y,
                    CBin::Leq => x <= y,
                    CBin::Gt => x > y,
                    _ => x >= y,
                };
                return Some(r as i64);
            }
            let (x, y) = (x?, y?);
            match op {
                CBin::Add => x.checked_add(y),
                CBin::Sub => x.checked_sub(y),
                CBin::Mul => x.checked_mul(y),
                CBin::Div => floor_div(x, y),
                CBin::Mod => floor_mod(x, y),
                _ => unreachable!(),
            }
        }
    }
}

pub fn satisfies(csp: &GroundCsp, values: &[i64]) -> bool {
    csp.all_constraints().all(|c| eval_exact(c, values).is_some_and(|v| v != 0))
}

/// Every complete assignment satisfying all constraints, in the same
/// lexicographic order the search visits them.
pub fn brute_force(csp: &GroundCsp) -> Result<Vec<Solution>, TooLarge> {
    let count = csp.assignment_count();
    if count > BRUTE_FORCE_LIMIT {
        return Err(TooLarge { count, limit: BRUTE_FORCE_LIMIT });
    }
    let mut out = Vec::new();
    if csp.vars.iter().any(|v| v.lo > v.hi) {
        return Ok(out);
    }
    let mut values: Vec<i64> = csp.vars.iter().map(|v| v.lo).collect();
    loop {
        if satisfies(csp, &values) {
            out.push(csp.decode(&values));
        }
        let mut i = values.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if values[i] < csp.vars[i].hi {
                values[i] += 1;
                break;
            }
            values[i] = csp.vars[i].lo;
        }
    }
}
