use thiserror::Error;

use super::ast::*;
use super::eval::{eval, eval_bool, eval_int, Env, EvalError, Val};
use super::instance::{Instance, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("given `{0}` has no value in the instance")]
    Unbound(String),
    #[error("instance binds `{0}`, which is not a given of the specification")]
    UnknownParameter(String),
    #[error("value of `{name}` is outside its domain: {msg}")]
    OutOfDomain { name: String, msg: String },
    #[error("where clause violated: {clause}")]
    WhereViolated { clause: String },
    #[error("division by zero while evaluating {context}")]
    DivisionByZero { context: String },
    #[error("invalid domain for `{name}`: {msg}")]
    InvalidDomain { name: String, msg: String },
    #[error("cannot evaluate {context}: {err}")]
    Eval { context: String, err: EvalError },
}

fn eval_err(context: String, err: EvalError) -> GroundError {
    match err {
        EvalError::DivisionByZero => GroundError::DivisionByZero { context },
        err => GroundError::Eval { context, err },
    }
}

/// Substitutes instance values for givens and lettings, checks the where
/// clauses, and returns a specification with only finds, constraints and the
/// objective left, all domain bounds numeric.
pub fn ground(ast: &SpecAst, inst: &Instance) -> Result<SpecAst, GroundError> {
    let mut env = Env::new();
    let given_names: Vec<&str> = ast.givens().map(|(n, _)| n).collect();
    if let Some(extra) = inst.bindings.keys().find(|k| !given_names.contains(&k.as_str())) {
        return Err(GroundError::UnknownParameter(extra.clone()));
    }
    let mut out = Vec::new();
    for s in &ast.statements {
        match s {
            Statement::Given { names, domain } => {
                for name in names {
                    let v = inst.bindings.get(name).ok_or_else(|| GroundError::Unbound(name.clone()))?;
                    let val = check_binding(name, v, domain, &mut env)?;
                    env.values.insert(name.clone(), val);
                }
            }
            Statement::LettingExpr { name, value } => {
                let v = eval_int(value, &mut env).map_err(|e| eval_err(format!("letting `{name}`"), e))?;
                env.values.insert(name.clone(), Val::Int(v));
            }
            Statement::LettingDomain { name, domain } => {
                let d = subst_domain(domain, &mut env)?;
                env.domains.insert(name.clone(), d);
            }
            Statement::Where(e) => {
                let clause = e.to_string();
                let ok = eval_bool(e, &mut env).map_err(|err| eval_err(format!("where clause `{clause}`"), err))?;
                if !ok {
                    return Err(GroundError::WhereViolated { clause });
                }
            }
            Statement::Find { name, domain } => {
                let d = subst_domain(domain, &mut env)?;
                validate_find_domain(name, &d)?;
                out.push(Statement::Find { name: name.clone(), domain: d });
            }
            Statement::SuchThat(es) => {
                let es = es.iter().map(|e| subst_expr(e, &mut env)).collect::<Result<_, _>>()?;
                out.push(Statement::SuchThat(es));
            }
            Statement::Objective { direction, expr } => {
                out.push(Statement::Objective { direction: *direction, expr: subst_expr(expr, &mut env)? });
            }
        }
    }
    Ok(SpecAst { statements: out })
}

pub(crate) fn bounds_of(d: &Domain) -> Option<(i64, i64)> {
    match d {
        Domain::Int { lo, hi: Some(hi) } => Some((lo.as_int()?, hi.as_int()?)),
        _ => None,
    }
}

fn tuple_count(components: &[Domain]) -> Option<u128> {
    components.iter().try_fold(1u128, |acc, c| {
        let (lo, hi) = bounds_of(c)?;
        Some(acc * (hi - lo + 1).max(0) as u128)
    })
}

fn validate_find_domain(name: &str, d: &Domain) -> Result<(), GroundError> {
    let invalid = |msg: String| GroundError::InvalidDomain { name: name.to_string(), msg };
    match d {
        Domain::Int { .. } => {
            let (lo, hi) = bounds_of(d).ok_or_else(|| invalid("bounds are not numeric".into()))?;
            if lo > hi {
                return Err(invalid(format!("empty range {lo}..{hi}")));
            }
        }
        Domain::Relation { attrs, components } => {
            for c in components {
                let (lo, hi) = bounds_of(c).ok_or_else(|| invalid("component bounds are not numeric".into()))?;
                if lo > hi {
                    return Err(invalid(format!("empty component range {lo}..{hi}")));
                }
            }
            let total = tuple_count(components).unwrap_or(0) as i128;
            let get = |e: &Option<Expr>| e.as_ref().and_then(Expr::as_int).map(|v| v as i128);
            if let Some(s) = get(&attrs.size) {
                if s < 0 || s > total {
                    return Err(invalid(format!("size {s} outside 0..{total}")));
                }
            }
            let min = get(&attrs.min_size).unwrap_or(0);
            let max = get(&attrs.max_size).unwrap_or(total);
            if min < 0 || max < min || max > total {
                return Err(invalid(format!("minSize {min}, maxSize {max} outside 0..{total}")));
            }
        }
        Domain::Bool | Domain::Ref(_) => {}
    }
    Ok(())
}

pub(crate) fn check_binding(name: &str, v: &Value, domain: &Domain, env: &mut Env) -> Result<Val, GroundError> {
    let out_of = |msg: String| GroundError::OutOfDomain { name: name.to_string(), msg };
    let d = subst_domain(domain, env)?;
    match (&d, v) {
        (Domain::Int { lo, hi }, Value::Int(x)) => {
            let lo = lo.as_int().ok_or_else(|| out_of("lower bound not numeric".into()))?;
            let hi = hi.as_ref().and_then(|h| h.as_int());
            if *x < lo || hi.is_some_and(|h| *x > h) {
                let hi_text = hi.map(|h| h.to_string()).unwrap_or_default();
                return Err(out_of(format!("{x} not in {lo}..{hi_text}")));
            }
            Ok(Val::Int(*x))
        }
        (Domain::Relation { attrs, components }, Value::Rel(tuples)) => {
            for t in tuples {
                if t.len() != components.len() {
                    return Err(out_of(format!("tuple {t:?} has arity {}, expected {}", t.len(), components.len())));
                }
                for (x, c) in t.iter().zip(components) {
                    let (lo, hi) = bounds_of(c).ok_or_else(|| out_of("component bounds not numeric".into()))?;
                    if *x < lo || *x > hi {
                        return Err(out_of(format!("component {x} not in {lo}..{hi}")));
                    }
                }
            }
            let n = tuples.len() as i64;
            let get = |e: &Option<Expr>| e.as_ref().and_then(Expr::as_int);
            if get(&attrs.size).is_some_and(|s| s != n)
                || get(&attrs.min_size).is_some_and(|m| n < m)
                || get(&attrs.max_size).is_some_and(|m| n > m)
            {
                return Err(out_of(format!("cardinality {n} violates the domain attributes")));
            }
            Ok(Val::Rel(tuples.clone()))
        }
        _ => Err(out_of(format!("value `{v}` does not fit domain `{d}`"))),
    }
}

/// Inlines aliases and replaces parameter expressions by their values. In
/// quantifier domains bounds may depend on binders and are then left symbolic.
pub(crate) fn subst_domain(d: &Domain, env: &mut Env) -> Result<Domain, GroundError> {
    Ok(match d {
        Domain::Bool => Domain::Bool,
        Domain::Ref(n) => env.domains.get(n).cloned().ok_or_else(|| GroundError::Eval {
            context: format!("domain `{n}`"),
            err: EvalError::Unbound(n.clone()),
        })?,
        Domain::Int { lo, hi } => Domain::Int {
            lo: Box::new(subst_bound(lo, env)?),
            hi: hi.as_ref().map(|h| subst_bound(h, env).map(Box::new)).transpose()?,
        },
        Domain::Relation { attrs, components } => Domain::Relation {
            attrs: Attrs {
                size: attrs.size.as_ref().map(|e| subst_bound(e, env)).transpose()?,
                min_size: attrs.min_size.as_ref().map(|e| subst_bound(e, env)).transpose()?,
                max_size: attrs.max_size.as_ref().map(|e| subst_bound(e, env)).transpose()?,
            },
            components: components.iter().map(|c| subst_domain(c, env)).collect::<Result<_, _>>()?,
        },
    })
}

fn subst_bound(e: &Expr, env: &mut Env) -> Result<Expr, GroundError> {
    let e = subst_expr(e, env)?;
    match eval(&e, env) {
        Ok(Val::Int(v)) => Ok(Expr::Int(v)),
        Ok(_) => Err(GroundError::Eval { context: format!("bound `{e}`"), err: EvalError::Mismatch(e.to_string()) }),
        Err(EvalError::Unbound(_)) => Ok(e),
        Err(err) => Err(eval_err(format!("bound `{e}`"), err)),
    }
}

fn subst_expr(e: &Expr, env: &mut Env) -> Result<Expr, GroundError> {
    Ok(match e {
        Expr::Ref { name, kind: RefKind::Parameter | RefKind::Constant } => match env.values.get(name) {
            Some(Val::Int(v)) => Expr::Int(*v),
            Some(Val::Rel(s)) => Expr::SetLit(s.clone()),
            Some(Val::Bool(b)) => Expr::Bool(*b),
            _ => return Err(GroundError::Unbound(name.clone())),
        },
        Expr::Int(_) | Expr::Bool(_) | Expr::Ref { .. } | Expr::SetLit(_) => e.clone(),
        Expr::Unary { op, arg } => Expr::unary(*op, subst_expr(arg, env)?),
        Expr::Binary { op, lhs, rhs } => Expr::binary(*op, subst_expr(lhs, env)?, subst_expr(rhs, env)?),
        Expr::Tuple(items) => Expr::Tuple(items.iter().map(|i| subst_expr(i, env)).collect::<Result<_, _>>()?),
        Expr::Quant { kind, var, range, body } => Expr::Quant {
            kind: *kind,
            var: var.clone(),
            range: Box::new(match range.as_ref() {
                QuantRange::Domain(d) => QuantRange::Domain(subst_domain(d, env)?),
                QuantRange::Set(s) => QuantRange::Set(subst_expr(s, env)?),
            }),
            body: Box::new(subst_expr(body, env)?),
        },
    })
}
