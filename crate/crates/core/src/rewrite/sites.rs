//! Addressing expressions by tree path.
//!
//! The layouts here mirror `spec_lang::tree`; a path valid there resolves to
//! the same node here.

use crate::spec_lang::{Domain, Expr, QuantRange, SpecAst, Statement};

/// Expressions on the decision side of a specification (find domains,
/// constraints, objective) with their paths, in pre-order.
pub fn sites(ast: &SpecAst) -> Vec<(Vec<usize>, &Expr)> {
    let mut out = Vec::new();
    for (i, s) in ast.statements.iter().enumerate() {
        let mut path = vec![i + 1];
        match s {
            Statement::Find { domain, .. } => {
                path.extend([1, 1]);
                domain_sites(domain, &mut path, &mut out);
            }
            Statement::SuchThat(es) => {
                for (j, e) in es.iter().enumerate() {
                    path.push(j + 1);
                    expr_sites(e, &mut path, &mut out);
                    path.pop();
                }
            }
            Statement::Objective { expr, .. } => {
                path.push(1);
                expr_sites(expr, &mut path, &mut out);
            }
            _ => {}
        }
    }
    out
}

fn domain_sites<'a>(d: &'a Domain, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Expr)>) {
    match d {
        Domain::Bool | Domain::Ref(_) => {}
        Domain::Int { lo, hi } => {
            path.push(1);
            expr_sites(lo, path, out);
            path.pop();
            if let Some(hi) = hi {
                path.push(2);
                expr_sites(hi, path, out);
                path.pop();
            }
        }
        Domain::Relation { attrs, components } => {
            let mut k = 0;
            for e in [&attrs.size, &attrs.min_size, &attrs.max_size].into_iter().flatten() {
                k += 1;
                path.extend([k, 1]);
                expr_sites(e, path, out);
                path.truncate(path.len() - 2);
            }
            for c in components {
                k += 1;
                path.push(k);
                domain_sites(c, path, out);
                path.pop();
            }
        }
    }
}

fn expr_sites<'a>(e: &'a Expr, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, &'a Expr)>) {
    out.push((path.clone(), e));
    let child = |i: usize, c: &'a Expr, path: &mut Vec<usize>, out: &mut Vec<_>| {
        path.push(i);
        expr_sites(c, path, out);
        path.pop();
    };
    match e {
        Expr::Unary { arg, .. } => child(1, arg, path, out),
        Expr::Binary { lhs, rhs, .. } => {
            child(1, lhs, path, out);
            child(2, rhs, path, out);
        }
        Expr::Tuple(items) => {
            for (i, it) in items.iter().enumerate() {
                child(i + 1, it, path, out);
            }
        }
        Expr::Quant { range, body, .. } => {
            path.extend([1, 1]);
            match range.as_ref() {
                QuantRange::Domain(d) => domain_sites(d, path, out),
                QuantRange::Set(s) => expr_sites(s, path, out),
            }
            path.truncate(path.len() - 2);
            child(2, body, path, out);
        }
        Expr::Int(_) | Expr::Bool(_) | Expr::Ref { .. } | Expr::SetLit(_) => {}
    }
}

pub fn expr_at<'a>(ast: &'a SpecAst, path: &[usize]) -> Option<&'a Expr> {
    let (&first, rest) = path.split_first()?;
    match ast.statements.get(first.checked_sub(1)?)? {
        Statement::Find { domain, .. } => match rest {
            [1, 1, tail @ ..] => domain_expr(domain, tail),
            _ => None,
        },
        Statement::Given { names, domain } => match rest {
            [k, tail @ ..] if *k == names.len() + 1 => domain_expr(domain, tail),
            _ => None,
        },
        Statement::LettingExpr { value, .. } => match rest {
            [1, 1, tail @ ..] => sub_expr(value, tail),
            _ => None,
        },
        Statement::LettingDomain { domain, .. } => match rest {
            [1, 1, tail @ ..] => domain_expr(domain, tail),
            _ => None,
        },
        Statement::Where(e) | Statement::Objective { expr: e, .. } => match rest {
            [1, tail @ ..] => sub_expr(e, tail),
            _ => None,
        },
        Statement::SuchThat(es) => match rest {
            [j, tail @ ..] => sub_expr(es.get(j.checked_sub(1)?)?, tail),
            _ => None,
        },
    }
}

fn domain_expr<'a>(d: &'a Domain, path: &[usize]) -> Option<&'a Expr> {
    match (d, path) {
        (Domain::Int { lo, .. }, [1, tail @ ..]) => sub_expr(lo, tail),
        (Domain::Int { hi: Some(hi), .. }, [2, tail @ ..]) => sub_expr(hi, tail),
        (Domain::Relation { attrs, components }, [k, tail @ ..]) => {
            let present: Vec<&Expr> = [&attrs.size, &attrs.min_size, &attrs.max_size].into_iter().flatten().collect();
            let idx = k.checked_sub(1)?;
            if idx < present.len() {
                match tail {
                    [1, rest @ ..] => sub_expr(present[idx], rest),
                    _ => None,
                }
            } else {
                domain_expr(components.get(idx - present.len())?, tail)
            }
        }
        _ => None,
    }
}

fn sub_expr<'a>(e: &'a Expr, path: &[usize]) -> Option<&'a Expr> {
    let Some((&i, rest)) = path.split_first() else {
        return Some(e);
    };
    match (e, i) {
        (Expr::Unary { arg, .. }, 1) => sub_expr(arg, rest),
        (Expr::Binary { lhs, .. }, 1) => sub_expr(lhs, rest),
        (Expr::Binary { rhs, .. }, 2) => sub_expr(rhs, rest),
        (Expr::Tuple(items), i) => sub_expr(items.get(i.checked_sub(1)?)?, rest),
        (Expr::Quant { range, .. }, 1) => match (range.as_ref(), rest) {
            (QuantRange::Domain(d), [1, tail @ ..]) => domain_expr(d, tail),
            (QuantRange::Set(s), [1, tail @ ..]) => sub_expr(s, tail),
            _ => None,
        },
        (Expr::Quant { body, .. }, 2) => sub_expr(body, rest),
        _ => None,
    }
}

pub fn expr_at_mut<'a>(ast: &'a mut SpecAst, path: &[usize]) -> Option<&'a mut Expr> {
    let (&first, rest) = path.split_first()?;
    match ast.statements.get_mut(first.checked_sub(1)?)? {
        Statement::Find { domain, .. } => match rest {
            [1, 1, tail @ ..] => domain_expr_mut(domain, tail),
            _ => None,
        },
        Statement::Given { names, domain } => match rest {
            [k, tail @ ..] if *k == names.len() + 1 => domain_expr_mut(domain, tail),
            _ => None,
        },
        Statement::LettingExpr { value, .. } => match rest {
            [1, 1, tail @ ..] => sub_expr_mut(value, tail),
            _ => None,
        },
        Statement::LettingDomain { domain, .. } => match rest {
            [1, 1, tail @ ..] => domain_expr_mut(domain, tail),
            _ => None,
        },
        Statement::Where(e) | Statement::Objective { expr: e, .. } => match rest {
            [1, tail @ ..] => sub_expr_mut(e, tail),
            _ => None,
        },
        Statement::SuchThat(es) => match rest {
            [j, tail @ ..] => sub_expr_mut(es.get_mut(j.checked_sub(1)?)?, tail),
            _ => None,
        },
    }
}

fn domain_expr_mut<'a>(d: &'a mut Domain, path: &[usize]) -> Option<&'a mut Expr> {
    match (d, path) {
        (Domain::Int { lo, .. }, [1, tail @ ..]) => sub_expr_mut(lo, tail),
        (Domain::Int { hi: Some(hi), .. }, [2, tail @ ..]) => sub_expr_mut(hi, tail),
        (Domain::Relation { attrs, components }, [k, tail @ ..]) => {
            let idx = k.checked_sub(1)?;
            let mut present: Vec<&mut Expr> =
                [&mut attrs.size, &mut attrs.min_size, &mut attrs.max_size].into_iter().flatten().collect();
            let n = present.len();
            if idx < n {
                match tail {
                    [1, rest @ ..] => sub_expr_mut(present.swap_remove(idx), rest),
                    _ => None,
                }
            } else {
                domain_expr_mut(components.get_mut(idx - n)?, tail)
            }
        }
        _ => None,
    }
}

fn sub_expr_mut<'a>(e: &'a mut Expr, path: &[usize]) -> Option<&'a mut Expr> {
    let Some((&i, rest)) = path.split_first() else {
        return Some(e);
    };
    match (e, i) {
        (Expr::Unary { arg, .. }, 1) => sub_expr_mut(arg, rest),
        (Expr::Binary { lhs, .. }, 1) => sub_expr_mut(lhs, rest),
        (Expr::Binary { rhs, .. }, 2) => sub_expr_mut(rhs, rest),
        (Expr::Tuple(items), i) => sub_expr_mut(items.get_mut(i.checked_sub(1)?)?, rest),
        (Expr::Quant { range, .. }, 1) => match (range.as_mut(), rest) {
            (QuantRange::Domain(d), [1, tail @ ..]) => domain_expr_mut(d, tail),
            (QuantRange::Set(s), [1, tail @ ..]) => sub_expr_mut(s, tail),
            _ => None,
        },
        (Expr::Quant { body, .. }, 2) => sub_expr_mut(body, rest),
        _ => None,
    }
}
