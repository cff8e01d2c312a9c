//! Normal form: constant folding, identity and double-negation elimination,
//! and a total order on commutative operands.

use std::cmp::Ordering;
use std::hash::Hasher;

use fnv::FnvHasher;

use super::rules::{fold_value, identity_operand};
use crate::spec_lang::*;

fn class(e: &Expr) -> u8 {
    match e {
        Expr::Int(_) | Expr::Bool(_) => 0,
        Expr::Ref { .. } => 1,
        _ => 2,
    }
}

/// Literals < references < compound; ints before bools; references by
/// name; compound terms by printed text, then structurally.
pub fn operand_order(a: &Expr, b: &Expr) -> Ordering {
    class(a).cmp(&class(b)).then_with(|| match (a, b) {
        (Expr::Int(x), Expr::Int(y)) => x.cmp(y),
        (Expr::Int(_), Expr::Bool(_)) => Ordering::Less,
        (Expr::Bool(_), Expr::Int(_)) => Ordering::Greater,
        (Expr::Bool(x), Expr::Bool(y)) => x.cmp(y),
        (Expr::Ref { name: x, .. }, Expr::Ref { name: y, .. }) => x.cmp(y).then_with(|| a.cmp(b)),
        _ => a.to_string().cmp(&b.to_string()).then_with(|| a.cmp(b)),
    })
}

fn norm_expr(e: &Expr) -> Expr {
    let mut e = match e {
        Expr::Unary { op, arg } => Expr::unary(*op, norm_expr(arg)),
        Expr::Binary { op, lhs, rhs } => Expr::binary(*op, norm_expr(lhs), norm_expr(rhs)),
        Expr::Tuple(items) => Expr::Tuple(items.iter().map(norm_expr).collect()),
        Expr::Quant { kind, var, range, body } => Expr::Quant {
            kind: *kind,
            var: var.clone(),
            range: Box::new(match range.as_ref() {
                QuantRange::Domain(d) => QuantRange::Domain(norm_domain(d)),
                QuantRange::Set(s) => QuantRange::Set(norm_expr(s)),
            }),
            body: Box::new(norm_expr(body)),
        },
        other => other.clone(),
    };
    loop {
        if let Some(v) = fold_value(&e) {
            return v;
        }
        match identity_operand(&e) {
            Some(x) => e = x.clone(),
            None => break,
        }
    }
    if let Expr::Binary { op, lhs, rhs } = &mut e {
        if op.is_commutative() && operand_order(rhs, lhs) == Ordering::Less {
            std::mem::swap(lhs, rhs);
        }
    }
    e
}

fn norm_domain(d: &Domain) -> Domain {
    match d {
        Domain::Int { lo, hi } => {
            Domain::Int { lo: Box::new(norm_expr(lo)), hi: hi.as_ref().map(|h| Box::new(norm_expr(h))) }
        }
        Domain::Relation { attrs, components } => Domain::Relation {
            attrs: Attrs {
                size: attrs.size.as_ref().map(norm_expr),
                min_size: attrs.min_size.as_ref().map(norm_expr),
                max_size: attrs.max_size.as_ref().map(norm_expr),
            },
            components: components.iter().map(norm_domain).collect(),
        },
        other => other.clone(),
    }
}

fn pass(ast: &SpecAst) -> SpecAst {
    let statements = ast
        .statements
        .iter()
        .map(|s| match s {
            Statement::Find { name, domain } => Statement::Find { name: name.clone(), domain: norm_domain(domain) },
            Statement::SuchThat(es) => Statement::SuchThat(es.iter().map(norm_expr).collect()),
            Statement::Objective { direction, expr } => {
                Statement::Objective { direction: *direction, expr: norm_expr(expr) }
            }
            other => other.clone(),
        })
        .collect();
    SpecAst { statements }
}

/// Rewrites the decision side (find domains, constraints, objective) to its
/// normal form. Given, letting and where statements are left as written.
pub fn normalize(ast: &SpecAst) -> SpecAst {
    let mut cur = pass(ast);
    loop {
        let next = pass(&cur);
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// FNV-1a digest of the printed normal form.
pub fn canonical_hash(ast: &SpecAst) -> u64 {
    let mut h = FnvHasher::default();
    h.write(pretty(&normalize(ast), false).as_bytes());
    h.finish()
}
