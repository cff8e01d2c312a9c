//! The rule library.

use std::collections::BTreeSet;

use super::sites::{expr_at_mut, sites};
use super::{Match, RewriteRule, RuleKind};
use crate::spec_lang::eval::{eval_closed, Val};
use crate::spec_lang::*;

fn mk(rule: &dyn RewriteRule, path: Vec<usize>, bindings: &[(&str, &Expr)]) -> Match {
    Match {
        rule: rule.name().to_string(),
        path,
        bindings: bindings.iter().map(|(k, v)| (k.to_string(), (*v).clone())).collect(),
    }
}

fn replace_at(ast: &SpecAst, path: &[usize], f: impl FnOnce(&Expr) -> Expr) -> SpecAst {
    let mut out = ast.clone();
    let slot = expr_at_mut(&mut out, path).expect("match path addresses an expression");
    *slot = f(slot);
    out
}

/// `(statement index, constraint index)` of a top-level constraint path.
fn constraint_pos(path: &[usize]) -> (usize, usize) {
    (path[0] - 1, path[1] - 1)
}

fn top_level_constraints(ast: &SpecAst) -> impl Iterator<Item = (Vec<usize>, &Expr)> {
    ast.statements.iter().enumerate().flat_map(|(i, s)| match s {
        Statement::SuchThat(es) => es.iter().enumerate().map(|(j, e)| (vec![i + 1, j + 1], e)).collect(),
        _ => Vec::new(),
    })
}

pub struct Commute;

impl RewriteRule for Commute {
    fn name(&self) -> &'static str {
        "commute"
    }

    fn kind(&self) -> RuleKind {
        RuleKind::ExpressionLocal
    }

    fn soundness_note(&self) -> &'static str {
        "+, *, =, !=, /\\ and \\/ are commutative; constraint evaluation is strict in both operands"
    }

    fn enumerate(&self, ast: &SpecAst) -> Vec<Match> {
        sites(ast)
            .into_iter()
            .filter_map(|(path, e)| match e {
                Expr::Binary { op, lhs, rhs } if op.is_commutative() => Some(mk(self, path, &[("a", lhs), ("b", rhs)])),
                _ => None,
            })
            .collect()
    }

    fn rewrite(&self, ast: &SpecAst, m: &Match) -> SpecAst {
        replace_at(ast, &m.path, |e| match e {
            Expr::Binary { op, lhs, rhs } => Expr::Binary { op: *op, lhs: rhs.clone(), rhs: lhs.clone() },
            _ => unreachable!(),
        })
    }
}

pub(crate) fn fold_value(e: &Expr) -> Option<Expr> {
    if e.is_literal() || matches!(e, Expr::Ref { .. } | Expr::SetLit(_) | Expr::Tuple(_)) {
        return None;
    }
    match eval_closed(e)? {
        Val::Int(v) => Some(Expr::Int(v)),
        Val::Bool(b) => Some(Expr::Bool(b)),
        _ => None,
    }
}

pub struct ConstFold;

impl RewriteRule for ConstFold {
    fn name(&self) -> &'static str {
        "const-fold"
    }

    fn kind(&self) -> RuleKind {
        RuleKind::ExpressionLocal
    }

    fn soundness_note(&self) -> &'static str {
        "replaces a closed, defined sub-expression by its value; undefined ones are left alone"
    }

    fn enumerate(&self, ast: &SpecAst) -> Vec<Match> {
        let mut out: Vec<Match> = Vec::new();
        for (path, e) in sites(ast) {
            if out.iter().any(|m| path.starts_with(&m.path)) {
                continue;
            }
            if let Some(v) = fold_value(e) {
                out.push(mk(self, path, &[("expr", e), ("value", &v)]));
            }
        }
        out
    }

    fn rewrite(&self, ast: &SpecAst, m: &Match) -> SpecAst {
        replace_at(ast, &m.path, |_| m.bindings["value"].clone())
    }
}

/// The neutral-element patterns, returning the operand that survives.
pub(crate) fn identity_operand(e: &Expr) -> Option<&Expr> {
    use BinOp::*;
    match e {
        Expr::Binary { op, lhs, rhs } => match (op, lhs.as_ref(), rhs.as_ref()) {
            (Mul, x, Expr::Int(1)) | (Mul, Expr::Int(1), x) => Some(x),
            (Add, x, Expr::Int(0)) | (Add, Expr::Int(0), x) => Some(x),
            (And, x, Expr::Bool(true)) | (And, Expr::Bool(true), x) => Some(x),
            (Or, x, Expr::Bool(false)) | (Or, Expr::Bool(false), x) => Some(x),
            _ => None,
        },
        Expr::Unary { op: UnaryOp::Not, arg } => match arg.as_ref() {
            Expr::Unary { op: UnaryOp::Not, arg: inner } => Some(inner),
            _ => None,
        },
        _ => None,
    }
}

pub struct IdentityElim;

impl RewriteRule for IdentityElim {
    fn name(&self) -> &'static str {
        "identity-elim"
    }

    fn kind(&self) -> RuleKind {
        RuleKind::ExpressionLocal
    }

    fn soundness_note(&self) -> &'static str {
        "x*1, x+0, b/\\true, b\\/false and !!b equal their surviving operand, including when it is undefined"
    }

    fn enumerate(&self, ast: &SpecAst) -> Vec<Match> {
        sites(ast)
            .into_iter()
            .filter_map(|(path, e)| identity_operand(e).map(|x| mk(self, path, &[("x", x)])))
            .collect()
    }

    fn rewrite(&self, ast: &SpecAst, m: &Match) -> SpecAst {
        replace_at(ast, &m.path, |_| m.bindings["x"].clone())
    }
}

fn find_domain<'a>(ast: &'a SpecAst, name: &str) -> Option<(usize, &'a Domain)> {
    ast.statements.iter().enumerate().find_map(|(i, s)| match s {
        Statement::Find { name: n, domain } if n == name => Some((i, domain)),
        _ => None,
    })
}

fn literal_bounds(ast: &SpecAst, d: &Domain) -> Option<(i64, i64)> {
    match ast.resolve_domain(d)? {
        Domain::Int { lo, hi: Some(hi) } => Some((lo.as_int()?, hi.as_int()?)),
        _ => None,
    }
}

fn range_nonempty(ast: &SpecAst, range: &QuantRange) -> bool {
    match range {
        QuantRange::Domain(d) => match ast.resolve_domain(d) {
            Some(Domain::Bool) => true,
            _ => literal_bounds(ast, d).is_some_and(|(lo, hi)| lo <= hi),
        },
        QuantRange::Set(Expr::SetLit(s)) => !s.is_empty(),
        QuantRange::Set(Expr::Ref { name, kind: RefKind::DecisionVariable }) => {
            let Some((_, d)) = find_domain(ast, name) else { return false };
            match ast.resolve_domain(d) {
                Some(Domain::Relation { attrs, .. }) => [&attrs.size, &attrs.min_size]
                    .into_iter()
                    .any(|a| a.as_ref().and_then(Expr::as_int).is_some_and(|v| v >= 1)),
                _ => false,
            }
        }
        QuantRange::Set(_) => false,
    }
}

fn syntactically_int(e: &Expr) -> bool {
    match e {
        Expr::Int(_) => true,
        Expr::Binary { op, .. } => op.is_arithmetic(),
        Expr::Unary { op, .. } => matches!(op, UnaryOp::Neg | UnaryOp::ToInt | UnaryOp::Card),
        Expr::Quant { kind, .. } => *kind == QuantKind::Sum,
        _ => false,
    }
}

pub struct ImpliedSum;

impl ImpliedSum {
    fn derived(ast: &SpecAst, e: &Expr) -> Option<(Expr, Expr, Expr)> {
        let Expr::Quant { kind: QuantKind::ForAll, var, range, body } = e else { return None };
        let Expr::Binary { op, lhs, rhs } = body.as_ref() else { return None };
        use BinOp::*;
        let op = match op {
            Leq | Geq | Eq => *op,
            Lt | Gt if range_nonempty(ast, range) => *op,
            Lt => Leq,
            Gt => Geq,
            _ => return None,
        };
        if op == Eq && !(syntactically_int(lhs) || syntactically_int(rhs)) {
            return None;
        }
        let sum = |x: &Expr| Expr::Quant {
            kind: QuantKind::Sum,
            var: var.clone(),
            range: range.clone(),
            body: Box::new(x.clone()),
        };
        Some((Expr::binary(op, sum(lhs), sum(rhs)), (**lhs).clone(), (**rhs).clone()))
    }
}

impl RewriteRule for ImpliedSum {
    fn name(&self) -> &'static str {
        "implied-sum"
    }

    fn kind(&self) -> RuleKind {
        RuleKind::ConstraintDerivation
    }

    fn soundness_note(&self) -> &'static str {
        "summing a <= b over the range gives sum a <= sum b; strict < survives only over a provably non-empty range"
    }

    fn enumerate(&self, ast: &SpecAst) -> Vec<Match> {
        let existing: BTreeSet<&Expr> = ast.constraints().collect();
        top_level_constraints(ast)
            .filter_map(|(path, e)| {
                let (derived, a, b) = ImpliedSum::derived(ast, e)?;
                if existing.contains(&derived) {
                    return None;
                }
                Some(mk(self, path, &[("a", &a), ("b", &b), ("derived", &derived)]))
            })
            .collect()
    }

    fn rewrite(&self, ast: &SpecAst, m: &Match) -> SpecAst {
        let (si, ci) = constraint_pos(&m.path);
        let mut out = ast.clone();
        if let Statement::SuchThat(es) = &mut out.statements[si] {
            es.insert(ci + 1, m.bindings["derived"].clone());
        }
        out
    }
}

/// Literal cardinality interval of a relation domain, or `None` when some
/// attribute or component bound is not a literal.
fn card_interval(ast: &SpecAst, d: &Domain) -> Option<(Attrs, Vec<Domain>, i64, i64, i64)> {
    let Domain::Relation { attrs, components } = ast.resolve_domain(d)? else { return None };
    let mut total: i64 = 1;
    for c in components {
        let (lo, hi) = literal_bounds(ast, c)?;
        total = total.checked_mul((hi - lo + 1).max(0))?;
    }
    let lit = |a: &Option<Expr>| -> Option<Option<i64>> {
        match a {
            None => Some(None),
            Some(e) => e.as_int().map(Some),
        }
    };
    let (size, min, max) = (lit(&attrs.size)?, lit(&attrs.min_size)?, lit(&attrs.max_size)?);
    let (lo, hi) = match size {
        Some(s) => (s, s),
        None => (min.unwrap_or(0), max.unwrap_or(total)),
    };
    Some((attrs.clone(), components.clone(), total, lo, hi))
}

fn card_bound(e: &Expr) -> Option<(String, BinOp, i64)> {
    use BinOp::*;
    let Expr::Binary { op, lhs, rhs } = e else { return None };
    let card_ref = |x: &Expr| match x {
        Expr::Unary { op: UnaryOp::Card, arg } => match arg.as_ref() {
            Expr::Ref { name, kind: RefKind::DecisionVariable } => Some(name.clone()),
            _ => None,
        },
        _ => None,
    };
    if let (Some(s), Some(k)) = (card_ref(lhs), rhs.as_int()) {
        return matches!(op, Lt | Leq | Gt | Geq | Eq).then_some((s, *op, k));
    }
    if let (Some(k), Some(s)) = (lhs.as_int(), card_ref(rhs)) {
        let mirrored = match op {
            Lt => Gt,
            Leq => Geq,
            Gt => Lt,
            Geq => Leq,
            Eq => Eq,
            _ => return None,
        };
        return Some((s, mirrored, k));
    }
    None
}

pub struct CardAttr;

impl CardAttr {
    fn strengthened(ast: &SpecAst, e: &Expr) -> Option<(usize, Domain, String, i64)> {
        let (set, op, k) = card_bound(e)?;
        let (fi, d) = find_domain(ast, &set)?;
        let (attrs, components, total, lo, hi) = card_interval(ast, d)?;
        let (cl, ch) = match op {
            BinOp::Geq => (k, i64::MAX),
            BinOp::Gt => (k.checked_add(1)?, i64::MAX),
            BinOp::Leq => (i64::MIN, k),
            BinOp::Lt => (i64::MIN, k.checked_sub(1)?),
            _ => (k, k),
        };
        let (nlo, nhi) = (lo.max(cl).max(0), hi.min(ch).min(total));
        if nlo > nhi {
            return None;
        }
        let new_attrs = if op == BinOp::Eq || attrs.size.is_some() {
            if nlo != nhi {
                return None;
            }
            Attrs { size: Some(Expr::Int(nlo)), min_size: None, max_size: None }
        } else {
            Attrs {
                size: None,
                min_size: (nlo > 0 || attrs.min_size.is_some()).then_some(Expr::Int(nlo)),
                max_size: (nhi < total || attrs.max_size.is_some()).then_some(Expr::Int(nhi)),
            }
        };
        Some((fi, Domain::Relation { attrs: new_attrs, components }, set, k))
    }
}

impl RewriteRule for CardAttr {
    fn name(&self) -> &'static str {
        "card-attr"
    }

    fn kind(&self) -> RuleKind {
        RuleKind::DomainStrengthening
    }

    fn soundness_note(&self) -> &'static str {
        "a top-level bound on |S| by a literal is exactly the corresponding size attribute"
    }

    fn enumerate(&self, ast: &SpecAst) -> Vec<Match> {
        top_level_constraints(ast)
            .filter_map(|(path, e)| {
                let (_, _, set, k) = CardAttr::strengthened(ast, e)?;
                Some(mk(
                    self,
                    path,
                    &[("set", &Expr::reference(set, RefKind::DecisionVariable)), ("bound", &Expr::Int(k))],
                ))
            })
            .collect()
    }

    fn rewrite(&self, ast: &SpecAst, m: &Match) -> SpecAst {
        let (si, ci) = constraint_pos(&m.path);
        let Statement::SuchThat(es) = &ast.statements[si] else { unreachable!() };
        let (fi, domain, ..) = CardAttr::strengthened(ast, &es[ci]).expect("match is current");
        let mut out = ast.clone();
        if let Statement::Find { domain: d, .. } = &mut out.statements[fi] {
            *d = domain;
        }
        if let Statement::SuchThat(es) = &mut out.statements[si] {
            es.remove(ci);
            if es.is_empty() {
                out.statements.remove(si);
            }
        }
        out
    }
}

pub struct MemberMinSize;

impl MemberMinSize {
    fn strengthened(ast: &SpecAst, e: &Expr) -> Option<(usize, Domain, Expr, String)> {
        let Expr::Binary { op: BinOp::In, lhs, rhs } = e else { return None };
        let Expr::Ref { name, kind: RefKind::DecisionVariable } = rhs.as_ref() else { return None };
        let t: Vec<i64> = match lhs.as_ref() {
            Expr::Int(v) => vec![*v],
            Expr::Tuple(items) => items.iter().map(Expr::as_int).collect::<Option<_>>()?,
            _ => return None,
        };
        let (fi, d) = find_domain(ast, name)?;
        let (attrs, components, _, _, hi) = card_interval(ast, d)?;
        if attrs.size.is_some() || attrs.min_size.as_ref().and_then(Expr::as_int).is_some_and(|m| m >= 1) || hi < 1 {
            return None;
        }
        if t.len() != components.len() {
            return None;
        }
        for (x, c) in t.iter().zip(&components) {
            let (lo, hi) = literal_bounds(ast, c)?;
            if *x < lo || *x > hi {
                return None;
            }
        }
        let new_attrs = Attrs { min_size: Some(Expr::Int(1)), ..attrs };
        Some((fi, Domain::Relation { attrs: new_attrs, components }, (**lhs).clone(), name.clone()))
    }
}

impl RewriteRule for MemberMinSize {
    fn name(&self) -> &'static str {
        "member-minsize"
    }

    fn kind(&self) -> RuleKind {
        RuleKind::DomainStrengthening
    }

    fn soundness_note(&self) -> &'static str {
        "a top-level `t in S` with literal t forces S to be non-empty; the constraint itself is kept"
    }

    fn enumerate(&self, ast: &SpecAst) -> Vec<Match> {
        top_level_constraints(ast)
            .filter_map(|(path, e)| {
                let (_, _, t, set) = MemberMinSize::strengthened(ast, e)?;
                Some(mk(self, path, &[("tuple", &t), ("set", &Expr::reference(set, RefKind::DecisionVariable))]))
            })
            .collect()
    }

    fn rewrite(&self, ast: &SpecAst, m: &Match) -> SpecAst {
        let (si, ci) = constraint_pos(&m.path);
        let Statement::SuchThat(es) = &ast.statements[si] else { unreachable!() };
        let (fi, domain, ..) = MemberMinSize::strengthened(ast, &es[ci]).expect("match is current");
        let mut out = ast.clone();
        if let Statement::Find { domain: d, .. } = &mut out.statements[fi] {
            *d = domain;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{apply, enumerate_matches};

    fn once(rule: &dyn RewriteRule, src: &str) -> String {
        let ast = parse(src).unwrap();
        let ms = enumerate_matches(rule, &ast);
        assert_eq!(ms.len(), 1, "{ms:?}");
        pretty(&apply(rule, &ast, &ms[0]).unwrap(), false)
    }

    #[test]
    fn card_attr_min_size() {
        let out = once(&CardAttr, "find S : set of int(1..5) such that |S| >= 1");
        assert_eq!(out, "find S : set (minSize 1) of int(1..5)\n");
    }

    #[test]
    fn card_attr_forms() {
        let out = once(&CardAttr, "find S : set (minSize 2) of int(1..5) such that 4 > |S|, S subsetEq {1, 2, 3}");
        assert!(out.starts_with("find S : set (minSize 2, maxSize 3) of int(1..5)\n"), "{out}");
        let out = once(&CardAttr, "find R : relation of (int(1..2) * int(1..2)) such that |R| = 2, (1, 1) in R");
        assert!(out.starts_with("find R : relation (size 2) of"), "{out}");
        let ast = parse("find S : set (maxSize 1) of int(1..5) such that |S| >= 2").unwrap();
        assert!(enumerate_matches(&CardAttr, &ast).is_empty());
        let ast = parse("given k : int(0..3) find S : set of int(1..5) such that |S| >= k").unwrap();
        assert!(enumerate_matches(&CardAttr, &ast).is_empty());
    }

    #[test]
    fn member_min_size() {
        let out = once(&MemberMinSize, "find S : set of int(1..5) such that 3 in S");
        assert_eq!(out, "find S : set (minSize 1) of int(1..5)\nsuch that\n    3 in S\n");
        let ast = parse(&out).unwrap();
        assert!(enumerate_matches(&MemberMinSize, &ast).is_empty());
        let ast = parse("find S : set of int(1..5) such that 9 in S").unwrap();
        assert!(enumerate_matches(&MemberMinSize, &ast).is_empty());
    }

    #[test]
    fn implied_sum_guarded_strictness() {
        let src = "find S : set of int(1..4)\nfind y : int(0..9)\nsuch that forAll h in S . h < y";
        let out = once(&ImpliedSum, src);
        assert!(out.contains("(sum h in S . h) <= (sum h in S . y)"), "{out}");
        let src = "find S : set (minSize 1) of int(1..4)\nfind y : int(0..9)\nsuch that forAll h in S . h < y";
        let out = once(&ImpliedSum, src);
        assert!(out.contains("(sum h in S . h) < (sum h in S . y)"), "{out}");
        let ast = parse(&out).unwrap();
        assert!(enumerate_matches(&ImpliedSum, &ast).is_empty());
    }

    #[test]
    fn identity_patterns() {
        let out = once(&IdentityElim, "find x : int(0..3) such that x*1 = 2");
        assert!(out.contains("x = 2"));
        let out = once(&IdentityElim, "find b : bool such that !(!b)");
        assert!(out.contains("\n    b\n"));
    }
}
