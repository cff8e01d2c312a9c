//! Name resolution and type checking over a whole specification.

use std::collections::HashMap;

use super::ast::*;
use super::{Loc, SpecError};

/// Static type of an expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ty {
    Int,
    Bool,
    Tuple(usize),
    /// Relation of the given arity; `None` for the empty literal `{}`.
    Rel(Option<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DomInfo {
    Bool,
    Int { bounded: bool },
    Rel(usize),
}

#[derive(Debug, Clone, Copy)]
enum Global {
    Param(Ty),
    Constant,
    Alias(DomInfo),
    Decision(Ty),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DomPos {
    Given,
    Find,
    Alias,
    Quant,
    Component,
}

struct Checker<'a> {
    globals: HashMap<&'a str, Global>,
    binders: Vec<(&'a str, Ty)>,
    stmt: usize,
    decisions_allowed: bool,
}

/// Verifies that every reference resolves, every expression is well-typed,
/// and at most one objective is present.
pub fn check(ast: &SpecAst) -> Result<(), SpecError> {
    let mut c = Checker { globals: HashMap::new(), binders: Vec::new(), stmt: 0, decisions_allowed: false };
    let mut objectives = 0;
    for (i, s) in ast.statements.iter().enumerate() {
        c.stmt = i;
        match s {
            Statement::Given { names, domain } => {
                let ty = match c.domain(domain, DomPos::Given)? {
                    DomInfo::Int { .. } => Ty::Int,
                    DomInfo::Rel(k) => Ty::Rel(Some(k)),
                    DomInfo::Bool => return Err(c.err("given parameters must have int or relation domains")),
                };
                for n in names {
                    c.declare(n, Global::Param(ty))?;
                }
            }
            Statement::LettingExpr { name, value } => {
                c.decisions_allowed = false;
                c.expect(value, Ty::Int)?;
                c.declare(name, Global::Constant)?;
            }
            Statement::LettingDomain { name, domain } => {
                let info = c.domain(domain, DomPos::Alias)?;
                c.declare(name, Global::Alias(info))?;
            }
            Statement::Where(e) => {
                c.decisions_allowed = false;
                c.expect(e, Ty::Bool)?;
            }
            Statement::Find { name, domain } => {
                let ty = match c.domain(domain, DomPos::Find)? {
                    DomInfo::Bool => Ty::Bool,
                    DomInfo::Int { .. } => Ty::Int,
                    DomInfo::Rel(k) => Ty::Rel(Some(k)),
                };
                c.declare(name, Global::Decision(ty))?;
            }
            Statement::SuchThat(es) => {
                if es.is_empty() {
                    return Err(c.err("`such that` needs at least one constraint"));
                }
                c.decisions_allowed = true;
                for e in es {
                    c.expect(e, Ty::Bool)?;
                }
            }
            Statement::Objective { expr, .. } => {
                objectives += 1;
                if objectives > 1 {
                    return Err(c.err("at most one objective is allowed"));
                }
                c.decisions_allowed = true;
                c.expect(expr, Ty::Int)?;
            }
        }
    }
    Ok(())
}

impl<'a> Checker<'a> {
    fn err(&self, msg: impl Into<String>) -> SpecError {
        SpecError::Type { stmt: Some(self.stmt), line: None, msg: msg.into() }
    }

    fn declare(&mut self, name: &'a str, g: Global) -> Result<(), SpecError> {
        if self.globals.insert(name, g).is_some() {
            return Err(SpecError::Duplicate { name: name.to_string(), loc: Loc::unknown() });
        }
        Ok(())
    }

    fn domain(&mut self, d: &'a Domain, pos: DomPos) -> Result<DomInfo, SpecError> {
        // Domain bounds are parameter expressions; quantifier ranges may also
        // mention enclosing binders.
        let saved = self.decisions_allowed;
        self.decisions_allowed = false;
        let binders_visible = pos == DomPos::Quant || pos == DomPos::Component;
        let hidden = if binders_visible { Vec::new() } else { std::mem::take(&mut self.binders) };
        let r = self.domain_inner(d, pos);
        if !binders_visible {
            self.binders = hidden;
        }
        self.decisions_allowed = saved;
        r
    }

    fn domain_inner(&mut self, d: &'a Domain, pos: DomPos) -> Result<DomInfo, SpecError> {
        let info = match d {
            Domain::Bool => DomInfo::Bool,
            Domain::Int { lo, hi } => {
                self.expect(lo, Ty::Int)?;
                if let Some(hi) = hi {
                    self.expect(hi, Ty::Int)?;
                }
                DomInfo::Int { bounded: hi.is_some() }
            }
            Domain::Relation { attrs, components } => {
                if pos == DomPos::Component {
                    return Err(self.err("nested relation domains are not supported"));
                }
                if components.is_empty() {
                    return Err(self.err("relation domain needs at least one component"));
                }
                if attrs.size.is_some() && (attrs.min_size.is_some() || attrs.max_size.is_some()) {
                    return Err(self.err("`size` cannot be combined with `minSize` or `maxSize`"));
                }
                for e in [&attrs.size, &attrs.min_size, &attrs.max_size].into_iter().flatten() {
                    self.expect(e, Ty::Int)?;
                }
                for comp in components {
                    self.domain_inner(comp, DomPos::Component)?;
                }
                DomInfo::Rel(components.len())
            }
            Domain::Ref(name) => match self.globals.get(name.as_str()) {
                Some(Global::Alias(info)) => *info,
                Some(_) => return Err(self.err(format!("`{name}` is not a domain"))),
                None => return Err(SpecError::Unresolved { name: name.clone(), loc: Loc::unknown() }),
            },
        };
        match (pos, info) {
            (DomPos::Component, DomInfo::Rel(_)) => Err(self.err("nested relation domains are not supported")),
            (DomPos::Component, DomInfo::Bool) => Err(self.err("relation components must be integer domains")),
            (DomPos::Quant, DomInfo::Rel(_)) => {
                Err(self.err("quantifier domains must be int or bool; use `x in S` for sets"))
            }
            (DomPos::Find | DomPos::Quant | DomPos::Component, DomInfo::Int { bounded: false }) => {
                Err(self.err("open-ended int domains are only allowed for parameters"))
            }
            _ => Ok(info),
        }
    }

    fn expect(&mut self, e: &'a Expr, want: Ty) -> Result<(), SpecError> {
        let got = self.ty(e)?;
        if got != want {
            return Err(self.err(format!(
                "expected {} but `{}` has type {}",
                ty_name(want),
                super::pretty::expr_to_string(e),
                ty_name(got)
            )));
        }
        Ok(())
    }

    fn ty(&mut self, e: &'a Expr) -> Result<Ty, SpecError> {
        Ok(match e {
            Expr::Int(_) => Ty::Int,
            Expr::Bool(_) => Ty::Bool,
            Expr::Ref { name, kind } => self.reference(name, *kind)?,
            Expr::Unary { op, arg } => match op {
                UnaryOp::Neg => {
                    self.expect(arg, Ty::Int)?;
                    Ty::Int
                }
                UnaryOp::Not => {
                    self.expect(arg, Ty::Bool)?;
                    Ty::Bool
                }
                UnaryOp::ToInt => {
                    self.expect(arg, Ty::Bool)?;
                    Ty::Int
                }
                UnaryOp::Card => match self.ty(arg)? {
                    Ty::Rel(_) => Ty::Int,
                    other => {
                        return Err(self.err(format!("cardinality needs a set or relation, found {}", ty_name(other))))
                    }
                },
            },
            Expr::Binary { op, lhs, rhs } => self.binary(*op, lhs, rhs)?,
            Expr::Tuple(items) => {
                if items.len() < 2 {
                    return Err(self.err("tuples need at least two components"));
                }
                for it in items {
                    self.expect(it, Ty::Int)?;
                }
                Ty::Tuple(items.len())
            }
            Expr::SetLit(elems) => {
                let mut arity = None;
                for el in elems {
                    if el.is_empty() || *arity.get_or_insert(el.len()) != el.len() {
                        return Err(self.err("set literal elements must share one arity"));
                    }
                }
                Ty::Rel(arity)
            }
            Expr::Quant { kind, var, range, body } => {
                let binder_ty = match range.as_ref() {
                    QuantRange::Domain(d) => match self.domain(d, DomPos::Quant)? {
                        DomInfo::Bool => Ty::Bool,
                        _ => Ty::Int,
                    },
                    QuantRange::Set(s) => match self.ty(s)? {
                        Ty::Rel(Some(1)) | Ty::Rel(None) => Ty::Int,
                        Ty::Rel(Some(_)) => {
                            return Err(self.err("quantification over relations of arity above one is not supported"))
                        }
                        other => {
                            return Err(self.err(format!("quantifier range must be a set, found {}", ty_name(other))))
                        }
                    },
                };
                self.binders.push((var.as_str(), binder_ty));
                let want = if *kind == QuantKind::Sum { Ty::Int } else { Ty::Bool };
                let r = self.expect(body, want);
                self.binders.pop();
                r?;
                want
            }
        })
    }

    fn reference(&self, name: &str, kind: RefKind) -> Result<Ty, SpecError> {
        if kind == RefKind::QuantifiedVariable {
            return self
                .binders
                .iter()
                .rev()
                .find(|(n, _)| *n == name)
                .map(|(_, t)| *t)
                .ok_or_else(|| SpecError::Unresolved { name: name.to_string(), loc: Loc::unknown() });
        }
        if self.binders.iter().any(|(n, _)| *n == name) {
            return Err(self.err(format!("`{name}` is shadowed by a quantifier binder")));
        }
        let g = self
            .globals
            .get(name)
            .ok_or_else(|| SpecError::Unresolved { name: name.to_string(), loc: Loc::unknown() })?;
        match (kind, g) {
            (RefKind::Parameter, Global::Param(t)) => Ok(*t),
            (RefKind::Constant, Global::Constant) => Ok(Ty::Int),
            (RefKind::DecisionVariable, Global::Decision(t)) => {
                if self.decisions_allowed {
                    Ok(*t)
                } else {
                    Err(self.err(format!("decision variable `{name}` is not allowed here")))
                }
            }
            _ => Err(self.err(format!("`{name}` does not name a {kind:?}"))),
        }
    }

    fn binary(&mut self, op: BinOp, lhs: &'a Expr, rhs: &'a Expr) -> Result<Ty, SpecError> {
        use BinOp::*;
        match op {
            Add | Sub | Mul | Div | Mod => {
                self.expect(lhs, Ty::Int)?;
                self.expect(rhs, Ty::Int)?;
                Ok(Ty::Int)
            }
            Lt | Leq | Gt | Geq => {
                self.expect(lhs, Ty::Int)?;
                self.expect(rhs, Ty::Int)?;
                Ok(Ty::Bool)
            }
            Eq | Neq => {
                let l = self.ty(lhs)?;
                match l {
                    Ty::Int | Ty::Bool => self.expect(rhs, l)?,
                    other => return Err(self.err(format!("cannot compare values of type {}", ty_name(other)))),
                }
                Ok(Ty::Bool)
            }
            And | Or | Implies | Iff => {
                self.expect(lhs, Ty::Bool)?;
                self.expect(rhs, Ty::Bool)?;
                Ok(Ty::Bool)
            }
            In => {
                let elem = match self.ty(lhs)? {
                    Ty::Int => 1,
                    Ty::Tuple(k) => k,
                    other => return Err(self.err(format!("`in` needs an int or tuple, found {}", ty_name(other)))),
                };
                match self.ty(rhs)? {
                    Ty::Rel(None) => Ok(Ty::Bool),
                    Ty::Rel(Some(k)) if k == elem => Ok(Ty::Bool),
                    other => Err(self.err(format!("`in` needs a relation of arity {elem}, found {}", ty_name(other)))),
                }
            }
            SubsetEq => match (self.ty(lhs)?, self.ty(rhs)?) {
                (Ty::Rel(a), Ty::Rel(b)) if a.is_none() || b.is_none() || a == b => Ok(Ty::Bool),
                (a, b) => Err(self.err(format!(
                    "`subsetEq` needs relations of equal arity, found {} and {}",
                    ty_name(a),
                    ty_name(b)
                ))),
            },
        }
    }
}

fn ty_name(t: Ty) -> String {
    match t {
        Ty::Int => "int".into(),
        Ty::Bool => "bool".into(),
        Ty::Tuple(k) => format!("tuple of {k}"),
        Ty::Rel(Some(1)) => "set".into(),
        Ty::Rel(Some(k)) => format!("relation of arity {k}"),
        Ty::Rel(None) => "empty set".into(),
    }
}

#[cfg(test)]
mod tests {
    use crate::spec_lang::{parse, SpecError};

    fn type_err(src: &str) -> String {
        match parse(src) {
            Err(SpecError::Type { msg, .. }) => msg,
            other => panic!("expected type error for {src:?}, got {other:?}"),
        }
    }

    #[test]
    fn cardinality_only_on_relations() {
        assert!(type_err("find x : int(1..3) such that |x| = 1").contains("cardinality"));
        assert!(parse("find s : set of int(1..3) such that |s| = 1").is_ok());
    }

    #[test]
    fn membership_arity() {
        assert!(parse("find r : relation of (int(1..2) * int(1..2)) such that (1, 2) in r").is_ok());
        type_err("find r : relation of (int(1..2) * int(1..2)) such that 1 in r");
    }

    #[test]
    fn single_objective() {
        type_err("find x : int(1..3) minimising x maximising x");
    }

    #[test]
    fn decision_vars_not_in_domains() {
        type_err("find x : int(1..3) find y : int(1..x)");
    }

    #[test]
    fn given_may_be_open_but_find_may_not() {
        assert!(parse("given n : int(1..) find x : int(1..n)").is_ok());
        type_err("find x : int(1..)");
    }

    #[test]
    fn size_excludes_bounds() {
        type_err("find s : set (size 1, minSize 1) of int(1..3)");
    }

    #[test]
    fn where_cannot_mention_finds() {
        type_err("given n : int(1..3) find x : int(1..3) where x > n");
    }

    #[test]
    fn binder_shadows_global() {
        assert!(parse("find x : int(1..3) such that forAll x : int(1..2) . x > 0").is_ok());
    }
}
