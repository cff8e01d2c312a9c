//! Flattening a grounded specification into a finite-domain CSP.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::spec_lang::eval::{floor_div, floor_mod, range_values, Env, Val};
use crate::spec_lang::*;

pub const DEFAULT_TUPLE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CBin {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Neq,
    Lt,
    Leq,
    Gt,
    Geq,
    Iff,
}

impl CBin {
    pub fn is_comparison(self) -> bool {
        matches!(self, CBin::Eq | CBin::Neq | CBin::Lt | CBin::Leq | CBin::Gt | CBin::Geq)
    }
}

/// Ground expression over CSP variables. Booleans are 0/1 integers. An
/// undefined integer (division by zero) makes any comparison on it false.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CExpr {
    Const(i64),
    Undef,
    Var(usize),
    Neg(Box<CExpr>),
    Not(Box<CExpr>),
    Bin(CBin, Box<CExpr>, Box<CExpr>),
    And(Vec<CExpr>),
    Or(Vec<CExpr>),
    Sum(Vec<CExpr>),
    /// `body` when the incidence variable is 1, else 0.
    Guard(usize, Box<CExpr>),
}

impl CExpr {
    pub fn vars(&self, out: &mut Vec<usize>) {
        match self {
            CExpr::Const(_) | CExpr::Undef => {}
            CExpr::Var(v) => out.push(*v),
            CExpr::Neg(a) | CExpr::Not(a) => a.vars(out),
            CExpr::Bin(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
            CExpr::And(xs) | CExpr::Or(xs) | CExpr::Sum(xs) => xs.iter().for_each(|x| x.vars(out)),
            CExpr::Guard(g, a) => {
                out.push(*g);
                a.vars(out);
            }
        }
    }

    pub fn may_be_undefined(&self) -> bool {
        match self {
            CExpr::Undef => true,
            CExpr::Const(_) | CExpr::Var(_) => false,
            CExpr::Bin(op, a, b) if !op.is_comparison() && *op != CBin::Iff => {
                matches!(op, CBin::Div | CBin::Mod) || a.may_be_undefined() || b.may_be_undefined()
            }
            CExpr::Bin(..) | CExpr::Not(_) | CExpr::And(_) | CExpr::Or(_) => false,
            CExpr::Neg(a) | CExpr::Guard(_, a) => a.may_be_undefined(),
            CExpr::Sum(xs) => xs.iter().any(CExpr::may_be_undefined),
        }
    }

    fn not(a: CExpr) -> CExpr {
        match a {
            CExpr::Const(v) => CExpr::Const((v == 0) as i64),
            CExpr::Not(inner) => *inner,
            a => CExpr::Not(Box::new(a)),
        }
    }

    fn neg(a: CExpr) -> CExpr {
        match a {
            CExpr::Const(v) => v.checked_neg().map_or(CExpr::Undef, CExpr::Const),
            CExpr::Undef => CExpr::Undef,
            a => CExpr::Neg(Box::new(a)),
        }
    }

    fn and(xs: Vec<CExpr>) -> CExpr {
        let mut out = Vec::new();
        for x in xs {
            match x {
                CExpr::Const(0) => return CExpr::Const(0),
                CExpr::Const(_) => {}
                CExpr::And(inner) => out.extend(inner),
                x => out.push(x),
            }
        }
        match out.len() {
            0 => CExpr::Const(1),
            1 => out.pop().unwrap(),
            _ => CExpr::And(out),
        }
    }

    fn or(xs: Vec<CExpr>) -> CExpr {
        let mut out = Vec::new();
        for x in xs {
            match x {
                CExpr::Const(0) => {}
                CExpr::Const(_) => return CExpr::Const(1),
                CExpr::Or(inner) => out.extend(inner),
                x => out.push(x),
            }
        }
        match out.len() {
            0 => CExpr::Const(0),
            1 => out.pop().unwrap(),
            _ => CExpr::Or(out),
        }
    }

    fn sum(xs: Vec<CExpr>) -> CExpr {
        let mut konst: i64 = 0;
        let mut out = Vec::new();
        for x in xs {
            match x {
                CExpr::Const(v) => match konst.checked_add(v) {
                    Some(k) => konst = k,
                    None => return CExpr::Undef,
                },
                CExpr::Undef => return CExpr::Undef,
                CExpr::Sum(inner) => out.extend(inner),
                x => out.push(x),
            }
        }
        if konst != 0 || out.is_empty() {
            out.push(CExpr::Const(konst));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            CExpr::Sum(out)
        }
    }

    fn bin(op: CBin, a: CExpr, b: CExpr) -> CExpr {
        use CBin::*;
        if let (CExpr::Const(x), CExpr::Const(y)) = (&a, &b) {
            return CExpr::Const(match op {
                Add => return x.checked_add(*y).map_or(CExpr::Undef, CExpr::Const),
                Sub => return x.checked_sub(*y).map_or(CExpr::Undef, CExpr::Const),
                Mul => return x.checked_mul(*y).map_or(CExpr::Undef, CExpr::Const),
                Div => return floor_div(*x, *y).map_or(CExpr::Undef, CExpr::Const),
                Mod => return floor_mod(*x, *y).map_or(CExpr::Undef, CExpr::Const),
                Eq => (x == y) as i64,
                Neq => (x != y) as i64,
                Lt => (x < y) as i64,
                Leq => (x <= y) as i64,
                Gt => (x > y) as i64,
                Geq => (x >= y) as i64,
                Iff => ((*x != 0) == (*y != 0)) as i64,
            });
        }
        let undef = matches!(a, CExpr::Undef) || matches!(b, CExpr::Undef);
        if undef && op != Iff {
            return if op.is_comparison() { CExpr::Const(0) } else { CExpr::Undef };
        }
        match (op, &a, &b) {
            (Add, CExpr::Const(0), _) => return b,
            (Add | Sub, _, CExpr::Const(0)) => return a,
            (Mul, CExpr::Const(1), _) => return b,
            (Mul, _, CExpr::Const(1)) => return a,
            (Mul, CExpr::Const(0), x) | (Mul, x, CExpr::Const(0)) if !x.may_be_undefined() => return CExpr::Const(0),
            _ => {}
        }
        CExpr::Bin(op, Box::new(a), Box::new(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspVar {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FindLayout {
    Int(usize),
    Bool(usize),
    /// Candidate tuples in lexicographic order; tuple `i` is variable `first + i`.
    Rel {
        first: usize,
        tuples: Vec<Vec<i64>>,
    },
}

pub type Solution = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundCsp {
    pub vars: Vec<CspVar>,
    pub finds: Vec<(String, FindLayout)>,
    pub constraints: Vec<CExpr>,
    pub attr_constraints: Vec<CExpr>,
    pub objective: Option<(Direction, CExpr)>,
}

impl GroundCsp {
    pub fn all_constraints(&self) -> impl Iterator<Item = &CExpr> {
        self.constraints.iter().chain(&self.attr_constraints)
    }

    /// Number of complete assignments, saturating.
    pub fn assignment_count(&self) -> u128 {
        self.vars.iter().fold(1u128, |acc, v| acc.saturating_mul((v.hi - v.lo + 1).max(0) as u128))
    }

    pub fn decode(&self, values: &[i64]) -> Solution {
        self.finds
            .iter()
            .map(|(name, layout)| {
                let v = match layout {
                    FindLayout::Int(i) => Value::Int(values[*i]),
                    FindLayout::Bool(i) => Value::Bool(values[*i] != 0),
                    FindLayout::Rel { first, tuples } => Value::Rel(
                        tuples
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| values[first + i] != 0)
                            .map(|(_, t)| t.clone())
                            .collect(),
                    ),
                };
                (name.clone(), v)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlattenError {
    #[error("`{name}` has {count} candidate tuples, above the cap of {cap}")]
    DomainTooLarge { name: String, count: u128, cap: u64 },
    #[error("specification is not grounded: {0}")]
    NotGround(String),
    #[error("cannot flatten `{0}`")]
    Unsupported(String),
    #[error("quantifier range `{0}` is undefined")]
    BadRange(String),
}

struct Flattener {
    csp: GroundCsp,
    by_name: HashMap<String, usize>,
    lookup: HashMap<(usize, Vec<i64>), usize>,
    env: Env,
}

fn literal_bounds(d: &Domain) -> Option<(i64, i64)> {
    match d {
        Domain::Int { lo, hi: Some(hi) } => Some((lo.as_int()?, hi.as_int()?)),
        _ => None,
    }
}

fn lit_attr(e: &Option<Expr>, name: &str) -> Result<Option<i64>, FlattenError> {
    match e {
        None => Ok(None),
        Some(Expr::Int(v)) => Ok(Some(*v)),
        Some(other) => Err(FlattenError::NotGround(format!("attribute `{other}` of `{name}`"))),
    }
}

/// Flattens with the default candidate-tuple cap.
pub fn flatten(ast: &SpecAst) -> Result<GroundCsp, FlattenError> {
    flatten_with_cap(ast, DEFAULT_TUPLE_CAP)
}

pub fn flatten_with_cap(ast: &SpecAst, cap: u64) -> Result<GroundCsp, FlattenError> {
    let mut f = Flattener {
        csp: GroundCsp {
            vars: Vec::new(),
            finds: Vec::new(),
            constraints: Vec::new(),
            attr_constraints: Vec::new(),
            objective: None,
        },
        by_name: HashMap::new(),
        lookup: HashMap::new(),
        env: Env::new(),
    };
    for s in &ast.statements {
        match s {
            Statement::Find { name, domain } => f.declare(name, domain, cap)?,
            Statement::SuchThat(es) => {
                for e in es {
                    let c = f.bool_expr(e)?;
                    match c {
                        CExpr::Const(1) => {}
                        CExpr::And(parts) => f.csp.constraints.extend(parts),
                        c => f.csp.constraints.push(c),
                    }
                }
            }
            Statement::Objective { direction, expr } => {
                let obj = f.int_expr(expr)?;
                f.csp.objective = Some((*direction, obj));
            }
            other => return Err(FlattenError::NotGround(pretty(&SpecAst { statements: vec![other.clone()] }, false))),
        }
    }
    Ok(f.csp)
}

impl Flattener {
    fn declare(&mut self, name: &str, domain: &Domain, cap: u64) -> Result<(), FlattenError> {
        let idx = self.csp.finds.len();
        self.by_name.insert(name.to_string(), idx);
        let layout = match domain {
            Domain::Bool => {
                self.csp.vars.push(CspVar { name: name.to_string(), lo: 0, hi: 1 });
                FindLayout::Bool(self.csp.vars.len() - 1)
            }
            Domain::Int { .. } => {
                let (lo, hi) =
                    literal_bounds(domain).ok_or_else(|| FlattenError::NotGround(format!("domain of `{name}`")))?;
                self.csp.vars.push(CspVar { name: name.to_string(), lo, hi });
                FindLayout::Int(self.csp.vars.len() - 1)
            }
            Domain::Relation { attrs, components } => {
                let mut ranges = Vec::new();
                let mut count: u128 = 1;
                for c in components {
                    let (lo, hi) =
                        literal_bounds(c).ok_or_else(|| FlattenError::NotGround(format!("domain of `{name}`")))?;
                    count = count.saturating_mul((hi - lo + 1).max(0) as u128);
                    ranges.push((lo, hi));
                }
                if count > cap as u128 {
                    return Err(FlattenError::DomainTooLarge { name: name.to_string(), count, cap });
                }
                let mut tuples: Vec<Vec<i64>> = vec![Vec::new()];
                for &(lo, hi) in &ranges {
                    tuples = tuples
                        .into_iter()
                        .flat_map(|t| (lo..=hi).map(move |v| [t.clone(), vec![v]].concat()))
                        .collect();
                }
                let first = self.csp.vars.len();
                for (i, t) in tuples.iter().enumerate() {
                    let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                    self.csp.vars.push(CspVar { name: format!("{name}[{}]", parts.join(",")), lo: 0, hi: 1 });
                    self.lookup.insert((idx, t.clone()), first + i);
                }
                let total = CExpr::sum((first..first + tuples.len()).map(CExpr::Var).collect());
                let bounds = [
                    (lit_attr(&attrs.size, name)?, CBin::Eq),
                    (lit_attr(&attrs.min_size, name)?, CBin::Geq),
                    (lit_attr(&attrs.max_size, name)?, CBin::Leq),
                ];
                for (k, op) in bounds {
                    if let Some(k) = k {
                        let c = CExpr::bin(op, total.clone(), CExpr::Const(k));
                        if c != CExpr::Const(1) {
                            self.csp.attr_constraints.push(c);
                        }
                    }
                }
                FindLayout::Rel { first, tuples }
            }
            Domain::Ref(n) => return Err(FlattenError::NotGround(format!("domain alias `{n}`"))),
        };
        self.csp.finds.push((name.to_string(), layout));
        Ok(())
    }

    fn bool_expr(&mut self, e: &Expr) -> Result<CExpr, FlattenError> {
        self.expr(e)
    }

    fn int_expr(&mut self, e: &Expr) -> Result<CExpr, FlattenError> {
        self.expr(e)
    }

    fn relation_of(&self, e: &Expr) -> Option<usize> {
        match e {
            Expr::Ref { name, kind: RefKind::DecisionVariable } => {
                let i = *self.by_name.get(name)?;
                matches!(self.csp.finds[i].1, FindLayout::Rel { .. }).then_some(i)
            }
            _ => None,
        }
    }

    /// Membership of a (possibly non-constant) tuple in a relation operand.
    fn member(&mut self, items: Vec<CExpr>, set: &Expr) -> Result<CExpr, FlattenError> {
        let consts: Option<Vec<i64>> =
            items.iter().map(|c| if let CExpr::Const(v) = c { Some(*v) } else { None }).collect();
        if let Some(fi) = self.relation_of(set) {
            if let Some(t) = consts {
                return Ok(self.lookup.get(&(fi, t)).map_or(CExpr::Const(0), |&v| CExpr::Var(v)));
            }
            let FindLayout::Rel { first, tuples } = &self.csp.finds[fi].1 else { unreachable!() };
            let (first, tuples) = (*first, tuples.clone());
            let options = tuples
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let mut parts: Vec<CExpr> =
                        items.iter().zip(t).map(|(c, v)| CExpr::bin(CBin::Eq, c.clone(), CExpr::Const(*v))).collect();
                    parts.push(CExpr::Var(first + i));
                    CExpr::and(parts)
                })
                .collect();
            return Ok(CExpr::or(options));
        }
        if let Expr::SetLit(s) = set {
            if let Some(t) = consts {
                return Ok(CExpr::Const(s.contains(&t) as i64));
            }
            let options = s
                .iter()
                .map(|t| {
                    CExpr::and(
                        items.iter().zip(t).map(|(c, v)| CExpr::bin(CBin::Eq, c.clone(), CExpr::Const(*v))).collect(),
                    )
                })
                .collect();
            return Ok(CExpr::or(options));
        }
        Err(FlattenError::Unsupported(set.to_string()))
    }

    /// Candidate tuples of a relation operand with their membership conditions.
    fn elements(&self, e: &Expr) -> Result<Vec<(Vec<i64>, CExpr)>, FlattenError> {
        if let Some(fi) = self.relation_of(e) {
            let FindLayout::Rel { first, tuples } = &self.csp.finds[fi].1 else { unreachable!() };
            return Ok(tuples.iter().enumerate().map(|(i, t)| (t.clone(), CExpr::Var(first + i))).collect());
        }
        match e {
            Expr::SetLit(s) => Ok(s.iter().map(|t| (t.clone(), CExpr::Const(1))).collect()),
            _ => Err(FlattenError::Unsupported(e.to_string())),
        }
    }

    fn is_relation(&self, e: &Expr) -> bool {
        matches!(e, Expr::SetLit(_)) || self.relation_of(e).is_some()
    }

    fn subset(&mut self, a: &Expr, b: &Expr) -> Result<CExpr, FlattenError> {
        let mut parts = Vec::new();
        for (t, cond) in self.elements(a)? {
            let inside = self.member(t.into_iter().map(CExpr::Const).collect(), b)?;
            parts.push(CExpr::or(vec![CExpr::not(cond), inside]));
        }
        Ok(CExpr::and(parts))
    }

    fn tuple_items(&mut self, e: &Expr) -> Result<Vec<CExpr>, FlattenError> {
        match e {
            Expr::Tuple(items) => items.iter().map(|i| self.expr(i)).collect(),
            e => Ok(vec![self.expr(e)?]),
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<CExpr, FlattenError> {
        Ok(match e {
            Expr::Int(v) => CExpr::Const(*v),
            Expr::Bool(b) => CExpr::Const(*b as i64),
            Expr::Ref { name, kind: RefKind::DecisionVariable } => {
                let fi = *self.by_name.get(name).ok_or_else(|| FlattenError::NotGround(name.clone()))?;
                match &self.csp.finds[fi].1 {
                    FindLayout::Int(v) | FindLayout::Bool(v) => CExpr::Var(*v),
                    FindLayout::Rel { .. } => return Err(FlattenError::Unsupported(name.clone())),
                }
            }
            Expr::Ref { name, .. } => match self.env.binder(name) {
                Some(Val::Int(v)) => CExpr::Const(*v),
                Some(Val::Bool(b)) => CExpr::Const(*b as i64),
                _ => return Err(FlattenError::NotGround(name.clone())),
            },
            Expr::Unary { op, arg } => match op {
                UnaryOp::Neg => CExpr::neg(self.expr(arg)?),
                UnaryOp::Not => CExpr::not(self.expr(arg)?),
                UnaryOp::ToInt => self.expr(arg)?,
                UnaryOp::Card => CExpr::sum(self.elements(arg)?.into_iter().map(|(_, c)| c).collect()),
            },
            Expr::Binary { op, lhs, rhs } => {
                use BinOp::*;
                match op {
                    And => CExpr::and(vec![self.expr(lhs)?, self.expr(rhs)?]),
                    Or => CExpr::or(vec![self.expr(lhs)?, self.expr(rhs)?]),
                    Implies => CExpr::or(vec![CExpr::not(self.expr(lhs)?), self.expr(rhs)?]),
                    In => {
                        let items = self.tuple_items(lhs)?;
                        self.member(items, rhs)?
                    }
                    SubsetEq => self.subset(lhs, rhs)?,
                    Eq | Neq if self.is_relation(lhs) => {
                        let both = CExpr::and(vec![self.subset(lhs, rhs)?, self.subset(rhs, lhs)?]);
                        if *op == Eq {
                            both
                        } else {
                            CExpr::not(both)
                        }
                    }
                    Eq | Neq if matches!(lhs.as_ref(), Expr::Tuple(_)) => {
                        let (a, b) = (self.tuple_items(lhs)?, self.tuple_items(rhs)?);
                        let both = CExpr::and(a.into_iter().zip(b).map(|(x, y)| CExpr::bin(CBin::Eq, x, y)).collect());
                        if *op == Eq {
                            both
                        } else {
                            CExpr::not(both)
                        }
                    }
                    _ => {
                        let cop = match op {
                            Add => CBin::Add,
                            Sub => CBin::Sub,
                            Mul => CBin::Mul,
                            Div => CBin::Div,
                            Mod => CBin::Mod,
                            Eq => CBin::Eq,
                            Neq => CBin::Neq,
                            Lt => CBin::Lt,
                            Leq => CBin::Leq,
                            Gt => CBin::Gt,
                            Geq => CBin::Geq,
                            Iff => CBin::Iff,
                            _ => unreachable!(),
                        };
                        CExpr::bin(cop, self.expr(lhs)?, self.expr(rhs)?)
                    }
                }
            }
            Expr::Tuple(_) | Expr::SetLit(_) => return Err(FlattenError::Unsupported(e.to_string())),
            Expr::Quant { kind, var, range, body } => {
                let terms: Vec<(Val, CExpr)> = match range.as_ref() {
                    QuantRange::Set(s) => {
                        self.elements(s)?.into_iter().map(|(t, cond)| (Val::Int(t[0]), cond)).collect()
                    }
                    QuantRange::Domain(_) => range_values(range, &mut self.env)
                        .map_err(|_| FlattenError::BadRange(e.to_string()))?
                        .into_iter()
                        .map(|v| (v, CExpr::Const(1)))
                        .collect(),
                };
                let mut parts = Vec::new();
                for (v, cond) in terms {
                    self.env.push_binder(var, v);
                    let b = self.expr(body);
                    self.env.pop_binder();
                    let b = b?;
                    parts.push(match (kind, cond) {
                        (_, CExpr::Const(1)) => b,
                        (QuantKind::ForAll, c) => CExpr::or(vec![CExpr::not(c), b]),
                        (QuantKind::Exists, c) => CExpr::and(vec![c, b]),
                        (QuantKind::Sum, CExpr::Var(g)) => CExpr::Guard(g, Box::new(b)),
                        (QuantKind::Sum, _) => unreachable!("guards are constants or variables"),
                    });
                }
                match kind {
                    QuantKind::ForAll => CExpr::and(parts),
                    QuantKind::Exists => CExpr::or(parts),
                    QuantKind::Sum => CExpr::sum(parts),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(src: &str) -> GroundCsp {
        flatten(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn folding_folds() {
        let csp = flat("find x : int(0..100)\nsuch that 1*(2+3)*4 = x");
        assert_eq!(csp.vars, vec![CspVar { name: "x".into(), lo: 0, hi: 100 }]);
        assert_eq!(csp.constraints, vec![CExpr::Bin(CBin::Eq, Box::new(CExpr::Const(20)), Box::new(CExpr::Var(0)))]);
    }

    #[test]
    fn min_size_lowering() {
        let csp = flat("find S : set (minSize 1) of int(1..3)");
        assert_eq!(csp.vars.len(), 3);
        assert_eq!(csp.vars[1].name, "S[2]");
        let sum = CExpr::Sum((0..3).map(CExpr::Var).collect());
        assert_eq!(csp.attr_constraints, vec![CExpr::Bin(CBin::Geq, Box::new(sum), Box::new(CExpr::Const(1)))]);
    }

    #[test]
    fn guarded_forall() {
        let csp = flat("find S : set of int(1..3) such that forAll x in S . x >= 2");
        // b1 -> false leaves !b1; the other two guards are trivially satisfied.
        assert_eq!(csp.constraints, vec![CExpr::Not(Box::new(CExpr::Var(0)))]);
    }

    #[test]
    fn cap_enforced() {
        let ast = parse("find R : relation of (int(1..100) * int(1..100))").unwrap();
        assert!(matches!(flatten_with_cap(&ast, 1000), Err(FlattenError::DomainTooLarge { .. })));
    }

    #[test]
    fn constant_division_by_zero_is_false() {
        let csp = flat("find x : int(0..3) such that x + 1/0 = 2 \\/ x = 1");
        assert_eq!(csp.constraints, vec![CExpr::Bin(CBin::Eq, Box::new(CExpr::Var(0)), Box::new(CExpr::Const(1)))]);
    }
}
