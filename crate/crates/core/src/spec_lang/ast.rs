//! Typed syntax tree for Emini specifications.

use std::collections::BTreeSet;
use std::fmt;

/// A whole specification: an ordered list of statements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SpecAst {
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Statement {
    Given { names: Vec<String>, domain: Domain },
    LettingExpr { name: String, value: Expr },
    LettingDomain { name: String, domain: Domain },
    Where(Expr),
    Find { name: String, domain: Domain },
    SuchThat(Vec<Expr>),
    Objective { direction: Direction, expr: Expr },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Minimising,
    Maximising,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Minimising => "minimising",
            Direction::Maximising => "maximising",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Bool,
    /// `int(lo..hi)`; `hi` is absent for the open-ended `int(lo..)`.
    Int {
        lo: Box<Expr>,
        hi: Option<Box<Expr>>,
    },
    /// A relation over integer components. Arity one is written `set of D`.
    Relation {
        attrs: Attrs,
        components: Vec<Domain>,
    },
    /// Reference to a `letting X be domain ...` alias.
    Ref(String),
}

impl Domain {
    pub fn int(lo: i64, hi: i64) -> Domain {
        Domain::Int { lo: Box::new(Expr::Int(lo)), hi: Some(Box::new(Expr::Int(hi))) }
    }

    pub fn set_of(attrs: Attrs, component: Domain) -> Domain {
        Domain::Relation { attrs, components: vec![component] }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Attrs {
    pub size: Option<Expr>,
    pub min_size: Option<Expr>,
    pub max_size: Option<Expr>,
}

impl Attrs {
    pub fn is_empty(&self) -> bool {
        self.size.is_none() && self.min_size.is_none() && self.max_size.is_none()
    }
}

/// What a name reference resolved to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RefKind {
    DecisionVariable,
    Parameter,
    Constant,
    QuantifiedVariable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryOp {
    Neg,
    Not,
    ToInt,
    Card,
}

impl UnaryOp {
    pub fn token(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Not => "!",
            UnaryOp::ToInt => "toInt",
            UnaryOp::Card => "||",
        }
    }

    pub fn from_token(s: &str) -> Option<UnaryOp> {
        Some(match s {
            "-" => UnaryOp::Neg,
            "!" => UnaryOp::Not,
            "toInt" => UnaryOp::ToInt,
            "||" => UnaryOp::Card,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
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
    And,
    Or,
    Implies,
    Iff,
    In,
    SubsetEq,
}

/// Binding strength, higher binds tighter.
pub const PREC_IFF: u8 = 1;
pub const PREC_IMPLIES: u8 = 2;
pub const PREC_OR: u8 = 3;
pub const PREC_AND: u8 = 4;
pub const PREC_CMP: u8 = 5;
pub const PREC_ADD: u8 = 6;
pub const PREC_MUL: u8 = 7;
pub const PREC_UNARY: u8 = 8;
pub const PREC_ATOM: u8 = 9;

impl BinOp {
    pub const ALL: [BinOp; 17] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Mod,
        BinOp::Eq,
        BinOp::Neq,
        BinOp::Lt,
        BinOp::Leq,
        BinOp::Gt,
        BinOp::Geq,
        BinOp::And,
        BinOp::Or,
        BinOp::Implies,
        BinOp::Iff,
        BinOp::In,
        BinOp::SubsetEq,
    ];

    pub fn token(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "=",
            BinOp::Neq => "!=",
            BinOp::Lt => "<",
            BinOp::Leq => "<=",
            BinOp::Gt => ">",
            BinOp::Geq => ">=",
            BinOp::And => "/\\",
            BinOp::Or => "\\/",
            BinOp::Implies => "->",
            BinOp::Iff => "<->",
            BinOp::In => "in",
            BinOp::SubsetEq => "subsetEq",
        }
    }

    pub fn from_token(s: &str) -> Option<BinOp> {
        BinOp::ALL.iter().copied().find(|op| op.token() == s)
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Iff => PREC_IFF,
            BinOp::Implies => PREC_IMPLIES,
            BinOp::Or => PREC_OR,
            BinOp::And => PREC_AND,
            BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Leq | BinOp::Gt | BinOp::Geq | BinOp::In | BinOp::SubsetEq => {
                PREC_CMP
            }
            BinOp::Add | BinOp::Sub => PREC_ADD,
            BinOp::Mul | BinOp::Div | BinOp::Mod => PREC_MUL,
        }
    }

    pub fn right_assoc(self) -> bool {
        matches!(self, BinOp::Implies)
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Mul | BinOp::Eq | BinOp::Neq | BinOp::And | BinOp::Or)
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod)
    }

    /// Printed without surrounding spaces.
    pub fn is_tight(self) -> bool {
        self.is_arithmetic()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuantKind {
    ForAll,
    Exists,
    Sum,
}

impl QuantKind {
    pub fn keyword(self) -> &'static str {
        match self {
            QuantKind::ForAll => "forAll",
            QuantKind::Exists => "exists",
            QuantKind::Sum => "sum",
        }
    }

    pub fn from_keyword(s: &str) -> Option<QuantKind> {
        Some(match s {
            "forAll" => QuantKind::ForAll,
            "exists" => QuantKind::Exists,
            "sum" => QuantKind::Sum,
            _ => return None,
        })
    }
}

/// The range a quantifier binder iterates over.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuantRange {
    /// `x : D`
    Domain(Domain),
    /// `x in S` for a set-valued expression.
    Set(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Ref {
        name: String,
        kind: RefKind,
    },
    Unary {
        op: UnaryOp,
        arg: Box<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Tuple(Vec<Expr>),
    /// Literal set of tuples; arity-one elements are one-element vectors.
    SetLit(BTreeSet<Vec<i64>>),
    Quant {
        kind: QuantKind,
        var: String,
        range: Box<QuantRange>,
        body: Box<Expr>,
    },
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary { op, arg: Box::new(arg) }
    }

    pub fn reference(name: impl Into<String>, kind: RefKind) -> Expr {
        Expr::Ref { name: name.into(), kind }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Expr::Int(_) | Expr::Bool(_))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Expr::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Unary { op: UnaryOp::Neg | UnaryOp::Not, .. } => PREC_UNARY,
            Expr::Int(v) if *v < 0 => PREC_UNARY,
            Expr::Quant { .. } => 0,
            _ => PREC_ATOM,
        }
    }

    /// Calls `f` on this expression and every sub-expression in pre-order.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Unary { arg, .. } => arg.walk(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Tuple(items) => items.iter().for_each(|e| e.walk(f)),
            Expr::Quant { range, body, .. } => {
                match range.as_ref() {
                    QuantRange::Domain(d) => d.walk_exprs(f),
                    QuantRange::Set(e) => e.walk(f),
                }
                body.walk(f);
            }
            Expr::Int(_) | Expr::Bool(_) | Expr::Ref { .. } | Expr::SetLit(_) => {}
        }
    }

    /// True when some reference inside names a decision variable.
    pub fn mentions_decision_vars(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let Expr::Ref { kind: RefKind::DecisionVariable, .. } = e {
                found = true;
            }
        });
        found
    }
}

impl Domain {
    pub fn walk_exprs<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        match self {
            Domain::Bool | Domain::Ref(_) => {}
            Domain::Int { lo, hi } => {
                lo.walk(f);
                if let Some(hi) = hi {
                    hi.walk(f);
                }
            }
            Domain::Relation { attrs, components } => {
                for e in [&attrs.size, &attrs.min_size, &attrs.max_size].into_iter().flatten() {
                    e.walk(f);
                }
                components.iter().for_each(|c| c.walk_exprs(f));
            }
        }
    }
}

impl SpecAst {
    pub fn finds(&self) -> impl Iterator<Item = (&str, &Domain)> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Find { name, domain } => Some((name.as_str(), domain)),
            _ => None,
        })
    }

    pub fn givens(&self) -> impl Iterator<Item = (&str, &Domain)> {
        self.statements.iter().flat_map(|s| match s {
            Statement::Given { names, domain } => names.iter().map(|n| (n.as_str(), domain)).collect(),
            _ => Vec::new(),
        })
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Expr> {
        self.statements.iter().flat_map(|s| match s {
            Statement::SuchThat(es) => es.iter().collect(),
            _ => Vec::new(),
        })
    }

    pub fn objective(&self) -> Option<(Direction, &Expr)> {
        self.statements.iter().find_map(|s| match s {
            Statement::Objective { direction, expr } => Some((*direction, expr)),
            _ => None,
        })
    }

    /// Resolves a domain alias chain to a non-alias domain, if the alias exists.
    pub fn resolve_domain<'a>(&'a self, domain: &'a Domain) -> Option<&'a Domain> {
        let mut cur = domain;
        for _ in 0..=self.statements.len() {
            match cur {
                Domain::Ref(name) => {
                    cur = self.statements.iter().find_map(|s| match s {
                        Statement::LettingDomain { name: n, domain } if n == name => Some(domain),
                        _ => None,
                    })?;
                }
                other => return Some(other),
            }
        }
        None
    }
}

impl fmt::Display for SpecAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty::pretty(self, false))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty::expr_to_string(self))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty::domain_to_string(self))
    }
}
