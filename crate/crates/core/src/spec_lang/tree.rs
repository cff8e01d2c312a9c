//! Labelled ordered-tree view of a specification.
//!
//! Every node carries a surface token and a grammatical kind. The tree is the
//! common currency of the annotated dump, the graph encodings, path
//! addressing for rewrites, and structural features.

use std::collections::BTreeSet;

use thiserror::Error;

use super::ast::*;

macro_rules! node_kinds {
    ($($k:ident),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum NodeKind { $($k),* }

        impl NodeKind {
            pub const ALL: &'static [NodeKind] = &[$(NodeKind::$k),*];

            pub fn as_str(self) -> &'static str {
                match self { $(NodeKind::$k => stringify!($k)),* }
            }

            pub fn parse(s: &str) -> Option<NodeKind> {
                match s { $(stringify!($k) => Some(NodeKind::$k),)* _ => None }
            }
        }
    };
}

node_kinds!(
    Node,
    GivenStatement,
    LettingStatement,
    WhereStatement,
    FindStatement,
    SuchThatStatement,
    ObjectiveStatement,
    Parameter,
    ConstantDefinition,
    DomainDefinition,
    DecisionVariable,
    BoolDomain,
    IntDomain,
    SetDomain,
    RelationDomain,
    Attribute,
    ReferenceToDomain,
    Integer,
    Boolean,
    ReferenceToDecisionVariable,
    ReferenceToParameter,
    ReferenceToConstant,
    ReferenceToQuantifiedVariable,
    UnaryExpression,
    BinaryExpression,
    TupleLiteral,
    SetLiteral,
    Quantifier,
    QuantifiedVariable,
);

impl NodeKind {
    pub fn is_expression(self) -> bool {
        use NodeKind::*;
        matches!(
            self,
            Integer
                | Boolean
                | ReferenceToDecisionVariable
                | ReferenceToParameter
                | ReferenceToConstant
                | ReferenceToQuantifiedVariable
                | UnaryExpression
                | BinaryExpression
                | TupleLiteral
                | SetLiteral
                | Quantifier
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeNode {
    pub token: String,
    pub kind: NodeKind,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn leaf(token: impl Into<String>, kind: NodeKind) -> TreeNode {
        TreeNode { token: token.into(), kind, children: Vec::new() }
    }

    pub fn new(token: impl Into<String>, kind: NodeKind, children: Vec<TreeNode>) -> TreeNode {
        TreeNode { token: token.into(), kind, children }
    }

    /// `token#Kind`, the label used by the graph encodings.
    pub fn label(&self) -> String {
        format!("{}#{}", self.token, self.kind.as_str())
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(TreeNode::size).sum::<usize>()
    }

    /// Depth counted in edges; a lone root has depth 0.
    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// Node addressed by 1-based child ordinals from this node.
    pub fn at(&self, path: &[usize]) -> Option<&TreeNode> {
        let mut cur = self;
        for &i in path {
            cur = cur.children.get(i.checked_sub(1)?)?;
        }
        Some(cur)
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut TreeNode> {
        let mut cur = self;
        for &i in path {
            cur = cur.children.get_mut(i.checked_sub(1)?)?;
        }
        Some(cur)
    }

    /// Pre-order visit with the path of each node.
    pub fn visit(&self, f: &mut dyn FnMut(&[usize], &TreeNode)) {
        fn go(n: &TreeNode, path: &mut Vec<usize>, f: &mut dyn FnMut(&[usize], &TreeNode)) {
            f(path, n);
            for (i, c) in n.children.iter().enumerate() {
                path.push(i + 1);
                go(c, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("ill-formed tree at `{label}`: {msg}")]
    Grammar { label: String, msg: String },
}

fn grammar(n: &TreeNode, msg: impl Into<String>) -> TreeError {
    TreeError::Grammar { label: n.label(), msg: msg.into() }
}

pub fn to_tree(ast: &SpecAst) -> TreeNode {
    TreeNode::new("root", NodeKind::Node, ast.statements.iter().map(statement_tree).collect())
}

fn statement_tree(s: &Statement) -> TreeNode {
    use NodeKind::*;
    match s {
        Statement::Given { names, domain } => {
            let mut children: Vec<TreeNode> = names.iter().map(|n| TreeNode::leaf(n, Parameter)).collect();
            children.push(domain_tree(domain));
            TreeNode::new("given", GivenStatement, children)
        }
        Statement::LettingExpr { name, value } => TreeNode::new(
            "letting",
            LettingStatement,
            vec![TreeNode::new(name, ConstantDefinition, vec![expr_tree(value)])],
        ),
        Statement::LettingDomain { name, domain } => TreeNode::new(
            "letting",
            LettingStatement,
            vec![TreeNode::new(name, DomainDefinition, vec![domain_tree(domain)])],
        ),
        Statement::Where(e) => TreeNode::new("where", WhereStatement, vec![expr_tree(e)]),
        Statement::Find { name, domain } => {
            TreeNode::new("find", FindStatement, vec![TreeNode::new(name, DecisionVariable, vec![domain_tree(domain)])])
        }
        Statement::SuchThat(es) => TreeNode::new("such that", SuchThatStatement, es.iter().map(expr_tree).collect()),
        Statement::Objective { direction, expr } => {
            TreeNode::new(direction.keyword(), ObjectiveStatement, vec![expr_tree(expr)])
        }
    }
}

pub fn domain_tree(d: &Domain) -> TreeNode {
    use NodeKind::*;
    match d {
        Domain::Bool => TreeNode::leaf("bool", BoolDomain),
        Domain::Int { lo, hi } => {
            let mut children = vec![expr_tree(lo)];
            if let Some(hi) = hi {
                children.push(expr_tree(hi));
            }
            TreeNode::new("int", IntDomain, children)
        }
        Domain::Relation { attrs, components } => {
            let mut children = Vec::new();
            for (name, v) in [("size", &attrs.size), ("minSize", &attrs.min_size), ("maxSize", &attrs.max_size)] {
                if let Some(e) = v {
                    children.push(TreeNode::new(name, Attribute, vec![expr_tree(e)]));
                }
            }
            children.extend(components.iter().map(domain_tree));
            if components.len() == 1 {
                TreeNode::new("set", SetDomain, children)
            } else {
                TreeNode::new("relation", RelationDomain, children)
            }
        }
        Domain::Ref(name) => TreeNode::leaf(name, ReferenceToDomain),
    }
}

pub fn expr_tree(e: &Expr) -> TreeNode {
    use NodeKind::*;
    match e {
        Expr::Int(v) => TreeNode::leaf(v.to_string(), Integer),
        Expr::Bool(b) => TreeNode::leaf(b.to_string(), Boolean),
        Expr::Ref { name, kind } => TreeNode::leaf(
            name,
            match kind {
                RefKind::DecisionVariable => ReferenceToDecisionVariable,
                RefKind::Parameter => ReferenceToParameter,
                RefKind::Constant => ReferenceToConstant,
                RefKind::QuantifiedVariable => ReferenceToQuantifiedVariable,
            },
        ),
        Expr::Unary { op, arg } => TreeNode::new(op.token(), UnaryExpression, vec![expr_tree(arg)]),
        Expr::Binary { op, lhs, rhs } => {
            TreeNode::new(op.token(), BinaryExpression, vec![expr_tree(lhs), expr_tree(rhs)])
        }
        Expr::Tuple(items) => TreeNode::new("tuple", TupleLiteral, items.iter().map(expr_tree).collect()),
        Expr::SetLit(elems) => TreeNode::new(
            "{}",
            SetLiteral,
            elems
                .iter()
                .map(|t| {
                    if t.len() == 1 {
                        TreeNode::leaf(t[0].to_string(), Integer)
                    } else {
                        TreeNode::new(
                            "tuple",
                            TupleLiteral,
                            t.iter().map(|v| TreeNode::leaf(v.to_string(), Integer)).collect(),
                        )
                    }
                })
                .collect(),
        ),
        Expr::Quant { kind, var, range, body } => {
            let range_node = match range.as_ref() {
                QuantRange::Domain(d) => domain_tree(d),
                QuantRange::Set(s) => expr_tree(s),
            };
            TreeNode::new(
                kind.keyword(),
                Quantifier,
                vec![TreeNode::new(var, QuantifiedVariable, vec![range_node]), expr_tree(body)],
            )
        }
    }
}

fn arity(n: &TreeNode, want: usize) -> Result<(), TreeError> {
    if n.children.len() != want {
        return Err(grammar(n, format!("expected {want} children, found {}", n.children.len())));
    }
    Ok(())
}

fn name_token(n: &TreeNode) -> Result<String, TreeError> {
    let ok = n.token.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && n.token.chars().all(|c| c.is_alphanumeric() || c == '_');
    if !ok {
        return Err(grammar(n, "not a valid identifier"));
    }
    Ok(n.token.clone())
}

/// Inverse of [`to_tree`]. Only checks tree grammar; typing is left to
/// [`super::check`].
pub fn from_tree(root: &TreeNode) -> Result<SpecAst, TreeError> {
    if root.kind != NodeKind::Node || root.token != "root" {
        return Err(grammar(root, "root must be `root#Node`"));
    }
    let statements = root.children.iter().map(statement_from).collect::<Result<_, _>>()?;
    Ok(SpecAst { statements })
}

fn statement_from(n: &TreeNode) -> Result<Statement, TreeError> {
    use NodeKind::*;
    match (n.kind, n.token.as_str()) {
        (GivenStatement, "given") => {
            let Some((dom, names)) = n.children.split_last() else {
                return Err(grammar(n, "missing domain"));
            };
            if names.is_empty() {
                return Err(grammar(n, "needs at least one parameter"));
            }
            let names = names
                .iter()
                .map(|p| {
                    if p.kind != Parameter || !p.children.is_empty() {
                        return Err(grammar(p, "expected a parameter leaf"));
                    }
                    name_token(p)
                })
                .collect::<Result<_, _>>()?;
            Ok(Statement::Given { names, domain: domain_from(dom)? })
        }
        (LettingStatement, "letting") => {
            arity(n, 1)?;
            let def = &n.children[0];
            arity(def, 1)?;
            let name = name_token(def)?;
            match def.kind {
                ConstantDefinition => Ok(Statement::LettingExpr { name, value: expr_from(&def.children[0])? }),
                DomainDefinition => Ok(Statement::LettingDomain { name, domain: domain_from(&def.children[0])? }),
                _ => Err(grammar(def, "expected a constant or domain definition")),
            }
        }
        (WhereStatement, "where") => {
            arity(n, 1)?;
            Ok(Statement::Where(expr_from(&n.children[0])?))
        }
        (FindStatement, "find") => {
            arity(n, 1)?;
            let var = &n.children[0];
            if var.kind != DecisionVariable {
                return Err(grammar(var, "expected a decision variable"));
            }
            arity(var, 1)?;
            Ok(Statement::Find { name: name_token(var)?, domain: domain_from(&var.children[0])? })
        }
        (SuchThatStatement, "such that") => {
            if n.children.is_empty() {
                return Err(grammar(n, "needs at least one constraint"));
            }
            Ok(Statement::SuchThat(n.children.iter().map(expr_from).collect::<Result<_, _>>()?))
        }
        (ObjectiveStatement, tok) => {
            let direction = match tok {
                "minimising" => Direction::Minimising,
                "maximising" => Direction::Maximising,
                _ => return Err(grammar(n, "unknown objective direction")),
            };
            arity(n, 1)?;
            Ok(Statement::Objective { direction, expr: expr_from(&n.children[0])? })
        }
        _ => Err(grammar(n, "not a statement")),
    }
}

pub fn domain_from(n: &TreeNode) -> Result<Domain, TreeError> {
    use NodeKind::*;
    match (n.kind, n.token.as_str()) {
        (BoolDomain, "bool") => {
            arity(n, 0)?;
            Ok(Domain::Bool)
        }
        (IntDomain, "int") => match n.children.as_slice() {
            [lo] => Ok(Domain::Int { lo: Box::new(expr_from(lo)?), hi: None }),
            [lo, hi] => Ok(Domain::Int { lo: Box::new(expr_from(lo)?), hi: Some(Box::new(expr_from(hi)?)) }),
            _ => Err(grammar(n, format!("int domain takes 1 or 2 children, found {}", n.children.len()))),
        },
        (SetDomain, "set") | (RelationDomain, "relation") => {
            let mut attrs = Attrs::default();
            let mut components = Vec::new();
            for c in &n.children {
                if c.kind == Attribute {
                    if !components.is_empty() {
                        return Err(grammar(c, "attributes must precede component domains"));
                    }
                    arity(c, 1)?;
                    let slot = match c.token.as_str() {
                        "size" => &mut attrs.size,
                        "minSize" => &mut attrs.min_size,
                        "maxSize" => &mut attrs.max_size,
                        _ => return Err(grammar(c, "unknown attribute")),
                    };
                    if slot.is_some() {
                        return Err(grammar(c, "repeated attribute"));
                    }
                    *slot = Some(expr_from(&c.children[0])?);
                } else {
                    components.push(domain_from(c)?);
                }
            }
            let ok = if n.kind == SetDomain { components.len() == 1 } else { components.len() >= 2 };
            if !ok {
                return Err(grammar(n, "wrong number of component domains"));
            }
            Ok(Domain::Relation { attrs, components })
        }
        (ReferenceToDomain, _) => {
            arity(n, 0)?;
            Ok(Domain::Ref(name_token(n)?))
        }
        _ => Err(grammar(n, "not a domain")),
    }
}

fn int_token(n: &TreeNode) -> Result<i64, TreeError> {
    n.token.parse::<i64>().map_err(|_| grammar(n, "not an integer"))
}

pub fn expr_from(n: &TreeNode) -> Result<Expr, TreeError> {
    use NodeKind::*;
    let leaf = |kind: RefKind| -> Result<Expr, TreeError> {
        arity(n, 0)?;
        Ok(Expr::Ref { name: name_token(n)?, kind })
    };
    match n.kind {
        Integer => {
            arity(n, 0)?;
            Ok(Expr::Int(int_token(n)?))
        }
        Boolean => {
            arity(n, 0)?;
            match n.token.as_str() {
                "true" => Ok(Expr::Bool(true)),
                "false" => Ok(Expr::Bool(false)),
                _ => Err(grammar(n, "not a boolean")),
            }
        }
        ReferenceToDecisionVariable => leaf(RefKind::DecisionVariable),
        ReferenceToParameter => leaf(RefKind::Parameter),
        ReferenceToConstant => leaf(RefKind::Constant),
        ReferenceToQuantifiedVariable => leaf(RefKind::QuantifiedVariable),
        UnaryExpression => {
            let op = UnaryOp::from_token(&n.token).ok_or_else(|| grammar(n, "unknown unary operator"))?;
            arity(n, 1)?;
            Ok(Expr::unary(op, expr_from(&n.children[0])?))
        }
        BinaryExpression => {
            let op = BinOp::from_token(&n.token).ok_or_else(|| grammar(n, "unknown binary operator"))?;
            arity(n, 2)?;
            Ok(Expr::binary(op, expr_from(&n.children[0])?, expr_from(&n.children[1])?))
        }
        TupleLiteral => {
            if n.children.len() < 2 {
                return Err(grammar(n, "tuples need at least two components"));
            }
            Ok(Expr::Tuple(n.children.iter().map(expr_from).collect::<Result<_, _>>()?))
        }
        SetLiteral => {
            let mut elems = BTreeSet::new();
            for c in &n.children {
                let t = match c.kind {
                    Integer => vec![int_token(c)?],
                    TupleLiteral => c
                        .children
                        .iter()
                        .map(|v| if v.kind == Integer { int_token(v) } else { Err(grammar(v, "expected an integer")) })
                        .collect::<Result<_, _>>()?,
                    _ => return Err(grammar(c, "set literal elements must be integers or tuples")),
                };
                if !elems.insert(t) {
                    return Err(grammar(c, "repeated set element"));
                }
            }
            Ok(Expr::SetLit(elems))
        }
        Quantifier => {
            let kind = QuantKind::from_keyword(&n.token).ok_or_else(|| grammar(n, "unknown quantifier"))?;
            arity(n, 2)?;
            let binder = &n.children[0];
            if binder.kind != QuantifiedVariable {
                return Err(grammar(binder, "expected a quantified variable"));
            }
            arity(binder, 1)?;
            let r = &binder.children[0];
            let range = if r.kind.is_expression() {
                QuantRange::Set(expr_from(r)?)
            } else {
                QuantRange::Domain(domain_from(r)?)
            };
            Ok(Expr::Quant {
                kind,
                var: name_token(binder)?,
                range: Box::new(range),
                body: Box::new(expr_from(&n.children[1])?),
            })
        }
        _ => Err(grammar(n, "not an expression")),
    }
}

/// Splits a `token#Kind` label at its last `#`.
pub fn parse_label(label: &str) -> Result<(String, NodeKind), TreeError> {
    let (token, kind) = label.rsplit_once('#').ok_or_else(|| TreeError::UnknownLabel(label.to_string()))?;
    let kind = NodeKind::parse(kind).ok_or_else(|| TreeError::UnknownLabel(label.to_string()))?;
    Ok((token.to_string(), kind))
}
