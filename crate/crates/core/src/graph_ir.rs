//! Labelled directed graph encoding of specifications, with GP2 host-graph,
//! DOT and JSON serializations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spec_lang::tree::{from_tree, parse_label, to_tree, TreeError, TreeNode};
use crate::spec_lang::{check, SpecAst, SpecError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub index: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub index: usize,
    pub source: usize,
    pub target: usize,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Gp2,
    Dot,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "gp2" => Ok(Format::Gp2),
            "dot" => Ok(Format::Dot),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown graph format `{s}` (expected gp2, dot or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("vertex {vertex}: child ordinals {found:?} are not 1..{count}")]
    OrdinalGap { vertex: usize, found: Vec<usize>, count: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("malformed graph text: {0}")]
    Syntax(String),
}

/// Pre-order encoding: vertex `i` is the i-th node visited, and the edge
/// entering vertex `i` has index `i - 1`.
pub fn to_graph(ast: &SpecAst) -> GraphDoc {
    let mut g = GraphDoc::default();
    fn go(n: &TreeNode, parent: Option<(usize, usize)>, g: &mut GraphDoc) {
        let index = g.vertices.len();
        g.vertices.push(Vertex { index, label: n.label() });
        if let Some((source, ordinal)) = parent {
            g.edges.push(Edge { index: g.edges.len(), source, target: index, label: ordinal });
        }
        for (i, c) in n.children.iter().enumerate() {
            go(c, Some((index, i + 1)), g);
        }
    }
    go(&to_tree(ast), None, &mut g);
    g
}

impl GraphDoc {
    /// Checks the rooted-tree and ordinal invariants and rebuilds the tree.
    pub fn to_tree(&self) -> Result<TreeNode, GraphError> {
        let n = self.vertices.len();
        let mut slot: Vec<Option<&Vertex>> = vec![None; n];
        for v in &self.vertices {
            if v.index >= n || slot[v.index].is_some() {
                return Err(GraphError::NotATree(format!("vertex indices are not dense from 0 (saw {})", v.index)));
            }
            slot[v.index] = Some(v);
        }
        let mut parent = vec![None; n];
        let mut kids: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for e in &self.edges {
            if e.source >= n || e.target >= n {
                return Err(GraphError::NotATree(format!("edge {} references a missing vertex", e.index)));
            }
            if parent[e.target].replace(e.source).is_some() {
                return Err(GraphError::NotATree(format!("vertex {} has in-degree above 1", e.target)));
            }
            kids[e.source].push((e.label, e.target));
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(GraphError::NotATree(format!("{} vertices have in-degree 0", roots.len())));
        }
        for (v, ks) in kids.iter_mut().enumerate() {
            ks.sort();
            let found: Vec<usize> = ks.iter().map(|&(l, _)| l).collect();
            if found.iter().enumerate().any(|(i, &l)| l != i + 1) {
                return Err(GraphError::OrdinalGap { vertex: v, found, count: ks.len() });
            }
        }
        // With one root and in-degree 1 elsewhere, a cycle leaves some vertex unreachable.
        let mut seen = vec![false; n];
        fn build(
            v: usize,
            slot: &[Option<&Vertex>],
            kids: &[Vec<(usize, usize)>],
            seen: &mut [bool],
        ) -> Result<TreeNode, GraphError> {
            seen[v] = true;
            let (token, kind) = parse_label(&slot[v].expect("dense").label)?;
            let children = kids[v].iter().map(|&(_, c)| build(c, slot, kids, seen)).collect::<Result<_, _>>()?;
            Ok(TreeNode::new(token, kind, children))
        }
        let tree = build(roots[0], &slot, &kids, &mut seen)?;
        if seen.iter().any(|s| !s) {
            return Err(GraphError::NotATree("graph contains a cycle".into()));
        }
        Ok(tree)
    }

    pub fn export(&self, format: Format) -> String {
        match format {
            Format::Gp2 => self.to_gp2(),
            Format::Dot => self.to_dot(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_gp2(&self) -> String {
        let mut s = String::from("[");
        for v in &self.vertices {
            write!(s, " ({}, \"{}\")", v.index, escape(&v.label)).unwrap();
        }
        s.push_str(" |");
        for e in &self.edges {
            write!(s, " ({}, {}, {}, {})", e.index, e.source, e.target, e.label).unwrap();
        }
        s.push_str(" ]");
        s
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph spec {\n");
        for v in &self.vertices {
            writeln!(s, "  v{} [label=\"{}\"];", v.index, escape(&v.label)).unwrap();
        }
        for e in &self.edges {
            writeln!(s, "  v{} -> v{} [label=\"{}\"];", e.source, e.target, e.label).unwrap();
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<GraphDoc, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Syntax(e.to_string()))
    }

    /// Reads the GP2 host-graph text written by [`GraphDoc::to_gp2`].
    pub fn from_gp2(text: &str) -> Result<GraphDoc, GraphError> {
        let bad = |m: &str| GraphError::Syntax(m.to_string());
        let body =
            text.trim().strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(|| bad("missing brackets"))?;
        let mut g = GraphDoc::default();
        let mut chars = body.chars().peekable();
        let mut in_edges = false;
        while let Some(&c) = chars.peek() {
            match c {
                ' ' | '\n' | '\t' | '\r' => {
                    chars.next();
                }
                '|' if !in_edges => {
                    in_edges = true;
                    chars.next();
                }
                '(' => {
                    chars.next();
                    let mut fields = Vec::new();
                    let mut cur = String::new();
                    let mut quoted = None;
                    loop {
                        let c = chars.next().ok_or_else(|| bad("unterminated tuple"))?;
                        match c {
                            '"' => {
                                let mut label = String::new();
                                loop {
                                    match chars.next().ok_or_else(|| bad("unterminated label"))? {
                                        '\\' => label.push(chars.next().ok_or_else(|| bad("bad escape"))?),
                                        '"' => break,
                                        c => label.push(c),
                                    }
                                }
                                quoted = Some(label);
                            }
                            ',' | ')' => {
                                if !cur.trim().is_empty() {
                                    fields.push(cur.trim().parse::<usize>().map_err(|_| bad("expected a number"))?);
                                }
                                cur.clear();
                                if c == ')' {
                                    break;
                                }
                            }
                            c => cur.push(c),
                        }
                    }
                    match (in_edges, quoted, fields.as_slice()) {
                        (false, Some(label), [index]) => g.vertices.push(Vertex { index: *index, label }),
                        (true, None, [index, source, target, label]) => {
                            g.edges.push(Edge { index: *index, source: *source, target: *target, label: *label })
                        }
                        _ => return Err(bad("malformed tuple")),
                    }
                }
                _ => return Err(bad("unexpected character")),
            }
        }
        Ok(g)
    }
}

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Inverse of [`to_graph`]; the rebuilt specification is re-checked.
pub fn from_graph(g: &GraphDoc) -> Result<SpecAst, GraphError> {
    let ast = from_tree(&g.to_tree()?)?;
    check(&ast)?;
    Ok(ast)
}
