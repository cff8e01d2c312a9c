//! Canonical surface syntax and the annotated tree dump.

use super::ast::*;
use super::tree::{to_tree, TreeNode};

/// Prints `ast` as canonical Emini text, or as an annotated tree when
/// `annotate` is set.
pub fn pretty(ast: &SpecAst, annotate: bool) -> String {
    if annotate {
        let mut out = String::new();
        render_tree(&to_tree(ast), "", true, &mut out);
        return out;
    }
    let mut out = String::new();
    for s in &ast.statements {
        statement(s, &mut out);
        out.push('\n');
    }
    out
}

fn render_tree(node: &TreeNode, prefix: &str, last: bool, out: &mut String) {
    out.push_str(prefix);
    out.push_str(if last { "└─ " } else { "├─ " });
    out.push_str(&node.token);
    out.push_str("  #");
    out.push_str(node.kind.as_str());
    out.push('\n');
    let child_prefix = format!("{prefix}{}", if last { "   " } else { "│  " });
    for (i, c) in node.children.iter().enumerate() {
        render_tree(c, &child_prefix, i + 1 == node.children.len(), out);
    }
}

fn statement(s: &Statement, out: &mut String) {
    match s {
        Statement::Given { names, domain: d } => {
            out.push_str(&format!("given {} : ", names.join(", ")));
            domain(d, out);
        }
        Statement::LettingExpr { name, value } => {
            out.push_str(&format!("letting {name} be "));
            expr(value, out);
        }
        Statement::LettingDomain { name, domain: d } => {
            out.push_str(&format!("letting {name} be domain "));
            domain(d, out);
        }
        Statement::Where(e) => {
            out.push_str("where ");
            expr(e, out);
        }
        Statement::Find { name, domain: d } => {
            out.push_str(&format!("find {name} : "));
            domain(d, out);
        }
        Statement::SuchThat(es) => {
            out.push_str("such that");
            for (i, e) in es.iter().enumerate() {
                out.push_str("\n    ");
                expr(e, out);
                if i + 1 < es.len() {
                    out.push(',');
                }
            }
        }
        Statement::Objective { direction, expr: e } => {
            out.push_str(direction.keyword());
            out.push(' ');
            expr(e, out);
        }
    }
}

pub fn domain_to_string(d: &Domain) -> String {
    let mut s = String::new();
    domain(d, &mut s);
    s
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    expr(e, &mut s);
    s
}

fn domain(d: &Domain, out: &mut String) {
    match d {
        Domain::Bool => out.push_str("bool"),
        Domain::Int { lo, hi } => {
            out.push_str("int(");
            expr(lo, out);
            out.push_str("..");
            if let Some(hi) = hi {
                expr(hi, out);
            }
            out.push(')');
        }
        Domain::Relation { attrs, components } => {
            out.push_str(if components.len() == 1 { "set " } else { "relation " });
            let parts: Vec<String> =
                [("size", &attrs.size), ("minSize", &attrs.min_size), ("maxSize", &attrs.max_size)]
                    .into_iter()
                    .filter_map(|(k, v)| v.as_ref().map(|e| format!("{k} {}", expr_to_string(e))))
                    .collect();
            if !parts.is_empty() {
                out.push_str(&format!("({}) ", parts.join(", ")));
            }
            out.push_str("of ");
            if components.len() == 1 {
                domain(&components[0], out);
            } else {
                out.push('(');
                for (i, c) in components.iter().enumerate() {
                    if i > 0 {
                        out.push_str(" * ");
                    }
                    domain(c, out);
                }
                out.push(')');
            }
        }
        Domain::Ref(name) => out.push_str(name),
    }
}

fn operand(e: &Expr, needs_parens: bool, out: &mut String) {
    if needs_parens {
        out.push('(');
        expr(e, out);
        out.push(')');
    } else {
        expr(e, out);
    }
}

fn tuple_text(t: &[i64]) -> String {
    if t.len() == 1 {
        t[0].to_string()
    } else {
        let parts: Vec<String> = t.iter().map(|v| v.to_string()).collect();
        format!("({})", parts.join(", "))
    }
}

fn expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Int(v) => out.push_str(&v.to_string()),
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Ref { name, .. } => out.push_str(name),
        Expr::Unary { op: UnaryOp::Card, arg } => {
            out.push('|');
            expr(arg, out);
            out.push('|');
        }
        Expr::Unary { op: UnaryOp::ToInt, arg } => {
            out.push_str("toInt(");
            expr(arg, out);
            out.push(')');
        }
        Expr::Unary { op, arg } => {
            out.push_str(op.token());
            // `-3` would read back as a literal, so a negated literal keeps parens.
            let literal_clash = *op == UnaryOp::Neg && matches!(arg.as_ref(), Expr::Int(v) if *v >= 0);
            operand(arg, arg.precedence() < PREC_UNARY || literal_clash, out);
        }
        Expr::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            let (lp, rp) = (lhs.precedence(), rhs.precedence());
            let (l_paren, r_paren) = if op.right_assoc() { (lp <= p, rp < p) } else { (lp < p, rp <= p) };
            operand(lhs, l_paren, out);
            if op.is_tight() {
                out.push_str(op.token());
            } else {
                out.push(' ');
                out.push_str(op.token());
                out.push(' ');
            }
            operand(rhs, r_paren, out);
        }
        Expr::Tuple(items) => {
            out.push('(');
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr(it, out);
            }
            out.push(')');
        }
        Expr::SetLit(elems) => {
            let parts: Vec<String> = elems.iter().map(|t| tuple_text(t)).collect();
            out.push('{');
            out.push_str(&parts.join(", "));
            out.push('}');
        }
        Expr::Quant { kind, var, range, body } => {
            out.push_str(kind.keyword());
            out.push(' ');
            out.push_str(var);
            match range.as_ref() {
                QuantRange::Domain(d) => {
                    out.push_str(" : ");
                    domain(d, out);
                }
                QuantRange::Set(s) => {
                    out.push_str(" in ");
                    operand(s, s.precedence() < PREC_ATOM, out);
                }
            }
            out.push_str(" . ");
            expr(body, out);
        }
    }
}
