//! Semantics-preserving rewrite rules over specifications, plus the
//! normal form used to detect duplicates.

mod normalize;
mod rules;
mod sites;

use std::collections::BTreeMap;

use serde_json::json;
use thiserror::Error;

use crate::spec_lang::{check, SpecAst, SpecError};

pub use normalize::{canonical_hash, normalize};
pub use rules::{CardAttr, Commute, ConstFold, IdentityElim, ImpliedSum, MemberMinSize};
pub use sites::{expr_at, expr_at_mut, sites};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    ExpressionLocal,
    ConstraintDerivation,
    DomainStrengthening,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::ExpressionLocal => "expression-local",
            RuleKind::ConstraintDerivation => "constraint-derivation",
            RuleKind::DomainStrengthening => "domain-strengthening",
        }
    }
}

/// One place a rule can fire. `path` addresses the matched node by 1-based
/// child ordinals in the tree form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Match {
    pub rule: String,
    pub path: Vec<usize>,
    pub bindings: BTreeMap<String, crate::spec_lang::Expr>,
}

impl Match {
    pub fn to_json(&self) -> serde_json::Value {
        let bindings: BTreeMap<&str, String> = self.bindings.iter().map(|(k, v)| (k.as_str(), v.to_string())).collect();
        json!({ "rule": self.rule, "path": self.path, "bindings": bindings })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("stale match: rule `{rule}` does not match at {path:?}")]
    Stale { rule: String, path: Vec<usize> },
    #[error("rewrite produced an ill-typed specification: {0}")]
    IllTyped(SpecError),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
}

pub trait RewriteRule: Sync {
    fn name(&self) -> &'static str;
    fn kind(&self) -> RuleKind;
    fn soundness_note(&self) -> &'static str;
    /// All matches in pre-order of the matched node.
    fn enumerate(&self, ast: &SpecAst) -> Vec<Match>;
    /// Rewrites at `m`, which must come from [`RewriteRule::enumerate`] on `ast`.
    fn rewrite(&self, ast: &SpecAst, m: &Match) -> SpecAst;

    fn matches_at(&self, ast: &SpecAst, m: &Match) -> bool {
        m.rule == self.name() && self.enumerate(ast).contains(m)
    }
}

static LIBRARY: [&dyn RewriteRule; 6] = [&Commute, &ConstFold, &IdentityElim, &ImpliedSum, &CardAttr, &MemberMinSize];

/// The rule library in its fixed order.
pub fn library() -> &'static [&'static dyn RewriteRule] {
    &LIBRARY
}

pub fn rule_by_name(name: &str) -> Option<&'static dyn RewriteRule> {
    LIBRARY.iter().copied().find(|r| r.name() == name)
}

/// Resolves a comma-separated rule filter; an empty filter selects all rules.
pub fn select_rules(filter: &str) -> Result<Vec<&'static dyn RewriteRule>, RewriteError> {
    if filter.trim().is_empty() {
        return Ok(library().to_vec());
    }
    filter
        .split(',')
        .map(|n| rule_by_name(n.trim()).ok_or_else(|| RewriteError::UnknownRule(n.trim().to_string())))
        .collect()
}

pub fn enumerate_matches(rule: &dyn RewriteRule, ast: &SpecAst) -> Vec<Match> {
    rule.enumerate(ast)
}

/// Matches of several rules together, in pre-order of the matched node with
/// ties broken by position in `rules`. Each match is paired with the index
/// of its rule.
pub fn enumerate_all(rules: &[&'static dyn RewriteRule], ast: &SpecAst) -> Vec<(usize, Match)> {
    let mut out: Vec<(usize, Match)> = Vec::new();
    for (ri, rule) in rules.iter().enumerate() {
        out.extend(rule.enumerate(ast).into_iter().map(|m| (ri, m)));
    }
    out.sort_by(|a, b| a.1.path.cmp(&b.1.path).then(a.0.cmp(&b.0)));
    out
}

/// Applies `m`, rejecting stale matches and re-checking the result.
pub fn apply(rule: &dyn RewriteRule, ast: &SpecAst, m: &Match) -> Result<SpecAst, RewriteError> {
    if !rule.matches_at(ast, m) {
        return Err(RewriteError::Stale { rule: m.rule.clone(), path: m.path.clone() });
    }
    let out = rule.rewrite(ast, m);
    check(&out).map_err(RewriteError::IllTyped)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_lang::{parse, pretty};

    const FOLDING: &str = "find x : int(0..100)\nsuch that 1*(2+3)*4 = x";

    #[test]
    fn commute_folding() {
        let ast = parse(FOLDING).unwrap();
        let ms = enumerate_matches(&Commute, &ast);
        let paths: Vec<_> = ms.iter().map(|m| m.path.clone()).collect();
        assert_eq!(paths, vec![vec![2, 1], vec![2, 1, 1], vec![2, 1, 1, 1], vec![2, 1, 1, 1, 2]]);
        let plus = ms.iter().find(|m| m.path == [2, 1, 1, 1, 2]).unwrap();
        let out = apply(&Commute, &ast, plus).unwrap();
        assert!(pretty(&out, false).contains("1*(3+2)*4 = x"));
        assert_eq!(ast, parse(FOLDING).unwrap());
    }

    #[test]
    fn const_fold_outer_product() {
        let ast = parse(FOLDING).unwrap();
        let ms = enumerate_matches(&ConstFold, &ast);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].path, vec![2, 1, 1]);
        let out = apply(&ConstFold, &ast, &ms[0]).unwrap();
        assert!(pretty(&out, false).contains("20 = x"));
        assert!(enumerate_matches(&ConstFold, &parse("find b : bool such that b").unwrap()).is_empty());
    }

    #[test]
    fn stale_match_rejected() {
        let ast = parse(FOLDING).unwrap();
        let m = enumerate_matches(&ConstFold, &ast).remove(0);
        let folded = apply(&ConstFold, &ast, &m).unwrap();
        assert!(matches!(apply(&ConstFold, &folded, &m), Err(RewriteError::Stale { .. })));
    }

    #[test]
    fn rule_filter() {
        assert_eq!(select_rules("").unwrap().len(), 6);
        assert_eq!(select_rules("commute, card-attr").unwrap().len(), 2);
        assert!(select_rules("nope").is_err());
    }
}
