//! Structural feature vectors of specifications and distances between them.

use std::fmt::Write as _;

use thiserror::Error;

use crate::spec_lang::tree::{to_tree, NodeKind, TreeNode};
use crate::spec_lang::{SpecAst, Statement};

const SUMMARY: [&str; 7] = ["depth", "nodes", "mean_branching", "max_branching", "quantifiers", "constraints", "finds"];

fn counted_kinds() -> impl Iterator<Item = NodeKind> {
    NodeKind::ALL.iter().copied().filter(|k| *k != NodeKind::Node)
}

/// Column names, in vector order: one count per node kind, then the
/// summary statistics.
pub fn feature_names() -> Vec<String> {
    counted_kinds().map(|k| format!("kind_{}", k.as_str())).chain(SUMMARY.iter().map(|s| s.to_string())).collect()
}

pub fn dimension() -> usize {
    NodeKind::ALL.len() - 1 + SUMMARY.len()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        feature_names().iter().position(|n| n == name).map(|i| self.0[i])
    }
}

pub fn featurize(ast: &SpecAst) -> FeatureVector {
    featurize_tree(&to_tree(ast), ast)
}

fn featurize_tree(root: &TreeNode, ast: &SpecAst) -> FeatureVector {
    let mut counts = vec![0.0; NodeKind::ALL.len()];
    let (mut internal, mut edges, mut max_branch) = (0usize, 0usize, 0usize);
    root.visit(&mut |_, n| {
        counts[n.kind as usize] += 1.0;
        if !n.children.is_empty() {
            internal += 1;
            edges += n.children.len();
            max_branch = max_branch.max(n.children.len());
        }
    });
    let mean_branch = if internal == 0 { 0.0 } else { edges as f64 / internal as f64 };
    let constraints: usize =
        ast.statements.iter().map(|s| if let Statement::SuchThat(es) = s { es.len() } else { 0 }).sum();
    let mut v: Vec<f64> = counted_kinds().map(|k| counts[k as usize]).collect();
    v.extend([
        root.depth() as f64,
        root.size() as f64,
        mean_branch,
        max_branch as f64,
        counts[NodeKind::Quantifier as usize],
        constraints as f64,
        ast.finds().count() as f64,
    ]);
    FeatureVector(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("feature vectors have dimensions {0} and {1}")]
pub struct DimensionMismatch(pub usize, pub usize);

/// Per-dimension maxima of a corpus, used to bring features to a common
/// scale before comparing them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScale(pub Vec<f64>);

impl FeatureScale {
    pub fn of(corpus: &[FeatureVector]) -> FeatureScale {
        let dim = corpus.first().map_or(dimension(), |v| v.0.len());
        let mut max = vec![0.0f64; dim];
        for v in corpus {
            for (m, x) in max.iter_mut().zip(&v.0) {
                *m = m.max(x.abs());
            }
        }
        FeatureScale(max)
    }

    pub fn distance(&self, a: &FeatureVector, b: &FeatureVector) -> Result<f64, DimensionMismatch> {
        if a.0.len() != b.0.len() {
            return Err(DimensionMismatch(a.0.len(), b.0.len()));
        }
        if a.0.len() != self.0.len() {
            return Err(DimensionMismatch(a.0.len(), self.0.len()));
        }
        let sq: f64 =
            a.0.iter()
                .zip(&b.0)
                .zip(&self.0)
                .map(|((x, y), m)| if *m == 0.0 { 0.0 } else { ((x - y) / m).powi(2) })
                .sum();
        Ok(sq.sqrt())
    }
}

/// Distance with the scale taken from just the two vectors.
pub fn distance(a: &FeatureVector, b: &FeatureVector) -> Result<f64, DimensionMismatch> {
    FeatureScale::of(&[a.clone(), b.clone()]).distance(a, b)
}

pub fn pairwise(corpus: &[FeatureVector]) -> Vec<Vec<f64>> {
    let scale = FeatureScale::of(corpus);
    corpus
        .iter()
        .map(|a| corpus.iter().map(|b| scale.distance(a, b).expect("corpus has one dimension")).collect())
        .collect()
}

fn num(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.6}")
    }
}

pub fn to_csv(labels: &[String], vectors: &[FeatureVector]) -> String {
    let mut s = String::from("spec");
    for n in feature_names() {
        let _ = write!(s, ",{n}");
    }
    s.push('\n');
    for (l, v) in labels.iter().zip(vectors) {
        s.push_str(l);
        for x in &v.0 {
            let _ = write!(s, ",{}", num(*x));
        }
        s.push('\n');
    }
    s
}

pub fn pairwise_csv(labels: &[String], vectors: &[FeatureVector]) -> String {
    let d = pairwise(vectors);
    let mut s = String::from("spec");
    for l in labels {
        let _ = write!(s, ",{l}");
    }
    s.push('\n');
    for (l, row) in labels.iter().zip(&d) {
        s.push_str(l);
        for x in row {
            let _ = write!(s, ",{x:.6}");
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec_lang::parse;

    #[test]
    fn folding() {
        let v = featurize(&parse("find x : int(0..100)\nsuch that 1*(2+3)*4 = x").unwrap());
        assert_eq!(v.0.len(), dimension());
        assert_eq!(v.get("nodes"), Some(16.0));
        assert_eq!(v.get("depth"), Some(6.0));
        assert_eq!(v.get("finds"), Some(1.0));
        assert_eq!(v.get("constraints"), Some(1.0));
        assert_eq!(v.get("kind_Integer"), Some(6.0));
    }

    #[test]
    fn empty_spec() {
        let v = featurize(&SpecAst::default());
        let nodes = feature_names().iter().position(|n| n == "nodes").unwrap();
        for (i, x) in v.0.iter().enumerate() {
            assert_eq!(*x, if i == nodes { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn distances() {
        let a = featurize(&parse("find x : int(0..3) such that x > 1").unwrap());
        let b = featurize(&parse("find y : int(0..3) such that y > 1").unwrap());
        let c = featurize(&parse("find S : set of int(1..3) such that forAll i in S . i > 1, |S| = 2").unwrap());
        assert_eq!(a, b);
        let m = pairwise(&[a.clone(), b, c.clone()]);
        assert_eq!(m[0][0], 0.0);
        assert_eq!(m[0][2], m[2][0]);
        assert!(m[0][1] < m[0][2]);
        assert!(distance(&a, &FeatureVector(vec![0.0])).is_err());
    }
}
