//! UCT search over sequences of rewrite applications.
//!
//! Each tree node holds a specification. Expanding a node applies one
//! untried (rule, match) action; the new specification is solved on every
//! training instance and scored against the baseline.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::rewrite::{apply, canonical_hash, enumerate_all, library, Match, RewriteRule};
use crate::solve::{flatten, solve, Mode};
use crate::spec_lang::{ground, pretty, GroundError, Instance, SpecAst};

pub fn uct_score(w: f64, n: u64, parent_visits: u64, c: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let n = n as f64;
    w / n + c * ((parent_visits as f64).ln() / n).sqrt()
}

/// `baseline / (baseline + candidate)`: 0.5 at parity, higher is better.
pub fn reward(candidate_nodes: u64, baseline_nodes: u64) -> f64 {
    let b = baseline_nodes as f64;
    b / (b + candidate_nodes as f64)
}

#[derive(Clone)]
pub struct ExploreConfig {
    pub iterations: usize,
    pub c: f64,
    pub budget: u64,
    pub max_depth: usize,
    pub seed: u64,
    pub instances: Vec<Instance>,
    pub rules: Vec<&'static dyn RewriteRule>,
    pub jobs: usize,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            iterations: 100,
            c: std::f64::consts::SQRT_2,
            budget: 100_000,
            max_depth: 8,
            seed: 0,
            instances: Vec::new(),
            rules: library().to_vec(),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("training instance {index} does not fit the specification: {err}")]
    Ground { index: usize, err: GroundError },
    #[error("iterations must be at least 1 and budget at least 1")]
    Config,
}

/// Solver effort of one specification over the training instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub per_instance: Vec<u64>,
    pub total: u64,
}

fn evaluate_one(spec: &SpecAst, inst: &Instance, budget: u64) -> u64 {
    let Ok(g) = ground(spec, inst) else { return budget };
    let Ok(csp) = flatten(&g) else { return budget };
    let mode = if csp.objective.is_some() { Mode::Optimize } else { Mode::First };
    solve(&csp, budget, mode).nodes.min(budget)
}

/// Runs are capped at `budget`; specifications that fail to ground or
/// flatten on an instance are charged the full budget for it.
pub fn evaluate(spec: &SpecAst, instances: &[Instance], budget: u64, jobs: usize) -> Evaluation {
    let per_instance: Vec<u64> = if jobs <= 1 || instances.len() <= 1 {
        instances.iter().map(|i| evaluate_one(spec, i, budget)).collect()
    } else {
        let chunk = instances.len().div_ceil(jobs);
        std::thread::scope(|s| {
            let handles: Vec<_> = instances
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().map(|i| evaluate_one(spec, i, budget)).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("evaluation worker panicked")).collect()
        })
    };
    Evaluation { total: per_instance.iter().sum(), per_instance }
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub spec: SpecAst,
    pub canonical: u64,
    pub parent: Option<usize>,
    pub action: Option<Match>,
    pub depth: usize,
    pub actions: Vec<(usize, Match)>,
    /// Indices into `actions` not yet expanded.
    pub untried: Vec<usize>,
    pub children: Vec<usize>,
    pub visits: u64,
    pub total_reward: f64,
    /// Backpropagations that started at this node.
    pub own_visits: u64,
    pub reward: f64,
    /// Index of the earlier node with the same canonical form.
    pub duplicate_of: Option<usize>,
    pub evaluation: Option<Evaluation>,
}

impl SearchNode {
    pub fn mean(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.total_reward / self.visits as f64
        }
    }
}

pub struct Explorer {
    pub cfg: ExploreConfig,
    pub nodes: Vec<SearchNode>,
    pub baseline: Evaluation,
    pub evaluations: u64,
    pub duplicates: u64,
    seen: HashMap<u64, usize>,
    rng: ChaCha8Rng,
    started: Instant,
}

impl Explorer {
    pub fn new(spec: &SpecAst, mut cfg: ExploreConfig) -> Result<Explorer, ExploreError> {
        if cfg.budget == 0 {
            return Err(ExploreError::Config);
        }
        if cfg.instances.is_empty() {
            cfg.instances.push(Instance::new());
        }
        for (index, inst) in cfg.instances.iter().enumerate() {
            ground(spec, inst).map_err(|err| ExploreError::Ground { index, err })?;
        }
        let started = Instant::now();
        let baseline = evaluate(spec, &cfg.instances, cfg.budget, cfg.jobs);
        let canonical = canonical_hash(spec);
        let mut ex = Explorer {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            nodes: Vec::new(),
            baseline: baseline.clone(),
            evaluations: 1,
            duplicates: 0,
            seen: HashMap::from([(canonical, 0)]),
            started,
        };
        let root = ex.make_node(spec.clone(), canonical, None, None, 0);
        ex.nodes.push(SearchNode {
            visits: 1,
            total_reward: 0.5,
            own_visits: 1,
            reward: 0.5,
            evaluation: Some(baseline),
            ..root
        });
        Ok(ex)
    }

    fn make_node(
        &self,
        spec: SpecAst,
        canonical: u64,
        parent: Option<usize>,
        action: Option<Match>,
        depth: usize,
    ) -> SearchNode {
        let actions = if depth < self.cfg.max_depth { self.actions(&spec) } else { Vec::new() };
        SearchNode {
            untried: (0..actions.len()).collect(),
            actions,
            spec,
            canonical,
            parent,
            action,
            depth,
            children: Vec::new(),
            visits: 0,
            total_reward: 0.0,
            own_visits: 0,
            reward: 0.0,
            duplicate_of: None,
            evaluation: None,
        }
    }

    fn actions(&self, spec: &SpecAst) -> Vec<(usize, Match)> {
        enumerate_all(&self.cfg.rules, spec)
    }

    fn select(&self) -> usize {
        let mut cur = 0;
        loop {
            let node = &self.nodes[cur];
            if !node.untried.is_empty() || node.children.is_empty() {
                return cur;
            }
            let mut best = node.children[0];
            let mut best_score = f64::NEG_INFINITY;
            for &c in &node.children {
                let ch = &self.nodes[c];
                let s = uct_score(ch.total_reward, ch.visits, node.visits, self.cfg.c);
                if s > best_score {
                    best = c;
                    best_score = s;
                }
            }
            cur = best;
        }
    }

    fn backpropagate(&mut self, from: usize, r: f64) {
        self.nodes[from].own_visits += 1;
        let mut cur = Some(from);
        while let Some(i) = cur {
            let n = &mut self.nodes[i];
            n.visits += 1;
            n.total_reward += r;
            cur = n.parent;
        }
    }

    /// One selection, expansion, evaluation and backpropagation. Returns the
    /// node the reward was propagated from.
    pub fn step(&mut self) -> usize {
        let leaf = self.select();
        while !self.nodes[leaf].untried.is_empty() {
            let k = self.rng.random_range(0..self.nodes[leaf].untried.len());
            let ai = self.nodes[leaf].untried.remove(k);
            let (ri, m) = self.nodes[leaf].actions[ai].clone();
            let Ok(spec) = apply(self.cfg.rules[ri], &self.nodes[leaf].spec, &m) else { continue };
            let canonical = canonical_hash(&spec);
            let idx = self.nodes.len();
            let mut node = self.make_node(spec, canonical, Some(leaf), Some(m), self.nodes[leaf].depth + 1);
            match self.seen.get(&canonical) {
                Some(&earlier) => {
                    node.duplicate_of = Some(earlier);
                    node.reward = self.nodes[earlier].reward;
                    node.actions.clear();
                    node.untried.clear();
                    self.duplicates += 1;
                }
                None => {
                    let ev = evaluate(&node.spec, &self.cfg.instances, self.cfg.budget, self.cfg.jobs);
                    node.reward = reward(ev.total, self.baseline.total);
                    node.evaluation = Some(ev);
                    self.evaluations += 1;
                    self.seen.insert(canonical, idx);
                }
            }
            let r = node.reward;
            self.nodes.push(node);
            self.nodes[leaf].children.push(idx);
            self.backpropagate(idx, r);
            return idx;
        }
        let r = self.nodes[leaf].reward;
        self.backpropagate(leaf, r);
        leaf
    }

    pub fn run(&mut self) {
        for _ in 0..self.cfg.iterations {
            self.step();
        }
    }

    /// Highest reward among evaluated nodes; ties go to the shorter
    /// sequence, then to the earlier discovery.
    pub fn best(&self) -> usize {
        let mut best = 0;
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            if n.duplicate_of.is_some() {
                continue;
            }
            let b = &self.nodes[best];
            if n.reward > b.reward || (n.reward == b.reward && n.depth < b.depth) {
                best = i;
            }
        }
        best
    }

    pub fn sequence(&self, mut idx: usize) -> Vec<&Match> {
        let mut out = Vec::new();
        while let Some(m) = &self.nodes[idx].action {
            out.push(m);
            idx = self.nodes[idx].parent.expect("non-root node has a parent");
        }
        out.reverse();
        out
    }

    pub fn report(&self, timing: bool) -> serde_json::Value {
        let best = self.best();
        let b = &self.nodes[best];
        let ev = b.evaluation.as_ref().expect("best node is evaluated");
        let max_depth = self.nodes.iter().map(|n| n.depth).max().unwrap_or(0);
        let mut hist = vec![0u64; max_depth + 1];
        for n in &self.nodes {
            hist[n.depth] += 1;
        }
        let sequence: Vec<_> = self.sequence(best).iter().map(|m| json!({"rule": m.rule, "path": m.path})).collect();
        let mut v = json!({
            "baseline": {
                "nodes": self.baseline.total,
                "per_instance": self.baseline.per_instance,
                "spec_text": pretty(&self.nodes[0].spec, false),
            },
            "best": {
                "spec_text": pretty(&b.spec, false),
                "sequence": sequence,
                "nodes": ev.total,
                "per_instance": ev.per_instance,
                "reward": b.reward,
            },
            "tree_summary": {
                "expanded": self.nodes.len() - 1,
                "evaluations": self.evaluations,
                "duplicates": self.duplicates,
                "root_visits": self.nodes[0].visits,
                "depth_histogram": hist,
            },
        });
        if timing {
            v["elapsed_millis"] = json!(self.started.elapsed().as_millis() as u64);
        }
        v
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph search {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let head = n.action.as_ref().map_or("root".to_string(), |m| format!("{} {:?}", m.rule, m.path));
            let dup = if n.duplicate_of.is_some() { " dup" } else { "" };
            let _ = writeln!(s, "  n{i} [label=\"{head}\\nn={} mean={:.3}{dup}\"];", n.visits, n.mean());
            if let Some(p) = n.parent {
                let _ = writeln!(s, "  n{p} -> n{i};");
            }
        }
        s.push_str("}\n");
        s
    }
}

pub fn explore(spec: &SpecAst, cfg: ExploreConfig) -> Result<Explorer, ExploreError> {
    let mut ex = Explorer::new(spec, cfg)?;
    ex.run();
    Ok(ex)
}
