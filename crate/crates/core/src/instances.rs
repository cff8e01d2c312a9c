//! Training instances drawn by rejection sampling from the given domains.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::spec_lang::eval::{eval_bool, eval_int, Env, Val};
use crate::spec_lang::ground::{bounds_of, check_binding, subst_domain};
use crate::spec_lang::{ground, Domain, Expr, Instance, SpecAst, Statement, Value};

/// Upper limit on candidate tuples for a sampled relation.
pub const MAX_SAMPLED_TUPLES: u64 = 1 << 16;

#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub count: usize,
    pub seed: u64,
    /// Inclusion probability for each candidate tuple of a relation given.
    pub density: f64,
    /// Sampling stops at `lo + cap` even when the domain goes further.
    pub cap: i64,
    pub max_rejections: usize,
    /// Overrides of the sampling range for integer givens.
    pub ranges: BTreeMap<String, (i64, i64)>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig { count: 1, seed: 0, density: 0.5, cap: 50, max_rejections: 1000, ranges: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("specification has no givens")]
    NoGivens,
    #[error("density {0} is outside 0..1")]
    Density(f64),
    #[error("gave up after {0} rejected samples; the where clauses may be too tight")]
    RejectionLimit(usize),
    #[error("cannot sample `{name}`: {msg}")]
    Domain { name: String, msg: String },
}

enum Attempt {
    Accept(Instance),
    Reject,
}

fn int_range(name: &str, d: &Domain, cfg: &GeneratorConfig) -> Option<(i64, i64)> {
    let Domain::Int { lo, hi } = d else { return None };
    let lo = lo.as_int()?;
    let hi = match hi {
        Some(h) => h.as_int()?,
        None => i64::MAX,
    };
    let (mut a, mut b) = (lo, hi.min(lo.saturating_add(cfg.cap)));
    if let Some(&(ra, rb)) = cfg.ranges.get(name) {
        a = a.max(ra);
        b = b.min(rb);
    }
    Some((a, b))
}

fn sample_value(
    name: &str,
    d: &Domain,
    cfg: &GeneratorConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Value>, GenerateError> {
    let bad = |msg: &str| GenerateError::Domain { name: name.to_string(), msg: msg.to_string() };
    match d {
        Domain::Bool => Ok(Some(Value::Bool(rng.random_bool(0.5)))),
        Domain::Int { .. } => {
            let (lo, hi) = int_range(name, d, cfg).ok_or_else(|| bad("bounds are not numeric"))?;
            Ok((lo <= hi).then(|| Value::Int(rng.random_range(lo..=hi))))
        }
        Domain::Relation { attrs, components } => {
            let mut ranges = Vec::new();
            for c in components {
                let (lo, hi) = match c {
                    Domain::Int { hi: None, .. } => {
                        int_range(name, c, cfg).ok_or_else(|| bad("bounds are not numeric"))?
                    }
                    _ => bounds_of(c).ok_or_else(|| bad("component bounds are not numeric"))?,
                };
                if lo > hi {
                    return Ok(None);
                }
                ranges.push((lo, hi));
            }
            let total = ranges.iter().try_fold(1u64, |acc, (lo, hi)| acc.checked_mul((hi - lo + 1) as u64));
            let total = total.filter(|&t| t <= MAX_SAMPLED_TUPLES).ok_or_else(|| bad("too many candidate tuples"))?;
            let tuple = |mut k: u64| -> Vec<i64> {
                let mut t = vec![0; ranges.len()];
                for (i, (lo, hi)) in ranges.iter().enumerate().rev() {
                    let w = (hi - lo + 1) as u64;
                    t[i] = lo + (k % w) as i64;
                    k /= w;
                }
                t
            };
            let get = |e: &Option<Expr>| e.as_ref().and_then(Expr::as_int);
            let set: BTreeSet<Vec<i64>> = match get(&attrs.size) {
                Some(k) if k < 0 || k as u64 > total => return Ok(None),
                Some(k) => sample(rng, total as usize, k as usize).into_iter().map(|i| tuple(i as u64)).collect(),
                None => (0..total).filter(|_| rng.random_bool(cfg.density)).map(tuple).collect(),
            };
            let n = set.len() as i64;
            if get(&attrs.min_size).is_some_and(|m| n < m) || get(&attrs.max_size).is_some_and(|m| n > m) {
                return Ok(None);
            }
            Ok(Some(Value::Rel(set)))
        }
        Domain::Ref(_) => Err(bad("unresolved domain alias")),
    }
}

fn attempt(spec: &SpecAst, cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<Attempt, GenerateError> {
    let mut env = Env::new();
    let mut inst = Instance::new();
    for s in &spec.statements {
        match s {
            Statement::Given { names, domain } => {
                for name in names {
                    let d = match subst_domain(domain, &mut env) {
                        Ok(d) => d,
                        Err(_) => return Ok(Attempt::Reject),
                    };
                    let Some(v) = sample_value(name, &d, cfg, rng)? else { return Ok(Attempt::Reject) };
                    let Ok(val) = check_binding(name, &v, &d, &mut env) else { return Ok(Attempt::Reject) };
                    env.values.insert(name.clone(), val);
                    inst.bindings.insert(name.clone(), v);
                }
            }
            Statement::LettingExpr { name, value } => match eval_int(value, &mut env) {
                Ok(v) => {
                    env.values.insert(name.clone(), Val::Int(v));
                }
                Err(_) => return Ok(Attempt::Reject),
            },
            Statement::LettingDomain { name, domain } => match subst_domain(domain, &mut env) {
                Ok(d) => {
                    env.domains.insert(name.clone(), d);
                }
                Err(_) => return Ok(Attempt::Reject),
            },
            Statement::Where(e) if !eval_bool(e, &mut env).unwrap_or(false) => return Ok(Attempt::Reject),
            _ => {}
        }
    }
    Ok(match ground(spec, &inst) {
        Ok(_) => Attempt::Accept(inst),
        Err(_) => Attempt::Reject,
    })
}

/// Draws `cfg.count` instances. Each one satisfies every given domain and
/// where clause and grounds against `spec`.
pub fn sample_instances(spec: &SpecAst, cfg: &GeneratorConfig) -> Result<Vec<Instance>, GenerateError> {
    if spec.givens().next().is_none() {
        return Err(GenerateError::NoGivens);
    }
    if !(0.0..=1.0).contains(&cfg.density) {
        return Err(GenerateError::Density(cfg.density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.count);
    while out.len() < cfg.count {
        let mut rejected = 0;
        loop {
            match attempt(spec, cfg, &mut rng)? {
                Attempt::Accept(inst) => {
                    out.push(inst);
                    break;
                }
                Attempt::Reject => {
                    rejected += 1;
                    if rejected >= cfg.max_rejections {
                        return Err(GenerateError::RejectionLimit(rejected));
                    }
                }
            }
        }
    }
    Ok(out)
}
