//! Finite-domain solving of grounded specifications.

mod brute;
mod csp;
mod search;

use serde::Serialize;
use serde_json::json;

pub use brute::{brute_force, eval_exact, satisfies, TooLarge, BRUTE_FORCE_LIMIT};
pub use csp::{
    flatten, flatten_with_cap, CBin, CExpr, CspVar, FindLayout, FlattenError, GroundCsp, Solution, DEFAULT_TUPLE_CAP,
};
pub use search::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    First,
    All,
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Sat,
    Unsat,
    Optimal,
    NodeBudgetExhausted,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
            Status::Optimal => "optimal",
            Status::NodeBudgetExhausted => "node-budget-exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: Status,
    pub solutions: Vec<Solution>,
    pub objective: Option<i64>,
    /// Value attempts, plus one for the root.
    pub nodes: u64,
    pub failures: u64,
    pub millis: u64,
}

impl SolveResult {
    /// JSON form; `millis` is omitted unless `timing` is set so that runs
    /// can be compared byte for byte.
    pub fn to_json(&self, timing: bool) -> serde_json::Value {
        let mut v = json!({
            "status": self.status,
            "solutions": self.solutions,
            "objective": self.objective,
            "nodes": self.nodes,
            "failures": self.failures,
        });
        if timing {
            v["millis"] = json!(self.millis);
        }
        v
    }
}
