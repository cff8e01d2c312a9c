//! The Emini specification language: parsing, checking, printing, grounding.

pub mod ast;
mod check;
pub mod eval;
pub(crate) mod ground;
pub mod instance;
mod lexer;
mod parser;
pub mod pretty;
pub mod tree;

use std::fmt;

use thiserror::Error;

pub use ast::*;
pub use check::{check, Ty};
pub use ground::{ground, GroundError};
pub use instance::{Instance, Value};
pub use parser::{parse, parse_unchecked};
pub use pretty::{expr_to_string, pretty};

/// Optional source position for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Loc(Option<(usize, usize)>);

impl Loc {
    pub fn at(line: usize, col: usize) -> Loc {
        Loc(Some((line, col)))
    }

    pub fn unknown() -> Loc {
        Loc(None)
    }

    pub fn line(self) -> Option<usize> {
        self.0.map(|(l, _)| l)
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some((l, c)) => write!(f, " at {l}:{c}"),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unresolved identifier `{name}`{loc}")]
    Unresolved { name: String, loc: Loc },
    #[error("duplicate declaration of `{name}`{loc}")]
    Duplicate { name: String, loc: Loc },
    #[error("type error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Type { stmt: Option<usize>, line: Option<usize>, msg: String },
}

impl SpecError {
    /// Source line of the error, when known.
    pub fn line(&self) -> Option<usize> {
        match self {
            SpecError::Syntax { line, .. } => Some(*line),
            SpecError::Unresolved { loc, .. } | SpecError::Duplicate { loc, .. } => loc.line(),
            SpecError::Type { line, .. } => *line,
        }
    }
}
