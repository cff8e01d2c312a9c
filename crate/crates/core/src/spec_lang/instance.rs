//! Parameter bindings and their `.param` / JSON file formats.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use super::lexer::{tokenize, Tok};
use super::SpecError;

/// An instance or solution value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Rel(BTreeSet<Vec<i64>>),
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => s.serialize_i64(*v),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Rel(tuples) => {
                let mut seq = s.serialize_seq(Some(tuples.len()))?;
                for t in tuples {
                    if t.len() == 1 {
                        seq.serialize_element(&t[0])?;
                    } else {
                        seq.serialize_element(t)?;
                    }
                }
                seq.end()
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Rel(tuples) => {
                let parts: Vec<String> = tuples
                    .iter()
                    .map(|t| {
                        let inner: Vec<String> = t.iter().map(|v| v.to_string()).collect();
                        if t.len() == 1 {
                            inner[0].clone()
                        } else {
                            format!("({})", inner.join(","))
                        }
                    })
                    .collect();
                let arity1 = tuples.iter().next().is_some_and(|t| t.len() == 1);
                let kw = if arity1 { "set" } else { "relation" };
                write!(f, "{kw} {{{}}}", parts.join(", "))
            }
        }
    }
}

/// Bindings from given names to values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Instance {
    pub bindings: BTreeMap<String, Value>,
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.bindings.len()))?;
        for (k, v) in &self.bindings {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl Instance {
    pub fn new() -> Instance {
        Instance::default()
    }

    pub fn with(mut self, name: &str, v: Value) -> Instance {
        self.bindings.insert(name.to_string(), v);
        self
    }

    /// Reads either format, choosing JSON when the text starts with `{`.
    pub fn from_text(text: &str) -> Result<Instance, SpecError> {
        if text.trim_start().starts_with('{') {
            Instance::from_json(text)
        } else {
            Instance::from_param(text)
        }
    }

    /// Text of `letting name be value` lines.
    pub fn to_param(&self) -> String {
        self.bindings.iter().map(|(k, v)| format!("letting {k} be {v}\n")).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Instance, SpecError> {
        let bad = |msg: String| SpecError::Syntax { line: 1, col: 1, msg };
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| SpecError::Syntax {
            line: e.line(),
            col: e.column(),
            msg: e.to_string(),
        })?;
        let obj = v.as_object().ok_or_else(|| bad("instance JSON must be an object".into()))?;
        let mut inst = Instance::new();
        for (k, v) in obj {
            let value = match v {
                serde_json::Value::Number(n) => {
                    Value::Int(n.as_i64().ok_or_else(|| bad(format!("`{k}` is not an integer")))?)
                }
                serde_json::Value::Bool(b) => Value::Bool(*b),
                serde_json::Value::Array(items) => {
                    let mut set = BTreeSet::new();
                    for it in items {
                        let t = match it {
                            serde_json::Value::Number(n) => {
                                vec![n.as_i64().ok_or_else(|| bad(format!("bad element in `{k}`")))?]
                            }
                            serde_json::Value::Array(xs) => xs
                                .iter()
                                .map(|x| x.as_i64().ok_or_else(|| bad(format!("bad element in `{k}`"))))
                                .collect::<Result<_, _>>()?,
                            _ => return Err(bad(format!("bad element in `{k}`"))),
                        };
                        set.insert(t);
                    }
                    Value::Rel(set)
                }
                _ => return Err(bad(format!("unsupported value for `{k}`"))),
            };
            inst.bindings.insert(k.clone(), value);
        }
        Ok(inst)
    }

    pub fn from_param(text: &str) -> Result<Instance, SpecError> {
        let toks = tokenize(text)?;
        let mut i = 0;
        let mut inst = Instance::new();
        let err = |i: usize, msg: &str| {
            let t = &toks[i];
            SpecError::Syntax { line: t.line, col: t.col, msg: msg.to_string() }
        };
        let kw = |i: usize, s: &str| matches!(&toks[i].tok, Tok::Ident(x) if x == s);
        let sym = |i: usize, s: &str| matches!(&toks[i].tok, Tok::Sym(x) if *x == s);
        let int = |i: &mut usize| -> Result<i64, SpecError> {
            let neg = sym(*i, "-");
            if neg {
                *i += 1;
            }
            match toks[*i].tok {
                Tok::Int(v) => {
                    *i += 1;
                    Ok(if neg { -v } else { v })
                }
                _ => Err(err(*i, "expected an integer")),
            }
        };
        while toks[i].tok != Tok::Eof {
            if !kw(i, "letting") {
                return Err(err(i, "expected `letting`"));
            }
            i += 1;
            let Tok::Ident(name) = toks[i].tok.clone() else {
                return Err(err(i, "expected a name"));
            };
            i += 1;
            if !kw(i, "be") {
                return Err(err(i, "expected `be`"));
            }
            i += 1;
            let value = if kw(i, "true") || kw(i, "false") {
                i += 1;
                Value::Bool(kw(i - 1, "true"))
            } else if kw(i, "relation") || kw(i, "set") || sym(i, "{") {
                if !sym(i, "{") {
                    i += 1;
                }
                if !sym(i, "{") {
                    return Err(err(i, "expected `{`"));
                }
                i += 1;
                let mut set = BTreeSet::new();
                while !sym(i, "}") {
                    let t = if sym(i, "(") {
                        i += 1;
                        let mut t = vec![int(&mut i)?];
                        while sym(i, ",") {
                            i += 1;
                            t.push(int(&mut i)?);
                        }
                        if !sym(i, ")") {
                            return Err(err(i, "expected `)`"));
                        }
                        i += 1;
                        t
                    } else {
                        vec![int(&mut i)?]
                    };
                    set.insert(t);
                    if sym(i, ",") {
                        i += 1;
                    } else if !sym(i, "}") {
                        return Err(err(i, "expected `,` or `}`"));
                    }
                }
                i += 1;
                Value::Rel(set)
            } else {
                Value::Int(int(&mut i)?)
            };
            if inst.bindings.insert(name.clone(), value).is_some() {
                return Err(err(i - 1, &format!("`{name}` bound twice")));
            }
        }
        Ok(inst)
    }
}
