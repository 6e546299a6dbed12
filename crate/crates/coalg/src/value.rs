//! The universal element representation.
//!
//! A [`Value`] is anything that can live inside a finite carrier: a named
//! atom, or a structured element produced by applying a functor expression
//! (pairs, tagged sums, tuples, finite sets, finitely-supported
//! sub-distributions, triples). Carriers built by `eval_object` contain
//! structured values, so the same type serves both for states and for the
//! behaviours assigned to them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::BigRational;
use num::One;

/// One element of a finite set.
///
/// The derived `Ord` is structural and only used internally (for canonical
/// storage in sets and maps). Public enumeration order is lexicographic on
/// [`Value::canon`], the canonical text form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    /// A named element; names match `[A-Za-z0-9_']+`.
    Atom(String),
    /// An element of a binary product.
    Pair(Box<Value>, Box<Value>),
    /// Left injection into a binary coproduct.
    Inl(Box<Value>),
    /// Right injection into a binary coproduct.
    Inr(Box<Value>),
    /// An element of a finite power (fixed-length tuple).
    Tuple(Vec<Value>),
    /// An element of the finite powerset.
    Set(BTreeSet<Value>),
    /// A finitely-supported sub-distribution: positive rational weights,
    /// total at most one. Zero-weight entries are never stored.
    Dist(BTreeMap<Value, BigRational>),
    /// A triple with at most two distinct entries.
    Triple(Box<Value>, Box<Value>, Box<Value>),
}

impl Value {
    pub fn atom(name: impl Into<String>) -> Self {
        Value::Atom(name.into())
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn triple(a: Value, b: Value, c: Value) -> Self {
        Value::Triple(Box::new(a), Box::new(b), Box::new(c))
    }

    /// Canonical text form. Set and distribution entries are printed sorted
    /// by their own canonical form, so equal values always print identically.
    pub fn canon(&self) -> String {
        let mut out = String::new();
        self.write_canon(&mut out);
        out
    }

    fn write_canon(&self, out: &mut String) {
        match self {
            Value::Atom(name) => out.push_str(name),
            Value::Pair(a, b) => {
                out.push('(');
                a.write_canon(out);
                out.push(',');
                b.write_canon(out);
                out.push(')');
            }
            Value::Inl(v) => {
                out.push_str("inl(");
                v.write_canon(out);
                out.push(')');
            }
            Value::Inr(v) => {
                out.push_str("inr(");
                v.write_canon(out);
                out.push(')');
            }
            Value::Tuple(vs) => {
                out.push('[');
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    v.write_canon(out);
                }
                out.push(']');
            }
            Value::Set(vs) => {
                let mut parts: Vec<String> = vs.iter().map(Value::canon).collect();
                parts.sort();
                out.push('{');
                out.push_str(&parts.join(","));
                out.push('}');
            }
            Value::Dist(entries) => {
                let mut parts: Vec<String> = entries
                    .iter()
                    .map(|(v, w)| format!("{}:{}", v.canon(), rational_str(w)))
                    .collect();
                parts.sort();
                out.push('{');
                out.push_str(&parts.join(","));
                out.push('}');
            }
            Value::Triple(a, b, c) => {
                out.push('<');
                a.write_canon(out);
                out.push(',');
                b.write_canon(out);
                out.push(',');
                c.write_canon(out);
                out.push('>');
            }
        }
    }

    /// Total weight of a distribution value; `None` for any other shape.
    pub fn mass(&self) -> Option<BigRational> {
        match self {
            Value::Dist(entries) => Some(entries.values().sum()),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canon())
    }
}

/// Reduced rational as text: `2/3`, or just `2` when the denominator is one.
pub fn rational_str(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True for names the element grammar can round-trip.
pub fn is_valid_atom(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}
