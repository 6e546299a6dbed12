//! Concrete syntax: functor expressions, elements, atom sets, and relation
//! literals. Element parsing is shape-directed — the same braces read as a
//! finite set or as a distribution support depending on the functor position
//! they appear in — and everything parsed round-trips through the canonical
//! printer.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, BigRational};

use crate::error::{Error, Result};
use crate::finset::{FinSet, Relation};
use crate::functor::FunctorExpr;
use crate::value::{is_valid_atom, Value};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, expected: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == expected => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => Err(self.err(format!("expected '{expected}', found '{c}'"))),
            None => Err(self.err(format!("expected '{expected}', found end of input"))),
        }
    }

    fn try_eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.pos += expected.len_utf8();
            true
        } else {
            false
        }
    }

    /// Maximal run of atom characters, or None if the next character is not
    /// one.
    fn word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        if self.pos > start {
            Some(&self.src[start..self.pos])
        } else {
            None
        }
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| self.err("number is too large"))
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.err(format!("unexpected trailing '{c}'"))),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { at: self.pos, message: message.into() }
    }
}

/// Parses a functor expression. Named carriers (`Const(NAME)`, `Lts(NAME)`)
/// are resolved through `env`.
pub fn parse_functor(text: &str, env: &BTreeMap<String, FinSet>) -> Result<FunctorExpr> {
    let mut cur = Cursor::new(text);
    let f = functor(&mut cur, env)?;
    cur.expect_end()?;
    Ok(f)
}

fn functor(cur: &mut Cursor, env: &BTreeMap<String, FinSet>) -> Result<FunctorExpr> {
    cur.skip_ws();
    let at = cur.pos;
    let head = cur.word().ok_or_else(|| cur.err("expected a functor name"))?;
    match head {
        "Id" => Ok(FunctorExpr::Identity),
        "P32" => Ok(FunctorExpr::AtMostTwoOfThree),
        "Const" => {
            cur.eat('(')?;
            let set = set_or_name(cur, env)?;
            cur.eat(')')?;
            Ok(FunctorExpr::Constant(set))
        }
        "Lts" => {
            cur.eat('(')?;
            let labels = set_or_name(cur, env)?;
            cur.eat(')')?;
            Ok(FunctorExpr::labelled_transitions(labels))
        }
        "Times" | "Plus" | "Comp" => {
            cur.eat('(')?;
            let f = functor(cur, env)?;
            cur.eat(',')?;
            let g = functor(cur, env)?;
            cur.eat(')')?;
            Ok(match head {
                "Times" => FunctorExpr::product(f, g),
                "Plus" => FunctorExpr::coproduct(f, g),
                _ => FunctorExpr::compose(f, g),
            })
        }
        "Pow" => {
            cur.eat('(')?;
            let f = functor(cur, env)?;
            cur.eat(',')?;
            let n = cur.integer()?;
            let n = u32::try_from(n)
                .map_err(|_| cur.err("power exponent is too large"))?;
            cur.eat(')')?;
            Ok(FunctorExpr::power(f, n))
        }
        "Pf" | "Dsub" => {
            cur.eat('(')?;
            let f = functor(cur, env)?;
            cur.eat(')')?;
            Ok(if head == "Pf" {
                FunctorExpr::powerset(f)
            } else {
                FunctorExpr::sub_distribution(f)
            })
        }
        other => Err(Error::Parse {
            at,
            message: format!("unknown functor '{other}'"),
        }),
    }
}

fn set_or_name(cur: &mut Cursor, env: &BTreeMap<String, FinSet>) -> Result<FinSet> {
    if cur.peek() == Some('{') {
        return atom_set(cur);
    }
    let at = cur.pos;
    let name = cur.word().ok_or_else(|| cur.err("expected a set literal or a set name"))?;
    env.get(name).cloned().ok_or_else(|| Error::Parse {
        at,
        message: format!("unknown set name '{name}'"),
    })
}

fn atom_set(cur: &mut Cursor) -> Result<FinSet> {
    cur.eat('{')?;
    let mut names = Vec::new();
    if cur.peek() != Some('}') {
        loop {
            let name = cur.word().ok_or_else(|| cur.err("expected an atom"))?;
            names.push(name.to_string());
            if !cur.try_eat(',') {
                break;
            }
        }
    }
    cur.eat('}')?;
    FinSet::of_atoms(names)
}

/// Parses `{a, b, c}` into a finite set of atoms, in the written order.
pub fn parse_atom_set(text: &str) -> Result<FinSet> {
    let mut cur = Cursor::new(text);
    let set = atom_set(&mut cur)?;
    cur.expect_end()?;
    Ok(set)
}

/// Surface syntax of an element, before shapes are known. The one genuine
/// ambiguity is `{}`, which is an empty set or an empty distribution
/// depending on the position it elaborates into.
#[derive(Debug, Clone)]
enum Raw {
    Atom(String),
    Pair(Box<Raw>, Box<Raw>),
    Inl(Box<Raw>),
    Inr(Box<Raw>),
    Tuple(Vec<Raw>),
    Set(Vec<Raw>),
    Dist(Vec<(Raw, BigRational)>),
    Triple(Box<Raw>, Box<Raw>, Box<Raw>),
}

fn describe(raw: &Raw) -> &'static str {
    match raw {
        Raw::Atom(_) => "an atom",
        Raw::Pair(..) => "a pair",
        Raw::Inl(_) => "a left injection",
        Raw::Inr(_) => "a right injection",
        Raw::Tuple(_) => "a tuple",
        Raw::Set(_) => "a set literal",
        Raw::Dist(_) => "a distribution literal",
        Raw::Triple(..) => "a triple",
    }
}

fn raw_value(cur: &mut Cursor) -> Result<Raw> {
    match cur.peek() {
        Some('(') => {
            cur.eat('(')?;
            let a = raw_value(cur)?;
            cur.eat(',')?;
            let b = raw_value(cur)?;
            cur.eat(')')?;
            Ok(Raw::Pair(Box::new(a), Box::new(b)))
        }
        Some('[') => {
            cur.eat('[')?;
            let mut items = Vec::new();
            if cur.peek() != Some(']') {
                loop {
                    items.push(raw_value(cur)?);
                    if !cur.try_eat(',') {
                        break;
                    }
                }
            }
            cur.eat(']')?;
            Ok(Raw::Tuple(items))
        }
        Some('<') => {
            cur.eat('<')?;
            let a = raw_value(cur)?;
            cur.eat(',')?;
            let b = raw_value(cur)?;
            cur.eat(',')?;
            let c = raw_value(cur)?;
            cur.eat('>')?;
            Ok(Raw::Triple(Box::new(a), Box::new(b), Box::new(c)))
        }
        Some('{') => braces(cur),
        _ => {
            let at = cur.pos;
            let word = cur
                .word()
                .ok_or_else(|| cur.err("expected an element"))?;
            if (word == "inl" || word == "inr") && cur.src[cur.pos..].starts_with('(') {
                cur.eat('(')?;
                let inner = raw_value(cur)?;
                cur.eat(')')?;
                return Ok(if word == "inl" {
                    Raw::Inl(Box::new(inner))
                } else {
                    Raw::Inr(Box::new(inner))
                });
            }
            if !is_valid_atom(word) {
                return Err(Error::Parse { at, message: format!("invalid atom '{word}'") });
            }
            Ok(Raw::Atom(word.to_string()))
        }
    }
}

/// `{...}` — a set of elements, or a distribution when entries carry `:`
/// weights. Mixing the two styles is rejected.
fn braces(cur: &mut Cursor) -> Result<Raw> {
    cur.eat('{')?;
    if cur.try_eat('}') {
        return Ok(Raw::Set(Vec::new()));
    }
    let first = raw_value(cur)?;
    if cur.try_eat(':') {
        let mut entries = vec![(first, weight(cur)?)];
        while cur.try_eat(',') {
            let key = raw_value(cur)?;
            cur.eat(':')?;
            entries.push((key, weight(cur)?));
        }
        cur.eat('}')?;
        return Ok(Raw::Dist(entries));
    }
    let mut items = vec![first];
    while cur.try_eat(',') {
        items.push(raw_value(cur)?);
        if cur.peek() == Some(':') {
            return Err(cur.err("set entries do not carry weights"));
        }
    }
    cur.eat('}')?;
    Ok(Raw::Set(items))
}

fn weight(cur: &mut Cursor) -> Result<BigRational> {
    let numer = cur.integer()?;
    let denom = if cur.try_eat('/') {
        let d = cur.integer()?;
        if d == 0 {
            return Err(cur.err("weight denominator must be non-zero"));
        }
        d
    } else {
        1
    };
    Ok(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
}

/// Converts the surface form to a value with no shape guidance: braces
/// without weights become sets. Used to look raw text up against a concrete
/// set of known elements.
fn raw_generic(raw: &Raw) -> Result<Value> {
    Ok(match raw {
        Raw::Atom(name) => Value::atom(name.clone()),
        Raw::Pair(a, b) => Value::pair(raw_generic(a)?, raw_generic(b)?),
        Raw::Inl(v) => Value::Inl(Box::new(raw_generic(v)?)),
        Raw::Inr(v) => Value::Inr(Box::new(raw_generic(v)?)),
        Raw::Tuple(items) => {
            Value::Tuple(items.iter().map(raw_generic).collect::<Result<_>>()?)
        }
        Raw::Set(items) => {
            Value::Set(items.iter().map(raw_generic).collect::<Result<_>>()?)
        }
        Raw::Dist(entries) => {
            let mut out = BTreeMap::new();
            for (key, w) in entries {
                if out.insert(raw_generic(key)?, w.clone()).is_some() {
                    return Err(Error::shape("duplicate distribution entry"));
                }
            }
            Value::Dist(out)
        }
        Raw::Triple(a, b, c) => {
            Value::triple(raw_generic(a)?, raw_generic(b)?, raw_generic(c)?)
        }
    })
}

/// Finds the element of `set` the raw text denotes, matching structurally
/// first and by canonical text second (the latter resolves `{}` against
/// whichever empty collection the set actually holds).
fn lookup(set: &FinSet, raw: &Raw, what: &str) -> Result<Value> {
    let generic = raw_generic(raw)?;
    if set.contains(&generic) {
        return Ok(generic);
    }
    let canon = generic.canon();
    let mut found: Option<&Value> = None;
    for candidate in set.iter() {
        if candidate.canon() == canon {
            if found.is_some() {
                return Err(Error::domain(format!("'{canon}' is ambiguous in {what}")));
            }
            found = Some(candidate);
        }
    }
    found
        .cloned()
        .ok_or_else(|| Error::domain(format!("'{canon}' is not an element of {what}")))
}

fn elaborate(
    f: &FunctorExpr,
    raw: &Raw,
    leaf: &dyn Fn(&Raw) -> Result<Value>,
) -> Result<Value> {
    match (f, raw) {
        (FunctorExpr::Identity, r) => leaf(r),
        (FunctorExpr::Constant(a), r) => lookup(a, r, "the constant carrier"),
        (FunctorExpr::Product(f, g), Raw::Pair(a, b)) => {
            Ok(Value::pair(elaborate(f, a, leaf)?, elaborate(g, b, leaf)?))
        }
        (FunctorExpr::Coproduct(f, _), Raw::Inl(v)) => {
            Ok(Value::Inl(Box::new(elaborate(f, v, leaf)?)))
        }
        (FunctorExpr::Coproduct(_, g), Raw::Inr(v)) => {
            Ok(Value::Inr(Box::new(elaborate(g, v, leaf)?)))
        }
        (FunctorExpr::Power(f, n), Raw::Tuple(items)) => {
            if items.len() != *n as usize {
                return Err(Error::shape(format!(
                    "tuple has {} entries, power expects {n}",
                    items.len()
                )));
            }
            Ok(Value::Tuple(
                items.iter().map(|v| elaborate(f, v, leaf)).collect::<Result<_>>()?,
            ))
        }
        (FunctorExpr::Compose(f, g), r) => {
            elaborate(f, r, &|inner| elaborate(g, inner, leaf))
        }
        (FunctorExpr::FinPowerset(f), Raw::Set(items)) => {
            let set: BTreeSet<Value> =
                items.iter().map(|v| elaborate(f, v, leaf)).collect::<Result<_>>()?;
            Ok(Value::Set(set))
        }
        (FunctorExpr::SubDistribution(_), Raw::Set(items)) if items.is_empty() => {
            Ok(Value::Dist(BTreeMap::new()))
        }
        (FunctorExpr::SubDistribution(f), Raw::Dist(entries)) => {
            let mut out = BTreeMap::new();
            for (key, w) in entries {
                if out.insert(elaborate(f, key, leaf)?, w.clone()).is_some() {
                    return Err(Error::shape("duplicate distribution entry"));
                }
            }
            Ok(Value::Dist(out))
        }
        (FunctorExpr::AtMostTwoOfThree, Raw::Triple(a, b, c)) => {
            Ok(Value::triple(leaf(a)?, leaf(b)?, leaf(c)?))
        }
        (f, r) => Err(Error::shape(format!(
            "{} does not match the shape of {f}",
            describe(r)
        ))),
    }
}

/// Parses one element of `F(X)`, elaborating braces by shape and validating
/// the result.
pub fn parse_element(f: &FunctorExpr, x: &FinSet, text: &str) -> Result<Value> {
    let mut cur = Cursor::new(text);
    let raw = raw_value(&mut cur)?;
    cur.expect_end()?;
    let v = elaborate(f, &raw, &|r| lookup(x, r, "the carrier"))?;
    crate::eval::validate_elem(f, x, &v)?;
    Ok(v)
}

/// Parses a relation literal `{(x,y), ...}` over the given carriers.
pub fn parse_relation(left: &FinSet, right: &FinSet, text: &str) -> Result<Relation> {
    let mut cur = Cursor::new(text);
    cur.eat('{')?;
    let mut pairs = Vec::new();
    if cur.peek() != Some('}') {
        loop {
            cur.eat('(')?;
            let a = raw_value(&mut cur)?;
            cur.eat(',')?;
            let b = raw_value(&mut cur)?;
            cur.eat(')')?;
            pairs.push((
                lookup(left, &a, "the left carrier")?,
                lookup(right, &b, "the right carrier")?,
            ));
            if !cur.try_eat(',') {
                break;
            }
        }
    }
    cur.eat('}')?;
    cur.expect_end()?;
    Relation::new(left.clone(), right.clone(), pairs)
}
