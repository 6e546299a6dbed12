//! Object and morphism action of functor expressions.
//!
//! `eval_object` enumerates every element of `F(X)` (refusing, with an exact
//! or lower-bound count, when the result would exceed the configured cap).
//! `eval_morphism` applies `F(f)` to a single element; it is pointwise and
//! never enumerates. Sub-distribution components enumerate on a weight grid
//! (multiples of `1/q`), but the morphism action on distributions is exact
//! and grid-free.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigRational, BigUint, Zero};

use crate::error::{Error, Result};
use crate::finset::{FinFunction, FinSet, Relation};
use crate::functor::{EvalConfig, FunctorExpr};
use crate::value::Value;

/// Sentinel for counts that overflowed: treat as "at least this much".
pub const SATURATED: u128 = u128::MAX >> 1;

fn sat_add(a: u128, b: u128) -> u128 {
    if a >= SATURATED || b >= SATURATED {
        SATURATED
    } else {
        a.checked_add(b).map_or(SATURATED, |v| v.min(SATURATED))
    }
}

fn sat_mul(a: u128, b: u128) -> u128 {
    if a == 0 || b == 0 {
        return 0;
    }
    if a >= SATURATED || b >= SATURATED {
        SATURATED
    } else {
        a.checked_mul(b).map_or(SATURATED, |v| v.min(SATURATED))
    }
}

fn sat_pow(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = sat_mul(acc, base);
        if acc >= SATURATED {
            return SATURATED;
        }
    }
    acc
}

fn sat_pow2(exp: u128) -> u128 {
    if exp >= 126 {
        SATURATED
    } else {
        1u128 << exp
    }
}

/// Number of grid sub-distributions over `n` support candidates:
/// weights are multiples of `1/q` with total at most one, i.e. the number of
/// ways to distribute at most `q` units over `n` cells.
fn sat_grid_distributions(n: u128, q: u64) -> u128 {
    if n >= SATURATED {
        return SATURATED;
    }
    let mut acc: u128 = 1;
    for i in 1..=(q as u128) {
        acc = match acc.checked_mul(sat_add(n, i)) {
            Some(v) if v < SATURATED => v / i,
            _ => return SATURATED,
        };
    }
    acc
}

/// How many elements `F` has at a carrier of the given size. Saturates at
/// [`SATURATED`] instead of overflowing.
pub fn count_elements(f: &FunctorExpr, carrier_size: u128, grid_denominator: u64) -> u128 {
    match f {
        FunctorExpr::Identity => carrier_size,
        FunctorExpr::Constant(a) => a.len() as u128,
        FunctorExpr::Product(f, g) => sat_mul(
            count_elements(f, carrier_size, grid_denominator),
            count_elements(g, carrier_size, grid_denominator),
        ),
        FunctorExpr::Coproduct(f, g) => sat_add(
            count_elements(f, carrier_size, grid_denominator),
            count_elements(g, carrier_size, grid_denominator),
        ),
        FunctorExpr::Power(f, n) => sat_pow(count_elements(f, carrier_size, grid_denominator), *n),
        FunctorExpr::Compose(f, g) => count_elements(
            f,
            count_elements(g, carrier_size, grid_denominator),
            grid_denominator,
        ),
        FunctorExpr::FinPowerset(f) => {
            sat_pow2(count_elements(f, carrier_size, grid_denominator))
        }
        FunctorExpr::SubDistribution(f) => sat_grid_distributions(
            count_elements(f, carrier_size, grid_denominator),
            grid_denominator,
        ),
        // n^3 - n(n-1)(n-2) triples keep at most two distinct entries,
        // which simplifies to n(3n-2).
        FunctorExpr::AtMostTwoOfThree => {
            sat_mul(carrier_size, sat_mul(3, carrier_size).saturating_sub(2))
        }
    }
}

/// True when the functor's value at a carrier actually depends on the
/// carrier. `Power(_, 0)` and constants do not.
fn uses_carrier(f: &FunctorExpr) -> bool {
    match f {
        FunctorExpr::Identity | FunctorExpr::AtMostTwoOfThree => true,
        FunctorExpr::Constant(_) => false,
        FunctorExpr::Power(_, 0) => false,
        FunctorExpr::Power(f, _) | FunctorExpr::FinPowerset(f) | FunctorExpr::SubDistribution(f) => {
            uses_carrier(f)
        }
        FunctorExpr::Product(f, g) | FunctorExpr::Coproduct(f, g) => {
            uses_carrier(f) || uses_carrier(g)
        }
        FunctorExpr::Compose(f, g) => uses_carrier(f) && uses_carrier(g),
    }
}

/// Enumerates all elements of `F(X)` in canonical order.
pub fn eval_object(f: &FunctorExpr, x: &FinSet, cfg: &EvalConfig) -> Result<FinSet> {
    let mut elems = enum_elems(f, x, cfg)?;
    elems.sort_by_cached_key(Value::canon);
    FinSet::new(elems)
}

fn check_count(f: &FunctorExpr, carrier_size: usize, cfg: &EvalConfig) -> Result<u128> {
    let count = count_elements(f, carrier_size as u128, cfg.grid_denominator);
    if count > cfg.cap as u128 {
        return Err(Error::Size { count, exact: count < SATURATED, cap: cfg.cap });
    }
    Ok(count)
}

fn enum_elems(f: &FunctorExpr, x: &FinSet, cfg: &EvalConfig) -> Result<Vec<Value>> {
    let count = check_count(f, x.len(), cfg)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    match f {
        FunctorExpr::Identity => Ok(x.elems().to_vec()),
        FunctorExpr::Constant(a) => Ok(a.elems().to_vec()),
        FunctorExpr::Product(f, g) => {
            let left = enum_elems(f, x, cfg)?;
            let right = enum_elems(g, x, cfg)?;
            let mut out = Vec::with_capacity(left.len() * right.len());
            for a in &left {
                for b in &right {
                    out.push(Value::pair(a.clone(), b.clone()));
                }
            }
            Ok(out)
        }
        FunctorExpr::Coproduct(f, g) => {
            let mut out: Vec<Value> = enum_elems(f, x, cfg)?
                .into_iter()
                .map(|v| Value::Inl(Box::new(v)))
                .collect();
            out.extend(enum_elems(g, x, cfg)?.into_iter().map(|v| Value::Inr(Box::new(v))));
            Ok(out)
        }
        FunctorExpr::Power(_, 0) => Ok(vec![Value::Tuple(Vec::new())]),
        FunctorExpr::Power(f, n) => {
            let base = enum_elems(f, x, cfg)?;
            let mut out: Vec<Vec<Value>> = vec![Vec::new()];
            for _ in 0..*n {
                let mut next = Vec::with_capacity(out.len() * base.len());
                for prefix in &out {
                    for b in &base {
                        let mut tuple = prefix.clone();
                        tuple.push(b.clone());
                        next.push(tuple);
                    }
                }
                out = next;
            }
            Ok(out.into_iter().map(Value::Tuple).collect())
        }
        FunctorExpr::Compose(f, g) => {
            if !uses_carrier(f) {
                return enum_elems(f, &FinSet::empty(), cfg);
            }
            let inner = eval_object(g, x, cfg)?;
            enum_elems(f, &inner, cfg)
        }
        FunctorExpr::FinPowerset(f) => {
            let base = enum_elems(f, x, cfg)?;
            let mut out = Vec::with_capacity(1 << base.len());
            for mask in 0u64..(1u64 << base.len()) {
                let subset: BTreeSet<Value> = base
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, v)| v.clone())
                    .collect();
                out.push(Value::Set(subset));
            }
            Ok(out)
        }
        FunctorExpr::SubDistribution(f) => {
            let base = enum_elems(f, x, cfg)?;
            let q = cfg.grid_denominator;
            let mut out = Vec::new();
            let mut current: Vec<(Value, u64)> = Vec::new();
            grid_distributions(&base, 0, q, &mut current, &mut out, q);
            Ok(out)
        }
        FunctorExpr::AtMostTwoOfThree => {
            let mut out = Vec::new();
            for a in x.iter() {
                for b in x.iter() {
                    for c in x.iter() {
                        let distinct =
                            1 + usize::from(b != a) + usize::from(c != a && c != b);
                        if distinct <= 2 {
                            out.push(Value::triple(a.clone(), b.clone(), c.clone()));
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

fn grid_distributions(
    base: &[Value],
    i: usize,
    remaining: u64,
    current: &mut Vec<(Value, u64)>,
    out: &mut Vec<Value>,
    q: u64,
) {
    if i == base.len() {
        let entries: BTreeMap<Value, BigRational> = current
            .iter()
            .map(|(v, units)| {
                (v.clone(), BigRational::new((*units).into(), q.into()))
            })
            .collect();
        out.push(Value::Dist(entries));
        return;
    }
    for units in 0..=remaining {
        if units > 0 {
            current.push((base[i].clone(), units));
        }
        grid_distributions(base, i + 1, remaining - units, current, out, q);
        if units > 0 {
            current.pop();
        }
    }
}

/// Checks that `t` is a well-formed element of `F(X)`.
pub fn validate_elem(f: &FunctorExpr, x: &FinSet, t: &Value) -> Result<()> {
    validate_with(f, &|v| {
        if x.contains(v) {
            Ok(())
        } else {
            Err(Error::shape(format!("{v} is not a carrier element")))
        }
    }, t)
}

fn validate_with(f: &FunctorExpr, leaf: &dyn Fn(&Value) -> Result<()>, t: &Value) -> Result<()> {
    match (f, t) {
        (FunctorExpr::Identity, v) => leaf(v),
        (FunctorExpr::Constant(a), v) => {
            if a.contains(v) {
                Ok(())
            } else {
                Err(Error::shape(format!("{v} is not in the constant carrier")))
            }
        }
        (FunctorExpr::Product(f, g), Value::Pair(a, b)) => {
            validate_with(f, leaf, a)?;
            validate_with(g, leaf, b)
        }
        (FunctorExpr::Coproduct(f, _), Value::Inl(v)) => validate_with(f, leaf, v),
        (FunctorExpr::Coproduct(_, g), Value::Inr(v)) => validate_with(g, leaf, v),
        (FunctorExpr::Power(f, n), Value::Tuple(vs)) => {
            if vs.len() != *n as usize {
                return Err(Error::shape(format!(
                    "tuple has {} entries, power expects {n}",
                    vs.len()
                )));
            }
            vs.iter().try_for_each(|v| validate_with(f, leaf, v))
        }
        (FunctorExpr::Compose(f, g), v) => {
            validate_with(f, &|inner| validate_with(g, leaf, inner), v)
        }
        (FunctorExpr::FinPowerset(f), Value::Set(vs)) => {
            vs.iter().try_for_each(|v| validate_with(f, leaf, v))
        }
        (FunctorExpr::SubDistribution(f), Value::Dist(entries)) => {
            let mut total = BigRational::zero();
            for (v, w) in entries {
                if w <= &BigRational::zero() {
                    return Err(Error::shape(format!(
                        "distribution entry {v} has non-positive weight"
                    )));
                }
                validate_with(f, leaf, v)?;
                total += w;
            }
            if total > BigRational::from_integer(1.into()) {
                return Err(Error::shape("distribution mass exceeds one"));
            }
            Ok(())
        }
        (FunctorExpr::AtMostTwoOfThree, Value::Triple(a, b, c)) => {
            let distinct = 1
                + usize::from(b != a)
                + usize::from(c.as_ref() != a.as_ref() && c != b);
            if distinct > 2 {
                return Err(Error::shape("triple has three distinct entries"));
            }
            leaf(a)?;
            leaf(b)?;
            leaf(c)
        }
        (f, v) => Err(Error::shape(format!("{v} does not match the shape of {f}"))),
    }
}

/// Applies the functor's action with an arbitrary state mapping at identity
/// positions. This is the workhorse behind [`eval_morphism`] and the
/// symbolic stage construction.
pub fn map_states(
    f: &FunctorExpr,
    apply: &dyn Fn(&Value) -> Result<Value>,
    t: &Value,
) -> Result<Value> {
    match (f, t) {
        (FunctorExpr::Identity, v) => apply(v),
        (FunctorExpr::Constant(_), v) => Ok(v.clone()),
        (FunctorExpr::Product(f, g), Value::Pair(a, b)) => Ok(Value::pair(
            map_states(f, apply, a)?,
            map_states(g, apply, b)?,
        )),
        (FunctorExpr::Coproduct(f, _), Value::Inl(v)) => {
            Ok(Value::Inl(Box::new(map_states(f, apply, v)?)))
        }
        (FunctorExpr::Coproduct(_, g), Value::Inr(v)) => {
            Ok(Value::Inr(Box::new(map_states(g, apply, v)?)))
        }
        (FunctorExpr::Power(f, _), Value::Tuple(vs)) => Ok(Value::Tuple(
            vs.iter().map(|v| map_states(f, apply, v)).collect::<Result<_>>()?,
        )),
        (FunctorExpr::Compose(f, g), v) => {
            map_states(f, &|inner| map_states(g, apply, inner), v)
        }
        (FunctorExpr::FinPowerset(f), Value::Set(vs)) => {
            let mapped: BTreeSet<Value> = vs
                .iter()
                .map(|v| map_states(f, apply, v))
                .collect::<Result<_>>()?;
            Ok(Value::Set(mapped))
        }
        (FunctorExpr::SubDistribution(f), Value::Dist(entries)) => {
            // Fibres that collapse under the mapping have their weights
            // summed, exactly.
            let mut pushed: BTreeMap<Value, BigRational> = BTreeMap::new();
            for (v, w) in entries {
                let target = map_states(f, apply, v)?;
                *pushed.entry(target).or_insert_with(BigRational::zero) += w;
            }
            Ok(Value::Dist(pushed))
        }
        (FunctorExpr::AtMostTwoOfThree, Value::Triple(a, b, c)) => {
            Ok(Value::triple(apply(a)?, apply(b)?, apply(c)?))
        }
        (f, v) => Err(Error::shape(format!("{v} does not match the shape of {f}"))),
    }
}

/// Applies `F(fun)` to one element of `F(dom fun)`.
pub fn eval_morphism(f: &FunctorExpr, fun: &FinFunction, t: &Value) -> Result<Value> {
    map_states(f, &|v| fun.apply(v).cloned(), t)
}

/// Materializes `F(fun)` as a function `F(dom fun) -> F(cod fun)`.
pub fn lift_function(f: &FunctorExpr, fun: &FinFunction, cfg: &EvalConfig) -> Result<FinFunction> {
    let dom = eval_object(f, fun.dom(), cfg)?;
    let cod = eval_object(f, fun.cod(), cfg)?;
    let pairs = dom
        .iter()
        .map(|t| Ok((t.clone(), eval_morphism(f, fun, t)?)))
        .collect::<Result<Vec<_>>>()?;
    FinFunction::from_pairs(dom, cod, pairs)
}

/// The relation lifting of `R` along `F`: the image of
/// `F(R) -> F(X) × F(Y)` under the two projections, as a relation over
/// `eval_object(F,X) × eval_object(F,Y)`.
pub fn relation_lifting(f: &FunctorExpr, r: &Relation, cfg: &EvalConfig) -> Result<Relation> {
    let left = eval_object(f, r.left(), cfg)?;
    let right = eval_object(f, r.right(), cfg)?;
    let (carrier, p, q) = r.span();
    let elems = eval_object(f, &carrier, cfg)?;
    let mut pairs = BTreeSet::new();
    for t in elems.iter() {
        pairs.insert((eval_morphism(f, &p, t)?, eval_morphism(f, &q, t)?));
    }
    Relation::new(left, right, pairs)
}

/// Collects every weight denominator appearing in distribution entries of a
/// value (used to extend the enumeration grid so structure-map weights are
/// representable).
pub fn weight_denominators(v: &Value, acc: &mut BTreeSet<BigUint>) {
    match v {
        Value::Atom(_) => {}
        Value::Pair(a, b) => {
            weight_denominators(a, acc);
            weight_denominators(b, acc);
        }
        Value::Inl(v) | Value::Inr(v) => weight_denominators(v, acc),
        Value::Tuple(vs) => vs.iter().for_each(|v| weight_denominators(v, acc)),
        Value::Set(vs) => vs.iter().for_each(|v| weight_denominators(v, acc)),
        Value::Dist(entries) => {
            for (v, w) in entries {
                acc.insert(w.denom().magnitude().clone());
                weight_denominators(v, acc);
            }
        }
        Value::Triple(a, b, c) => {
            weight_denominators(a, acc);
            weight_denominators(b, acc);
            weight_denominators(c, acc);
        }
    }
}
