//! The functor combinator language and coalgebras for it.
//!
//! A [`FunctorExpr`] denotes an endofunctor on finite sets, built from
//! identity, constants, products, coproducts, finite powers, composition,
//! finite powerset, finitely-supported sub-distributions, and the
//! triples-with-at-most-two-distinct-entries functor.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::finset::FinSet;
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctorExpr {
    /// `X ↦ X`.
    Identity,
    /// `X ↦ A` for a fixed finite set `A`.
    Constant(FinSet),
    /// `X ↦ F(X) × G(X)`.
    Product(Box<FunctorExpr>, Box<FunctorExpr>),
    /// `X ↦ F(X) + G(X)`.
    Coproduct(Box<FunctorExpr>, Box<FunctorExpr>),
    /// `X ↦ F(X)^n`.
    Power(Box<FunctorExpr>, u32),
    /// `X ↦ F(G(X))`.
    Compose(Box<FunctorExpr>, Box<FunctorExpr>),
    /// `X ↦ { finite subsets of F(X) }`.
    FinPowerset(Box<FunctorExpr>),
    /// `X ↦ { finitely-supported sub-distributions on F(X) }`:
    /// positive rational weights summing to at most one.
    SubDistribution(Box<FunctorExpr>),
    /// `X ↦ { (a,b,c) ∈ X³ | |{a,b,c}| ≤ 2 }`.
    AtMostTwoOfThree,
}

impl FunctorExpr {
    pub fn product(f: FunctorExpr, g: FunctorExpr) -> Self {
        FunctorExpr::Product(Box::new(f), Box::new(g))
    }

    pub fn coproduct(f: FunctorExpr, g: FunctorExpr) -> Self {
        FunctorExpr::Coproduct(Box::new(f), Box::new(g))
    }

    pub fn compose(f: FunctorExpr, g: FunctorExpr) -> Self {
        FunctorExpr::Compose(Box::new(f), Box::new(g))
    }

    pub fn powerset(f: FunctorExpr) -> Self {
        FunctorExpr::FinPowerset(Box::new(f))
    }

    pub fn sub_distribution(f: FunctorExpr) -> Self {
        FunctorExpr::SubDistribution(Box::new(f))
    }

    pub fn power(f: FunctorExpr, n: u32) -> Self {
        FunctorExpr::Power(Box::new(f), n)
    }

    /// The labelled-transition-system functor over a label set:
    /// `Pf(Times(Const(L),Id))`.
    pub fn labelled_transitions(labels: FinSet) -> Self {
        FunctorExpr::powerset(FunctorExpr::product(
            FunctorExpr::Constant(labels),
            FunctorExpr::Identity,
        ))
    }

    /// Recognizes the labelled-transition-system shape and returns its
    /// label set.
    pub fn as_lts(&self) -> Option<&FinSet> {
        if let FunctorExpr::FinPowerset(inner) = self {
            if let FunctorExpr::Product(l, r) = inner.as_ref() {
                if let (FunctorExpr::Constant(labels), FunctorExpr::Identity) =
                    (l.as_ref(), r.as_ref())
                {
                    return Some(labels);
                }
            }
        }
        None
    }

    /// True when the expression contains a sub-distribution combinator
    /// anywhere; such functors enumerate on a weight grid.
    pub fn mentions_distributions(&self) -> bool {
        match self {
            FunctorExpr::Identity | FunctorExpr::Constant(_) | FunctorExpr::AtMostTwoOfThree => {
                false
            }
            FunctorExpr::SubDistribution(_) => true,
            FunctorExpr::Product(f, g)
            | FunctorExpr::Coproduct(f, g)
            | FunctorExpr::Compose(f, g) => {
                f.mentions_distributions() || g.mentions_distributions()
            }
            FunctorExpr::Power(f, _) | FunctorExpr::FinPowerset(f) => f.mentions_distributions(),
        }
    }
}

impl fmt::Display for FunctorExpr {
    /// Canonical prefix form, e.g. `Pf(Times(Const({a,b}),Id))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctorExpr::Identity => write!(f, "Id"),
            FunctorExpr::Constant(a) => {
                let parts: Vec<String> = a.iter().map(Value::canon).collect();
                write!(f, "Const({{{}}})", parts.join(","))
            }
            FunctorExpr::Product(a, b) => write!(f, "Times({a},{b})"),
            FunctorExpr::Coproduct(a, b) => write!(f, "Plus({a},{b})"),
            FunctorExpr::Power(a, n) => write!(f, "Pow({a},{n})"),
            FunctorExpr::Compose(a, b) => write!(f, "Comp({a},{b})"),
            FunctorExpr::FinPowerset(a) => write!(f, "Pf({a})"),
            FunctorExpr::SubDistribution(a) => write!(f, "Dsub({a})"),
            FunctorExpr::AtMostTwoOfThree => write!(f, "P32"),
        }
    }
}

/// Knobs for enumeration: the element cap and the weight grid used when
/// sub-distributions are enumerated (weights are multiples of
/// `1/grid_denominator`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalConfig {
    pub cap: u64,
    pub grid_denominator: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { cap: 200_000, grid_denominator: 2 }
    }
}

impl EvalConfig {
    pub fn with_cap(cap: u64) -> Self {
        EvalConfig { cap, ..Default::default() }
    }
}

/// A coalgebra: a carrier together with a structure map into the functor
/// applied to the carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalgebra {
    functor: FunctorExpr,
    carrier: FinSet,
    structure: BTreeMap<Value, Value>,
}

impl Coalgebra {
    /// Validates that every carrier element has a structure value of the
    /// right shape.
    pub fn new(
        functor: FunctorExpr,
        carrier: FinSet,
        structure: BTreeMap<Value, Value>,
    ) -> Result<Self> {
        for state in carrier.iter() {
            let behaviour = structure.get(state).ok_or_else(|| {
                Error::domain(format!("state {state} has no structure value"))
            })?;
            crate::eval::validate_elem(&functor, &carrier, behaviour).map_err(|e| {
                Error::shape(format!("structure value for state {state}: {e}"))
            })?;
        }
        for state in structure.keys() {
            if !carrier.contains(state) {
                return Err(Error::domain(format!("{state} is not a carrier element")));
            }
        }
        Ok(Coalgebra { functor, carrier, structure })
    }

    pub fn functor(&self) -> &FunctorExpr {
        &self.functor
    }

    pub fn carrier(&self) -> &FinSet {
        &self.carrier
    }

    pub fn behaviour(&self, state: &Value) -> Result<&Value> {
        self.structure
            .get(state)
            .ok_or_else(|| Error::domain(format!("{state} is not a carrier element")))
    }

    pub fn structure(&self) -> &BTreeMap<Value, Value> {
        &self.structure
    }
}
