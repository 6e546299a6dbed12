//! Bisimulations presented as pullbacks of homomorphism cospans.
//!
//! A relation qualifies under this notion when there is a third system
//! together with homomorphisms from both sides whose pullback is exactly the
//! relation. Unlike the local notions this quantifies over systems, so the
//! checker is a bounded search: a fast path glues the relation's span by
//! pushout and tries to induce a structure map on the classes, and the
//! complete phase enumerates partitions of the disjoint union of the two
//! carriers. Restricting to partitions loses nothing: any witnessing cospan
//! can be replaced by the image factorization of its copairing, and the
//! induced map on a non-empty class is forced by its members.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::eval::eval_morphism;
use crate::finset::{
    equivalence_closure, pullback, pushout, quotient_by_equivalence, FinFunction, FinSet,
    Relation,
};
use crate::functor::{Coalgebra, FunctorExpr};
use crate::value::Value;

use super::CoalgebraPair;

/// A certificate: the third system and the two homomorphisms into it.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWitness {
    pub apex: FinSet,
    pub left_hom: FinFunction,
    pub right_hom: FinFunction,
    pub apex_structure: BTreeMap<Value, Value>,
}

impl KernelWitness {
    /// The witnessing system as a standalone coalgebra.
    pub fn apex_coalgebra(&self, functor: &FunctorExpr) -> Result<Coalgebra> {
        Coalgebra::new(functor.clone(), self.apex.clone(), self.apex_structure.clone())
    }

    /// Re-checks the certificate from scratch: both legs must be
    /// homomorphisms into the apex system and their pullback must be exactly
    /// `r`. Returns `false` on any mismatch rather than erroring, so a
    /// tampered witness is reported, not crashed on.
    pub fn verify(&self, pair: &CoalgebraPair, r: &Relation) -> Result<bool> {
        let f = pair.functor();
        if !self.left_hom.dom().same_elements(pair.left().carrier())
            || !self.right_hom.dom().same_elements(pair.right().carrier())
            || !self.left_hom.cod().same_elements(&self.apex)
            || !self.right_hom.cod().same_elements(&self.apex)
        {
            return Ok(false);
        }
        if self.apex_structure.len() != self.apex.len()
            || !self.apex.iter().all(|w| self.apex_structure.contains_key(w))
        {
            return Ok(false);
        }
        for x in pair.left().carrier().iter() {
            let mapped = eval_morphism(f, &self.left_hom, pair.left().behaviour(x)?)?;
            if mapped != self.apex_structure[self.left_hom.apply(x)?] {
                return Ok(false);
            }
        }
        for y in pair.right().carrier().iter() {
            let mapped = eval_morphism(f, &self.right_hom, pair.right().behaviour(y)?)?;
            if mapped != self.apex_structure[self.right_hom.apply(y)?] {
                return Ok(false);
            }
        }
        Ok(pullback(&self.left_hom, &self.right_hom)? == *r)
    }
}

/// Outcome of the bounded search. Deliberately never a flat "no": the
/// negative verdict always names the bound the search ran under, and it is
/// the reader's business whether that bound settles the question. (For the
/// functors expressible here it does once the bound reaches the total
/// carrier size — any witness restricts to a jointly-surjective one over the
/// same relation — but the verdict type does not encode that argument.)
#[derive(Debug, Clone, PartialEq)]
pub enum BoundedVerdict {
    /// A witnessing cospan was found.
    Witness(Box<KernelWitness>),
    /// No witness with at most this many apex states.
    NotFoundWithinBound(usize),
}

impl BoundedVerdict {
    pub fn is_witnessed(&self) -> bool {
        matches!(self, BoundedVerdict::Witness(_))
    }
}

fn tag_left(x: &Value) -> Value {
    Value::Inl(Box::new(x.clone()))
}

fn tag_right(y: &Value) -> Value {
    Value::Inr(Box::new(y.clone()))
}

/// Tries to induce a structure map on the apex of a candidate cospan: each
/// apex state takes the pushforward behaviour of its preimages, and all
/// preimages must agree. `None` when they disagree or an apex state has no
/// preimage at all.
fn induced_structure(
    pair: &CoalgebraPair,
    left_leg: &FinFunction,
    right_leg: &FinFunction,
) -> Result<Option<BTreeMap<Value, Value>>> {
    let f = pair.functor();
    let mut structure: BTreeMap<Value, Value> = BTreeMap::new();
    for x in pair.left().carrier().iter() {
        let class = left_leg.apply(x)?.clone();
        let candidate = eval_morphism(f, left_leg, pair.left().behaviour(x)?)?;
        match structure.get(&class) {
            None => {
                structure.insert(class, candidate);
            }
            Some(existing) if *existing == candidate => {}
            Some(_) => return Ok(None),
        }
    }
    for y in pair.right().carrier().iter() {
        let class = right_leg.apply(y)?.clone();
        let candidate = eval_morphism(f, right_leg, pair.right().behaviour(y)?)?;
        match structure.get(&class) {
            None => {
                structure.insert(class, candidate);
            }
            Some(existing) if *existing == candidate => {}
            Some(_) => return Ok(None),
        }
    }
    if structure.len() < left_leg.cod().len() {
        return Ok(None);
    }
    Ok(Some(structure))
}

/// Glues the relation's span by pushout and tries to make the glued object a
/// system. On success, also returns the pullback of the glued legs, which
/// contains the relation and may be strictly larger.
pub fn pushout_step(
    pair: &CoalgebraPair,
    r: &Relation,
) -> Result<Option<(KernelWitness, Relation)>> {
    pair.admits(r)?;
    let (_, p, q) = r.span();
    let glued = pushout(&p, &q)?;
    match induced_structure(pair, glued.left_leg(), glued.right_leg())? {
        None => Ok(None),
        Some(structure) => {
            let pulled = pullback(glued.left_leg(), glued.right_leg())?;
            let witness = KernelWitness {
                apex: glued.apex().clone(),
                left_hom: glued.left_leg().clone(),
                right_hom: glued.right_leg().clone(),
                apex_structure: structure,
            };
            Ok(Some((witness, pulled)))
        }
    }
}

/// Runs `visit` on every partition of `n` items into at most `max_blocks`
/// non-empty blocks, in restricted-growth order, stopping at the first
/// `Some`.
fn search_partitions<T>(
    n: usize,
    max_blocks: usize,
    visit: &mut dyn FnMut(&[usize], usize) -> Result<Option<T>>,
) -> Result<Option<T>> {
    fn go<T>(
        assign: &mut Vec<usize>,
        used: usize,
        n: usize,
        max_blocks: usize,
        visit: &mut dyn FnMut(&[usize], usize) -> Result<Option<T>>,
    ) -> Result<Option<T>> {
        if assign.len() == n {
            return visit(assign, used);
        }
        let highest_new = used.min(max_blocks.saturating_sub(1));
        for block in 0..=highest_new {
            assign.push(block);
            let found = go(assign, used.max(block + 1), n, max_blocks, visit)?;
            assign.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
    if n == 0 {
        return visit(&[], 0);
    }
    if max_blocks == 0 {
        return Ok(None);
    }
    go(&mut Vec::with_capacity(n), 0, n, max_blocks, visit)
}

/// The enumeration phase stops after this many partitions; the verdict
/// stays `NotFoundWithinBound`. The pushout phase, which runs first and is
/// never truncated, already finds every witness the enumeration could (its
/// legs pull back to the difunctional closure, and merging states on one
/// side never repairs a behaviour disagreement), so the truncation costs
/// completeness nothing — it keeps the worst case bounded on large inputs.
const PARTITION_VISIT_BUDGET: usize = 50_000;

/// Bounded search for a witnessing cospan whose pullback is exactly `r`.
///
/// The fast path reuses [`pushout_step`]. The enumeration phase walks
/// partitions of the disjoint union of the carriers into at most `bound`
/// blocks (default: one block per state) and keeps only those whose cross
/// part equals `r` and whose classes agree on behaviour. The partition
/// count grows like the Bell numbers, so the walk is also budgeted by
/// [`PARTITION_VISIT_BUDGET`].
pub fn kernel_bisimulation_search(
    pair: &CoalgebraPair,
    r: &Relation,
    bound: Option<usize>,
    _cfg: &crate::functor::EvalConfig,
) -> Result<BoundedVerdict> {
    pair.admits(r)?;
    if let Some((witness, pulled)) = pushout_step(pair, r)? {
        if pulled == *r {
            return Ok(BoundedVerdict::Witness(Box::new(witness)));
        }
    }

    let xs = pair.left().carrier().elems();
    let ys = pair.right().carrier().elems();
    let total = xs.len() + ys.len();
    let cap = bound.unwrap_or(total).min(total.max(1));
    let tagged: Vec<Value> = xs
        .iter()
        .map(tag_left)
        .chain(ys.iter().map(tag_right))
        .collect();

    enum Step {
        Found(KernelWitness),
        BudgetExhausted,
    }
    let mut visited = 0usize;
    let mut visit = |assign: &[usize], used: usize| -> Result<Option<Step>> {
        visited += 1;
        if visited > PARTITION_VISIT_BUDGET {
            return Ok(Some(Step::BudgetExhausted));
        }
        // Cheap screen first: the cross part of the partition must be `r`.
        for (ix, x) in xs.iter().enumerate() {
            for (iy, y) in ys.iter().enumerate() {
                let glued = assign[ix] == assign[xs.len() + iy];
                if glued != r.contains(x, y) {
                    return Ok(None);
                }
            }
        }
        let mut classes: Vec<BTreeSet<Value>> = vec![BTreeSet::new(); used];
        for (t, block) in tagged.iter().zip(assign) {
            classes[*block].insert(t.clone());
        }
        let class_values: Vec<Value> =
            classes.iter().map(|c| Value::Set(c.clone())).collect();
        let apex = FinSet::from_unordered(class_values.clone());
        let left_leg = FinFunction::from_pairs(
            pair.left().carrier().clone(),
            apex.clone(),
            xs.iter()
                .enumerate()
                .map(|(ix, x)| (x.clone(), class_values[assign[ix]].clone()))
                .collect::<Vec<_>>(),
        )?;
        let right_leg = FinFunction::from_pairs(
            pair.right().carrier().clone(),
            apex.clone(),
            ys.iter()
                .enumerate()
                .map(|(iy, y)| (y.clone(), class_values[assign[xs.len() + iy]].clone()))
                .collect::<Vec<_>>(),
        )?;
        match induced_structure(pair, &left_leg, &right_leg)? {
            None => Ok(None),
            Some(structure) => Ok(Some(Step::Found(KernelWitness {
                apex,
                left_hom: left_leg,
                right_hom: right_leg,
                apex_structure: structure,
            }))),
        }
    };

    match search_partitions(total, cap, &mut visit)? {
        Some(Step::Found(witness)) => {
            debug_assert!(witness.verify(pair, r)?);
            Ok(BoundedVerdict::Witness(Box::new(witness)))
        }
        Some(Step::BudgetExhausted) | None => Ok(BoundedVerdict::NotFoundWithinBound(cap)),
    }
}

/// Raw and equivalence-closed verdicts for the equal-legs variant of the
/// search.
#[derive(Debug, Clone)]
pub struct EqualLegsReport {
    /// Whether the relation as given was already an equivalence.
    pub raw_is_equivalence: bool,
    /// Verdict for the relation exactly as given. Kernels of single maps
    /// are equivalences, so a non-equivalence can never be witnessed.
    pub raw: BoundedVerdict,
    /// The equivalence closure of the relation.
    pub closure: Relation,
    /// Verdict for the closure.
    pub closed: BoundedVerdict,
}

/// Searches for a single homomorphism out of `system` whose kernel is `r` —
/// the equal-legs restriction of the cospan search, where both legs must be
/// the same map. The candidate is the quotient by the equivalence closure of
/// `r`: a witnessing map factors through its image, the quotient of the
/// carrier by its kernel, and spare target states impose no constraints, so
/// no other target needs trying.
pub fn equal_legs_search(
    system: &Coalgebra,
    r: &Relation,
    bound: Option<usize>,
) -> Result<EqualLegsReport> {
    let pair = CoalgebraPair::new(system.clone(), system.clone())?;
    pair.admits(r)?;
    let cap = bound.unwrap_or(system.carrier().len());
    let closure = equivalence_closure(r)?;
    let raw_is_equivalence = *r == closure;

    let (apex, q) = quotient_by_equivalence(system.carrier(), &closure)?;
    let closed = match induced_structure(&pair, &q, &q)? {
        Some(structure) if apex.len() <= cap => {
            let witness = KernelWitness {
                apex,
                left_hom: q.clone(),
                right_hom: q,
                apex_structure: structure,
            };
            debug_assert!(witness.verify(&pair, &closure)?);
            BoundedVerdict::Witness(Box::new(witness))
        }
        _ => BoundedVerdict::NotFoundWithinBound(cap),
    };
    let raw = if raw_is_equivalence {
        closed.clone()
    } else {
        BoundedVerdict::NotFoundWithinBound(cap)
    };
    Ok(EqualLegsReport { raw_is_equivalence, raw, closure, closed })
}

/// The behavioural equivalence between the two carriers, with a witnessing
/// cospan onto the stable classes.
#[derive(Debug, Clone)]
pub struct BehaviouralEquivalence {
    /// Cross pairs: a left state related to a right state exactly when they
    /// end up in the same class.
    pub relation: Relation,
    /// Stable classes of the disjoint union, as sets of tagged states.
    pub blocks: Vec<BTreeSet<Value>>,
    pub witness: KernelWitness,
}

/// Computes the coarsest partition of the disjoint union of the carriers
/// that is consistent with behaviour: classes split until mapping behaviour
/// through the class assignment distinguishes no two members of any class.
/// The resulting cross relation contains every relation any witnessing
/// cospan can produce, so it is the largest bisimulation in this sense.
pub fn behavioural_equivalence(pair: &CoalgebraPair) -> Result<BehaviouralEquivalence> {
    let f = pair.functor();
    let xs = pair.left().carrier().elems();
    let ys = pair.right().carrier().elems();
    let tagged: Vec<Value> = xs
        .iter()
        .map(tag_left)
        .chain(ys.iter().map(tag_right))
        .collect();
    let mut block_of: Vec<usize> = vec![0; tagged.len()];
    let mut block_count = usize::from(!tagged.is_empty());

    let legs = |block_of: &[usize],
                block_count: usize|
     -> Result<(Vec<Value>, FinFunction, FinFunction)> {
        let mut classes: Vec<BTreeSet<Value>> = vec![BTreeSet::new(); block_count];
        for (t, b) in tagged.iter().zip(block_of) {
            classes[*b].insert(t.clone());
        }
        let class_values: Vec<Value> =
            classes.into_iter().map(Value::Set).collect();
        let apex = FinSet::from_unordered(class_values.clone());
        let left_leg = FinFunction::from_pairs(
            pair.left().carrier().clone(),
            apex.clone(),
            xs.iter()
                .enumerate()
                .map(|(ix, x)| (x.clone(), class_values[block_of[ix]].clone()))
                .collect::<Vec<_>>(),
        )?;
        let right_leg = FinFunction::from_pairs(
            pair.right().carrier().clone(),
            apex,
            ys.iter()
                .enumerate()
                .map(|(iy, y)| (y.clone(), class_values[block_of[xs.len() + iy]].clone()))
                .collect::<Vec<_>>(),
        )?;
        Ok((class_values, left_leg, right_leg))
    };

    loop {
        let (_, left_leg, right_leg) = legs(&block_of, block_count)?;
        let mut groups: BTreeMap<(usize, Value), Vec<usize>> = BTreeMap::new();
        for (i, t) in tagged.iter().enumerate() {
            let signature = match t {
                Value::Inl(x) => eval_morphism(f, &left_leg, pair.left().behaviour(x)?)?,
                Value::Inr(y) => eval_morphism(f, &right_leg, pair.right().behaviour(y)?)?,
                _ => unreachable!("tags are sums"),
            };
            groups.entry((block_of[i], signature)).or_default().push(i);
        }
        if groups.len() == block_count {
            break;
        }
        block_count = groups.len();
        for (next_index, (_, members)) in groups.into_iter().enumerate() {
            for i in members {
                block_of[i] = next_index;
            }
        }
    }

    let (class_values, left_leg, right_leg) = legs(&block_of, block_count)?;
    let structure = induced_structure(pair, &left_leg, &right_leg)?
        .expect("a stable partition induces a structure map");
    let relation = pullback(&left_leg, &right_leg)?;
    let blocks: Vec<BTreeSet<Value>> = class_values
        .iter()
        .map(|c| match c {
            Value::Set(members) => members.clone(),
            _ => unreachable!("classes are sets"),
        })
        .collect();
    let witness = KernelWitness {
        apex: left_leg.cod().clone(),
        left_hom: left_leg,
        right_hom: right_leg,
        apex_structure: structure,
    };
    Ok(BehaviouralEquivalence { relation, blocks, witness })
}
