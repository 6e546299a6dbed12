//! The four notions of bisimulation between coalgebras of one functor, their
//! refinement operators, and greatest fixpoints.
//!
//! Three of the notions are local and checked directly:
//!
//! * a *spanning* bisimulation carries a structure map on the relation
//!   making both projections homomorphisms (checked by exhibiting the map);
//! * a *lifting* bisimulation is a post-fixpoint of the relation-lifting
//!   operator (checked through the lifted relation);
//! * a *precongruence* asks the two behaviours to agree after gluing the
//!   carriers along the relation (checked through the pushout cospan).
//!
//! The fourth, *kernel* bisimulation — being exactly the pullback of some
//! cospan of homomorphisms — is a bounded search and lives in [`kernel`].
//!
//! On finite sets the spanning and lifting forms agree (a witness can be
//! chosen pointwise), so the two checkers double as independent routes to
//! the same answer and the test suite holds them to that.

pub mod classify;
pub mod kernel;
pub mod lts;
pub mod terminal;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::{BigUint, Integer};

use crate::error::{Error, Result};
use crate::eval::{eval_morphism, eval_object, relation_lifting, weight_denominators};
use crate::finset::{pushout, Relation};
use crate::functor::{Coalgebra, EvalConfig, FunctorExpr};
use crate::value::Value;

/// Two coalgebras of the same functor expression, ready to be related.
#[derive(Debug, Clone)]
pub struct CoalgebraPair {
    left: Coalgebra,
    right: Coalgebra,
}

impl CoalgebraPair {
    pub fn new(left: Coalgebra, right: Coalgebra) -> Result<Self> {
        if left.functor() != right.functor() {
            return Err(Error::domain(format!(
                "cannot pair systems over different functors ({} vs {})",
                left.functor(),
                right.functor()
            )));
        }
        Ok(CoalgebraPair { left, right })
    }

    /// Pairs a system with itself.
    pub fn self_pair(system: Coalgebra) -> Self {
        CoalgebraPair { left: system.clone(), right: system }
    }

    pub fn left(&self) -> &Coalgebra {
        &self.left
    }

    pub fn right(&self) -> &Coalgebra {
        &self.right
    }

    pub fn functor(&self) -> &FunctorExpr {
        self.left.functor()
    }

    /// Checks that a relation joins the two carriers.
    fn admits(&self, r: &Relation) -> Result<()> {
        if !r.left().same_elements(self.left.carrier())
            || !r.right().same_elements(self.right.carrier())
        {
            return Err(Error::domain(
                "the relation's carriers do not match the paired systems",
            ));
        }
        Ok(())
    }

    /// Extends the configured weight grid so that every weight appearing in
    /// either structure map is representable. Enumerating behaviours on this
    /// grid keeps witness searches complete for sub-distribution components:
    /// matched marginals on a common grid always admit a coupling on that
    /// same grid.
    pub fn effective_config(&self, cfg: &EvalConfig) -> Result<EvalConfig> {
        if !self.functor().mentions_distributions() {
            return Ok(cfg.clone());
        }
        let mut denominators = BTreeSet::new();
        for v in self.left.structure().values().chain(self.right.structure().values()) {
            weight_denominators(v, &mut denominators);
        }
        let mut grid = BigUint::from(cfg.grid_denominator);
        for d in &denominators {
            grid = grid.lcm(d);
        }
        let grid_denominator = u64::try_from(&grid).map_err(|_| {
            Error::domain(format!("weight grid {grid} does not fit a machine word"))
        })?;
        Ok(EvalConfig { cap: cfg.cap, grid_denominator })
    }
}

/// A structure map on the relation that makes both projections
/// homomorphisms, keyed by the relation's pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanWitness {
    pub structure: BTreeMap<(Value, Value), Value>,
}

/// Searches for a spanning-bisimulation witness: one behaviour on the
/// relation per pair, projecting correctly on both sides. The witness is
/// chosen pointwise, which in finite sets is the general case.
/// Labelled-transition pairs take the direct route; its verdict agrees
/// with the generic search wherever both run.
pub fn span_bisimulation_witness(
    pair: &CoalgebraPair,
    r: &Relation,
    cfg: &EvalConfig,
) -> Result<Option<SpanWitness>> {
    pair.admits(r)?;
    if pair.functor().as_lts().is_some() {
        return lts::span_witness_lts(pair, r);
    }
    span_witness_generic(pair, r, cfg)
}

/// The functor-generic witness search, enumerating behaviours on the
/// relation. Kept callable on any functor so the direct routes can be
/// cross-checked against it.
pub(crate) fn span_witness_generic(
    pair: &CoalgebraPair,
    r: &Relation,
    cfg: &EvalConfig,
) -> Result<Option<SpanWitness>> {
    let ecfg = pair.effective_config(cfg)?;
    let f = pair.functor();
    let (span_carrier, p, q) = r.span();
    let elems = eval_object(f, &span_carrier, &ecfg)?;
    let mut index: HashMap<(Value, Value), &Value> = HashMap::new();
    for t in elems.iter() {
        let key = (eval_morphism(f, &p, t)?, eval_morphism(f, &q, t)?);
        index.entry(key).or_insert(t);
    }
    let mut structure = BTreeMap::new();
    for (x, y) in r.pairs() {
        let key = (
            pair.left.behaviour(x)?.clone(),
            pair.right.behaviour(y)?.clone(),
        );
        match index.get(&key) {
            Some(t) => {
                structure.insert((x.clone(), y.clone()), (*t).clone());
            }
            None => return Ok(None),
        }
    }
    Ok(Some(SpanWitness { structure }))
}

/// Is `r` a bisimulation in the spanning sense?
pub fn is_span_bisimulation(pair: &CoalgebraPair, r: &Relation, cfg: &EvalConfig) -> Result<bool> {
    Ok(span_bisimulation_witness(pair, r, cfg)?.is_some())
}

/// Is `r` a bisimulation in the lifting sense: for every related pair, the
/// two behaviours are related by the lifted relation? Labelled-transition
/// pairs go through the direct step operator: containment in one refinement
/// step is the same condition.
pub fn is_lifting_bisimulation(
    pair: &CoalgebraPair,
    r: &Relation,
    cfg: &EvalConfig,
) -> Result<bool> {
    pair.admits(r)?;
    if pair.functor().as_lts().is_some() {
        let step = lts::refine_lts_direct(pair, r)?;
        return r.leq(&step);
    }
    is_lifting_generic(pair, r, cfg)
}

/// The functor-generic membership check against the lifted relation.
pub(crate) fn is_lifting_generic(
    pair: &CoalgebraPair,
    r: &Relation,
    cfg: &EvalConfig,
) -> Result<bool> {
    pair.admits(r)?;
    let ecfg = pair.effective_config(cfg)?;
    let lifted = relation_lifting(pair.functor(), r, &ecfg)?;
    for (x, y) in r.pairs() {
        let key = (
            pair.left.behaviour(x)?.clone(),
            pair.right.behaviour(y)?.clone(),
        );
        if !lifted.pairs().contains(&key) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One application of the lifting refinement operator: all pairs whose
/// behaviours land in the lifting of `r`.
pub fn refine_lifting(pair: &CoalgebraPair, r: &Relation, cfg: &EvalConfig) -> Result<Relation> {
    pair.admits(r)?;
    let ecfg = pair.effective_config(cfg)?;
    let lifted = relation_lifting(pair.functor(), r, &ecfg)?;
    refine_from_keys(pair, |key| lifted.pairs().contains(key))
}

/// One application of the spanning refinement operator: all pairs whose
/// behaviours are jointly realized by some behaviour on the relation. This
/// is a second, independently coded route to [`refine_lifting`].
pub fn refine_span(pair: &CoalgebraPair, r: &Relation, cfg: &EvalConfig) -> Result<Relation> {
    pair.admits(r)?;
    let ecfg = pair.effective_config(cfg)?;
    let f = pair.functor();
    let (span_carrier, p, q) = r.span();
    let elems = eval_object(f, &span_carrier, &ecfg)?;
    let mut keys: BTreeSet<(Value, Value)> = BTreeSet::new();
    for t in elems.iter() {
        keys.insert((eval_morphism(f, &p, t)?, eval_morphism(f, &q, t)?));
    }
    refine_from_keys(pair, |key| keys.contains(key))
}

fn refine_from_keys(
    pair: &CoalgebraPair,
    related: impl Fn(&(Value, Value)) -> bool,
) -> Result<Relation> {
    let mut pairs = BTreeSet::new();
    for x in pair.left.carrier().iter() {
        let hx = pair.left.behaviour(x)?;
        for y in pair.right.carrier().iter() {
            let key = (hx.clone(), pair.right.behaviour(y)?.clone());
            if related(&key) {
                pairs.insert((x.clone(), y.clone()));
            }
        }
    }
    Relation::new(
        pair.left.carrier().clone(),
        pair.right.carrier().clone(),
        pairs,
    )
}

/// One application of the precongruence operator: glue the carriers along
/// `r` (the pushout of its span) and keep the pairs whose behaviours agree
/// in the glued system. Entirely pointwise — no behaviour enumeration.
pub fn refine_precongruence(
    pair: &CoalgebraPair,
    r: &Relation,
    _cfg: &EvalConfig,
) -> Result<Relation> {
    pair.admits(r)?;
    let f = pair.functor();
    let (_, p, q) = r.span();
    let glued = pushout(&p, &q)?;
    let mut pairs = BTreeSet::new();
    for x in pair.left.carrier().iter() {
        let lhs = eval_morphism(f, glued.left_leg(), pair.left.behaviour(x)?)?;
        for y in pair.right.carrier().iter() {
            let rhs = eval_morphism(f, glued.right_leg(), pair.right.behaviour(y)?)?;
            if lhs == rhs {
                pairs.insert((x.clone(), y.clone()));
            }
        }
    }
    Relation::new(
        pair.left.carrier().clone(),
        pair.right.carrier().clone(),
        pairs,
    )
}

/// Is `r` a precongruence: contained in one application of the
/// precongruence operator to itself?
pub fn is_precongruence(pair: &CoalgebraPair, r: &Relation, cfg: &EvalConfig) -> Result<bool> {
    let refined = refine_precongruence(pair, r, cfg)?;
    r.leq(&refined)
}

/// Which refinement operator a fixpoint run should iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineOp {
    /// Relation lifting. For labelled-transition functors this takes a
    /// direct single-step route instead of enumerating behaviours; the two
    /// agree and the tests pin that down.
    Lifting,
    /// Spanning-witness search. Pointwise this asks for the same thing as
    /// lifting — a behaviour over the relation projecting onto both sides —
    /// so fixpoint runs share the direct route on labelled-transition
    /// functors; the generic routes are still coded independently.
    Span,
    /// The pushout-based precongruence operator.
    Precongruence,
}

/// A terminating descending run of a refinement operator.
#[derive(Debug, Clone)]
pub struct FixpointRun {
    /// `steps[0]` is the full relation; each later entry is one refinement,
    /// and the last two entries are equal — the repeat that proves the run
    /// stopped moving.
    pub steps: Vec<Relation>,
    /// How many operator applications the run took, counting the confirming
    /// repeat; equals `steps.len() - 1`.
    pub steps_to_converge: usize,
}

impl FixpointRun {
    pub fn relation(&self) -> &Relation {
        self.steps.last().expect("a run has at least the full relation")
    }

    /// Whether the run ended because two consecutive relations were equal
    /// (always the case for runs produced here, since every operator is
    /// monotone on a finite lattice).
    pub fn converged(&self) -> bool {
        match self.steps.as_slice() {
            [.., before, last] => before == last,
            _ => false,
        }
    }
}

/// Iterates a refinement operator from the full relation down to its
/// greatest fixpoint. The operators are monotone, so the iteration descends
/// and stops within `|X| * |Y|` steps.
pub fn greatest_fixpoint(
    pair: &CoalgebraPair,
    op: RefineOp,
    cfg: &EvalConfig,
) -> Result<FixpointRun> {
    let mut current = Relation::full(
        pair.left.carrier().clone(),
        pair.right.carrier().clone(),
    );
    let mut steps = vec![current.clone()];
    loop {
        let next = match op {
            RefineOp::Lifting => {
                if pair.functor().as_lts().is_some() {
                    lts::refine_lts_direct(pair, &current)?
                } else {
                    refine_lifting(pair, &current, cfg)?
                }
            }
            RefineOp::Span => {
                if pair.functor().as_lts().is_some() {
                    lts::refine_lts_direct(pair, &current)?
                } else {
                    refine_span(pair, &current, cfg)?
                }
            }
            RefineOp::Precongruence => refine_precongruence(pair, &current, cfg)?,
        };
        debug_assert!(next.leq(&current).unwrap_or(false), "refinement must descend");
        if next == current {
            // The repeat is kept so the run itself shows convergence.
            steps.push(next);
            return Ok(FixpointRun { steps_to_converge: steps.len() - 1, steps });
        }
        steps.push(next.clone());
        current = next;
    }
}

/// How `r` fares against all four notions at once.
#[derive(Debug, Clone)]
pub struct NotionReport {
    pub span: bool,
    pub lifting: bool,
    pub precongruence: bool,
    pub kernel: kernel::BoundedVerdict,
    pub span_witness: Option<SpanWitness>,
}

/// Checks one relation against all four notions. `bound` limits the kernel
/// search (defaulting to the complete bound, the total carrier size).
pub fn check_all_notions(
    pair: &CoalgebraPair,
    r: &Relation,
    bound: Option<usize>,
    cfg: &EvalConfig,
) -> Result<NotionReport> {
    let span_witness = span_bisimulation_witness(pair, r, cfg)?;
    let lifting = is_lifting_bisimulation(pair, r, cfg)?;
    let precongruence = is_precongruence(pair, r, cfg)?;
    let kernel = kernel::kernel_bisimulation_search(pair, r, bound, cfg)?;
    Ok(NotionReport {
        span: span_witness.is_some(),
        lifting,
        precongruence,
        kernel,
        span_witness,
    })
}
