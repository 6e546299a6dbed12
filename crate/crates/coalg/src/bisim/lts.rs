//! Direct algorithms for labelled-transition functors (`Pf(Times(Const(L),Id))`).
//!
//! The refinement operator over such a functor has a classical single-step
//! form — the two behaviours must match move for move up to the relation —
//! which avoids enumerating subsets of the relation and scales to systems the
//! generic route cannot touch. The generic and direct routes agree wherever
//! both run, and the tests keep them honest against each other.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::finset::{FinSet, Relation};
use crate::functor::{Coalgebra, FunctorExpr};
use crate::value::Value;

use super::CoalgebraPair;

/// Reads the transition table out of a labelled-transition coalgebra:
/// state -> set of (label, successor).
pub fn transition_table(
    system: &Coalgebra,
) -> Result<BTreeMap<Value, BTreeSet<(Value, Value)>>> {
    if system.functor().as_lts().is_none() {
        return Err(Error::domain(format!(
            "{} is not a labelled-transition functor",
            system.functor()
        )));
    }
    let mut table = BTreeMap::new();
    for state in system.carrier().iter() {
        let Value::Set(moves) = system.behaviour(state)? else {
            return Err(Error::shape("transition behaviour must be a set".to_string()));
        };
        let mut parsed = BTreeSet::new();
        for m in moves {
            let Value::Pair(label, successor) = m else {
                return Err(Error::shape("transitions must be label-state pairs".to_string()));
            };
            parsed.insert(((**label).clone(), (**successor).clone()));
        }
        table.insert(state.clone(), parsed);
    }
    Ok(table)
}

/// One refinement step, computed directly: `(x, y)` survives when every move
/// of `x` is matched by a move of `y` with the same label into an
/// `r`-related state, and symmetrically.
pub fn refine_lts_direct(pair: &CoalgebraPair, r: &Relation) -> Result<Relation> {
    let left = transition_table(pair.left())?;
    let right = transition_table(pair.right())?;
    let mut pairs = BTreeSet::new();
    for (x, x_moves) in &left {
        for (y, y_moves) in &right {
            let forth = x_moves.iter().all(|(a, x2)| {
                y_moves.iter().any(|(b, y2)| a == b && r.contains(x2, y2))
            });
            let back = forth
                && y_moves.iter().all(|(b, y2)| {
                    x_moves.iter().any(|(a, x2)| a == b && r.contains(x2, y2))
                });
            if back {
                pairs.insert((x.clone(), y.clone()));
            }
        }
    }
    Relation::new(
        pair.left().carrier().clone(),
        pair.right().carrier().clone(),
        pairs,
    )
}

/// The canonical spanning witness for an LTS pair: each related pair gets
/// the set of all its matched moves into the relation. That set projects
/// back onto both behaviours exactly when the pair matches move for move,
/// so construction and verification are one pass.
pub fn span_witness_lts(
    pair: &CoalgebraPair,
    r: &Relation,
) -> Result<Option<super::SpanWitness>> {
    let left = transition_table(pair.left())?;
    let right = transition_table(pair.right())?;
    let mut structure = BTreeMap::new();
    for (x, y) in r.pairs() {
        let x_moves = &left[x];
        let y_moves = &right[y];
        let mut t = BTreeSet::new();
        let mut proj_left = BTreeSet::new();
        let mut proj_right = BTreeSet::new();
        for (a, x2) in x_moves {
            for (b, y2) in y_moves {
                if a == b && r.contains(x2, y2) {
                    t.insert(Value::pair(
                        a.clone(),
                        Value::pair(x2.clone(), y2.clone()),
                    ));
                    proj_left.insert((a.clone(), x2.clone()));
                    proj_right.insert((b.clone(), y2.clone()));
                }
            }
        }
        if proj_left != *x_moves || proj_right != *y_moves {
            return Ok(None);
        }
        structure.insert((x.clone(), y.clone()), Value::Set(t));
    }
    Ok(Some(super::SpanWitness { structure }))
}

/// A stable partition of an LTS into behaviourally equal blocks, with the
/// quotient system over the blocks.
#[derive(Debug, Clone)]
pub struct Minimization {
    /// Blocks as sets of original states, in canonical order.
    pub blocks: Vec<BTreeSet<Value>>,
    pub quotient: Coalgebra,
}

impl Minimization {
    pub fn block_index(&self, state: &Value) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(state))
    }
}

/// Partition refinement by move signatures: starts from a single block and
/// splits by (label, target block) signatures until stable. The result is
/// the coarsest partition whose induced relation is a bisimulation.
pub fn minimize_lts(system: &Coalgebra) -> Result<Minimization> {
    let table = transition_table(system)?;
    let states: Vec<&Value> = system.carrier().iter().collect();
    let mut block_of: BTreeMap<&Value, usize> = states.iter().map(|s| (*s, 0)).collect();
    let mut block_count = if states.is_empty() { 0 } else { 1 };
    loop {
        let mut groups: BTreeMap<(usize, BTreeSet<(Value, usize)>), Vec<&Value>> =
            BTreeMap::new();
        for s in &states {
            let signature: BTreeSet<(Value, usize)> = table[*s]
                .iter()
                .map(|(label, succ)| (label.clone(), block_of[succ]))
                .collect();
            groups.entry((block_of[s], signature)).or_default().push(s);
        }
        if groups.len() == block_count {
            break;
        }
        block_count = groups.len();
        for (next_index, (_, members)) in groups.into_iter().enumerate() {
            for s in members {
                block_of.insert(s, next_index);
            }
        }
    }

    let mut members: BTreeMap<usize, BTreeSet<Value>> = BTreeMap::new();
    for (s, b) in &block_of {
        members.entry(*b).or_default().insert((*s).clone());
    }
    let mut blocks: Vec<BTreeSet<Value>> = members.into_values().collect();
    blocks.sort_by_cached_key(|b| Value::Set(b.clone()).canon());

    let class_values: Vec<Value> = blocks.iter().map(|b| Value::Set(b.clone())).collect();
    let carrier = FinSet::new(class_values.clone())?;
    let class_of = |state: &Value| -> Value {
        class_values
            .iter()
            .find(|c| matches!(c, Value::Set(m) if m.contains(state)))
            .expect("every state is in a block")
            .clone()
    };
    let structure: BTreeMap<Value, Value> = blocks
        .iter()
        .zip(&class_values)
        .map(|(block, class)| {
            let representative = block.iter().next().expect("blocks are non-empty");
            let moves: BTreeSet<Value> = table[representative]
                .iter()
                .map(|(label, succ)| Value::pair(label.clone(), class_of(succ)))
                .collect();
            (class.clone(), Value::Set(moves))
        })
        .collect();
    let labels = system
        .functor()
        .as_lts()
        .expect("checked by transition_table")
        .clone();
    let quotient = Coalgebra::new(
        FunctorExpr::labelled_transitions(labels),
        carrier,
        structure,
    )?;
    Ok(Minimization { blocks, quotient })
}

/// Joint partition refinement over the disjoint union of both carriers,
/// returning the cross part of the final stable partition. This is the
/// classical algorithm run on the two systems at once; it lands on the same
/// relation as iterating the lifting operator to its greatest fixpoint, and
/// the tests hold the two routes together.
pub fn partition_refinement_pair(pair: &CoalgebraPair) -> Result<Relation> {
    let tables = [transition_table(pair.left())?, transition_table(pair.right())?];
    let carriers = [pair.left().carrier(), pair.right().carrier()];
    let offsets = [0, carriers[0].len()];
    let total = carriers[0].len() + carriers[1].len();
    let index_of = |side: usize, s: &Value| -> usize {
        offsets[side] + carriers[side].position(s).expect("known state")
    };

    let mut block_of = vec![0usize; total];
    let mut block_count = usize::from(total > 0);
    loop {
        let mut groups: BTreeMap<(usize, BTreeSet<(Value, usize)>), Vec<usize>> =
            BTreeMap::new();
        for side in 0..2usize {
            for s in carriers[side].iter() {
                let i = index_of(side, s);
                let signature: BTreeSet<(Value, usize)> = tables[side][s]
                    .iter()
                    .map(|(label, succ)| (label.clone(), block_of[index_of(side, succ)]))
                    .collect();
                groups.entry((block_of[i], signature)).or_default().push(i);
            }
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

    let mut pairs = BTreeSet::new();
    for x in carriers[0].iter() {
        for y in carriers[1].iter() {
            if block_of[index_of(0, x)] == block_of[index_of(1, y)] {
                pairs.insert((x.clone(), y.clone()));
            }
        }
    }
    Relation::new(carriers[0].clone(), carriers[1].clone(), pairs)
}

/// A pseudo-random LTS with the given number of states: per state up to
/// three moves with uniformly chosen labels and targets.
pub fn random_lts(states: usize, labels: &FinSet, rng: &mut impl Rng) -> Coalgebra {
    let carrier =
        FinSet::of_atoms((0..states).map(|i| format!("s{i}"))).expect("distinct names");
    let structure: BTreeMap<Value, Value> = carrier
        .iter()
        .map(|s| {
            let mut moves = BTreeSet::new();
            for _ in 0..rng.gen_range(0..=3usize) {
                if labels.is_empty() || states == 0 {
                    break;
                }
                let label = labels.elems()[rng.gen_range(0..labels.len())].clone();
                let target = carrier.elems()[rng.gen_range(0..states)].clone();
                moves.insert(Value::pair(label, target));
            }
            (s.clone(), Value::Set(moves))
        })
        .collect();
    Coalgebra::new(
        FunctorExpr::labelled_transitions(labels.clone()),
        carrier,
        structure,
    )
    .expect("generated moves are well-formed")
}
