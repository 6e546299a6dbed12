//! The stage sequence: behaviour truncated at finite depth.
//!
//! Stage 0 treats all states as equal; stage n+1 maps each state's behaviour
//! through the stage-n classes. Two states get the same stage-n value
//! exactly when depth-n observations cannot tell them apart, so the induced
//! relations shrink step by step and, over finite carriers, stop moving
//! after at most one step per state. The stage classes are represented by
//! fresh marker atoms rather than by the (ever-growing) nested values they
//! stand for, which keeps each stage one functor layer deep.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::eval::map_states;
use crate::finset::Relation;
use crate::functor::FunctorExpr;
use crate::value::Value;

use super::CoalgebraPair;

/// The relations cut out by successive stages.
#[derive(Debug, Clone)]
pub struct SequenceReport {
    /// `relations[n]` relates left and right states with equal stage-n
    /// values; index 0 is the full relation.
    pub relations: Vec<Relation>,
    /// First step whose classes repeat the previous step's, if reached.
    /// From that step on the sequence never moves again.
    pub stabilized_at: Option<usize>,
}

impl SequenceReport {
    pub fn stabilized(&self) -> bool {
        self.stabilized_at.is_some()
    }

    pub fn final_relation(&self) -> &Relation {
        self.relations.last().expect("stage 0 is always present")
    }
}

/// Collects every atom name occurring in the functor's constant sets.
fn constant_atom_names(f: &FunctorExpr, into: &mut BTreeSet<String>) {
    fn atoms_of(v: &Value, into: &mut BTreeSet<String>) {
        match v {
            Value::Atom(name) => {
                into.insert(name.clone());
            }
            Value::Pair(a, b) => {
                atoms_of(a, into);
                atoms_of(b, into);
            }
            Value::Triple(a, b, c) => {
                atoms_of(a, into);
                atoms_of(b, into);
                atoms_of(c, into);
            }
            Value::Inl(a) | Value::Inr(a) => atoms_of(a, into),
            Value::Tuple(items) => items.iter().for_each(|i| atoms_of(i, into)),
            Value::Set(items) => items.iter().for_each(|i| atoms_of(i, into)),
            Value::Dist(weights) => weights.keys().for_each(|k| atoms_of(k, into)),
        }
    }
    match f {
        FunctorExpr::Identity | FunctorExpr::AtMostTwoOfThree => {}
        FunctorExpr::Constant(set) => set.iter().for_each(|v| atoms_of(v, into)),
        FunctorExpr::Product(a, b)
        | FunctorExpr::Coproduct(a, b)
        | FunctorExpr::Compose(a, b) => {
            constant_atom_names(a, into);
            constant_atom_names(b, into);
        }
        FunctorExpr::Power(a, _)
        | FunctorExpr::FinPowerset(a)
        | FunctorExpr::SubDistribution(a)
            => constant_atom_names(a, into),
    }
}

/// Picks a marker prefix (a run of apostrophes) that no constant atom of the
/// shape quotes-then-digits uses, so stage markers can never pun with
/// constants.
fn marker_prefix(f: &FunctorExpr) -> String {
    let mut names = BTreeSet::new();
    constant_atom_names(f, &mut names);
    let mut quotes = 0usize;
    for name in names {
        let run = name.chars().take_while(|c| *c == '\'').count();
        if run > 0 && name[run..].chars().all(|c| c.is_ascii_digit()) {
            quotes = quotes.max(run);
        }
    }
    "'".repeat(quotes + 1)
}

fn blocks_of(class_of: &[usize]) -> BTreeSet<Vec<usize>> {
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, c) in class_of.iter().enumerate() {
        by_class.entry(*c).or_default().push(i);
    }
    by_class.into_values().collect()
}

/// Runs the stage sequence until the classes stop moving (which always
/// happens over finite carriers) or until `max_steps`, if given, cuts the
/// run short.
pub fn behaviour_sequence(
    pair: &CoalgebraPair,
    max_steps: Option<usize>,
) -> Result<SequenceReport> {
    let f = pair.functor();
    let prefix = marker_prefix(f);
    let xs = pair.left().carrier().elems();
    let ys = pair.right().carrier().elems();
    let total = xs.len() + ys.len();

    let index_of = |side: usize, s: &Value| -> usize {
        match side {
            0 => pair.left().carrier().position(s).expect("known state"),
            _ => xs.len() + pair.right().carrier().position(s).expect("known state"),
        }
    };

    let cross = |class_of: &[usize]| -> Result<Relation> {
        let mut pairs = BTreeSet::new();
        for (ix, x) in xs.iter().enumerate() {
            for (iy, y) in ys.iter().enumerate() {
                if class_of[ix] == class_of[xs.len() + iy] {
                    pairs.insert((x.clone(), y.clone()));
                }
            }
        }
        Relation::new(
            pair.left().carrier().clone(),
            pair.right().carrier().clone(),
            pairs,
        )
    };

    let mut class_of = vec![0usize; total];
    let mut relations = vec![cross(&class_of)?];
    let mut stabilized_at = None;
    let hard_limit = max_steps.unwrap_or(total + 1);

    for step in 1..=hard_limit {
        let marker = |class: usize| Value::atom(format!("{prefix}{class}"));
        let mut grouped: BTreeMap<Value, Vec<usize>> = BTreeMap::new();
        for side in 0..2usize {
            let system = if side == 0 { pair.left() } else { pair.right() };
            let substitute =
                |s: &Value| -> Result<Value> { Ok(marker(class_of[index_of(side, s)])) };
            for state in system.carrier().iter() {
                let stage = map_states(f, &substitute, system.behaviour(state)?)?;
                grouped
                    .entry(stage)
                    .or_default()
                    .push(index_of(side, state));
            }
        }
        let mut next = vec![0usize; total];
        for (class, (_, members)) in grouped.into_iter().enumerate() {
            for i in members {
                next[i] = class;
            }
        }
        let old_blocks = blocks_of(&class_of);
        let new_blocks = blocks_of(&next);
        debug_assert!(
            new_blocks
                .iter()
                .all(|b| old_blocks.iter().any(|o| b.iter().all(|i| o.contains(i)))),
            "each stage refines the last"
        );
        relations.push(cross(&next)?);
        let stable = new_blocks == old_blocks;
        class_of = next;
        if stable {
            stabilized_at = Some(step);
            break;
        }
    }

    Ok(SequenceReport { relations, stabilized_at })
}
