//! Aldebaran (.aut) import and export for labelled-transition systems.
//!
//! Header `des (initial, transitions, states)`, then one line per
//! transition: `(from, "label", to)`. States become atoms `x0 .. x{n-1}`,
//! the label set is inferred from the lines, and duplicate lines collapse
//! by set semantics.

use std::collections::{BTreeMap, BTreeSet};

use coalg::finset::FinSet;
use coalg::functor::{Coalgebra, FunctorExpr};
use coalg::value::{is_valid_atom, Value};

use crate::error::{CliError, Result};

fn state_atom(i: usize) -> Value {
    Value::atom(format!("x{i}"))
}

/// Splits `(a, b, c)` into its three comma-separated fields, honouring the
/// quotes around the label so commas inside it survive.
fn split_triple(line: &str, line_no: usize) -> Result<(String, String, String)> {
    let inner = line
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| {
            CliError::input(format!("line {line_no}: expected '(from, \"label\", to)'"))
        })?;
    let open = inner.find('"').ok_or_else(|| {
        CliError::input(format!("line {line_no}: label must be quoted"))
    })?;
    let close = inner.rfind('"').filter(|&c| c > open).ok_or_else(|| {
        CliError::input(format!("line {line_no}: unterminated label"))
    })?;
    let from = inner[..open].trim().trim_end_matches(',').trim();
    let label = &inner[open + 1..close];
    let to = inner[close + 1..].trim().trim_start_matches(',').trim();
    Ok((from.to_string(), label.to_string(), to.to_string()))
}

fn parse_index(field: &str, what: &str, line_no: usize, states: usize) -> Result<usize> {
    let i: usize = field.parse().map_err(|_| {
        CliError::input(format!("line {line_no}: {what} '{field}' is not a state index"))
    })?;
    if i >= states {
        return Err(CliError::input(format!(
            "line {line_no}: {what} {i} is out of range (file declares {states} states)"
        )));
    }
    Ok(i)
}

/// Parses .aut text into a labelled-transition coalgebra with states
/// `x0 .. x{n-1}` and the label set inferred from the transitions.
pub fn import_aut(text: &str) -> Result<Coalgebra> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::input("empty .aut file"))?;
    let header_inner = header
        .trim()
        .strip_prefix("des")
        .map(str::trim)
        .and_then(|s| s.strip_prefix('('))
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| {
            CliError::input("header must be 'des (initial, transitions, states)'")
        })?;
    let fields: Vec<&str> = header_inner.split(',').map(str::trim).collect();
    let [initial, transition_count, state_count] = fields.as_slice() else {
        return Err(CliError::input(
            "header must have exactly three fields: initial, transitions, states",
        ));
    };
    let state_count: usize = state_count
        .parse()
        .map_err(|_| CliError::input(format!("bad state count '{state_count}'")))?;
    let transition_count: usize = transition_count
        .parse()
        .map_err(|_| CliError::input(format!("bad transition count '{transition_count}'")))?;
    if state_count > 0 {
        parse_index(initial, "initial state", 1, state_count)?;
    }

    let mut moves: BTreeMap<usize, BTreeSet<(Value, Value)>> =
        (0..state_count).map(|i| (i, BTreeSet::new())).collect();
    let mut labels = BTreeSet::new();
    let mut seen = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let (from, label, to) = split_triple(line, line_no)?;
        let from = parse_index(&from, "source", line_no, state_count)?;
        let to = parse_index(&to, "target", line_no, state_count)?;
        if !is_valid_atom(&label) {
            return Err(CliError::input(format!(
                "line {line_no}: label '{label}' is not a valid atom \
                 (letters, digits, '_' and ' only)"
            )));
        }
        labels.insert(label.clone());
        moves
            .get_mut(&from)
            .expect("indices were range-checked")
            .insert((Value::atom(label), state_atom(to)));
        seen += 1;
    }
    if seen != transition_count {
        return Err(CliError::input(format!(
            "header declares {transition_count} transitions, file has {seen}"
        )));
    }

    let label_set = FinSet::of_atoms(labels)?;
    let functor = FunctorExpr::labelled_transitions(label_set);
    let carrier = FinSet::new((0..state_count).map(state_atom).collect())?;
    let structure = moves
        .into_iter()
        .map(|(i, ms)| {
            let behaviour =
                Value::Set(ms.into_iter().map(|(l, s)| Value::pair(l, s)).collect());
            (state_atom(i), behaviour)
        })
        .collect();
    Ok(Coalgebra::new(functor, carrier, structure)?)
}

/// Writes a labelled-transition coalgebra as .aut text, numbering states by
/// carrier position with state 0 initial.
pub fn export_aut(system: &Coalgebra) -> Result<String> {
    if system.functor().as_lts().is_none() {
        return Err(CliError::input(format!(
            "{} is not a labelled-transition functor",
            system.functor()
        )));
    }
    let index: BTreeMap<&Value, usize> = system
        .carrier()
        .iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let mut lines = Vec::new();
    for (state, i) in &index {
        let Value::Set(ms) = system.behaviour(state)? else {
            return Err(CliError::input("behaviour must be a set of moves"));
        };
        for m in ms {
            let Value::Pair(label, target) = m else {
                return Err(CliError::input("moves must be label-state pairs"));
            };
            let Value::Atom(label) = label.as_ref() else {
                return Err(CliError::input("labels must be atoms"));
            };
            let j = index.get(target.as_ref()).ok_or_else(|| {
                CliError::input(format!("target {} is not a state", target.canon()))
            })?;
            lines.push((*i, label.clone(), *j));
        }
    }
    lines.sort();
    let mut out = format!("des (0, {}, {})\n", lines.len(), system.carrier().len());
    for (i, label, j) in lines {
        out.push_str(&format!("({i}, \"{label}\", {j})\n"));
    }
    Ok(out)
}
