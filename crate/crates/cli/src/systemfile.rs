//! The keyed text format for systems: a TOML file declaring one functor,
//! one or two systems over it, and optional named relations.
//!
//! ```toml
//! functor = "Lts(L)"
//!
//! [sets]
//! L = "{a, b}"
//!
//! [left]
//! states = ["x0", "x1"]
//! [left.structure]
//! x0 = "{(a,x1)}"
//! x1 = "{}"
//!
//! [right]
//! states = ["y0"]
//! [right.structure]
//! y0 = "{}"
//!
//! [relations]
//! dead = "{(x1,y0)}"
//! ```
//!
//! Omitting `[right]` declares the pair of the left system with itself.
//! Elements use the canonical value grammar; `[sets]` names atom sets so
//! the functor text can reference them.

use std::collections::BTreeMap;

use coalg::bisim::CoalgebraPair;
use coalg::finset::{FinSet, Relation};
use coalg::functor::{Coalgebra, FunctorExpr};
use coalg::text::{parse_atom_set, parse_element, parse_functor, parse_relation};
use coalg::value::{is_valid_atom, Value};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    functor: String,
    #[serde(default)]
    sets: BTreeMap<String, String>,
    left: RawSystem,
    right: Option<RawSystem>,
    #[serde(default)]
    relations: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    states: Vec<String>,
    structure: BTreeMap<String, String>,
}

/// A fully validated system file: the pair plus its named relations.
#[derive(Debug, Clone)]
pub struct LoadedSystem {
    pub pair: CoalgebraPair,
    pub relations: BTreeMap<String, Relation>,
    /// Whether the file declared a `[right]` system of its own.
    pub has_right: bool,
}

impl LoadedSystem {
    pub fn relation(&self, name: &str) -> Result<&Relation> {
        self.relations.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.relations.keys().map(String::as_str).collect();
            CliError::input(format!(
                "no relation named '{name}' in the file (declared: {})",
                if known.is_empty() { "none".to_string() } else { known.join(", ") }
            ))
        })
    }
}

fn build_system(raw: &RawSystem, functor: &FunctorExpr, side: &str) -> Result<Coalgebra> {
    for s in &raw.states {
        if !is_valid_atom(s) {
            return Err(CliError::input(format!(
                "state name '{s}' in [{side}] is not a valid atom"
            )));
        }
    }
    let carrier = FinSet::of_atoms(raw.states.iter().cloned())
        .map_err(|e| CliError::input(format!("[{side}] states: {e}")))?;
    let mut structure = BTreeMap::new();
    for (state, text) in &raw.structure {
        if !carrier.contains(&Value::atom(state.clone())) {
            return Err(CliError::input(format!(
                "[{side}.structure] gives a behaviour for undeclared state '{state}'"
            )));
        }
        let value = parse_element(functor, &carrier, text).map_err(|e| {
            CliError::input(format!("behaviour of '{state}' in [{side}]: {e}"))
        })?;
        structure.insert(Value::atom(state.clone()), value);
    }
    for s in &raw.states {
        if !structure.contains_key(&Value::atom(s.clone())) {
            return Err(CliError::input(format!(
                "state '{s}' in [{side}] has no behaviour"
            )));
        }
    }
    Coalgebra::new(functor.clone(), carrier, structure)
        .map_err(|e| CliError::input(format!("[{side}]: {e}")))
}

/// Parses and validates a system file from its text.
pub fn parse_system_text(text: &str) -> Result<LoadedSystem> {
    let raw: RawFile = toml::from_str(text)
        .map_err(|e| CliError::input(format!("system file: {e}")))?;
    let mut env = BTreeMap::new();
    for (name, set_text) in &raw.sets {
        let set = parse_atom_set(set_text)
            .map_err(|e| CliError::input(format!("[sets] {name}: {e}")))?;
        env.insert(name.clone(), set);
    }
    let functor = parse_functor(&raw.functor, &env)
        .map_err(|e| CliError::input(format!("functor: {e}")))?;
    let left = build_system(&raw.left, &functor, "left")?;
    let has_right = raw.right.is_some();
    let pair = match &raw.right {
        Some(right_raw) => {
            let right = build_system(right_raw, &functor, "right")?;
            CoalgebraPair::new(left, right)?
        }
        None => CoalgebraPair::self_pair(left),
    };
    let mut relations = BTreeMap::new();
    for (name, rel_text) in &raw.relations {
        let r = parse_relation(
            pair.left().carrier(),
            pair.right().carrier(),
            rel_text,
        )
        .map_err(|e| CliError::input(format!("[relations] {name}: {e}")))?;
        relations.insert(name.clone(), r);
    }
    Ok(LoadedSystem { pair, relations, has_right })
}

fn render_states(system: &Coalgebra, out: &mut String) {
    out.push_str("states = [");
    for (i, s) in system.carrier().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('"');
        out.push_str(&s.canon());
        out.push('"');
    }
    out.push_str("]\n");
}

fn toml_key(name: &str) -> String {
    let bare = !name.is_empty()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if bare {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

fn render_structure(system: &Coalgebra, side: &str, out: &mut String) {
    out.push('[');
    out.push_str(side);
    out.push_str(".structure]\n");
    for (state, behaviour) in system.structure() {
        out.push_str(&format!(
            "{} = \"{}\"\n",
            toml_key(&state.canon()),
            behaviour.canon()
        ));
    }
}

/// Renders a pair back into the file format. Only atom-carried systems can
/// be rendered (the format names states by their atom text).
pub fn render_system_text(pair: &CoalgebraPair, relations: &BTreeMap<String, Relation>) -> Result<String> {
    for side in [pair.left(), pair.right()] {
        for s in side.carrier().iter() {
            if !matches!(s, Value::Atom(_)) {
                return Err(CliError::input(format!(
                    "cannot render a system whose states are not atoms (found {})",
                    s.canon()
                )));
            }
        }
    }
    let mut out = String::new();
    out.push_str(&format!("functor = \"{}\"\n\n[left]\n", pair.functor()));
    render_states(pair.left(), &mut out);
    render_structure(pair.left(), "left", &mut out);
    out.push_str("\n[right]\n");
    render_states(pair.right(), &mut out);
    render_structure(pair.right(), "right", &mut out);
    if !relations.is_empty() {
        out.push_str("\n[relations]\n");
        for (name, r) in relations {
            let pairs: Vec<String> = r
                .pairs()
                .iter()
                .map(|(a, b)| format!("({},{})", a.canon(), b.canon()))
                .collect();
            out.push_str(&format!("{} = \"{{{}}}\"\n", toml_key(name), pairs.join(",")));
        }
    }
    Ok(out)
}
