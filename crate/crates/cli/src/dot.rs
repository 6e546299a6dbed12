//! Graphviz renderings: relations and chains as bipartite graphs, quotient
//! systems as labelled digraphs. Output is deterministic: nodes and edges
//! follow canonical element order.

use coalg::bisim::lts::Minimization;
use coalg::finset::Relation;

use crate::error::Result;

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn bipartite_body(out: &mut String, prefix: &str, indent: &str, r: &Relation) {
    let node = |side: &str, v: &coalg::value::Value| {
        quoted(&format!("{prefix}{side}{}", v.canon()))
    };
    out.push_str(&format!(
        "{indent}subgraph {} {{\n",
        quoted(&format!("cluster_{prefix}left"))
    ));
    out.push_str(&format!("{indent}  label={};\n", quoted("left")));
    for v in r.left().iter() {
        out.push_str(&format!(
            "{indent}  {} [label={}];\n",
            node("L:", v),
            quoted(&v.canon())
        ));
    }
    out.push_str(&format!("{indent}}}\n"));
    out.push_str(&format!(
        "{indent}subgraph {} {{\n",
        quoted(&format!("cluster_{prefix}right"))
    ));
    out.push_str(&format!("{indent}  label={};\n", quoted("right")));
    for v in r.right().iter() {
        out.push_str(&format!(
            "{indent}  {} [label={}];\n",
            node("R:", v),
            quoted(&v.canon())
        ));
    }
    out.push_str(&format!("{indent}}}\n"));
    for (a, b) in r.pairs() {
        out.push_str(&format!(
            "{indent}{} -- {};\n",
            node("L:", a),
            node("R:", b)
        ));
    }
}

/// One relation as an undirected bipartite graph.
pub fn relation_graph(r: &Relation) -> String {
    let mut out = String::from("graph relation {\n  rankdir=LR;\n");
    bipartite_body(&mut out, "", "  ", r);
    out.push_str("}\n");
    out
}

/// A descending chain of relations: one cluster per step, each a bipartite
/// graph of its own.
pub fn chain_graph(steps: &[Relation]) -> String {
    let mut out = String::from("graph chain {\n  rankdir=LR;\n");
    for (i, step) in steps.iter().enumerate() {
        out.push_str(&format!("  subgraph cluster_step{i} {{\n"));
        out.push_str(&format!("    label={};\n", quoted(&format!("step {i}"))));
        bipartite_body(&mut out, &format!("s{i}:"), "    ", step);
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

/// The quotient of a minimized system as a labelled digraph over its blocks.
pub fn quotient_graph(min: &Minimization) -> Result<String> {
    let table = coalg::bisim::lts::transition_table(&min.quotient)?;
    let mut out = String::from("digraph quotient {\n");
    for state in min.quotient.carrier().iter() {
        out.push_str(&format!("  {};\n", quoted(&state.canon())));
    }
    for (state, moves) in &table {
        for (label, target) in moves {
            out.push_str(&format!(
                "  {} -> {} [label={}];\n",
                quoted(&state.canon()),
                quoted(&target.canon()),
                quoted(&label.canon())
            ));
        }
    }
    out.push_str("}\n");
    Ok(out)
}

/// A stage sequence rendered like a chain.
pub fn sequence_graph(relations: &[Relation]) -> String {
    chain_graph(relations)
}
