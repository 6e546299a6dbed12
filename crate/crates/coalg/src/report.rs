//! Serializable report shapes. Every machine-readable result the toolkit
//! emits is rendered through these types, so field names, casing, and
//! ordering are fixed in one place and stay byte-stable across runs.
//!
//! Values appear in their canonical text form; maps are keyed by that text
//! and sorted, relations are sorted pair lists. The `am`/`hj` field names
//! are the external interface vocabulary for the span-based and
//! lifting-based notions; inside the library they keep their role names.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bisim::kernel::{BoundedVerdict, KernelWitness};
use crate::bisim::lts::Minimization;
use crate::bisim::terminal::SequenceReport;
use crate::bisim::{FixpointRun, NotionReport};
use crate::finset::{FinFunction, Relation};
use crate::functor::Coalgebra;
use crate::props::{PropertyCheck, Verdict, Witness, WitnessDetail};
use crate::value::Value;

/// A relation as a sorted list of `[left, right]` canonical texts.
pub type RelationEntries = Vec<(String, String)>;

pub fn relation_entries(r: &Relation) -> RelationEntries {
    r.pairs().iter().map(|(a, b)| (a.canon(), b.canon())).collect()
}

fn function_table(f: &FinFunction) -> BTreeMap<String, String> {
    f.graph().map(|(a, b)| (a.canon(), b.canon())).collect()
}

fn value_list(vs: impl IntoIterator<Item = impl std::borrow::Borrow<Value>>) -> Vec<String> {
    vs.into_iter().map(|v| v.borrow().canon()).collect()
}

/// A refinement chain: every step down to the fixpoint, including the
/// confirming repeat at the end.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Chain {
    pub steps: Vec<RelationEntries>,
    pub converged: bool,
    pub steps_to_converge: usize,
}

pub fn chain(run: &FixpointRun) -> Chain {
    Chain {
        steps: run.steps.iter().map(relation_entries).collect(),
        converged: run.converged(),
        steps_to_converge: run.steps_to_converge,
    }
}

/// The stage sequence `W_0, W_1, ...` with its stabilization point.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Sequence {
    pub relations: Vec<RelationEntries>,
    pub stabilized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilized_at: Option<usize>,
}

pub fn sequence(report: &SequenceReport) -> Sequence {
    Sequence {
        relations: report.relations.iter().map(relation_entries).collect(),
        stabilized: report.stabilized(),
        stabilized_at: report.stabilized_at,
    }
}

/// A witnessing cospan of homomorphisms with the structure on its apex.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KernelWitnessReport {
    pub apex: Vec<String>,
    pub left_hom: BTreeMap<String, String>,
    pub right_hom: BTreeMap<String, String>,
    pub structure: BTreeMap<String, String>,
}

pub fn kernel_witness(w: &KernelWitness) -> KernelWitnessReport {
    KernelWitnessReport {
        apex: value_list(w.apex.iter()),
        left_hom: function_table(&w.left_hom),
        right_hom: function_table(&w.right_hom),
        structure: w
            .apex_structure
            .iter()
            .map(|(a, b)| (a.canon(), b.canon()))
            .collect(),
    }
}

/// Bounded search outcome for the cospan-pullback notion: a witness, or
/// honesty about how far the search went.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status")]
pub enum KernelVerdict {
    Yes { witness: KernelWitnessReport },
    NotFoundWithinBound { bound: usize },
}

pub fn kernel_verdict(v: &BoundedVerdict) -> KernelVerdict {
    match v {
        BoundedVerdict::Witness(w) => KernelVerdict::Yes { witness: kernel_witness(w) },
        BoundedVerdict::NotFoundWithinBound(bound) => {
            KernelVerdict::NotFoundWithinBound { bound: *bound }
        }
    }
}

/// One relation's verdicts under all four notions.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NotionFlags {
    pub am_bisim: bool,
    /// Witness structure on the relation, keyed by the pair's canonical
    /// text, present exactly when `amBisim` holds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub am_witness: Option<BTreeMap<String, String>>,
    pub hj_bisim: bool,
    pub am_precongruence: bool,
    pub kernel_bisim: KernelVerdict,
}

pub fn notion_flags(report: &NotionReport) -> NotionFlags {
    NotionFlags {
        am_bisim: report.span,
        am_witness: report.span_witness.as_ref().map(|w| {
            w.structure
                .iter()
                .map(|((x, y), t)| (Value::pair(x.clone(), y.clone()).canon(), t.canon()))
                .collect()
        }),
        hj_bisim: report.lifting,
        am_precongruence: report.precongruence,
        kernel_bisim: kernel_verdict(&report.kernel),
    }
}

/// The failing data behind a property counterexample.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind")]
pub enum WitnessDetailReport {
    /// An element of the codomain pullback missed by the mediating map.
    #[serde(rename_all = "camelCase")]
    NotSurjective { missed_left: String, missed_right: String },
    /// Two distinct elements identified by the mediating map.
    NotInjective { first: String, second: String },
}

/// A property counterexample: the cospan it happened on plus the violation.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyWitness {
    pub left_leg: BTreeMap<String, String>,
    pub right_leg: BTreeMap<String, String>,
    pub apex: Vec<String>,
    pub detail: WitnessDetailReport,
}

pub fn property_witness(w: &Witness) -> PropertyWitness {
    PropertyWitness {
        left_leg: function_table(w.cospan.left_leg()),
        right_leg: function_table(w.cospan.right_leg()),
        apex: value_list(w.cospan.left_leg().cod().iter()),
        detail: match &w.detail {
            WitnessDetail::NotSurjective { missed_left, missed_right } => {
                WitnessDetailReport::NotSurjective {
                    missed_left: missed_left.canon(),
                    missed_right: missed_right.canon(),
                }
            }
            WitnessDetail::NotInjective { first, second } => {
                WitnessDetailReport::NotInjective {
                    first: first.canon(),
                    second: second.canon(),
                }
            }
        },
    }
}

/// One property verdict for one functor.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyVerdict {
    pub functor: String,
    pub property: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PropertyWitness>,
    pub corpus_size: usize,
    pub cap_errors: usize,
}

pub fn property_verdict(functor: &str, check: &PropertyCheck) -> PropertyVerdict {
    let (status, witness) = match &check.verdict {
        Verdict::HoldsOnCorpus => ("HoldsOnCorpus", None),
        Verdict::Counterexample(w) => ("Counterexample", Some(property_witness(w))),
    };
    PropertyVerdict {
        functor: functor.to_string(),
        property: check.property.as_str().to_string(),
        status: status.to_string(),
        witness,
        corpus_size: check.corpus_size,
        cap_errors: check.cap_errors,
    }
}

/// A coalgebra in report form: states and their behaviours as text.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SystemDescription {
    pub functor: String,
    pub states: Vec<String>,
    pub structure: BTreeMap<String, String>,
}

pub fn system_description(c: &Coalgebra) -> SystemDescription {
    SystemDescription {
        functor: c.functor().to_string(),
        states: value_list(c.carrier().iter()),
        structure: c.structure().iter().map(|(a, b)| (a.canon(), b.canon())).collect(),
    }
}

/// Full classification of one named relation: the four flags, the functor's
/// property verdicts, and any implication violations between them.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    pub functor: String,
    pub relation: String,
    pub pairs: RelationEntries,
    pub flags: NotionFlags,
    pub functor_checks: Vec<PropertyVerdict>,
    pub violations: Vec<String>,
}

/// One offending relation in a consistency enumeration.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompareViolation {
    pub pairs: RelationEntries,
    pub violated: Vec<String>,
    pub flags: NotionFlags,
}

/// The consistency report over an enumerated or sampled relation space.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CompareReport {
    pub functor: String,
    pub left_states: usize,
    pub right_states: usize,
    pub relations_checked: usize,
    pub sampled: bool,
    /// The sampling seed, present only when the space was sampled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub functor_checks: Vec<PropertyVerdict>,
    pub violations: Vec<CompareViolation>,
}

/// Partition-refinement output: the blocks and the quotient system.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MinimizeReport {
    pub blocks: Vec<Vec<String>>,
    pub quotient: SystemDescription,
}

pub fn minimize_report(m: &Minimization) -> MinimizeReport {
    MinimizeReport {
        blocks: m.blocks.iter().map(|b| value_list(b.iter())).collect(),
        quotient: system_description(&m.quotient),
    }
}

/// Renders any report as pretty JSON with a trailing newline. All report
/// types serialize from sorted containers, so output is byte-stable.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
