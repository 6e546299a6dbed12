//! Connects functor-level properties to the relationships between the
//! notions of bisimulation.
//!
//! Some containments between the four notions hold for every functor here;
//! the rest hold under a checkable property of the functor. The classifier
//! runs the property checks once per functor and reports which conditional
//! containments are active, with counterexample witnesses for the inactive
//! ones. A brute-force search for a precongruence that is not a span
//! bisimulation makes the gaps concrete on demand.

use std::collections::HashMap;

use crate::error::Result;
use crate::eval::eval_object;
use crate::finset::{FinSet, Relation};
use crate::functor::{Coalgebra, EvalConfig, FunctorExpr};
use crate::props::{check_all_properties, PropertyCheck, PropertyName};

use super::{is_precongruence, is_span_bisimulation, CoalgebraPair};

/// One containment between notions, possibly conditional on a functor
/// property.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicationStatus {
    /// Stable identifier, e.g. `span-implies-lifting`.
    pub name: &'static str,
    /// Property the containment is conditional on; `None` when it holds for
    /// every functor in this setting.
    pub hypothesis: Option<PropertyName>,
    /// Verdict for the hypothesis on this functor; `None` when
    /// unconditional.
    pub hypothesis_holds: Option<bool>,
    /// Whether the containment is in force for this functor.
    pub active: bool,
}

/// Property profile plus the containment table for one functor.
#[derive(Debug, Clone)]
pub struct ClassifyReport {
    pub functor: String,
    pub checks: Vec<PropertyCheck>,
    pub implications: Vec<ImplicationStatus>,
}

impl ClassifyReport {
    pub fn implication(&self, name: &str) -> Option<&ImplicationStatus> {
        self.implications.iter().find(|i| i.name == name)
    }
}

/// The containment table: unconditional rows carry no hypothesis. The two
/// routes from lifting back to span are listed separately because they rest
/// on different grounds — over finite sets every surjection splits, which
/// keeps the first route open for every functor.
const IMPLICATIONS: [(&str, Option<PropertyName>); 8] = [
    ("span-implies-lifting", None),
    ("lifting-implies-precongruence", None),
    ("precongruence-glues-to-kernel", None),
    ("kernel-implies-span", Some(PropertyName::PreservesWeakPullbacks)),
    ("kernel-implies-lifting", Some(PropertyName::CoversPullbacks)),
    (
        "kernel-implies-precongruence",
        Some(PropertyName::PreservesPullbacksAlongMonos),
    ),
    ("lifting-implies-span-by-splitting", None),
    ("lifting-implies-span-by-relations", Some(PropertyName::PreservesRelations)),
];

/// Runs and memoizes property profiles per functor, keyed by its printed
/// form.
pub struct Classifier {
    cfg: EvalConfig,
    cache: HashMap<String, Vec<PropertyCheck>>,
}

impl Classifier {
    pub fn new(cfg: EvalConfig) -> Self {
        Classifier { cfg, cache: HashMap::new() }
    }

    /// The property profile for this functor, computed once.
    pub fn profile(&mut self, f: &FunctorExpr) -> Result<Vec<PropertyCheck>> {
        let key = f.to_string();
        if let Some(cached) = self.cache.get(&key) {
            return Ok(cached.clone());
        }
        let checks = check_all_properties(f, &self.cfg)?;
        self.cache.insert(key, checks.clone());
        Ok(checks)
    }

    /// Profile plus containment table.
    pub fn classify(&mut self, f: &FunctorExpr) -> Result<ClassifyReport> {
        let checks = self.profile(f)?;
        let holds = |p: PropertyName| -> bool {
            checks
                .iter()
                .find(|c| c.property == p)
                .map(PropertyCheck::holds)
                .unwrap_or(false)
        };
        let implications = IMPLICATIONS
            .iter()
            .map(|(name, hypothesis)| match hypothesis {
                None => ImplicationStatus {
                    name,
                    hypothesis: None,
                    hypothesis_holds: None,
                    active: true,
                },
                Some(p) => {
                    let ok = holds(*p);
                    ImplicationStatus {
                        name,
                        hypothesis: Some(*p),
                        hypothesis_holds: Some(ok),
                        active: ok,
                    }
                }
            })
            .collect();
        Ok(ClassifyReport {
            functor: f.to_string(),
            checks,
            implications,
        })
    }

    pub fn config(&self) -> &EvalConfig {
        &self.cfg
    }
}

/// Cross-checks a finished four-notion report against the functor's
/// property profile: the two unconditional containments, the three
/// back-arrows from a witnessed kernel whose hypothesis holds on corpus, and
/// the relation-preservation route from lifting to span. Every returned name
/// is a hard failure — either an implementation bug or a genuine
/// counterexample to an on-corpus verdict, and both deserve the same loud
/// surfacing with full witness data.
pub fn consistency_violations(
    checks: &[PropertyCheck],
    notions: &super::NotionReport,
) -> Vec<&'static str> {
    let holds = |p: PropertyName| -> bool {
        checks
            .iter()
            .find(|c| c.property == p)
            .map(PropertyCheck::holds)
            .unwrap_or(false)
    };
    let kernel_witnessed = notions.kernel.is_witnessed();
    let mut violations = Vec::new();
    if notions.span && !notions.lifting {
        violations.push("span-implies-lifting");
    }
    if notions.lifting && !notions.precongruence {
        violations.push("lifting-implies-precongruence");
    }
    if kernel_witnessed && holds(PropertyName::PreservesWeakPullbacks) && !notions.span {
        violations.push("kernel-implies-span");
    }
    if kernel_witnessed && holds(PropertyName::CoversPullbacks) && !notions.lifting {
        violations.push("kernel-implies-lifting");
    }
    if kernel_witnessed
        && holds(PropertyName::PreservesPullbacksAlongMonos)
        && !notions.precongruence
    {
        violations.push("kernel-implies-precongruence");
    }
    if holds(PropertyName::PreservesRelations) && notions.lifting && !notions.span {
        violations.push("lifting-implies-span-by-relations");
    }
    violations
}

/// Brute-force search over single-system relations for a precongruence that
/// is not a span bisimulation, trying carriers of size 1 up to
/// `max_carrier`. Systems are enumerated in a fixed order, so the result is
/// deterministic. The search space grows steeply — sizes beyond 3 are rarely
/// practical.
pub fn find_precongruence_not_span(
    f: &FunctorExpr,
    max_carrier: usize,
    cfg: &EvalConfig,
) -> Result<Option<(Coalgebra, Relation)>> {
    for n in 1..=max_carrier {
        if n * n >= u64::BITS as usize {
            return Err(crate::error::Error::domain(format!(
                "carrier size {n} puts the relation count out of range"
            )));
        }
        let carrier =
            FinSet::of_atoms((0..n).map(|i| format!("s{i}"))).expect("distinct names");
        let elems = eval_object(f, &carrier, cfg)?;
        if elems.is_empty() {
            continue;
        }
        let states: Vec<_> = carrier.elems().to_vec();
        let mut indices = vec![0usize; n];
        loop {
            let structure = states
                .iter()
                .zip(&indices)
                .map(|(s, i)| (s.clone(), elems.elems()[*i].clone()))
                .collect();
            let system = Coalgebra::new(f.clone(), carrier.clone(), structure)?;
            let pair = CoalgebraPair::self_pair(system);
            for mask in 1u64..(1u64 << (n * n)) {
                let pairs = (0..n * n).filter(|bit| mask & (1 << bit) != 0).map(|bit| {
                    (states[bit / n].clone(), states[bit % n].clone())
                });
                let r = Relation::new(carrier.clone(), carrier.clone(), pairs)?;
                if is_precongruence(&pair, &r, cfg)?
                    && !is_span_bisimulation(&pair, &r, cfg)?
                {
                    return Ok(Some((pair.left().clone(), r)));
                }
            }
            // Advance the structure-map odometer.
            let mut pos = 0;
            loop {
                if pos == n {
                    break;
                }
                indices[pos] += 1;
                if indices[pos] < elems.len() {
                    break;
                }
                indices[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
    }
    Ok(None)
}
