//! Bounded falsifiers for preservation properties of functor expressions.
//!
//! Every check runs the functor over a finite corpus of cospans, builds the
//! mediating map from the functor applied to a pullback into the pullback of
//! the functor's legs, and reads the property off that map. A failure is
//! returned as a concrete, replayable witness; success only means no
//! counterexample exists in the corpus, which the verdict name keeps
//! explicit.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::lift_function;
use crate::finset::{pullback, Cospan, FinFunction, FinSet, Relation};
use crate::functor::{EvalConfig, FunctorExpr};
use crate::value::Value;

/// The preservation properties the falsifier knows how to test. The kernel
/// pair variants run over self-cospans only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropertyName {
    PreservesRelations,
    PreservesPullbacks,
    PreservesWeakPullbacks,
    CoversPullbacks,
    PreservesPullbacksAlongMonos,
    WeaklyPreservesKernelPairs,
    CoversKernelPairs,
}

impl PropertyName {
    pub const ALL: [PropertyName; 7] = [
        PropertyName::PreservesRelations,
        PropertyName::PreservesPullbacks,
        PropertyName::PreservesWeakPullbacks,
        PropertyName::CoversPullbacks,
        PropertyName::PreservesPullbacksAlongMonos,
        PropertyName::WeaklyPreservesKernelPairs,
        PropertyName::CoversKernelPairs,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PropertyName::PreservesRelations => "PreservesRelations",
            PropertyName::PreservesPullbacks => "PreservesPullbacks",
            PropertyName::PreservesWeakPullbacks => "PreservesWeakPullbacks",
            PropertyName::CoversPullbacks => "CoversPullbacks",
            PropertyName::PreservesPullbacksAlongMonos => "PreservesPullbacksAlongMonos",
            PropertyName::WeaklyPreservesKernelPairs => "WeaklyPreservesKernelPairs",
            PropertyName::CoversKernelPairs => "CoversKernelPairs",
        }
    }

    /// Kernel pair properties only look at cospans whose two legs are the
    /// same function.
    fn is_kernel_variant(&self) -> bool {
        matches!(
            self,
            PropertyName::WeaklyPreservesKernelPairs | PropertyName::CoversKernelPairs
        )
    }

    fn applies_to(&self, cospan: &Cospan) -> bool {
        match self {
            PropertyName::PreservesPullbacksAlongMonos => {
                cospan.left_leg().is_injective() || cospan.right_leg().is_injective()
            }
            p if p.is_kernel_variant() => cospan.left_leg() == cospan.right_leg(),
            _ => true,
        }
    }
}

impl fmt::Display for PropertyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a bounded check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    HoldsOnCorpus,
    Counterexample(Box<Witness>),
}

/// A concrete failure: the cospan it happened on plus the violating data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub cospan: Cospan,
    pub detail: WitnessDetail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessDetail {
    /// The pair lies in the pullback of the lifted legs but has no preimage
    /// under the mediating map.
    NotSurjective { missed_left: Value, missed_right: Value },
    /// Two distinct elements of the lifted pullback with the same image.
    NotInjective { first: Value, second: Value },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyCheck {
    pub property: PropertyName,
    pub verdict: Verdict,
    /// How many corpus cospans the property was actually tested on.
    pub corpus_size: usize,
    /// Cospans skipped because the functor's value there exceeded the cap.
    pub cap_errors: usize,
}

impl PropertyCheck {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::HoldsOnCorpus)
    }
}

/// The mediating map `F(P) -> pullback(F f, F g)` for a cospan `(f, g)` with
/// pullback `P`, classified three independent ways. In finite sets being a
/// cover, being a split epi, and being surjective must coincide; the three
/// fields are computed separately so that coincidence stays checkable.
#[derive(Debug, Clone)]
pub struct Mediating {
    pub map: FinFunction,
    pub injective: bool,
    pub surjective: bool,
    /// A section (right inverse) when one exists.
    pub section: Option<FinFunction>,
    /// Whether the image factorization has the whole codomain as image.
    pub is_cover: bool,
}

impl Mediating {
    /// The finite-set collapse: surjective, split epi, and cover coincide.
    pub fn epi_notions_agree(&self) -> bool {
        self.surjective == self.section.is_some() && self.surjective == self.is_cover
    }
}

/// Builds the mediating map for a functor over one cospan.
pub fn mediating_map(f: &FunctorExpr, cospan: &Cospan, cfg: &EvalConfig) -> Result<Mediating> {
    let pb = pullback(cospan.left_leg(), cospan.right_leg())?;
    let (_, p1, p2) = pb.span();
    let lifted_left = lift_function(f, cospan.left_leg(), cfg)?;
    let lifted_right = lift_function(f, cospan.right_leg(), cfg)?;
    let lifted_p1 = lift_function(f, &p1, cfg)?;
    let lifted_p2 = lift_function(f, &p2, cfg)?;

    let target = pullback(&lifted_left, &lifted_right)?;
    let (target_carrier, _, _) = target.span();
    let domain = lifted_p1.dom().clone();
    let pairs = domain
        .iter()
        .map(|t| {
            let image = Value::pair(
                lifted_p1.apply(t)?.clone(),
                lifted_p2.apply(t)?.clone(),
            );
            Ok((t.clone(), image))
        })
        .collect::<Result<Vec<_>>>()?;
    let map = FinFunction::from_pairs(domain, target_carrier.clone(), pairs)?;

    let injective = map.is_injective();
    let surjective = map.is_surjective();
    let section = build_section(&map);
    let (cover_part, mono_part) = crate::finset::image_factorization(&map);
    let is_cover = mono_part.dom().len() == target_carrier.len() && cover_part.is_surjective();

    let mediating = Mediating { map, injective, surjective, section, is_cover };
    debug_assert!(mediating.epi_notions_agree());
    Ok(mediating)
}

/// Picks one preimage per codomain element, if every element has one.
fn build_section(map: &FinFunction) -> Option<FinFunction> {
    let mut chosen: HashMap<&Value, &Value> = HashMap::new();
    for (arg, val) in map.graph() {
        chosen.entry(val).or_insert(arg);
    }
    if chosen.len() < map.cod().len() {
        return None;
    }
    let section = FinFunction::new(map.cod().clone(), map.dom().clone(), |v| {
        (*chosen.get(v).expect("every codomain element has a chosen preimage")).clone()
    })
    .expect("chosen preimages lie in the domain");
    Some(section)
}

fn requirement(property: PropertyName) -> (bool, bool) {
    // (needs injective, needs surjective)
    match property {
        PropertyName::PreservesRelations => (true, false),
        PropertyName::PreservesPullbacks => (true, true),
        PropertyName::PreservesPullbacksAlongMonos => (true, true),
        PropertyName::PreservesWeakPullbacks
        | PropertyName::CoversPullbacks
        | PropertyName::WeaklyPreservesKernelPairs
        | PropertyName::CoversKernelPairs => (false, true),
    }
}

/// Looks for a violation of the property on one mediating map.
fn violation(mediating: &Mediating, property: PropertyName) -> Option<WitnessDetail> {
    let (needs_injective, needs_surjective) = requirement(property);
    if needs_injective && !mediating.injective {
        return Some(
            first_collision(&mediating.map).expect("a non-injective map has a collision"),
        );
    }
    let misses_surjectivity = match property {
        // Read covering off the image factorization rather than the
        // surjectivity bit, so the two routes stay independent.
        PropertyName::CoversPullbacks | PropertyName::CoversKernelPairs => !mediating.is_cover,
        _ => needs_surjective && !mediating.surjective,
    };
    if misses_surjectivity {
        return Some(
            first_missed(&mediating.map).expect("a non-surjective map misses an element"),
        );
    }
    None
}

/// Looks for a violation of the property on one cospan. `Ok(None)` means the
/// property holds there.
pub fn check_on_cospan(
    f: &FunctorExpr,
    property: PropertyName,
    cospan: &Cospan,
    cfg: &EvalConfig,
) -> Result<Option<Witness>> {
    let mediating = mediating_map(f, cospan, cfg)?;
    Ok(violation(&mediating, property)
        .map(|detail| Witness { cospan: cospan.clone(), detail }))
}

fn first_collision(map: &FinFunction) -> Option<WitnessDetail> {
    let mut seen: HashMap<&Value, &Value> = HashMap::new();
    for (arg, val) in map.graph() {
        if let Some(prev) = seen.get(val) {
            return Some(WitnessDetail::NotInjective {
                first: (*prev).clone(),
                second: arg.clone(),
            });
        }
        seen.insert(val, arg);
    }
    None
}

fn first_missed(map: &FinFunction) -> Option<WitnessDetail> {
    let mut hit = vec![false; map.cod().len()];
    for (_, val) in map.graph() {
        hit[map.cod().position(val).expect("graph values lie in the codomain")] = true;
    }
    for (i, was_hit) in hit.iter().enumerate() {
        if !was_hit {
            let missed = &map.cod().elems()[i];
            if let Value::Pair(a, b) = missed {
                return Some(WitnessDetail::NotSurjective {
                    missed_left: (**a).clone(),
                    missed_right: (**b).clone(),
                });
            }
        }
    }
    None
}

/// Runs a property over a corpus. Cospans the functor cannot be evaluated on
/// within the cap are skipped and counted, not treated as failures.
pub fn check_property(
    f: &FunctorExpr,
    property: PropertyName,
    corpus: &[Cospan],
    cfg: &EvalConfig,
) -> Result<PropertyCheck> {
    let applicable: Vec<&Cospan> = corpus
        .iter()
        .filter(|c| property.applies_to(c))
        .collect();
    let corpus_size = applicable.len();
    let mut cap_errors = 0;
    for cospan in applicable {
        match check_on_cospan(f, property, cospan, cfg) {
            Ok(None) => {}
            Ok(Some(witness)) => {
                return Ok(PropertyCheck {
                    property,
                    verdict: Verdict::Counterexample(Box::new(witness)),
                    corpus_size,
                    cap_errors,
                });
            }
            Err(Error::Size { .. }) => cap_errors += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(PropertyCheck {
        property,
        verdict: Verdict::HoldsOnCorpus,
        corpus_size,
        cap_errors,
    })
}

/// Convenience: runs a property over the built-in corpus appropriate for it.
pub fn check_on_default_corpus(
    f: &FunctorExpr,
    property: PropertyName,
    cfg: &EvalConfig,
) -> Result<PropertyCheck> {
    if property.is_kernel_variant() {
        check_property(f, property, &kernel_corpus(), cfg)
    } else {
        check_property(f, property, &default_corpus(), cfg)
    }
}

/// Checks several properties sharing one corpus with a single sweep: the
/// mediating map of each cospan is built once. Results are identical to
/// running [`check_property`] per property.
pub fn sweep_properties(
    f: &FunctorExpr,
    properties: &[PropertyName],
    corpus: &[Cospan],
    cfg: &EvalConfig,
) -> Result<Vec<PropertyCheck>> {
    struct Pending {
        property: PropertyName,
        witness: Option<Witness>,
        corpus_size: usize,
        cap_errors: usize,
    }
    let mut states: Vec<Pending> = properties
        .iter()
        .map(|&property| Pending {
            property,
            witness: None,
            corpus_size: corpus.iter().filter(|c| property.applies_to(c)).count(),
            cap_errors: 0,
        })
        .collect();
    for cospan in corpus {
        let undecided = |s: &Pending| s.witness.is_none() && s.property.applies_to(cospan);
        if !states.iter().any(undecided) {
            continue;
        }
        match mediating_map(f, cospan, cfg) {
            Ok(mediating) => {
                for state in states.iter_mut().filter(|s| undecided(s)) {
                    if let Some(detail) = violation(&mediating, state.property) {
                        state.witness = Some(Witness { cospan: cospan.clone(), detail });
                    }
                }
            }
            Err(Error::Size { .. }) => {
                for state in states.iter_mut().filter(|s| undecided(s)) {
                    state.cap_errors += 1;
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(states
        .into_iter()
        .map(|s| PropertyCheck {
            property: s.property,
            verdict: match s.witness {
                Some(w) => Verdict::Counterexample(Box::new(w)),
                None => Verdict::HoldsOnCorpus,
            },
            corpus_size: s.corpus_size,
            cap_errors: s.cap_errors,
        })
        .collect())
}

/// All seven properties over the built-in corpora, sweeping each corpus once.
pub fn check_all_properties(f: &FunctorExpr, cfg: &EvalConfig) -> Result<Vec<PropertyCheck>> {
    let pullback_props = [
        PropertyName::PreservesRelations,
        PropertyName::PreservesPullbacks,
        PropertyName::PreservesWeakPullbacks,
        PropertyName::CoversPullbacks,
        PropertyName::PreservesPullbacksAlongMonos,
    ];
    let kernel_props = [
        PropertyName::WeaklyPreservesKernelPairs,
        PropertyName::CoversKernelPairs,
    ];
    let mut out = sweep_properties(f, &pullback_props, &default_corpus(), cfg)?;
    out.extend(sweep_properties(f, &kernel_props, &kernel_corpus(), cfg)?);
    Ok(out)
}

/// Re-runs exactly the failing check recorded in a witness and confirms the
/// violation is real.
pub fn replay_witness(
    f: &FunctorExpr,
    property: PropertyName,
    witness: &Witness,
    cfg: &EvalConfig,
) -> Result<bool> {
    if !property.applies_to(&witness.cospan) {
        return Ok(false);
    }
    let mediating = mediating_map(f, &witness.cospan, cfg)?;
    match &witness.detail {
        WitnessDetail::NotInjective { first, second } => {
            let (needs_injective, _) = requirement(property);
            Ok(needs_injective
                && first != second
                && mediating.map.apply(first)? == mediating.map.apply(second)?)
        }
        WitnessDetail::NotSurjective { missed_left, missed_right } => {
            let (_, needs_surjective) = requirement(property);
            let target = Value::pair(missed_left.clone(), missed_right.clone());
            if !needs_surjective || !mediating.map.cod().contains(&target) {
                return Ok(false);
            }
            Ok(mediating.map.graph().all(|(_, val)| val != &target))
        }
    }
}

fn numbered(prefix: &str, n: usize) -> FinSet {
    FinSet::of_atoms((0..n).map(|i| format!("{prefix}{i}"))).expect("distinct names")
}

fn function_from_indices(dom: &FinSet, cod: &FinSet, table: &[usize]) -> FinFunction {
    FinFunction::new(dom.clone(), cod.clone(), |v| {
        let i = dom.position(v).expect("domain element");
        cod.elems()[table[i]].clone()
    })
    .expect("index tables are total")
}

/// Canonical key of a cospan under independent renamings of the three
/// carriers, used to drop isomorphic duplicates from the exhaustive corpus.
fn canonical_key(left: &[usize], right: &[usize], apex_size: usize) -> Vec<usize> {
    let mut best: Option<Vec<usize>> = None;
    let left_perms = permutations(left.len());
    let right_perms = permutations(right.len());
    let apex_perms = permutations(apex_size);
    for ap in &apex_perms {
        for lp in &left_perms {
            let renamed_left: Vec<usize> = lp.iter().map(|&i| ap[left[i]]).collect();
            for rp in &right_perms {
                let renamed_right: Vec<usize> = rp.iter().map(|&i| ap[right[i]]).collect();
                let mut key = renamed_left.clone();
                key.push(usize::MAX); // separator between the two legs
                key.extend(&renamed_right);
                if best.as_ref().is_none_or(|b| key < *b) {
                    best = Some(key);
                }
            }
        }
    }
    best.expect("at least the identity renaming")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for i in 0..n {
        let mut next = Vec::new();
        for p in out {
            for pos in 0..=i {
                let mut q = p.clone();
                q.insert(pos, i);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn index_tables(dom_size: usize, cod_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dom_size {
        let mut next = Vec::new();
        for t in out {
            for target in 0..cod_size {
                let mut u = t.clone();
                u.push(target);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// The built-in cospan corpus: every cospan with side carriers of size at
/// most three over apexes of size one and two, one representative per
/// isomorphism class, plus twenty pseudo-random cospans from a fixed seed.
pub fn default_corpus() -> Vec<Cospan> {
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for apex_size in 1..=2usize {
        let apex = numbered("z", apex_size);
        for left_size in 0..=3usize {
            let left = numbered("a", left_size);
            for right_size in 0..=3usize {
                let right = numbered("b", right_size);
                for left_table in index_tables(left_size, apex_size) {
                    for right_table in index_tables(right_size, apex_size) {
                        let mut key = vec![left_size, right_size, apex_size];
                        key.extend(canonical_key(&left_table, &right_table, apex_size));
                        if !seen.insert(key) {
                            continue;
                        }
                        let f = function_from_indices(&left, &apex, &left_table);
                        let g = function_from_indices(&right, &apex, &right_table);
                        out.push(Cospan::new(f, g).expect("shared apex"));
                    }
                }
            }
        }
    }
    out.extend(random_cospans(20, 0x0c0a_1600));
    out
}

/// Self-cospans `(f, f)`: one per isomorphism class of functions with domain
/// size at most three and apex size one or two, plus ten seeded random ones.
pub fn kernel_corpus() -> Vec<Cospan> {
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for apex_size in 1..=2usize {
        let apex = numbered("z", apex_size);
        for dom_size in 0..=3usize {
            let dom = numbered("a", dom_size);
            for table in index_tables(dom_size, apex_size) {
                let mut key = vec![dom_size, apex_size];
                key.extend(canonical_key(&table, &table, apex_size));
                if !seen.insert(key) {
                    continue;
                }
                let f = function_from_indices(&dom, &apex, &table);
                out.push(Cospan::new(f.clone(), f).expect("shared apex"));
            }
        }
    }
    out.extend(random_self_cospans(10, 0x0c0a_1601));
    out
}

/// Deterministic pseudo-random self-cospans with moderate kernel pairs.
fn random_self_cospans(count: usize, seed: u64) -> Vec<Cospan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let apex_size = rng.gen_range(1..=3usize);
        let dom_size = rng.gen_range(0..=4usize);
        let table: Vec<usize> = (0..dom_size).map(|_| rng.gen_range(0..apex_size)).collect();
        let kernel_size: usize = (0..apex_size)
            .map(|z| table.iter().filter(|&&t| t == z).count().pow(2))
            .sum();
        if kernel_size > 12 {
            continue;
        }
        let dom = numbered("a", dom_size);
        let apex = numbered("z", apex_size);
        let f = function_from_indices(&dom, &apex, &table);
        out.push(Cospan::new(f.clone(), f).expect("shared apex"));
    }
    out
}

/// Deterministic pseudo-random cospans. Pullback sizes are kept moderate so
/// that repeated functor evaluation over the corpus stays fast.
fn random_cospans(count: usize, seed: u64) -> Vec<Cospan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let apex_size = rng.gen_range(1..=3usize);
        let left_size = rng.gen_range(0..=4usize);
        let right_size = rng.gen_range(0..=4usize);
        let left_table: Vec<usize> =
            (0..left_size).map(|_| rng.gen_range(0..apex_size)).collect();
        let right_table: Vec<usize> =
            (0..right_size).map(|_| rng.gen_range(0..apex_size)).collect();
        let pullback_size: usize = (0..apex_size)
            .map(|z| {
                left_table.iter().filter(|&&t| t == z).count()
                    * right_table.iter().filter(|&&t| t == z).count()
            })
            .sum();
        if pullback_size > 12 {
            continue;
        }
        let left = numbered("a", left_size);
        let right = numbered("b", right_size);
        let apex = numbered("z", apex_size);
        let f = function_from_indices(&left, &apex, &left_table);
        let g = function_from_indices(&right, &apex, &right_table);
        out.push(Cospan::new(f, g).expect("shared apex"));
    }
    out
}

/// The relation a witness cospan's pullback denotes; handy when a relation
/// counterexample should be inspected or replayed through the lifting.
pub fn witness_relation(witness: &Witness) -> Result<Relation> {
    pullback(witness.cospan.left_leg(), witness.cospan.right_leg())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms(names: &[&str]) -> FinSet {
        FinSet::of_atoms(names.iter().copied().map(String::from)).unwrap()
    }

    fn lts(labels: &[&str]) -> FunctorExpr {
        FunctorExpr::labelled_transitions(atoms(labels))
    }

    fn cfg() -> EvalConfig {
        EvalConfig::default()
    }

    #[test]
    fn corpora_are_deterministic_and_sizeable() {
        let a = default_corpus();
        let b = default_corpus();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.left_leg(), y.left_leg());
            assert_eq!(x.right_leg(), y.right_leg());
        }
        assert!(a.len() >= 40, "corpus has only {} cospans", a.len());
        let k = kernel_corpus();
        assert!(k.len() >= 10);
        assert!(k.iter().all(|c| c.left_leg() == c.right_leg()));
    }

    fn assert_profile(f: &FunctorExpr, expectations: &[(PropertyName, bool)]) {
        let checks = check_all_properties(f, &cfg()).unwrap();
        assert_eq!(checks.len(), expectations.len());
        for (property, should_hold) in expectations {
            let check = checks.iter().find(|c| c.property == *property).unwrap();
            assert_eq!(check.holds(), *should_hold, "unexpected verdict for {property}");
            if let Verdict::Counterexample(w) = &check.verdict {
                assert!(replay_witness(f, *property, w, &cfg()).unwrap());
            }
        }
    }

    #[test]
    fn polynomial_functors_pass_every_property() {
        let f = FunctorExpr::coproduct(
            FunctorExpr::Constant(atoms(&["k"])),
            FunctorExpr::power(FunctorExpr::Identity, 2),
        );
        let checks = check_all_properties(&f, &cfg()).unwrap();
        for check in checks {
            assert!(check.holds(), "{} failed for a polynomial functor", check.property);
            assert_eq!(check.cap_errors, 0);
        }
    }

    #[test]
    fn finite_powerset_profile() {
        let f = FunctorExpr::powerset(FunctorExpr::Identity);
        assert_profile(&f, &[
            (PropertyName::PreservesRelations, false),
            (PropertyName::PreservesPullbacks, false),
            (PropertyName::PreservesWeakPullbacks, true),
            (PropertyName::CoversPullbacks, true),
            (PropertyName::PreservesPullbacksAlongMonos, true),
            (PropertyName::WeaklyPreservesKernelPairs, true),
            (PropertyName::CoversKernelPairs, true),
        ]);
    }

    #[test]
    fn bounded_triple_functor_profile() {
        // Components of a triple with at most two distinct entries are
        // recoverable, so relations survive.
        assert_profile(&FunctorExpr::AtMostTwoOfThree, &[
            (PropertyName::PreservesRelations, true),
            (PropertyName::PreservesPullbacks, false),
            (PropertyName::PreservesWeakPullbacks, false),
            (PropertyName::CoversPullbacks, false),
            (PropertyName::PreservesPullbacksAlongMonos, true),
            (PropertyName::WeaklyPreservesKernelPairs, false),
            (PropertyName::CoversKernelPairs, false),
        ]);
    }

    #[test]
    fn subdistribution_profile_on_the_default_grid() {
        // Distinct couplings share their marginals, so joint monicity fails;
        // transport across a shared apex always has a coupling on the same
        // grid, so the weak form holds.
        assert_profile(&FunctorExpr::sub_distribution(FunctorExpr::Identity), &[
            (PropertyName::PreservesRelations, false),
            (PropertyName::PreservesPullbacks, false),
            (PropertyName::PreservesWeakPullbacks, true),
            (PropertyName::CoversPullbacks, true),
            (PropertyName::PreservesPullbacksAlongMonos, true),
            (PropertyName::WeaklyPreservesKernelPairs, true),
            (PropertyName::CoversKernelPairs, true),
        ]);
    }

    #[test]
    fn sweeping_matches_per_property_checks() {
        let f = FunctorExpr::powerset(FunctorExpr::Identity);
        let swept = check_all_properties(&f, &cfg()).unwrap();
        for check in swept {
            let individual = check_on_default_corpus(&f, check.property, &cfg()).unwrap();
            assert_eq!(check, individual);
        }
    }

    #[test]
    fn epi_notions_coincide_across_the_corpus() {
        let functors = [
            FunctorExpr::powerset(FunctorExpr::Identity),
            FunctorExpr::AtMostTwoOfThree,
            lts(&["a"]),
        ];
        for f in &functors {
            for cospan in default_corpus().iter().take(30) {
                let m = match mediating_map(f, cospan, &cfg()) {
                    Ok(m) => m,
                    Err(Error::Size { .. }) => continue,
                    Err(e) => panic!("unexpected error: {e}"),
                };
                assert!(m.epi_notions_agree());
                if let Some(section) = &m.section {
                    let round = m.map.compose_after(section).unwrap();
                    assert_eq!(round, FinFunction::identity(m.map.cod()));
                }
            }
        }
    }

    #[test]
    fn tampered_witnesses_do_not_replay() {
        let f = FunctorExpr::powerset(FunctorExpr::Identity);
        let check =
            check_on_default_corpus(&f, PropertyName::PreservesRelations, &cfg()).unwrap();
        let Verdict::Counterexample(witness) = check.verdict else {
            panic!("expected a counterexample");
        };
        let mut tampered = (*witness).clone();
        if let WitnessDetail::NotInjective { first, second } = &mut tampered.detail {
            *second = first.clone();
        }
        assert!(!replay_witness(&f, PropertyName::PreservesRelations, &tampered, &cfg())
            .unwrap());
    }

    #[test]
    fn cap_errors_are_counted_not_fatal() {
        let f = FunctorExpr::powerset(FunctorExpr::powerset(FunctorExpr::Identity));
        let tight = EvalConfig { cap: 50, grid_denominator: 2 };
        let check =
            check_property(&f, PropertyName::PreservesWeakPullbacks, &default_corpus(), &tight)
                .unwrap();
        assert!(check.cap_errors > 0);
    }
}
