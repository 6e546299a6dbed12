//! The release gate: eight end-to-end checks, one test per criterion, run
//! over a fixed corpus of coalgebra pairs. Every test is deterministic —
//! random inputs are drawn from seeded generators.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coalg::bisim::classify::{consistency_violations, find_precongruence_not_span, Classifier};
use coalg::bisim::lts::{partition_refinement_pair, random_lts, refine_lts_direct};
use coalg::bisim::terminal::behaviour_sequence;
use coalg::bisim::{
    check_all_notions, greatest_fixpoint, is_lifting_bisimulation, is_precongruence,
    is_span_bisimulation, refine_lifting, CoalgebraPair, RefineOp,
};
use coalg::eval::{eval_morphism, eval_object, validate_elem};
use coalg::props::{check_all_properties, PropertyName};
use coalg::text::parse_functor;
use coalg::{Coalgebra, EvalConfig, FinFunction, FinSet, FunctorExpr, Relation, Value};

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

fn atoms(names: &[&str]) -> FinSet {
    FinSet::of_atoms(names.iter().map(|n| n.to_string())).expect("distinct names")
}

fn functor(text: &str) -> FunctorExpr {
    parse_functor(text, &Default::default()).expect("fixture grammar")
}

fn lts(labels: &[&str], states: &[&str], moves: &[(&str, &str, &str)]) -> Coalgebra {
    let carrier = atoms(states);
    let structure = carrier
        .iter()
        .map(|s| {
            let out: BTreeSet<Value> = moves
                .iter()
                .filter(|(from, _, _)| Value::atom(*from) == *s)
                .map(|(_, l, to)| Value::pair(Value::atom(*l), Value::atom(*to)))
                .collect();
            (s.clone(), Value::Set(out))
        })
        .collect();
    Coalgebra::new(
        FunctorExpr::labelled_transitions(atoms(labels)),
        carrier,
        structure,
    )
    .expect("moves stay inside the carrier")
}

fn system(functor_text: &str, states: &[&str], behaviours: &[Value]) -> Coalgebra {
    let carrier = atoms(states);
    let structure = carrier
        .iter()
        .zip(behaviours)
        .map(|(s, b)| (s.clone(), b.clone()))
        .collect();
    Coalgebra::new(functor(functor_text), carrier, structure)
        .expect("behaviours match the functor")
}

fn set_of(names: &[&str]) -> Value {
    Value::Set(names.iter().map(|n| Value::atom(*n)).collect())
}

fn pair_of(a: &str, b: &str) -> Value {
    Value::pair(Value::atom(a), Value::atom(b))
}

fn triple_of(a: &str, b: &str, c: &str) -> Value {
    Value::triple(Value::atom(a), Value::atom(b), Value::atom(c))
}

/// The deadlock-against-one-step pair: the smallest example where the
/// greatest bisimulation is neither empty nor full.
fn deadlock_pair() -> CoalgebraPair {
    let left = lts(&["a"], &["x0", "x1"], &[("x0", "a", "x1")]);
    let right = lts(&["a"], &["y0"], &[]);
    CoalgebraPair::new(left, right).expect("same alphabet")
}

fn seeded_lts_pair(seed: u64, n: usize, m: usize, label_count: usize) -> CoalgebraPair {
    let labels = FinSet::of_atoms((0..label_count).map(|i| format!("l{i}")))
        .expect("distinct labels");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let left = random_lts(n, &labels, &mut rng);
    let right = random_lts(m, &labels, &mut rng);
    CoalgebraPair::new(left, right).expect("same alphabet")
}

fn lts_corpus() -> Vec<CoalgebraPair> {
    vec![
        deadlock_pair(),
        seeded_lts_pair(5, 3, 3, 1),
        seeded_lts_pair(7, 2, 2, 2),
        seeded_lts_pair(9, 3, 3, 2),
    ]
}

/// Every corpus pair for the enumeration criteria: the product of the two
/// carriers never exceeds nine states, so all relations can be listed.
fn enumeration_corpus() -> Vec<CoalgebraPair> {
    let mut corpus = lts_corpus();

    let pf_left = system(
        "Pf(Id)",
        &["a0", "a1", "a2"],
        &[set_of(&["a1", "a2"]), set_of(&[]), set_of(&["a2"])],
    );
    let pf_right = system(
        "Pf(Id)",
        &["b0", "b1", "b2"],
        &[set_of(&["b1"]), set_of(&["b1"]), set_of(&["b0", "b1", "b2"])],
    );
    corpus.push(CoalgebraPair::new(pf_left, pf_right).expect("same functor"));

    let pf_small_left = system("Pf(Id)", &["a0", "a1"], &[set_of(&["a0", "a1"]), set_of(&[])]);
    let pf_small_right = system("Pf(Id)", &["b0", "b1"], &[set_of(&["b1"]), set_of(&[])]);
    corpus.push(CoalgebraPair::new(pf_small_left, pf_small_right).expect("same functor"));

    let prod_left = system(
        "Times(Id,Id)",
        &["a0", "a1", "a2"],
        &[pair_of("a1", "a2"), pair_of("a0", "a1"), pair_of("a2", "a2")],
    );
    let prod_right = system(
        "Times(Id,Id)",
        &["b0", "b1", "b2"],
        &[pair_of("b1", "b1"), pair_of("b0", "b2"), pair_of("b2", "b2")],
    );
    corpus.push(CoalgebraPair::new(prod_left, prod_right).expect("same functor"));

    let halt = Value::Inr(Box::new(Value::atom("e")));
    let sum_left = system(
        "Plus(Id,Const({e}))",
        &["a0", "a1"],
        &[Value::Inl(Box::new(Value::atom("a1"))), halt.clone()],
    );
    let sum_right = system(
        "Plus(Id,Const({e}))",
        &["b0", "b1", "b2"],
        &[
            Value::Inl(Box::new(Value::atom("b2"))),
            halt.clone(),
            Value::Inl(Box::new(Value::atom("b1"))),
        ],
    );
    corpus.push(CoalgebraPair::new(sum_left, sum_right).expect("same functor"));

    let triple_left = system(
        "P32",
        &["a0", "a1", "a2"],
        &[
            triple_of("a0", "a1", "a0"),
            triple_of("a1", "a1", "a1"),
            triple_of("a0", "a0", "a2"),
        ],
    );
    let triple_right = system(
        "P32",
        &["b0", "b1", "b2"],
        &[
            triple_of("b1", "b0", "b1"),
            triple_of("b1", "b1", "b1"),
            triple_of("b2", "b0", "b0"),
        ],
    );
    corpus.push(CoalgebraPair::new(triple_left, triple_right).expect("same functor"));

    let small_triple_left = system(
        "P32",
        &["a0", "a1"],
        &[triple_of("a0", "a1", "a0"), triple_of("a1", "a1", "a1")],
    );
    let small_triple_right = system(
        "P32",
        &["b0", "b1"],
        &[triple_of("b1", "b1", "b0"), triple_of("b0", "b0", "b0")],
    );
    corpus.push(CoalgebraPair::new(small_triple_left, small_triple_right).expect("same functor"));

    for pair in &corpus {
        assert!(
            pair.left().carrier().len() * pair.right().carrier().len() <= 9,
            "enumeration corpus must stay enumerable"
        );
    }
    corpus
}

/// All relations between the two carriers, by bit mask — at most 512.
fn all_relations(pair: &CoalgebraPair) -> Vec<Relation> {
    let left = pair.left().carrier();
    let right = pair.right().carrier();
    let total = left.len() * right.len();
    (0..1u32 << total)
        .map(|mask| {
            let mut pairs = BTreeSet::new();
            for (i, x) in left.iter().enumerate() {
                for (j, y) in right.iter().enumerate() {
                    if mask >> (i * right.len() + j) & 1 == 1 {
                        pairs.insert((x.clone(), y.clone()));
                    }
                }
            }
            Relation::new(left.clone(), right.clone(), pairs).expect("carrier pairs")
        })
        .collect()
}

#[test]
fn criterion_1_implication_suite() {
    let start = Instant::now();
    let c = cfg();
    let mut checked = 0usize;
    for pair in enumeration_corpus() {
        for r in all_relations(&pair) {
            let span = is_span_bisimulation(&pair, &r, &c).expect("in-cap fixtures");
            let lifting = is_lifting_bisimulation(&pair, &r, &c).expect("in-cap fixtures");
            let precongruence = is_precongruence(&pair, &r, &c).expect("in-cap fixtures");
            assert!(
                !span || lifting,
                "{}: spanning witness without a lifting one for {:?}",
                pair.functor(),
                r.pairs()
            );
            assert!(
                !lifting || precongruence,
                "{}: lifting holds but gluing fails for {:?}",
                pair.functor(),
                r.pairs()
            );
            checked += 1;
        }
    }
    assert!(checked >= 1000, "only {checked} relations enumerated");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "enumeration took {elapsed:?}");
}

#[test]
fn criterion_2_conditional_back_arrows() {
    let c = cfg();
    let mut classifier = Classifier::new(c.clone());
    let mut witnessed = 0usize;
    for pair in enumeration_corpus() {
        let checks = classifier.profile(pair.functor()).expect("profile fixtures");
        for r in all_relations(&pair) {
            let notions = check_all_notions(&pair, &r, Some(1), &c).expect("in-cap fixtures");
            let violations = consistency_violations(&checks, &notions);
            assert!(
                violations.is_empty(),
                "{}: {violations:?} for {:?}",
                pair.functor(),
                r.pairs()
            );
            if notions.kernel.is_witnessed() {
                witnessed += 1;
            }
        }
    }
    assert!(witnessed > 0, "no witnessed relation ever appeared");
}

#[test]
fn criterion_3_separator_reproduction() {
    let start = Instant::now();
    let c = cfg();
    let found = find_precongruence_not_span(&FunctorExpr::AtMostTwoOfThree, 4, &c)
        .expect("search stays in cap");
    let (system, r) = found.expect("a separating relation exists on carriers of up to four");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "search took {elapsed:?}");

    let pair = CoalgebraPair::self_pair(system);
    assert!(is_precongruence(&pair, &r, &c).expect("replay"));
    assert!(!is_span_bisimulation(&pair, &r, &c).expect("replay"));
    // Pointwise, a lifting witness yields a spanning one by choosing one
    // behaviour per pair, so the separation carries over.
    assert!(!is_lifting_bisimulation(&pair, &r, &c).expect("replay"));

    let mut classifier = Classifier::new(c.clone());
    let notions = check_all_notions(&pair, &r, None, &c).expect("replay");
    let checks = classifier.profile(&FunctorExpr::AtMostTwoOfThree).expect("profile");
    assert!(consistency_violations(&checks, &notions).is_empty());
    assert!(notions.precongruence && !notions.span && !notions.lifting);

    // The relation-preservation sweep stays clean for this functor, which is
    // exactly why the search had to range over whole systems rather than
    // read a witness off a single sweep failure.
    let relations_check = checks
        .iter()
        .find(|check| check.property == PropertyName::PreservesRelations)
        .expect("swept");
    assert!(relations_check.holds());
}

#[test]
fn criterion_4_sequence_coincidence() {
    let c = cfg();
    for pair in lts_corpus() {
        let seq = behaviour_sequence(&pair, None).expect("in-cap fixtures");
        let via_lifting = greatest_fixpoint(&pair, RefineOp::Lifting, &c).expect("run");
        let via_span = greatest_fixpoint(&pair, RefineOp::Span, &c).expect("run");
        assert_eq!(
            via_lifting.steps.len(),
            via_span.steps.len(),
            "{}: the two operators disagree on chain length",
            pair.functor()
        );
        for (n, (hj, am)) in via_lifting.steps.iter().zip(&via_span.steps).enumerate() {
            assert_eq!(hj.pairs(), am.pairs(), "stage {n} differs between operators");
        }
        assert_eq!(
            seq.relations.len(),
            via_lifting.steps.len(),
            "{}: the behaviour sequence and the chain disagree on length",
            pair.functor()
        );
        for (n, (w, chain)) in seq.relations.iter().zip(&via_lifting.steps).enumerate() {
            assert_eq!(
                w.pairs(),
                chain.pairs(),
                "stage {n} of the behaviour sequence differs from the chain"
            );
        }
    }
}

#[test]
fn criterion_5_fast_path_agreement() {
    let c = cfg();
    let labels = atoms(&["l0", "l1"]);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1_000 + seed);
        let states = rng.gen_range(1..=30);
        let pair = CoalgebraPair::self_pair(random_lts(states, &labels, &mut rng));
        let refined = partition_refinement_pair(&pair).expect("refinement");
        let run = greatest_fixpoint(&pair, RefineOp::Lifting, &c).expect("run");
        assert_eq!(
            refined.pairs(),
            run.relation().pairs(),
            "seed {seed}: partition refinement left the fixpoint"
        );
    }

    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2_000 + seed);
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let label_count = if n * m <= 8 { 2 } else { 1 };
        let pair = seeded_lts_pair(3_000 + seed, n, m, label_count);
        let run = greatest_fixpoint(&pair, RefineOp::Lifting, &c).expect("run");
        for (i, step) in run.steps[..run.steps.len() - 1].iter().enumerate() {
            let direct = refine_lts_direct(&pair, step).expect("direct step");
            let generic = refine_lifting(&pair, step, &c).expect("generic step");
            assert_eq!(direct.pairs(), generic.pairs(), "seed {seed}, step {i}");
            assert_eq!(direct.pairs(), run.steps[i + 1].pairs(), "seed {seed}, step {i}");
        }
    }
}

#[test]
fn criterion_6_convergence_bound() {
    let c = cfg();
    for pair in enumeration_corpus() {
        let budget = pair.left().carrier().len() * pair.right().carrier().len() + 1;
        for op in [RefineOp::Lifting, RefineOp::Span, RefineOp::Precongruence] {
            let run = greatest_fixpoint(&pair, op, &c).expect("run");
            assert!(
                run.steps_to_converge <= budget,
                "{}: {op:?} needed {} steps with budget {budget}",
                pair.functor(),
                run.steps_to_converge
            );
        }
    }

    let pair = deadlock_pair();
    let run = greatest_fixpoint(&pair, RefineOp::Lifting, &c).expect("run");
    assert_eq!(run.steps_to_converge, 2);
    let survivor: BTreeSet<(Value, Value)> =
        [(Value::atom("x1"), Value::atom("y0"))].into_iter().collect();
    assert_eq!(run.relation().pairs(), &survivor);
}

#[test]
fn criterion_7_law_and_conservation_suite() {
    let law_functors: Vec<FunctorExpr> = [
        "Id",
        "Pf(Id)",
        "Times(Id,Id)",
        "Plus(Id,Const({e}))",
        "Pow(Id,2)",
        "Dsub(Id)",
        "P32",
        "Lts({a})",
    ]
    .iter()
    .map(|t| functor(t))
    .collect();
    let c = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let carriers: Vec<FinSet> = (1..=3)
        .map(|n| FinSet::of_atoms((0..n).map(|i| format!("v{i}"))).expect("names"))
        .collect();
    let objects: Vec<Vec<FinSet>> = law_functors
        .iter()
        .map(|f| {
            carriers
                .iter()
                .map(|x| eval_object(f, x, &c).expect("small object"))
                .collect()
        })
        .collect();

    let random_function = |rng: &mut ChaCha8Rng, dom: &FinSet, cod: &FinSet| {
        let images: Vec<Value> = dom
            .iter()
            .map(|_| cod.elems()[rng.gen_range(0..cod.len())].clone())
            .collect();
        FinFunction::from_pairs(
            dom.clone(),
            cod.clone(),
            dom.iter().cloned().zip(images),
        )
        .expect("total")
    };

    let mut actions = 0usize;
    while actions < 10_000 {
        let fi = rng.gen_range(0..law_functors.len());
        let f = &law_functors[fi];
        let ni = rng.gen_range(0..carriers.len());
        let mi = rng.gen_range(0..carriers.len());
        let ki = rng.gen_range(0..carriers.len());
        let x = &carriers[ni];
        let object = &objects[fi][ni];
        let t = &object.elems()[rng.gen_range(0..object.len())];

        let id = FinFunction::identity(x);
        assert_eq!(&eval_morphism(f, &id, t).expect("identity action"), t);

        let first = random_function(&mut rng, x, &carriers[mi]);
        let second = random_function(&mut rng, &carriers[mi], &carriers[ki]);
        let moved = eval_morphism(f, &first, t).expect("action");
        validate_elem(f, &carriers[mi], &moved).expect("image stays in the object");
        let stepwise = eval_morphism(f, &second, &moved).expect("action");
        let both = second.compose_after(&first).expect("compose");
        assert_eq!(eval_morphism(f, &both, t).expect("action"), stepwise);

        assert_eq!(t.mass().is_some(), moved.mass().is_some());
        if let (Some(before), Some(after)) = (t.mass(), moved.mass()) {
            assert_eq!(before, after, "mass drifted under {f}");
        }
        if let Value::Triple(a, b, c3) = &moved {
            let distinct: BTreeSet<&Value> =
                [a.as_ref(), b.as_ref(), c3.as_ref()].into_iter().collect();
            assert!(distinct.len() <= 2, "{moved} uses too many entries");
        }

        actions += 4;
    }
}

#[test]
fn criterion_8_finite_set_collapse() {
    let sweep = [
        "Id",
        "Const({c0,c1})",
        "Times(Id,Id)",
        "Plus(Id,Const({e}))",
        "Pow(Id,2)",
        "Pf(Id)",
        "Dsub(Id)",
        "P32",
        "Lts({a,b})",
    ];
    let c = cfg();
    for text in sweep {
        let f = functor(text);
        let checks = check_all_properties(&f, &c).expect("sweep fixtures");
        let find = |name: PropertyName| {
            checks
                .iter()
                .find(|check| check.property == name)
                .expect("full sweep")
                .holds()
        };
        assert_eq!(
            find(PropertyName::CoversPullbacks),
            find(PropertyName::PreservesWeakPullbacks),
            "{text}: covering and weak preservation split over finite sets"
        );
        assert_eq!(
            find(PropertyName::CoversPullbacks),
            find(PropertyName::CoversKernelPairs)
                && find(PropertyName::PreservesPullbacksAlongMonos),
            "{text}: covering fails to split into its kernel and mono parts"
        );
    }
}
