//! Batch front end: parse system descriptions, run the checkers, emit JSON
//! reports or dot graphs.
//!
//! Exit codes: 0 = success; 1 = a check found a violation or counterexample
//! (the expected outcome for falsifiers — the report is still written);
//! 2 = usage or input error; 3 = an enumeration exceeded the cap.

use coalg_cli::{aut, dot, error, systemfile};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coalg::bisim::classify::consistency_violations;
use coalg::bisim::lts::minimize_lts;
use coalg::bisim::terminal::behaviour_sequence;
use coalg::bisim::{check_all_notions, greatest_fixpoint, CoalgebraPair, RefineOp};
use coalg::finset::Relation;
use coalg::functor::{EvalConfig, FunctorExpr};
use coalg::props::check_all_properties;
use coalg::report;
use coalg::text::parse_functor;
use coalg::value::Value;

use error::{CliError, Result};
use systemfile::LoadedSystem;

/// Default seed for relation sampling; override with COALG_SEED.
const DEFAULT_SEED: u64 = 17;
/// `compare` enumerates every relation up to this many state pairs and
/// samples beyond it.
const ENUMERATION_LIMIT: usize = 12;
/// How many relations `compare` draws when sampling.
const SAMPLE_COUNT: usize = 256;

/// Functors swept by `props` when no --functor is given.
const DEFAULT_SWEEP: &[&str] = &[
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

#[derive(Parser)]
#[command(
    name = "coalg",
    version,
    about = "Finite-set coalgebra toolkit: bisimulation notions, refinement \
             sequences, and functor-property falsifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OpArg {
    /// The relation-lifting refinement operator.
    Hj,
    /// The spanning refinement operator.
    Am,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Args)]
struct EvalArgs {
    /// Cap on enumerated functor values.
    #[arg(long)]
    cap: Option<u64>,
    /// Denominator of the weight grid for sub-distributions.
    #[arg(long)]
    grid: Option<u64>,
}

impl EvalArgs {
    fn config(&self) -> EvalConfig {
        let mut cfg = EvalConfig::default();
        if let Some(cap) = self.cap {
            cfg.cap = cap;
        }
        if let Some(grid) = self.grid {
            cfg.grid_denominator = grid;
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify a named relation under all four notions and check the
    /// implication arrows between the verdicts.
    Check {
        file: PathBuf,
        /// Which declared relation to classify.
        #[arg(long)]
        relation: String,
        /// Block bound for the cospan search.
        #[arg(long)]
        bound: Option<usize>,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run a refinement operator to its greatest fixpoint and print the
    /// descending chain.
    Fixpoint {
        file: PathBuf,
        /// Which refinement operator to iterate.
        #[arg(long, value_enum)]
        op: OpArg,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Print the stage relations W_0, W_1, ... down the behaviour sequence.
    Sequence {
        file: PathBuf,
        /// Stop after this many steps even if not yet stable.
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Sweep preservation properties over functors on the built-in corpora.
    Props {
        /// A functor expression to check; without it, a default family is
        /// swept.
        #[arg(long)]
        functor: Option<String>,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Enumerate (or sample) relations over a pair and report every
    /// implication violation between the four notions.
    Compare {
        file: PathBuf,
        /// Block bound for the cospan search (the pushout route decides
        /// witnessing regardless; this widens the exhaustive phase).
        #[arg(long, default_value_t = 1)]
        bound: usize,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Minimize a labelled-transition system by partition refinement.
    Minimize {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(found) => std::process::exit(if found { 1 } else { 0 }),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn load_file(path: &Path) -> Result<LoadedSystem> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "aut") {
        let system = aut::import_aut(&text)?;
        Ok(LoadedSystem {
            pair: CoalgebraPair::self_pair(system),
            relations: BTreeMap::new(),
            has_right: false,
        })
    } else {
        systemfile::parse_system_text(&text)
    }
}

fn seed_from_env() -> Result<u64> {
    match std::env::var("COALG_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            CliError::input(format!("COALG_SEED must be an unsigned integer, got '{text}'"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn property_verdicts(f: &FunctorExpr, cfg: &EvalConfig) -> Result<Vec<report::PropertyVerdict>> {
    Ok(check_all_properties(f, cfg)?
        .iter()
        .map(|c| report::property_verdict(&f.to_string(), c))
        .collect())
}

/// Runs one command; `Ok(true)` means a violation or counterexample was
/// found and the process should exit 1.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Check { file, relation, bound, eval, format } => {
            let loaded = load_file(&file)?;
            let cfg = eval.config();
            let r = loaded.relation(&relation)?.clone();
            let notions = check_all_notions(&loaded.pair, &r, bound, &cfg)?;
            let checks = check_all_properties(loaded.pair.functor(), &cfg)?;
            let violations: Vec<String> = consistency_violations(&checks, &notions)
                .into_iter()
                .map(String::from)
                .collect();
            match format {
                Format::Json => {
                    let out = report::CheckReport {
                        functor: loaded.pair.functor().to_string(),
                        relation,
                        pairs: report::relation_entries(&r),
                        flags: report::notion_flags(&notions),
                        functor_checks: checks
                            .iter()
                            .map(|c| {
                                report::property_verdict(
                                    &loaded.pair.functor().to_string(),
                                    c,
                                )
                            })
                            .collect(),
                        violations: violations.clone(),
                    };
                    print!("{}", report::to_json(&out));
                }
                Format::Dot => print!("{}", dot::relation_graph(&r)),
            }
            Ok(!violations.is_empty())
        }

        Command::Fixpoint { file, op, eval, format } => {
            let loaded = load_file(&file)?;
            let cfg = eval.config();
            let op = match op {
                OpArg::Hj => RefineOp::Lifting,
                OpArg::Am => RefineOp::Span,
            };
            let run = greatest_fixpoint(&loaded.pair, op, &cfg)?;
            match format {
                Format::Json => print!("{}", report::to_json(&report::chain(&run))),
                Format::Dot => print!("{}", dot::chain_graph(&run.steps)),
            }
            Ok(false)
        }

        Command::Sequence { file, steps, eval, format } => {
            let loaded = load_file(&file)?;
            let _ = eval.config();
            let seq = behaviour_sequence(&loaded.pair, steps)?;
            match format {
                Format::Json => print!("{}", report::to_json(&report::sequence(&seq))),
                Format::Dot => print!("{}", dot::sequence_graph(&seq.relations)),
            }
            Ok(false)
        }

        Command::Props { functor, eval } => {
            let cfg = eval.config();
            let env = BTreeMap::new();
            let functors: Vec<FunctorExpr> = match functor {
                Some(text) => vec![parse_functor(&text, &env)
                    .map_err(|e| CliError::input(format!("--functor: {e}")))?],
                None => DEFAULT_SWEEP
                    .iter()
                    .map(|t| parse_functor(t, &env).expect("built-in sweep entries parse"))
                    .collect(),
            };
            let mut verdicts = Vec::new();
            for f in &functors {
                verdicts.extend(property_verdicts(f, &cfg)?);
            }
            let found = verdicts.iter().any(|v| v.status == "Counterexample");
            print!("{}", report::to_json(&verdicts));
            Ok(found)
        }

        Command::Compare { file, bound, eval } => {
            let loaded = load_file(&file)?;
            let cfg = eval.config();
            let pair = &loaded.pair;
            let checks = check_all_properties(pair.functor(), &cfg)?;
            let left = pair.left().carrier().clone();
            let right = pair.right().carrier().clone();
            let all_pairs: Vec<(Value, Value)> = left
                .iter()
                .flat_map(|x| right.iter().map(move |y| (x.clone(), y.clone())))
                .collect();
            let total = all_pairs.len();

            let mut masks: Vec<Vec<bool>> = Vec::new();
            let sampled = total > ENUMERATION_LIMIT;
            let seed = if sampled { Some(seed_from_env()?) } else { None };
            if sampled {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.expect("set when sampling"));
                masks.push(vec![false; total]);
                masks.push(vec![true; total]);
                for _ in 0..SAMPLE_COUNT {
                    masks.push((0..total).map(|_| rng.gen_bool(0.5)).collect());
                }
            } else {
                for mask in 0u64..(1u64 << total) {
                    masks.push((0..total).map(|i| mask & (1 << i) != 0).collect());
                }
            }

            let mut violations = Vec::new();
            let relations_checked = masks.len();
            for mask in &masks {
                let chosen = all_pairs
                    .iter()
                    .zip(mask)
                    .filter(|(_, keep)| **keep)
                    .map(|(p, _)| p.clone());
                let r = Relation::new(left.clone(), right.clone(), chosen)?;
                let notions = check_all_notions(pair, &r, Some(bound), &cfg)?;
                let violated = consistency_violations(&checks, &notions);
                if !violated.is_empty() {
                    violations.push(report::CompareViolation {
                        pairs: report::relation_entries(&r),
                        violated: violated.into_iter().map(String::from).collect(),
                        flags: report::notion_flags(&notions),
                    });
                }
            }
            let out = report::CompareReport {
                functor: pair.functor().to_string(),
                left_states: left.len(),
                right_states: right.len(),
                relations_checked,
                sampled,
                seed,
                functor_checks: checks
                    .iter()
                    .map(|c| report::property_verdict(&pair.functor().to_string(), c))
                    .collect(),
                violations,
            };
            let found = !out.violations.is_empty();
            print!("{}", report::to_json(&out));
            Ok(found)
        }

        Command::Minimize { file, format } => {
            let loaded = load_file(&file)?;
            if loaded.has_right {
                return Err(CliError::input(
                    "minimize takes a single system; drop the [right] table",
                ));
            }
            let min = minimize_lts(loaded.pair.left())?;
            match format {
                Format::Json => {
                    print!("{}", report::to_json(&report::minimize_report(&min)))
                }
                Format::Dot => print!("{}", dot::quotient_graph(&min)?),
            }
            Ok(false)
        }
    }
}
