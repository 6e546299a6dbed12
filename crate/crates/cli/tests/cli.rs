//! End-to-end tests for the binary: worked examples, exit codes, byte
//! stability, dot syntax, and the file-format round trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value as Json;

const TWOSYS: &str = r#"
functor = "Lts(L)"

[sets]
L = "{a}"

[left]
states = ["x0", "x1"]
[left.structure]
x0 = "{(a,x1)}"
x1 = "{}"

[right]
states = ["y0"]
[right.structure]
y0 = "{}"

[relations]
dead = "{(x1,y0)}"
all = "{(x0,y0),(x1,y0)}"
"#;

fn write_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coalg"))
        .args(args)
        .env_remove("COALG_SEED")
        .output()
        .unwrap()
}

fn run_seeded(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coalg"))
        .args(args)
        .env("COALG_SEED", seed)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Json {
    serde_json::from_str(&stdout(out)).expect("stdout is valid JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited")
}

#[test]
fn fixpoint_hj_walks_the_worked_example_chain() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "twosys.toml", TWOSYS);
    let out = run(&["fixpoint", "--op", "hj", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    let steps = report["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 3);
    assert_eq!(steps[0].as_array().unwrap().len(), 2);
    assert_eq!(steps[1], serde_json::json!([["x1", "y0"]]));
    assert_eq!(steps[2], steps[1]);
    assert_eq!(report["converged"], serde_json::json!(true));
    assert_eq!(report["stepsToConverge"], serde_json::json!(2));
}

#[test]
fn the_two_operators_emit_identical_chains() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "twosys.toml", TWOSYS);
    let file = file.to_str().unwrap();
    let hj = run(&["fixpoint", "--op", "hj", file]);
    let am = run(&["fixpoint", "--op", "am", file]);
    assert_eq!(code(&hj), 0);
    assert_eq!(stdout(&hj), stdout(&am));
}

#[test]
fn check_classifies_the_dead_relation_with_all_flags_up() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "twosys.toml", TWOSYS);
    let out = run(&["check", file.to_str().unwrap(), "--relation", "dead"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["flags"]["amBisim"], serde_json::json!(true));
    assert_eq!(report["flags"]["hjBisim"], serde_json::json!(true));
    assert_eq!(report["flags"]["amPrecongruence"], serde_json::json!(true));
    assert_eq!(report["flags"]["kernelBisim"]["status"], serde_json::json!("Yes"));
    assert_eq!(report["violations"], serde_json::json!([]));
    // The witness cospan is carried in full.
    let witness = &report["flags"]["kernelBisim"]["witness"];
    assert!(witness["apex"].as_array().unwrap().len() >= 2);
    assert!(witness["structure"].is_object());
}

#[test]
fn check_flags_stay_down_for_a_non_bisimulation() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "twosys.toml", TWOSYS);
    let out = run(&["check", file.to_str().unwrap(), "--relation", "all"]);
    // x0 has a move, y0 has none: nothing holds, and no arrow is violated.
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["flags"]["amBisim"], serde_json::json!(false));
    assert_eq!(report["flags"]["hjBisim"], serde_json::json!(false));
    assert_eq!(report["flags"]["amPrecongruence"], serde_json::json!(false));
    assert_eq!(
        report["flags"]["kernelBisim"]["status"],
        serde_json::json!("NotFoundWithinBound")
    );
    assert_eq!(report["violations"], serde_json::json!([]));
}

#[test]
fn sequence_and_fixpoint_agree_on_the_example() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "twosys.toml", TWOSYS);
    let file = file.to_str().unwrap();
    let seq = json(&run(&["sequence", file]));
    let fix = json(&run(&["fixpoint", "--op", "hj", file]));
    assert_eq!(seq["relations"], fix["steps"]);
    assert_eq!(seq["stabilized"], serde_json::json!(true));
    assert_eq!(seq["stabilizedAt"], serde_json::json!(2));
}

#[test]
fn sequence_respects_a_step_budget() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "twosys.toml", TWOSYS);
    let out = json(&run(&["sequence", file.to_str().unwrap(), "--steps", "1"]));
    assert_eq!(out["relations"].as_array().unwrap().len(), 2);
    assert_eq!(out["stabilized"], serde_json::json!(false));
}

#[test]
fn props_reports_the_triple_functor_counterexample_and_exits_1() {
    let out = run(&["props", "--functor", "P32"]);
    assert_eq!(code(&out), 1);
    let verdicts = json(&out);
    let weak = verdicts
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["property"] == serde_json::json!("PreservesWeakPullbacks"))
        .expect("weak-pullback verdict present");
    assert_eq!(weak["status"], serde_json::json!("Counterexample"));
    assert!(weak["witness"]["detail"]["kind"].is_string());
    let relations = verdicts
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["property"] == serde_json::json!("PreservesRelations"))
        .unwrap();
    assert_eq!(relations["status"], serde_json::json!("HoldsOnCorpus"));
}

#[test]
fn props_on_the_identity_functor_is_clean_and_stable() {
    let a = run(&["props", "--functor", "Id"]);
    let b = run(&["props", "--functor", "Id"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    for verdict in json(&a).as_array().unwrap() {
        assert_eq!(verdict["status"], serde_json::json!("HoldsOnCorpus"));
    }
}

#[test]
fn compare_enumerates_small_pairs_with_zero_violations() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "twosys.toml", TWOSYS);
    let out = run(&["compare", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["relationsChecked"], serde_json::json!(4));
    assert_eq!(report["sampled"], serde_json::json!(false));
    assert_eq!(report["violations"], serde_json::json!([]));
    assert!(report.get("seed").is_none());
}

#[test]
fn compare_samples_large_spaces_reproducibly() {
    // A 4-state one-label system: the self-pair has 16 > 12 state pairs.
    let aut = "des (0, 3, 4)\n(0, \"a\", 1)\n(1, \"a\", 2)\n(2, \"a\", 3)\n";
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "chainy.aut", aut);
    let file = file.to_str().unwrap();
    let a = run(&["compare", file]);
    let b = run(&["compare", file]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    let report = json(&a);
    assert_eq!(report["sampled"], serde_json::json!(true));
    assert_eq!(report["seed"], serde_json::json!(17));
    assert_eq!(report["violations"], serde_json::json!([]));

    let seeded = run_seeded(&["compare", file], "99");
    assert_eq!(json(&seeded)["seed"], serde_json::json!(99));
}

#[test]
fn minimize_and_the_fixpoint_agree_on_aut_input() {
    // x1 and x2 are behaviourally equal; everything else is distinct.
    let aut = "des (0, 4, 4)\n(0, \"a\", 1)\n(0, \"a\", 2)\n(1, \"b\", 3)\n(2, \"b\", 3)\n";
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "diamond.aut", aut);
    let file = file.to_str().unwrap();

    let min = json(&run(&["minimize", file]));
    let blocks = min["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 3);
    assert!(blocks.contains(&serde_json::json!(["x1", "x2"])));

    let fix = json(&run(&["fixpoint", "--op", "hj", file]));
    let final_step = fix["steps"].as_array().unwrap().last().unwrap().clone();
    let gfp: std::collections::BTreeSet<(String, String)> = final_step
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            let p = p.as_array().unwrap();
            (
                p[0].as_str().unwrap().to_string(),
                p[1].as_str().unwrap().to_string(),
            )
        })
        .collect();
    // Same block <=> related by the greatest fixpoint.
    let mut expected = std::collections::BTreeSet::new();
    for block in blocks {
        let members: Vec<&str> =
            block.as_array().unwrap().iter().map(|m| m.as_str().unwrap()).collect();
        for a in &members {
            for b in &members {
                expected.insert((a.to_string(), b.to_string()));
            }
        }
    }
    assert_eq!(gfp, expected);
}

#[test]
fn aut_files_round_trip_through_the_system_format() {
    // Thirty states, two labels, deterministic construction.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 30;
    let mut lines = Vec::new();
    for s in 0..n {
        for _ in 0..rng.gen_range(0..3usize) {
            let label = if rng.gen_bool(0.5) { "a" } else { "b" };
            lines.push(format!("({s}, \"{label}\", {})", rng.gen_range(0..n)));
        }
    }
    let text = format!("des (0, {}, {n})\n{}\n", lines.len(), lines.join("\n"));

    let system = coalg_cli::aut::import_aut(&text).unwrap();
    let pair = coalg::bisim::CoalgebraPair::self_pair(system.clone());
    let rendered =
        coalg_cli::systemfile::render_system_text(&pair, &std::collections::BTreeMap::new())
            .unwrap();
    let reparsed = coalg_cli::systemfile::parse_system_text(&rendered).unwrap();
    assert_eq!(reparsed.pair.left(), &system);
    assert_eq!(reparsed.pair.right(), &system);

    // Export, too: importing what we export gives the system back.
    let exported = coalg_cli::aut::export_aut(&system).unwrap();
    let reimported = coalg_cli::aut::import_aut(&exported).unwrap();
    assert_eq!(reimported, system);
    assert_eq!(coalg_cli::aut::export_aut(&reimported).unwrap(), exported);
}

#[test]
fn duplicate_aut_lines_collapse_by_set_semantics() {
    let once = "des (0, 1, 2)\n(0, \"a\", 1)\n";
    let twice = "des (0, 2, 2)\n(0, \"a\", 1)\n(0, \"a\", 1)\n";
    let a = coalg_cli::aut::import_aut(once).unwrap();
    let b = coalg_cli::aut::import_aut(twice).unwrap();
    assert_eq!(a, b);
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_toml = write_file(dir.path(), "bad.toml", "functor = \"Lts({a})\"\n");
    let out = run(&["fixpoint", "--op", "hj", bad_toml.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let bad_aut = write_file(dir.path(), "bad.aut", "des (0, 1, 1)\n(0, \"a\", 7)\n");
    let out = run(&["minimize", bad_aut.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8(out.stderr).unwrap().contains("out of range"));

    let missing = dir.path().join("nosuch.toml");
    let out = run(&["sequence", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let file = write_file(dir.path(), "twosys.toml", TWOSYS);
    let out = run(&["check", file.to_str().unwrap(), "--relation", "nosuch"]);
    assert_eq!(code(&out), 2);

    let out = run(&["fixpoint", file.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "missing --op is a usage error");
}

#[test]
fn cap_overruns_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let pf = "functor = \"Pf(Id)\"\n\n[left]\nstates = [\"s0\", \"s1\"]\n\
              [left.structure]\ns0 = \"{s0,s1}\"\ns1 = \"{}\"\n";
    let file = write_file(dir.path(), "pf.toml", pf);
    let out = run(&["fixpoint", "--op", "hj", file.to_str().unwrap(), "--cap", "3"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8(out.stderr).unwrap().contains("cap"));
}

#[test]
fn json_reports_are_byte_stable_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "twosys.toml", TWOSYS);
    let file = file.to_str().unwrap();
    for args in [
        vec!["check", file, "--relation", "dead"],
        vec!["fixpoint", "--op", "hj", file],
        vec!["sequence", file],
        vec!["compare", file],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(stdout(&a), stdout(&b), "{args:?}");
        json(&a);
    }
}

// ---- dot syntax ----------------------------------------------------------

/// A small structural check for dot output: balanced braces, valid tokens,
/// and edges/statements in the places the language allows them.
mod dot_grammar {
    pub fn assert_valid(text: &str) {
        let mut tokens = tokenize(text);
        tokens.reverse(); // pop from the back
        let t = next(&mut tokens);
        assert!(t == "graph" || t == "digraph", "must open with a graph kind");
        let directed = t == "digraph";
        let mut t = next(&mut tokens);
        if is_id(&t) {
            t = next(&mut tokens);
        }
        assert_eq!(t, "{", "graph body must open");
        block(&mut tokens, directed);
        assert!(tokens.is_empty(), "trailing tokens: {tokens:?}");
    }

    fn block(tokens: &mut Vec<String>, directed: bool) {
        loop {
            let t = next(tokens);
            match t.as_str() {
                "}" => return,
                "subgraph" => {
                    let mut t = next(tokens);
                    if is_id(&t) {
                        t = next(tokens);
                    }
                    assert_eq!(t, "{", "subgraph body must open");
                    block(tokens, directed);
                }
                _ => {
                    assert!(is_id(&t), "expected an identifier, got '{t}'");
                    statement_tail(tokens, directed);
                }
            }
        }
    }

    /// After an initial id: attribute assignment, edge chain, or a bare
    /// node with an optional attribute list.
    fn statement_tail(tokens: &mut Vec<String>, directed: bool) {
        let mut t = next(tokens);
        if t == "=" {
            let v = next(tokens);
            assert!(is_id(&v), "attribute value must be an id, got '{v}'");
            expect_semi(tokens);
            return;
        }
        let edge_op = if directed { "->" } else { "--" };
        while t == edge_op {
            let target = next(tokens);
            assert!(is_id(&target), "edge target must be an id, got '{target}'");
            t = next(tokens);
        }
        if t == "[" {
            loop {
                let k = next(tokens);
                if k == "]" {
                    break;
                }
                assert!(is_id(&k), "attribute name must be an id, got '{k}'");
                assert_eq!(next(tokens), "=");
                let v = next(tokens);
                assert!(is_id(&v), "attribute value must be an id, got '{v}'");
                let sep = peek(tokens);
                if sep == "," || sep == ";" {
                    next(tokens);
                }
            }
            t = next(tokens);
        }
        assert_eq!(t, ";", "statements end with a semicolon");
    }

    fn expect_semi(tokens: &mut Vec<String>) {
        assert_eq!(next(tokens), ";");
    }

    fn next(tokens: &mut Vec<String>) -> String {
        tokens.pop().expect("unexpected end of dot input")
    }

    fn peek(tokens: &[String]) -> String {
        tokens.last().cloned().unwrap_or_default()
    }

    fn is_id(t: &str) -> bool {
        if t.starts_with('"') {
            return t.len() >= 2 && t.ends_with('"');
        }
        if t.is_empty() || matches!(t, "{" | "}" | "[" | "]" | ";" | "=" | "," | "--" | "->") {
            return false;
        }
        t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
    }

    fn tokenize(text: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(&c) = chars.peek() {
            match c {
                '"' => {
                    let mut s = String::from(chars.next().unwrap());
                    let mut escaped = false;
                    for c in chars.by_ref() {
                        s.push(c);
                        if escaped {
                            escaped = false;
                        } else if c == '\\' {
                            escaped = true;
                        } else if c == '"' {
                            break;
                        }
                    }
                    assert!(s.len() >= 2 && s.ends_with('"'), "unterminated string");
                    out.push(s);
                }
                '{' | '}' | '[' | ']' | ';' | '=' | ',' => {
                    out.push(chars.next().unwrap().to_string());
                }
                '-' => {
                    chars.next();
                    let nxt = chars.next().expect("dangling '-'");
                    assert!(nxt == '-' || nxt == '>', "bad edge operator");
                    out.push(format!("-{nxt}"));
                }
                c if c.is_whitespace() => {
                    chars.next();
                }
                _ => {
                    let mut s = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                            s.push(chars.next().unwrap());
                        } else {
                            break;
                        }
                    }
                    assert!(!s.is_empty(), "unexpected character '{c}'");
                    out.push(s);
                }
            }
        }
        out
    }
}

#[test]
fn dot_outputs_are_syntactically_valid() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_file(dir.path(), "twosys.toml", TWOSYS);
    let file = file.to_str().unwrap();
    let aut = write_file(
        dir.path(),
        "diamond.aut",
        "des (0, 4, 4)\n(0, \"a\", 1)\n(0, \"a\", 2)\n(1, \"b\", 3)\n(2, \"b\", 3)\n",
    );
    for args in [
        vec!["fixpoint", "--op", "hj", file, "--format", "dot"],
        vec!["check", file, "--relation", "dead", "--format", "dot"],
        vec!["sequence", file, "--format", "dot"],
        vec!["minimize", aut.to_str().unwrap(), "--format", "dot"],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 0, "{args:?}");
        dot_grammar::assert_valid(&stdout(&out));
    }
}
