use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn slc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slc")).args(args).current_dir(root()).output().expect("spawn slc")
}

fn fixture(name: &str) -> String {
    format!("crates/core/tests/fixtures/{name}")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8")
}

#[test]
fn check_accepts_corpus() {
    for name in ["cbv", "cbn", "arith", "overlap"] {
        let o = slc(&["check", &format!("corpus/{name}.sl")]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        assert!(stdout(&o).is_empty());
    }
}

#[test]
fn check_reports_types() {
    let o = slc(&["check", "corpus/cbv.sl", "--types"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "dynamic V : M\ncontext H : M ∘→ M\n");
    assert!(stderr(&o).contains("warning"), "the #open line is reported");
}

#[test]
fn check_rejects_two_holes() {
    let o = slc(&["check", &fixture("two_hole.sl")]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("two_hole.sl:6:1: error:"), "{err}");
    assert!(err.contains("context arm has 2 holes"), "{err}");
}

#[test]
fn check_rejects_mistyped_axiom() {
    let o = slc(&["check", &fixture("mistyped_axiom.sl")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mistyped_axiom.sl:6:1: error: rule bad: sides differ: M vs int"), "{}", stderr(&o));
}

#[test]
fn missing_file() {
    let o = slc(&["check", "corpus/nope.sl"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.sl"));
}

#[test]
fn run_reproduces_golden_traces() {
    for name in ["cbv", "cbn", "arith", "overlap"] {
        let o = slc(&["run", &format!("corpus/{name}.sl"), &format!("corpus/{name}.input")]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let golden = std::fs::read_to_string(root().join(format!("corpus/{name}.golden"))).expect("golden");
        assert_eq!(stdout(&o), golden, "{name}");
    }
}

#[test]
fn run_quiet_prints_the_answer() {
    let o = slc(&["run", "corpus/cbv.sl", "corpus/cbv.input", "--quiet"]);
    assert_eq!(stdout(&o), "Lam(\"z\",Var \"z\")\n");
}

#[test]
fn run_normal_form_is_one_line() {
    let o = slc(&["run", "corpus/cbv.sl", &fixture("normal.input")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Lam(\"x\",Var \"x\")\n");
}

#[test]
fn run_stops_at_step_limit() {
    let o = slc(&["run", "corpus/cbv.sl", &fixture("omega.input"), "--max-steps", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).matches(" ==>    by betav,eval").count(), 5);
}

#[test]
fn run_with_seed_is_reproducible() {
    let a = slc(&["run", "corpus/overlap.sl", "corpus/overlap.input", "--seed", "7"]);
    let b = slc(&["run", "corpus/overlap.sl", "corpus/overlap.input", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn run_rejects_ill_typed_input() {
    let dir = std::env::temp_dir().join(format!("slc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("tmp");
    let input = dir.join("bad.input");
    std::fs::write(&input, "Lam(\"x\",\"y\");;\n").expect("write");
    let o = slc(&["run", "corpus/cbv.sl", input.to_str().expect("path")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("at Lam/2: expected M, found string"), "{}", stderr(&o));
}

#[test]
fn dump_is_stable_and_lists_match_v() {
    let a = slc(&["dump", "corpus/cbv.sl"]);
    let b = slc(&["dump", "corpus/cbv.sl"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("dynamic V ($t0):\n  S0: branch $t0 (case Lam $t1 -> S1)\n    S1: accept $t0\n"));
}

#[test]
fn enumerate_lists_successors() {
    let o = slc(&["enumerate", "corpus/overlap.sl", "corpus/overlap.input"]);
    assert_eq!(stdout(&o), "Pair(B,B)\tby ab,step\nPair(C,B)\tby ac,step\n");
    let o = slc(&["enumerate", "corpus/cbv.sl", "corpus/cbv.input"]);
    assert_eq!(stdout(&o).lines().count(), 1);
    let o = slc(&["enumerate", "corpus/cbv.sl", &fixture("normal.input")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}
