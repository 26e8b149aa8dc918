//! Acceptance gate: one PASS/FAIL line per criterion.

mod support;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use slc::corpus::{provide_corpus, CBV_SPEC, OVERLAP_SPEC};
use slc::engine::{Options, Session, StepResult};
use slc::term::{Term, Value};
use slc::term_io::{check_term, parse_term, pretty_term_plain};
use slc::typecheck::ContextType;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

const TRANSCRIPT: &str = "App(Lam(\"y\",Var \"y\"),App(Lam(\"x\",Var \"x\"),Lam(\"z\",Var \"z\")))
 ==>    by betav,eval
App(Lam(\"y\",Var \"y\"),Lam(\"z\",Var \"z\"))
 ==>    by betav,eval
Lam(\"z\",Var \"z\")
";

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn slc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slc")).args(args).current_dir(root()).output().expect("spawn slc")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fig1_fidelity() -> Outcome {
    let o = slc(&["check", "corpus/cbv.sl", "--types"]);
    ensure(o.status.code() == Some(0), || format!("exit {:?}: {}", o.status.code(), text(&o.stderr)))?;
    let out = text(&o.stdout);
    ensure(out.lines().any(|l| l == "context H : M ∘→ M"), || format!("types printed: {out:?}"))?;
    let compiled = support::load(CBV_SPEC);
    let m = slc::typecheck::ObjType::Named("M".into());
    let want = ContextType { hole: m.clone(), whole: m };
    ensure(compiled.checked.context_types.get("H") == Some(&want), || "library disagrees".into())?;
    Ok("check exits 0, H : M ∘→ M".into())
}

fn transcript() -> Outcome {
    let start = Instant::now();
    let o = slc(&["run", "corpus/cbv.sl", "corpus/cbv.input"]);
    let elapsed = start.elapsed();
    ensure(o.status.code() == Some(0), || format!("exit {:?}", o.status.code()))?;
    let out = text(&o.stdout);
    ensure(out == TRANSCRIPT, || format!("got {out:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("byte-exact, {} ms", elapsed.as_millis()))
}

fn automaton_structure() -> Outcome {
    let o = slc(&["dump", "corpus/cbv.sl"]);
    ensure(o.status.code() == Some(0), || "dump failed".into())?;
    let out = text(&o.stdout);
    let golden = std::fs::read_to_string(root().join("crates/core/tests/golden/cbv_v_h.dump")).map_err(|e| e.to_string())?;
    let mut blocks = golden.split("\n\n").map(str::trim_end).filter(|b| !b.is_empty());
    let mut n = 0;
    for block in blocks.by_ref() {
        let header = block.lines().next().unwrap_or_default();
        let name = &header[..header.find(" (").unwrap_or(header.len())];
        let got = out
            .split("\n\n")
            .map(str::trim_end)
            .find(|b| b.starts_with(name))
            .ok_or_else(|| format!("no automaton `{name}` in dump"))?;
        ensure(support::canonical(got) == support::canonical(block), || format!("`{name}` differs:\n{got}"))?;
        n += 1;
    }
    ensure(n == 2, || format!("{n} golden automata"))?;
    Ok("match_V and match_H equal the golden listings up to reference renaming".into())
}

fn populations() -> Vec<(&'static str, slc::automaton::CompiledSpec, Vec<Term>, bool)> {
    provide_corpus()
        .iter()
        .map(|e| {
            let compiled = support::load(e.spec);
            let sig = &compiled.spec().signature;
            let exhaustive = support::TermGen::new(sig).count_up_to(&sig.start_type, 7) <= 1_000_000;
            let terms = support::population(&compiled, 7, 10_000, 42);
            (e.name, compiled, terms, exhaustive)
        })
        .collect()
}

fn oracle_equivalence(pops: &[(&str, slc::automaton::CompiledSpec, Vec<Term>, bool)]) -> Outcome {
    let start = Instant::now();
    let mut summary = Vec::new();
    for (name, compiled, terms, exhaustive) in pops {
        let oracle = support::Oracle::new(compiled);
        let mut mismatches = 0;
        let mut first = None;
        for t in terms {
            let got = Session::new(compiled, &Options::default()).enumerate_steps(t).map_err(|e| e.to_string())?;
            if got != oracle.steps(t, 0) {
                mismatches += 1;
                first.get_or_insert_with(|| pretty_term_plain(t));
            }
        }
        ensure(mismatches == 0, || format!("{name}: {mismatches} mismatches, first on {first:?}"))?;
        summary.push(format!("{name} {}{}", terms.len(), if *exhaustive { "" } else { " random" }));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!("0 mismatches ({}) in {:.1} s", summary.join(", "), elapsed.as_secs_f64()))
}

fn reconstruction(pops: &[(&str, slc::automaton::CompiledSpec, Vec<Term>, bool)]) -> Outcome {
    let mut total = 0usize;
    for (name, compiled, terms, _) in pops {
        for ctx in &compiled.spec().contexts {
            let mut s = Session::new(compiled, &Options::default());
            for t in terms {
                for d in s.decompose_all(&ctx.name, t).map_err(|e| e.to_string())? {
                    total += 1;
                    let back = d.recompose().map_err(|e| e.to_string())?;
                    ensure(back == Value::Term(t.clone()), || {
                        format!("{name} {}: {} rebuilt as {back}", ctx.name, pretty_term_plain(t))
                    })?;
                }
            }
        }
    }
    Ok(format!("{total} decompositions, 0 failures"))
}

fn type_preservation() -> Outcome {
    let mut terms_checked = 0usize;
    for e in provide_corpus() {
        let compiled = support::load(e.spec);
        let sig = &compiled.spec().signature;
        let start = compiled.checked.start_type();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..1000u64 {
            let t = reducible_term(&compiled, &mut rng)?;
            let opts = Options { seed: Some(i), ..Options::default() };
            let trace = Session::new(&compiled, &opts).evaluate(&t, 50).map_err(|err| format!("{}: {err}", e.name))?;
            for u in trace.terms() {
                terms_checked += 1;
                check_term(sig, u, &start).map_err(|err| format!("{}: {} : {err}", e.name, pretty_term_plain(u)))?;
            }
        }
    }
    Ok(format!("4000 evaluations from reducible terms, {terms_checked} trace terms well typed"))
}

/// A random start-type term with at least one successor.
fn reducible_term(compiled: &slc::automaton::CompiledSpec, rng: &mut ChaCha8Rng) -> Result<Term, String> {
    let sig = &compiled.spec().signature;
    for _ in 0..10_000 {
        let t = support::random_term(sig, &sig.start_type, 15, rng);
        let next = Session::new(compiled, &Options::default()).enumerate_steps(&t).map_err(|e| e.to_string())?;
        if !next.is_empty() {
            return Ok(t);
        }
    }
    Err("no reducible random term found".into())
}

fn non_determinism() -> Outcome {
    let overlap = support::load(OVERLAP_SPEC);
    let t = parse_term(&overlap.spec().signature, "Pair(A,B);;").map_err(|d| d.to_string())?;
    let mut union = BTreeSet::new();
    for seed in 0..100 {
        let opts = Options { seed: Some(seed), ..Options::default() };
        if let StepResult::Stepped(t2, labels) = Session::new(&overlap, &opts).step(&t).map_err(|e| e.to_string())? {
            union.insert((t2, labels));
        }
    }
    let want = support::Oracle::new(&overlap).steps(&t, 0);
    ensure(want.len() == 2, || format!("oracle found {}", want.len()))?;
    ensure(union == want, || format!("seeded steps {union:?}"))?;

    let cbv = support::load(CBV_SPEC);
    let input = slc::corpus::entry("cbv").map(|e| e.input).unwrap_or_default();
    let t = parse_term(&cbv.spec().signature, input).map_err(|d| d.to_string())?;
    let reference = Session::new(&cbv, &Options::default()).evaluate(&t, 100).map_err(|e| e.to_string())?.render();
    for seed in 0..100 {
        let opts = Options { seed: Some(seed), ..Options::default() };
        let r = Session::new(&cbv, &opts).evaluate(&t, 100).map_err(|e| e.to_string())?.render();
        ensure(r == reference, || format!("seed {seed} gives\n{r}"))?;
    }
    Ok("overlap: 2 successors across seeds; cbv: 100 identical traces".into())
}

fn negative_checks() -> Outcome {
    let cases = [
        ("two_hole.sl", ["context arm has 2 holes", "of context H"]),
        ("arms_disagree.sl", ["arms of context C disagree", "`Wrap BOX`"]),
        ("mistyped_axiom.sl", ["rule bad", "sides differ"]),
    ];
    for (file, needles) in cases {
        let o = slc(&["check", &format!("crates/core/tests/fixtures/{file}")]);
        ensure(o.status.code() == Some(1), || format!("{file}: exit {:?}", o.status.code()))?;
        let err = text(&o.stderr);
        for n in needles {
            ensure(err.contains(n), || format!("{file}: `{n}` missing from {err:?}"))?;
        }
        ensure(err.contains(&format!("{file}:")), || format!("{file}: diagnostic is not located"))?;
    }
    Ok("all three rejected with located diagnostics".into())
}

fn main() -> ExitCode {
    let pops = populations();
    let criteria: Vec<(&str, Check)> = vec![
        ("context type of H", Box::new(fig1_fidelity)),
        ("CBV transcript", Box::new(transcript)),
        ("match_V/match_H structure", Box::new(automaton_structure)),
        ("oracle equivalence", Box::new(|| oracle_equivalence(&pops))),
        ("reconstruction identity", Box::new(|| reconstruction(&pops))),
        ("type preservation", Box::new(type_preservation)),
        ("non-determinism", Box::new(non_determinism)),
        ("negative checks", Box::new(negative_checks)),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)) {
            Ok(Ok(detail)) => println!("PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL  {name}: panicked");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
