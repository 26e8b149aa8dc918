use criterion::{criterion_group, criterion_main, Criterion};

use slc::batch::{enumerate_all, evaluate_all, Exec};
use slc::corpus::CBV_SPEC;
use slc::engine::Options;
use slc::term::Term;

fn lam(x: &str, body: Term) -> Term {
    Term::constr("Lam", vec![Term::str(x), body])
}

fn var(x: &str) -> Term {
    Term::constr("Var", vec![Term::str(x)])
}

fn app(a: Term, b: Term) -> Term {
    Term::constr("App", vec![a, b])
}

/// Church-numeral style applications of growing size.
fn workload(n: usize) -> Vec<Term> {
    (0..n)
        .map(|i| {
            let mut t = lam("z", var("z"));
            for j in 0..(i % 12 + 1) {
                let x = format!("x{j}");
                t = app(lam(&x, app(var(&x), var(&x))), app(lam("y", var("y")), t));
            }
            t
        })
        .collect()
}

fn bench(c: &mut Criterion) {
    let (compiled, _) = slc::load(CBV_SPEC).expect("bundled spec");
    let opts = Options::default();
    let terms = workload(256);
    let jobs: Vec<(Term, Option<u64>)> = terms.iter().cloned().map(|t| (t, None)).collect();
    let mut g = c.benchmark_group("cbv");
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        g.bench_function(format!("evaluate/{name}"), |b| {
            b.iter(|| evaluate_all(&compiled, &opts, &jobs, 50, exec))
        });
        g.bench_function(format!("enumerate/{name}"), |b| b.iter(|| enumerate_all(&compiled, &opts, &terms, exec)));
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
