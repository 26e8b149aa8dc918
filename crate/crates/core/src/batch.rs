//! Data-parallel drivers over many terms.
//!
//! Each term gets its own [`Session`], so results do not depend on the
//! execution strategy.

use std::collections::BTreeSet;

use crate::automaton::CompiledSpec;
use crate::engine::{Options, Session, Trace};
use crate::meta_eval::RuntimeError;
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled and falls
    /// back to sequential execution otherwise.
    Parallel,
}

fn map<T: Sync, R: Send>(exec: Exec, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

pub type Successors = BTreeSet<(Term, Vec<String>)>;

/// One-step successors of every term, in input order.
pub fn enumerate_all(
    compiled: &CompiledSpec,
    opts: &Options,
    terms: &[Term],
    exec: Exec,
) -> Vec<Result<Successors, RuntimeError>> {
    map(exec, terms, |t| Session::new(compiled, opts).enumerate_steps(t))
}

/// Evaluates every `(term, seed)` pair for at most `max_steps` steps.
pub fn evaluate_all(
    compiled: &CompiledSpec,
    opts: &Options,
    jobs: &[(Term, Option<u64>)],
    max_steps: usize,
    exec: Exec,
) -> Vec<Result<Trace, RuntimeError>> {
    map(exec, jobs, |(t, seed)| {
        let o = Options { seed: *seed, ..opts.clone() };
        Session::new(compiled, &o).evaluate(t, max_steps)
    })
}
