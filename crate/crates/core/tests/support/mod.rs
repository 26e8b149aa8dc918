//! Shared helpers for integration tests: a naive reference semantics that
//! works directly on the rule and context syntax, and term generators.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use slc::ast::{ConstructorDef, Pattern, Rule, Signature, TypeRef};
use slc::automaton::CompiledSpec;
use slc::meta_eval::{Bindings, FreshNames, MetaEval};
use slc::term::{Context, Frame, Term, Value};
use slc::typecheck::ObjType;

pub fn load(src: &str) -> CompiledSpec {
    slc::load(src).unwrap_or_else(|d| panic!("spec rejected: {d:?}")).0
}

/// Reference semantics. Every match returns all solutions, every context
/// decomposition is found by recursion over the arms of the definition.
pub struct Oracle<'c> {
    pub compiled: &'c CompiledSpec,
    eval: MetaEval<'c>,
}

impl<'c> Oracle<'c> {
    pub fn new(compiled: &'c CompiledSpec) -> Oracle<'c> {
        Oracle { compiled, eval: MetaEval::new(compiled.spec()) }
    }

    pub fn in_dynamic(&self, name: &str, v: &Value) -> bool {
        let d = self.compiled.spec().dynamic(name).expect("dynamic");
        !self.matches(&d.pattern, v, &Vec::new()).is_empty()
    }

    /// All ways `p` matches `v`, each extending `b`.
    pub fn matches(&self, p: &Pattern, v: &Value, b: &Bindings) -> Vec<Bindings> {
        match p {
            Pattern::Wildcard => vec![b.clone()],
            Pattern::Var(x) => {
                let mut b = b.clone();
                b.push((x.clone(), v.clone()));
                vec![b]
            }
            Pattern::Nullary(c) => match v {
                Value::Term(Term::Constr(d, args)) if d == c && args.is_empty() => vec![b.clone()],
                _ => vec![],
            },
            Pattern::Applied(c, q) => match v {
                Value::Term(Term::Constr(d, args)) if d == c && !args.is_empty() => {
                    self.matches(q, &Value::constructor_argument(args), b)
                }
                _ => vec![],
            },
            Pattern::Tuple(ps) => match v {
                Value::Tuple(vs) if vs.len() == ps.len() => {
                    let mut acc = vec![b.clone()];
                    for (p, v) in ps.iter().zip(vs) {
                        acc = acc.iter().flat_map(|b| self.matches(p, v, b)).collect();
                    }
                    acc
                }
                _ => vec![],
            },
            Pattern::Alt(l, r) => {
                let mut out = self.matches(l, v, b);
                out.extend(self.matches(r, v, b));
                out
            }
            Pattern::Alias(q, x) => self
                .matches(q, v, b)
                .into_iter()
                .map(|mut b| {
                    b.push((x.clone(), v.clone()));
                    b
                })
                .collect(),
            Pattern::TypeConstraint(q, _) => self.matches(q, v, b),
            Pattern::DynConstraint(q, d) => {
                if self.in_dynamic(d, v) {
                    self.matches(q, v, b)
                } else {
                    vec![]
                }
            }
            Pattern::ContextFilling(h, n, q) => {
                let mut out = Vec::new();
                for (ctx, u) in self.decompose(n, v) {
                    for b1 in self.matches(h, &Value::Context(ctx), b) {
                        out.extend(self.matches(q, &u, &b1));
                    }
                }
                out
            }
            Pattern::Hole => vec![],
        }
    }

    /// All decompositions of `v` by the context definition `name`.
    pub fn decompose(&self, name: &str, v: &Value) -> Vec<(Context, Value)> {
        let def = self.compiled.spec().context(name).expect("context");
        def.arms.iter().flat_map(|arm| self.decompose_arm(arm, v)).collect()
    }

    fn decompose_arm(&self, p: &Pattern, v: &Value) -> Vec<(Context, Value)> {
        if p.hole_count() == 0 {
            return vec![];
        }
        match p {
            Pattern::Hole => vec![(Context::hole(), v.clone())],
            Pattern::Applied(c, q) => match v {
                Value::Term(Term::Constr(d, args)) if d == c && !args.is_empty() => self
                    .decompose_arm(q, &Value::constructor_argument(args))
                    .into_iter()
                    .map(|(inner, u)| (prepend(Frame::Constr(c.clone()), inner), u))
                    .collect(),
                _ => vec![],
            },
            Pattern::Tuple(ps) => match v {
                Value::Tuple(vs) if vs.len() == ps.len() => {
                    let index = ps.iter().position(|p| p.hole_count() > 0).expect("hole");
                    let others_ok = ps
                        .iter()
                        .zip(vs)
                        .enumerate()
                        .all(|(i, (p, v))| i == index || !self.matches(p, v, &Vec::new()).is_empty());
                    if !others_ok {
                        return vec![];
                    }
                    let others: Vec<Value> =
                        vs.iter().enumerate().filter(|(i, _)| *i != index).map(|(_, v)| v.clone()).collect();
                    self.decompose_arm(&ps[index], &vs[index])
                        .into_iter()
                        .map(|(inner, u)| (prepend(Frame::Tuple { index, others: others.clone() }, inner), u))
                        .collect()
                }
                _ => vec![],
            },
            Pattern::ContextFilling(h, n, q) => {
                let mut out = Vec::new();
                for (outer, u) in self.decompose(n, v) {
                    if self.matches(h, &Value::Context(outer.clone()), &Vec::new()).is_empty() {
                        continue;
                    }
                    for (inner, w) in self.decompose_arm(q, &u) {
                        out.push((outer.compose(&inner), w));
                    }
                }
                out
            }
            Pattern::Alt(l, r) => {
                let mut out = self.decompose_arm(l, v);
                out.extend(self.decompose_arm(r, v));
                out
            }
            Pattern::Alias(q, _) | Pattern::TypeConstraint(q, _) => self.decompose_arm(q, v),
            Pattern::DynConstraint(q, d) => {
                if self.in_dynamic(d, v) {
                    self.decompose_arm(q, v)
                } else {
                    vec![]
                }
            }
            _ => vec![],
        }
    }

    fn holds(&self, cond: &Option<slc::ast::MetaExpr>, b: &mut Bindings, fresh: &mut FreshNames) -> bool {
        match cond {
            None => true,
            Some(c) => matches!(self.eval.eval(fresh, b, c), Ok(Value::Bool(true))),
        }
    }

    /// Root applications of the axioms of type `ty`, each with the
    /// fresh-name counter reached after evaluating its right-hand side.
    pub fn axiom_steps(&self, ty: &ObjType, v: &Value, counter: u64) -> Vec<(Value, String, u64)> {
        let checked = &self.compiled.checked;
        let mut out = Vec::new();
        for (i, rule) in checked.spec.rules.iter().enumerate() {
            let Rule::Axiom { name, lhs, cond, rhs, .. } = rule else { continue };
            if &checked.rule_types[i] != ty {
                continue;
            }
            for mut b in self.matches(lhs, v, &Vec::new()) {
                let mut fresh = FreshNames::new();
                fresh.reset_to(counter);
                if !self.holds(cond, &mut b, &mut fresh) {
                    continue;
                }
                let r = self.eval.eval(&mut fresh, &mut b, rhs).expect("axiom rhs");
                out.push((r, name.clone(), fresh.counter()));
            }
        }
        out
    }

    /// Successors of `t` under the stepping relation, with each path
    /// starting from fresh-name counter `counter`.
    pub fn steps(&self, t: &Term, counter: u64) -> BTreeSet<(Term, Vec<String>)> {
        let checked = &self.compiled.checked;
        let start = checked.start_type();
        let v = Value::Term(t.clone());
        let mut out = BTreeSet::new();
        let has_inference = checked
            .spec
            .rules
            .iter()
            .enumerate()
            .any(|(i, r)| !r.is_axiom() && checked.rule_types[i] == start);
        if !has_inference {
            for (r, label, _) in self.axiom_steps(&start, &v, counter) {
                out.insert((r.into_term().expect("term"), vec![label]));
            }
            return out;
        }
        for (i, rule) in checked.spec.rules.iter().enumerate() {
            let Rule::Inference { name, premise_lhs, premise_rhs, conclusion_lhs, cond, conclusion_rhs, .. } = rule
            else {
                continue;
            };
            if checked.rule_types[i] != start {
                continue;
            }
            let premise_ty = checked.premise_types[i].clone().expect("premise type");
            for mut b in self.matches(conclusion_lhs, &v, &Vec::new()) {
                let mut fresh = FreshNames::new();
                fresh.reset_to(counter);
                if !self.holds(cond, &mut b, &mut fresh) {
                    continue;
                }
                let u = self.eval.eval(&mut fresh, &mut b, premise_lhs).expect("premise");
                for (r, label, after) in self.axiom_steps(&premise_ty, &u, fresh.counter()) {
                    for mut b2 in self.matches(premise_rhs, &r, &b) {
                        let mut fresh = FreshNames::new();
                        fresh.reset_to(after);
                        let t2 = self.eval.eval(&mut fresh, &mut b2, conclusion_rhs).expect("rhs");
                        out.insert((t2.into_term().expect("term"), vec![label.clone(), name.clone()]));
                    }
                }
            }
        }
        out
    }
}

fn prepend(frame: Frame, inner: Context) -> Context {
    let mut frames = vec![frame];
    frames.extend(inner.frames);
    Context { frames }
}

pub const STRINGS: [&str; 3] = ["x", "y", "z"];
pub const INTS: [i64; 3] = [0, 1, 2];

/// Exhaustive enumeration of well-typed terms by number of constructor
/// nodes.
pub struct TermGen<'s> {
    sig: &'s Signature,
    memo: HashMap<(String, usize), Vec<Term>>,
}

impl<'s> TermGen<'s> {
    pub fn new(sig: &'s Signature) -> TermGen<'s> {
        TermGen { sig, memo: HashMap::new() }
    }

    /// Number of terms of type `ty` with exactly `n` constructor nodes.
    pub fn count(&self, ty: &str, n: usize) -> u128 {
        let mut memo = HashMap::new();
        count_exact(self.sig, ty, n, &mut memo)
    }

    pub fn count_up_to(&self, ty: &str, n: usize) -> u128 {
        (1..=n).map(|k| self.count(ty, k)).sum()
    }

    pub fn exact(&mut self, ty: &str, n: usize) -> Vec<Term> {
        if let Some(v) = self.memo.get(&(ty.to_string(), n)) {
            return v.clone();
        }
        let mut out = Vec::new();
        if n > 0 {
            let td = self.sig.typedef(ty).expect("type").clone();
            for c in &td.constructors {
                for args in self.args(&c.args, n - 1) {
                    out.push(Term::Constr(c.name.clone(), args));
                }
            }
        }
        self.memo.insert((ty.to_string(), n), out.clone());
        out
    }

    pub fn up_to(&mut self, ty: &str, n: usize) -> Vec<Term> {
        (1..=n).flat_map(|k| self.exact(ty, k)).collect()
    }

    fn args(&mut self, tys: &[TypeRef], n: usize) -> Vec<Vec<Term>> {
        let Some((first, rest)) = tys.split_first() else {
            return if n == 0 { vec![vec![]] } else { vec![] };
        };
        let mut out = Vec::new();
        match first {
            TypeRef::String | TypeRef::Int => {
                let lits: Vec<Term> = match first {
                    TypeRef::String => STRINGS.iter().map(|s| Term::str(s)).collect(),
                    _ => INTS.iter().map(|i| Term::Int(*i)).collect(),
                };
                let tails = self.args(rest, n);
                for l in &lits {
                    for tail in &tails {
                        let mut v = vec![l.clone()];
                        v.extend(tail.iter().cloned());
                        out.push(v);
                    }
                }
            }
            TypeRef::Named(t) => {
                for k in 1..=n {
                    let heads = self.exact(t, k);
                    if heads.is_empty() {
                        continue;
                    }
                    let tails = self.args(rest, n - k);
                    for h in &heads {
                        for tail in &tails {
                            let mut v = vec![h.clone()];
                            v.extend(tail.iter().cloned());
                            out.push(v);
                        }
                    }
                }
            }
        }
        out
    }
}

fn count_exact(sig: &Signature, ty: &str, n: usize, memo: &mut HashMap<(String, usize), u128>) -> u128 {
    if n == 0 {
        return 0;
    }
    if let Some(c) = memo.get(&(ty.to_string(), n)) {
        return *c;
    }
    let td = sig.typedef(ty).expect("type");
    let total = td.constructors.iter().map(|c| count_args(sig, &c.args, n - 1, memo)).sum();
    memo.insert((ty.to_string(), n), total);
    total
}

fn count_args(sig: &Signature, tys: &[TypeRef], n: usize, memo: &mut HashMap<(String, usize), u128>) -> u128 {
    let Some((first, rest)) = tys.split_first() else {
        return u128::from(n == 0);
    };
    match first {
        TypeRef::String | TypeRef::Int => 3 * count_args(sig, rest, n, memo),
        TypeRef::Named(t) => (1..=n).map(|k| count_exact(sig, t, k, memo) * count_args(sig, rest, n - k, memo)).sum(),
    }
}

/// The test population for a spec: all terms of the start type with at
/// most `max_nodes` constructor nodes, or `fallback` random terms when
/// there are more than a million of them.
pub fn population(compiled: &CompiledSpec, max_nodes: usize, fallback: usize, seed: u64) -> Vec<Term> {
    let sig = &compiled.spec().signature;
    let start = sig.start_type.clone();
    let mut g = TermGen::new(sig);
    if g.count_up_to(&start, max_nodes) <= 1_000_000 {
        g.up_to(&start, max_nodes)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..fallback).map(|_| random_term(sig, &start, max_nodes, &mut rng)).collect()
    }
}

/// A random well-typed term with at most `budget` constructor nodes.
pub fn random_term(sig: &Signature, ty: &str, budget: usize, rng: &mut ChaCha8Rng) -> Term {
    let mut left = budget.max(1);
    random_inner(sig, ty, &mut left, rng)
}

fn named_args(c: &ConstructorDef) -> usize {
    c.args.iter().filter(|a| matches!(a, TypeRef::Named(_))).count()
}

fn random_inner(sig: &Signature, ty: &str, left: &mut usize, rng: &mut ChaCha8Rng) -> Term {
    let td = sig.typedef(ty).expect("type");
    *left = left.saturating_sub(1);
    let leaves: Vec<&ConstructorDef> = td.constructors.iter().filter(|c| named_args(c) == 0).collect();
    let pool: Vec<&ConstructorDef> = if *left == 0 || (rng.random_bool(0.3) && !leaves.is_empty()) {
        if leaves.is_empty() {
            td.constructors.iter().collect()
        } else {
            leaves
        }
    } else {
        td.constructors.iter().collect()
    };
    let c = pool[rng.random_range(0..pool.len())];
    let args = c
        .args
        .iter()
        .map(|a| match a {
            TypeRef::String => Term::str(STRINGS[rng.random_range(0..STRINGS.len())]),
            TypeRef::Int => Term::Int(INTS[rng.random_range(0..INTS.len())]),
            TypeRef::Named(t) => random_inner(sig, t, left, rng),
        })
        .collect();
    Term::Constr(c.name.clone(), args)
}

/// Renames `$tN` references by order of first appearance.
pub fn canonical(text: &str) -> String {
    let mut names: Vec<String> = Vec::new();
    let mut out = String::new();
    let mut rest = text;
    while let Some(i) = rest.find("$t") {
        out.push_str(&rest[..i]);
        let digits: String = rest[i + 2..].chars().take_while(char::is_ascii_digit).collect();
        let name = format!("$t{digits}");
        let k = match names.iter().position(|n| *n == name) {
            Some(k) => k,
            None => {
                names.push(name);
                names.len() - 1
            }
        };
        out.push_str(&format!("$r{k}"));
        rest = &rest[i + 2 + digits.len()..];
    }
    out.push_str(rest);
    out
}
