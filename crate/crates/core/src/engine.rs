//! Execution of compiled automata.
//!
//! States run in continuation-passing style: an accepting state hands its
//! result to the success continuation, and a continuation that rejects the
//! result returns [`MatchOutcome::Failure`], which makes the nearest
//! enclosing choice try its next alternative. A reference state calls the
//! referenced automaton with a continuation that runs the body, so a failure
//! in the body resumes the callee's remaining alternatives.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automaton::*;
use crate::meta_eval::{Bindings, FreshNames, MetaEval, RuntimeError, DEFAULT_MAX_DEPTH};
use crate::term::{Context, Decomposition, Frame, Term, Value};
use crate::term_io::pretty_term_plain;
use crate::typecheck::ObjType;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchOutcome {
    Matched(Value, Vec<String>),
    Failure,
}

pub type Outcome = Result<MatchOutcome, RuntimeError>;

/// A success continuation: receives the accepted value and the labels of
/// the rules applied so far, innermost first.
pub type Cont<'k> = dyn FnMut(&mut Runtime, Value, &[String]) -> Outcome + 'k;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Stepped(Term, Vec<String>),
    NormalForm,
}

#[derive(Clone, Debug)]
pub struct Options {
    /// `None` tries alternatives in textual order; `Some(seed)` shuffles
    /// them at every choice visit.
    pub seed: Option<u64>,
    pub max_depth: usize,
}

impl Default for Options {
    fn default() -> Options {
        Options { seed: None, max_depth: DEFAULT_MAX_DEPTH }
    }
}

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// Mutable state owned by one evaluation run.
#[derive(Clone, Debug)]
pub struct Runtime {
    pub fresh: FreshNames,
    rng: Option<ChaCha8Rng>,
}

/// Bindings visible to the states of one automaton activation.
#[derive(Clone, Debug)]
pub struct Env {
    refs: Vec<Option<Value>>,
    scope: Bindings,
    labels: Vec<String>,
}

impl Env {
    fn new(a: &Automaton, subject: Value) -> Env {
        let mut refs = vec![None; a.num_refs as usize];
        refs[a.root.0 as usize] = Some(subject);
        Env { refs, scope: Vec::new(), labels: Vec::new() }
    }

    fn get(&self, r: TermRef) -> Result<&Value, RuntimeError> {
        self.refs
            .get(r.0 as usize)
            .and_then(Option::as_ref)
            .ok_or_else(|| RuntimeError::Unbound(r.to_string()))
    }

    fn set(&mut self, r: TermRef, v: Value) {
        self.refs[r.0 as usize] = Some(v);
    }
}

/// Immutable part of the interpreter, shareable across runs.
#[derive(Clone, Copy)]
pub struct Machine<'c> {
    pub compiled: &'c CompiledSpec,
    pub eval: MetaEval<'c>,
}

fn value_of(recon: &Recon, env: &Env) -> Result<Value, RuntimeError> {
    match recon {
        Recon::Ref(r) => env.get(*r).cloned(),
        Recon::Constr(c, inner) => Ok(Context { frames: vec![Frame::Constr(c.clone())] }.plug(value_of(inner, env)?)?),
        Recon::Tuple(items) => Ok(Value::Tuple(items.iter().map(|r| value_of(r, env)).collect::<Result<_, _>>()?)),
        Recon::Fill(r, inner) => match env.get(*r)? {
            Value::Context(c) => Ok(c.plug(value_of(inner, env)?)?),
            other => Err(RuntimeError::Type(format!("{r} holds {other}, not a context"))),
        },
        Recon::Hole => Err(RuntimeError::Type("hole outside of a context".into())),
    }
}

/// Turns a reconstruction template into a context using the values bound
/// on the current path.
pub fn materialize(recon: &Recon, env: &Env) -> Result<Context, RuntimeError> {
    let mut frames = Vec::new();
    let mut cur = recon;
    loop {
        match cur {
            Recon::Hole => return Ok(Context { frames }),
            Recon::Constr(c, inner) => {
                frames.push(Frame::Constr(c.clone()));
                cur = inner;
            }
            Recon::Tuple(items) => {
                let index = items.iter().position(Recon::has_hole).ok_or_else(|| {
                    RuntimeError::Type("reconstruction without a hole".into())
                })?;
                let mut others = Vec::with_capacity(items.len() - 1);
                for (i, r) in items.iter().enumerate() {
                    if i != index {
                        others.push(value_of(r, env)?);
                    }
                }
                frames.push(Frame::Tuple { index, others });
                cur = &items[index];
            }
            Recon::Fill(r, inner) => {
                match env.get(*r)? {
                    Value::Context(c) => frames.extend(c.frames.iter().cloned()),
                    other => return Err(RuntimeError::Type(format!("{r} holds {other}, not a context"))),
                }
                cur = inner;
            }
            Recon::Ref(r) => return Err(RuntimeError::Type(format!("reconstruction ends at {r}, not a hole"))),
        }
    }
}

impl<'c> Machine<'c> {
    pub fn new(compiled: &'c CompiledSpec, max_depth: usize) -> Machine<'c> {
        let mut eval = MetaEval::new(compiled.spec());
        eval.max_depth = max_depth;
        Machine { compiled, eval }
    }

    /// Runs `a` on `subject`.
    pub fn run_automaton(&self, rt: &mut Runtime, a: &'c Automaton, subject: Value, k: &mut Cont<'_>) -> Outcome {
        let mut env = Env::new(a, subject);
        self.run(rt, &a.state, &mut env, k)
    }

    fn callee(&self, rt: &mut Runtime, call: &MatchCall, env: &mut Env) -> Result<Option<(&'c Automaton, Value)>, RuntimeError> {
        Ok(match call {
            MatchCall::Dynamic { index, arg, .. } => Some((&self.compiled.dynamics[*index], env.get(*arg)?.clone())),
            MatchCall::Context { index, arg, .. } => Some((&self.compiled.contexts[*index], env.get(*arg)?.clone())),
            MatchCall::Rewrite1 { arg, ty } => {
                let v = self.eval.eval(&mut rt.fresh, &mut env.scope, arg)?;
                self.compiled.axioms.get(ty).map(|a| (a, v))
            }
        })
    }

    pub fn run(&self, rt: &mut Runtime, state: &'c State, env: &mut Env, k: &mut Cont<'_>) -> Outcome {
        match state {
            State::Branch { subject, cases } => {
                let (c, args) = match env.get(*subject)? {
                    Value::Term(Term::Constr(c, args)) => (c.clone(), args.clone()),
                    _ => return Ok(MatchOutcome::Failure),
                };
                let Some(case) = cases.iter().find(|case| case.test.constructor() == c) else {
                    return Ok(MatchOutcome::Failure);
                };
                if let Test::Applied(_, r) = &case.test {
                    env.set(*r, Value::constructor_argument(&args));
                }
                self.run(rt, &case.state, env, k)
            }
            State::Accept { action, label } => {
                let value = match action {
                    Action::Meta(e) => self.eval.eval(&mut rt.fresh, &mut env.scope, e)?,
                    Action::Subject(r) => env.get(*r)?.clone(),
                    Action::Decompose { hole, recon } => {
                        let ctx = materialize(recon, env)?;
                        Value::Tuple(vec![Value::Context(ctx), env.get(*hole)?.clone()])
                    }
                    Action::HolePlaceholder => {
                        return Err(RuntimeError::Type("context automaton without a hole binding".into()))
                    }
                };
                match label {
                    Some(l) => {
                        let mut labels = env.labels.clone();
                        labels.push(l.clone());
                        k(rt, value, &labels)
                    }
                    None => k(rt, value, &env.labels),
                }
            }
            State::Choice(alts) => {
                let mut order: Vec<usize> = (0..alts.len()).collect();
                if let Some(rng) = rt.rng.as_mut() {
                    order.shuffle(rng);
                }
                let saved = rt.fresh.counter();
                let (scope_len, labels_len) = (env.scope.len(), env.labels.len());
                for i in order {
                    rt.fresh.reset_to(saved);
                    env.scope.truncate(scope_len);
                    env.labels.truncate(labels_len);
                    match self.run(rt, &alts[i], env, k)? {
                        MatchOutcome::Failure => continue,
                        matched => return Ok(matched),
                    }
                }
                Ok(MatchOutcome::Failure)
            }
            State::Fail => Ok(MatchOutcome::Failure),
            State::RefLet { bound, call, body } => {
                let Some((callee, arg)) = self.callee(rt, call, env)? else {
                    return Ok(MatchOutcome::Failure);
                };
                let (scope_len, labels_len) = (env.scope.len(), env.labels.len());
                let mut resume = |rt: &mut Runtime, v: Value, labels: &[String]| -> Outcome {
                    env.scope.truncate(scope_len);
                    env.labels.truncate(labels_len);
                    env.labels.extend(labels.iter().cloned());
                    match bound {
                        Bound::Single(r) => env.set(*r, v),
                        Bound::Pair(a, b) => match v {
                            Value::Tuple(mut parts) if parts.len() == 2 => {
                                let hole = parts.pop().unwrap_or(Value::Bool(false));
                                let ctx = parts.pop().unwrap_or(Value::Bool(false));
                                env.set(*a, ctx);
                                env.set(*b, hole);
                            }
                            other => return Err(RuntimeError::Type(format!("expected a decomposition, found {other}"))),
                        },
                    }
                    self.run(rt, body, env, k)
                };
                self.run_automaton(rt, callee, arg, &mut resume)
            }
            State::Cond { cond, then, otherwise } => match self.eval.eval(&mut rt.fresh, &mut env.scope, cond)? {
                Value::Bool(true) => self.run(rt, then, env, k),
                Value::Bool(false) => self.run(rt, otherwise, env, k),
                other => Err(RuntimeError::Type(format!("condition evaluated to {other}"))),
            },
            State::BindLet { binder, source, body } => {
                let v = env.get(*source)?.clone();
                match binder {
                    Binder::Var(x) => env.scope.push((x.clone(), v)),
                    Binder::Hole => {}
                    Binder::Tuple(rs) => match v {
                        Value::Tuple(vs) if vs.len() == rs.len() => {
                            for (r, v) in rs.iter().zip(vs) {
                                env.set(*r, v);
                            }
                        }
                        other => return Err(RuntimeError::Type(format!("expected a {}-tuple, found {other}", rs.len()))),
                    },
                }
                self.run(rt, body, env, k)
            }
        }
    }
}

/// One line of a trace: the labels of a step and the resulting term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub labels: Vec<String>,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub initial: Term,
    pub steps: Vec<TraceStep>,
    /// True when evaluation stopped at the step limit with further steps
    /// possible.
    pub limit_reached: bool,
}

impl Trace {
    pub fn last(&self) -> &Term {
        self.steps.last().map(|s| &s.term).unwrap_or(&self.initial)
    }

    /// All terms of the trace, starting with the initial one.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|s| &s.term))
    }

    /// Renders the trace: the initial term, then for each step a label line
    /// ` ==>    by l1,l2` followed by the new term.
    pub fn render(&self) -> String {
        let mut out = pretty_term_plain(&self.initial);
        out.push('\n');
        for s in &self.steps {
            out.push_str(" ==>    by ");
            out.push_str(&s.labels.join(","));
            out.push('\n');
            out.push_str(&pretty_term_plain(&s.term));
            out.push('\n');
        }
        out
    }
}

/// One evaluation run over a compiled specification.
pub struct Session<'c> {
    machine: Machine<'c>,
    runtime: Runtime,
}

fn first_match(_: &mut Runtime, v: Value, labels: &[String]) -> Outcome {
    Ok(MatchOutcome::Matched(v, labels.to_vec()))
}

impl<'c> Session<'c> {
    pub fn new(compiled: &'c CompiledSpec, opts: &Options) -> Session<'c> {
        Session {
            machine: Machine::new(compiled, opts.max_depth),
            runtime: Runtime { fresh: FreshNames::new(), rng: opts.seed.map(ChaCha8Rng::seed_from_u64) },
        }
    }

    pub fn compiled(&self) -> &'c CompiledSpec {
        self.machine.compiled
    }

    pub fn fresh_names(&self) -> &FreshNames {
        &self.runtime.fresh
    }

    /// The automaton implementing the stepping relation: inference rules of
    /// the start type, or its axioms applied at the root when there are no
    /// inference rules.
    fn step_automaton(&self) -> Option<&'c Automaton> {
        let compiled = self.machine.compiled;
        let start = compiled.checked.start_type();
        compiled.inference.get(&start).or_else(|| compiled.axioms.get(&start))
    }

    fn stepped(outcome: MatchOutcome) -> Result<StepResult, RuntimeError> {
        match outcome {
            MatchOutcome::Matched(v, labels) => match v {
                Value::Term(t) => Ok(StepResult::Stepped(t, labels)),
                other => Err(RuntimeError::Type(format!("a step produced {other}, not a term"))),
            },
            MatchOutcome::Failure => Ok(StepResult::NormalForm),
        }
    }

    /// One root rewriting step with the axioms of `ty`.
    pub fn rewrite1_at(&mut self, ty: &ObjType, t: &Term) -> Result<StepResult, RuntimeError> {
        let Some(a) = self.machine.compiled.axioms.get(ty) else {
            return Ok(StepResult::NormalForm);
        };
        let r = self.machine.run_automaton(&mut self.runtime, a, Value::Term(t.clone()), &mut first_match)?;
        Self::stepped(r)
    }

    /// One root rewriting step with the axioms of the start type.
    pub fn rewrite1(&mut self, t: &Term) -> Result<StepResult, RuntimeError> {
        let start = self.machine.compiled.checked.start_type();
        self.rewrite1_at(&start, t)
    }

    pub fn step(&mut self, t: &Term) -> Result<StepResult, RuntimeError> {
        let Some(a) = self.step_automaton() else {
            return Ok(StepResult::NormalForm);
        };
        let r = self.machine.run_automaton(&mut self.runtime, a, Value::Term(t.clone()), &mut first_match)?;
        Self::stepped(r)
    }

    /// Steps until a normal form or `max_steps` steps.
    pub fn evaluate(&mut self, t: &Term, max_steps: usize) -> Result<Trace, RuntimeError> {
        let mut trace = Trace { initial: t.clone(), steps: Vec::new(), limit_reached: false };
        let mut cur = t.clone();
        loop {
            if trace.steps.len() >= max_steps {
                let saved = self.runtime.clone();
                let probe = self.step(&cur)?;
                self.runtime = saved;
                trace.limit_reached = matches!(probe, StepResult::Stepped(..));
                return Ok(trace);
            }
            match self.step(&cur)? {
                StepResult::Stepped(next, labels) => {
                    trace.steps.push(TraceStep { labels, term: next.clone() });
                    cur = next;
                }
                StepResult::NormalForm => return Ok(trace),
            }
        }
    }

    /// Every one-step successor of `t` with its labels, exploring all
    /// alternatives. Leaves the fresh-name counter unchanged.
    pub fn enumerate_steps(&mut self, t: &Term) -> Result<BTreeSet<(Term, Vec<String>)>, RuntimeError> {
        let mut found = BTreeSet::new();
        let Some(a) = self.step_automaton() else {
            return Ok(found);
        };
        let saved = self.runtime.fresh.clone();
        let mut collect = |_: &mut Runtime, v: Value, labels: &[String]| -> Outcome {
            match v {
                Value::Term(t) => {
                    found.insert((t, labels.to_vec()));
                    Ok(MatchOutcome::Failure)
                }
                other => Err(RuntimeError::Type(format!("a step produced {other}, not a term"))),
            }
        };
        let r = self.machine.run_automaton(&mut self.runtime, a, Value::Term(t.clone()), &mut collect);
        self.runtime.fresh = saved;
        r?;
        Ok(found)
    }

    /// Every decomposition of `t` by the context definition `name`, in the
    /// order the automaton finds them.
    pub fn decompose_all(&mut self, name: &str, t: &Term) -> Result<Vec<Decomposition>, RuntimeError> {
        let compiled = self.machine.compiled;
        let index = compiled.context_index(name).ok_or_else(|| RuntimeError::Unbound(name.to_string()))?;
        let mut found = Vec::new();
        let mut collect = |_: &mut Runtime, v: Value, _: &[String]| -> Outcome {
            match v {
                Value::Tuple(mut parts) if parts.len() == 2 => {
                    let hole = parts.pop().unwrap_or(Value::Bool(false));
                    match parts.pop() {
                        Some(Value::Context(context)) => found.push(Decomposition { context, hole }),
                        other => return Err(RuntimeError::Type(format!("expected a context, found {other:?}"))),
                    }
                    Ok(MatchOutcome::Failure)
                }
                other => Err(RuntimeError::Type(format!("expected a decomposition, found {other}"))),
            }
        };
        self.machine.run_automaton(&mut self.runtime, &compiled.contexts[index], Value::Term(t.clone()), &mut collect)?;
        Ok(found)
    }

    /// Whether `t` belongs to the dynamic definition `name`.
    pub fn in_dynamic(&mut self, name: &str, t: &Term) -> Result<bool, RuntimeError> {
        let compiled = self.machine.compiled;
        let index = compiled.dynamic_index(name).ok_or_else(|| RuntimeError::Unbound(name.to_string()))?;
        let r = self.machine.run_automaton(
            &mut self.runtime,
            &compiled.dynamics[index],
            Value::Term(t.clone()),
            &mut first_match,
        )?;
        Ok(matches!(r, MatchOutcome::Matched(..)))
    }

    /// Runs an arbitrary state tree (for example a hand-built one) whose
    /// references are numbered below `num_refs`.
    pub fn run_state(&mut self, a: &'c Automaton, subject: Value) -> Outcome {
        self.machine.run_automaton(&mut self.runtime, a, subject, &mut first_match)
    }
}
