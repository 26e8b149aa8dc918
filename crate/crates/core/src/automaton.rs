//! Pattern-matching automata and their compilation from pattern matrices.
//!
//! Every dynamic definition, context definition and group of rules sharing
//! a subject type becomes one [`Automaton`]. Definitions are compiled once
//! and referenced by index from `RefLet` states, so recursive definitions
//! become recursive calls.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write};

use crate::ast::*;
use crate::syntax::pretty::pretty_expr;
use crate::typecheck::{CheckedSpec, ObjType};

/// A symbolic name for a subterm under test, printed as `$tN`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermRef(pub u32);

impl fmt::Display for TermRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "$t{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Test {
    Nullary(Name),
    /// Matches `c` and binds its argument (a tuple when `c` has several).
    Applied(Name, TermRef),
}

impl Test {
    pub fn constructor(&self) -> &str {
        match self {
            Test::Nullary(c) | Test::Applied(c, _) => c,
        }
    }
}

/// A branch case. A constructor without a case makes the branch fail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub test: Test,
    pub state: State,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    Single(TermRef),
    /// Context and hole of a decomposition.
    Pair(TermRef, TermRef),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchCall {
    Dynamic { name: Name, index: usize, arg: TermRef },
    Context { name: Name, index: usize, arg: TermRef },
    /// One root rewriting step with the axioms of type `ty`.
    Rewrite1 { arg: MetaExpr, ty: ObjType },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binder {
    Var(Name),
    /// Marks the subterm in the hole of a context definition.
    Hole,
    Tuple(Vec<TermRef>),
}

/// How a context automaton rebuilds the subject around its hole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recon {
    Hole,
    Ref(TermRef),
    Constr(Name, Box<Recon>),
    Tuple(Vec<Recon>),
    /// Plug into the context bound to the reference.
    Fill(TermRef, Box<Recon>),
}

impl Recon {
    pub fn has_hole(&self) -> bool {
        match self {
            Recon::Hole => true,
            Recon::Ref(_) => false,
            Recon::Constr(_, r) | Recon::Fill(_, r) => r.has_hole(),
            Recon::Tuple(rs) => rs.iter().any(Recon::has_hole),
        }
    }

    fn refs(&self, out: &mut Vec<TermRef>) {
        match self {
            Recon::Hole => {}
            Recon::Ref(r) => out.push(*r),
            Recon::Constr(_, inner) => inner.refs(out),
            Recon::Fill(r, inner) => {
                out.push(*r);
                inner.refs(out);
            }
            Recon::Tuple(rs) => rs.iter().for_each(|r| r.refs(out)),
        }
    }
}

impl fmt::Display for Recon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recon::Hole => f.write_str("□"),
            Recon::Ref(r) => write!(f, "{r}"),
            Recon::Constr(c, inner) => match &**inner {
                Recon::Tuple(_) => write!(f, "{c}{inner}"),
                _ => write!(f, "{c}({inner})"),
            },
            Recon::Tuple(items) => {
                f.write_str("(")?;
                for (i, r) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{r}")?;
                }
                f.write_str(")")
            }
            Recon::Fill(r, inner) => write!(f, "{r}[{inner}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Meta(MetaExpr),
    /// The matched subject itself (dynamic definitions).
    Subject(TermRef),
    /// A decomposition: the context rebuilt by `recon` and the hole term.
    Decompose { hole: TermRef, recon: Recon },
    /// Replaced by `Decompose` once the path to the accept state is known.
    HolePlaceholder,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum State {
    Branch { subject: TermRef, cases: Vec<Case> },
    Accept { action: Action, label: Option<Name> },
    Choice(Vec<State>),
    Fail,
    RefLet { bound: Bound, call: MatchCall, body: Box<State> },
    Cond { cond: MetaExpr, then: Box<State>, otherwise: Box<State> },
    BindLet { binder: Binder, source: TermRef, body: Box<State> },
}

impl State {
    /// Number of states in the subtree.
    pub fn size(&self) -> usize {
        1 + match self {
            State::Branch { cases, .. } => cases.iter().map(|c| c.state.size()).sum(),
            State::Accept { .. } | State::Fail => 0,
            State::Choice(alts) => alts.iter().map(State::size).sum(),
            State::RefLet { body, .. } | State::BindLet { body, .. } => body.size(),
            State::Cond { then, otherwise, .. } => then.size() + otherwise.size(),
        }
    }

    pub fn children(&self) -> Vec<&State> {
        match self {
            State::Branch { cases, .. } => cases.iter().map(|c| &c.state).collect(),
            State::Accept { .. } | State::Fail => Vec::new(),
            State::Choice(alts) => alts.iter().collect(),
            State::RefLet { body, .. } | State::BindLet { body, .. } => vec![body],
            State::Cond { then, otherwise, .. } => vec![then, otherwise],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutomatonKind {
    Dynamic(Name),
    Context(Name),
    Axioms(ObjType),
    Inference(ObjType),
    Matrix,
}

#[derive(Clone, Debug)]
pub struct Automaton {
    pub kind: AutomatonKind,
    pub root: TermRef,
    pub num_refs: u32,
    pub state: State,
}

/// A pattern matrix: one column per subject, one row per candidate.
#[derive(Clone, Debug)]
pub struct Matrix {
    pub subjects: Vec<TermRef>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub patterns: Vec<Pattern>,
    pub state: State,
}

/// How a term reference was obtained from the one it was taken from.
#[derive(Clone, Debug)]
enum Parent {
    Constr(Name, TermRef),
    TupleComponent { index: usize, components: Vec<TermRef>, tuple: TermRef },
    Hole { context: TermRef, whole: TermRef },
    Same(TermRef),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Group {
    Var,
    Tuple,
    Constr,
    Dyn(Name),
    Ctx(Name),
}

fn group_of(p: &Pattern) -> Group {
    match p {
        Pattern::Wildcard | Pattern::Var(_) | Pattern::Hole => Group::Var,
        Pattern::Tuple(_) => Group::Tuple,
        Pattern::Nullary(_) | Pattern::Applied(..) => Group::Constr,
        Pattern::DynConstraint(_, d) => Group::Dyn(d.clone()),
        Pattern::ContextFilling(_, n, _) => Group::Ctx(n.clone()),
        Pattern::Alt(..) | Pattern::Alias(..) | Pattern::TypeConstraint(..) => {
            unreachable!("first column is preprocessed before grouping")
        }
    }
}

/// Compiles matrices into states, allocating term references.
pub struct MatrixCompiler {
    next_ref: u32,
    parents: HashMap<TermRef, Parent>,
    dynamics: HashMap<Name, usize>,
    contexts: HashMap<Name, usize>,
}

impl MatrixCompiler {
    pub fn new(spec: &Spec) -> MatrixCompiler {
        MatrixCompiler {
            next_ref: 0,
            parents: HashMap::new(),
            dynamics: spec.dynamics.iter().enumerate().map(|(i, d)| (d.name.clone(), i)).collect(),
            contexts: spec.contexts.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect(),
        }
    }

    pub fn fresh_ref(&mut self) -> TermRef {
        self.next_ref += 1;
        TermRef(self.next_ref - 1)
    }

    pub fn num_refs(&self) -> u32 {
        self.next_ref
    }

    /// Removes type constraints, aliases and alternatives from the first
    /// column. Aliases become bindings in the row state; alternatives split
    /// the row in place.
    pub fn preprocess(&self, m: Matrix) -> Matrix {
        let subject = m.subjects[0];
        let mut rows = Vec::with_capacity(m.rows.len());
        let mut work: Vec<Row> = m.rows.into_iter().rev().collect();
        while let Some(mut row) = work.pop() {
            match std::mem::replace(&mut row.patterns[0], Pattern::Wildcard) {
                Pattern::TypeConstraint(p, _) => {
                    row.patterns[0] = *p;
                    work.push(row);
                }
                Pattern::Alias(p, x) => {
                    row.patterns[0] = *p;
                    row.state = State::BindLet { binder: Binder::Var(x), source: subject, body: Box::new(row.state) };
                    work.push(row);
                }
                Pattern::Alt(a, b) => {
                    let mut second = row.clone();
                    second.patterns[0] = *b;
                    row.patterns[0] = *a;
                    work.push(second);
                    work.push(row);
                }
                p => {
                    row.patterns[0] = p;
                    rows.push(row);
                }
            }
        }
        Matrix { subjects: m.subjects, rows }
    }

    /// Splits a preprocessed matrix into maximal runs of rows whose first
    /// patterns belong to the same group.
    pub fn split_groups(m: Matrix) -> Vec<Matrix> {
        let mut out: Vec<(Group, Matrix)> = Vec::new();
        for row in m.rows {
            let g = group_of(&row.patterns[0]);
            match out.last_mut() {
                Some((last, sub)) if *last == g => sub.rows.push(row),
                _ => out.push((g, Matrix { subjects: m.subjects.clone(), rows: vec![row] })),
            }
        }
        out.into_iter().map(|(_, m)| m).collect()
    }

    pub fn compile_matrix(&mut self, m: Matrix) -> State {
        if m.rows.is_empty() {
            return State::Fail;
        }
        if m.subjects.is_empty() {
            let mut states: Vec<State> = m.rows.into_iter().map(|r| r.state).collect();
            return if states.len() == 1 { states.pop().unwrap_or(State::Fail) } else { State::Choice(states) };
        }
        let m = self.preprocess(m);
        let mut states: Vec<State> =
            Self::split_groups(m).into_iter().map(|g| self.compile_group(g)).collect();
        if states.len() == 1 {
            states.pop().unwrap_or(State::Fail)
        } else {
            State::Choice(states)
        }
    }

    fn compile_group(&mut self, m: Matrix) -> State {
        let subject = m.subjects[0];
        let rest_subjects = m.subjects[1..].to_vec();
        match group_of(&m.rows[0].patterns[0]) {
            Group::Var if m.rows.len() == 1 => {
                let mut row = m.rows.into_iter().next().unwrap_or_else(|| unreachable!("one row"));
                let binder = match row.patterns.remove(0) {
                    Pattern::Var(x) => Some(Binder::Var(x)),
                    Pattern::Hole => Some(Binder::Hole),
                    _ => None,
                };
                let body = self.compile_matrix(Matrix { subjects: rest_subjects, rows: vec![row] });
                match binder {
                    Some(binder) => State::BindLet { binder, source: subject, body: Box::new(body) },
                    None => body,
                }
            }
            Group::Var => {
                let rows = m
                    .rows
                    .into_iter()
                    .map(|mut row| {
                        let p = row.patterns.remove(0);
                        let state = match p {
                            Pattern::Var(x) => {
                                State::BindLet { binder: Binder::Var(x), source: subject, body: Box::new(row.state) }
                            }
                            Pattern::Hole => {
                                State::BindLet { binder: Binder::Hole, source: subject, body: Box::new(row.state) }
                            }
                            _ => row.state,
                        };
                        Row { patterns: row.patterns, state }
                    })
                    .collect();
                self.compile_matrix(Matrix { subjects: rest_subjects, rows })
            }
            Group::Tuple => {
                let arity = match &m.rows[0].patterns[0] {
                    Pattern::Tuple(items) => items.len(),
                    _ => 0,
                };
                let components: Vec<TermRef> = (0..arity).map(|_| self.fresh_ref()).collect();
                for (index, r) in components.iter().enumerate() {
                    self.parents.insert(
                        *r,
                        Parent::TupleComponent { index, components: components.clone(), tuple: subject },
                    );
                }
                let rows = m
                    .rows
                    .into_iter()
                    .map(|mut row| {
                        let mut patterns = match row.patterns.remove(0) {
                            Pattern::Tuple(items) => items,
                            _ => unreachable!("tuple group"),
                        };
                        patterns.extend(row.patterns);
                        Row { patterns, state: row.state }
                    })
                    .collect();
                let mut subjects = components.clone();
                subjects.extend(rest_subjects);
                let body = self.compile_matrix(Matrix { subjects, rows });
                State::BindLet { binder: Binder::Tuple(components), source: subject, body: Box::new(body) }
            }
            Group::Constr => {
                let mut order: Vec<Name> = Vec::new();
                let mut by_constr: HashMap<Name, Vec<Row>> = HashMap::new();
                let mut applied: HashSet<Name> = HashSet::new();
                for row in m.rows {
                    let c = match &row.patterns[0] {
                        Pattern::Nullary(c) => c.clone(),
                        Pattern::Applied(c, _) => {
                            applied.insert(c.clone());
                            c.clone()
                        }
                        _ => unreachable!("constructor group"),
                    };
                    if !by_constr.contains_key(&c) {
                        order.push(c.clone());
                    }
                    by_constr.entry(c).or_default().push(row);
                }
                let mut cases = Vec::new();
                for c in order {
                    let rows = by_constr.remove(&c).unwrap_or_default();
                    if applied.contains(&c) {
                        let r = self.fresh_ref();
                        self.parents.insert(r, Parent::Constr(c.clone(), subject));
                        let rows = rows
                            .into_iter()
                            .map(|mut row| {
                                let arg = match row.patterns.remove(0) {
                                    Pattern::Applied(_, p) => *p,
                                    _ => Pattern::Wildcard,
                                };
                                let mut patterns = vec![arg];
                                patterns.extend(row.patterns);
                                Row { patterns, state: row.state }
                            })
                            .collect();
                        let mut subjects = vec![r];
                        subjects.extend(rest_subjects.iter().copied());
                        let state = self.compile_matrix(Matrix { subjects, rows });
                        cases.push(Case { test: Test::Applied(c, r), state });
                    } else {
                        let rows = rows
                            .into_iter()
                            .map(|mut row| {
                                row.patterns.remove(0);
                                row
                            })
                            .collect();
                        let state = self.compile_matrix(Matrix { subjects: rest_subjects.clone(), rows });
                        cases.push(Case { test: Test::Nullary(c), state });
                    }
                }
                State::Branch { subject, cases }
            }
            Group::Dyn(name) => {
                let r = self.fresh_ref();
                self.parents.insert(r, Parent::Same(subject));
                let rows = m
                    .rows
                    .into_iter()
                    .map(|mut row| {
                        let inner = match row.patterns.remove(0) {
                            Pattern::DynConstraint(p, _) => *p,
                            _ => unreachable!("dynamic group"),
                        };
                        let mut patterns = vec![inner];
                        patterns.extend(row.patterns);
                        Row { patterns, state: row.state }
                    })
                    .collect();
                let mut subjects = vec![r];
                subjects.extend(rest_subjects);
                let body = self.compile_matrix(Matrix { subjects, rows });
                let index = self.dynamics.get(&name).copied().unwrap_or(usize::MAX);
                State::RefLet {
                    bound: Bound::Single(r),
                    call: MatchCall::Dynamic { name, index, arg: subject },
                    body: Box::new(body),
                }
            }
            Group::Ctx(name) => {
                let rc = self.fresh_ref();
                let rh = self.fresh_ref();
                self.parents.insert(rh, Parent::Hole { context: rc, whole: subject });
                let rows = m
                    .rows
                    .into_iter()
                    .map(|mut row| {
                        let (p, q) = match row.patterns.remove(0) {
                            Pattern::ContextFilling(p, _, q) => (*p, *q),
                            _ => unreachable!("context group"),
                        };
                        let mut patterns = vec![p, q];
                        patterns.extend(row.patterns);
                        Row { patterns, state: row.state }
                    })
                    .collect();
                let mut subjects = vec![rc, rh];
                subjects.extend(rest_subjects);
                let body = self.compile_matrix(Matrix { subjects, rows });
                let index = self.contexts.get(&name).copied().unwrap_or(usize::MAX);
                State::RefLet {
                    bound: Bound::Pair(rc, rh),
                    call: MatchCall::Context { name, index, arg: subject },
                    body: Box::new(body),
                }
            }
        }
    }

    /// The reconstruction of `root` from the subterm at `hole`.
    fn reconstruct(&self, hole: TermRef, root: TermRef) -> Recon {
        let mut recon = Recon::Hole;
        let mut cur = hole;
        while cur != root {
            match self.parents.get(&cur) {
                Some(Parent::Constr(c, up)) => {
                    recon = Recon::Constr(c.clone(), Box::new(recon));
                    cur = *up;
                }
                Some(Parent::TupleComponent { index, components, tuple }) => {
                    let items = components
                        .iter()
                        .enumerate()
                        .map(|(i, r)| if i == *index { std::mem::replace(&mut recon, Recon::Hole) } else { Recon::Ref(*r) })
                        .collect();
                    recon = Recon::Tuple(items);
                    cur = *tuple;
                }
                Some(Parent::Hole { context, whole }) => {
                    recon = Recon::Fill(*context, Box::new(recon));
                    cur = *whole;
                }
                Some(Parent::Same(up)) => cur = *up,
                None => break,
            }
        }
        recon
    }

    /// Replaces every `HolePlaceholder` with the decomposition built from
    /// the hole binding on its path.
    fn fill_placeholders(&self, state: &mut State, hole: Option<TermRef>, root: TermRef) {
        match state {
            State::Accept { action, .. } => {
                if *action == Action::HolePlaceholder {
                    if let Some(h) = hole {
                        *action = Action::Decompose { hole: h, recon: self.reconstruct(h, root) };
                    }
                }
            }
            State::BindLet { binder: Binder::Hole, source, body } => {
                let h = *source;
                self.fill_placeholders(body, Some(h), root)
            }
            State::Branch { cases, .. } => {
                cases.iter_mut().for_each(|c| self.fill_placeholders(&mut c.state, hole, root))
            }
            State::Choice(alts) => alts.iter_mut().for_each(|s| self.fill_placeholders(s, hole, root)),
            State::Fail => {}
            State::RefLet { body, .. } | State::BindLet { body, .. } => self.fill_placeholders(body, hole, root),
            State::Cond { then, otherwise, .. } => {
                self.fill_placeholders(then, hole, root);
                self.fill_placeholders(otherwise, hole, root);
            }
        }
    }
}

/// Names the wildcards constrained by dynamic or context names in a context
/// definition: the lowercased definition name, numbered when it occurs more
/// than once (`h1`, `h2`, `v`).
fn name_context_wildcards(def: &ContextDef) -> Vec<Pattern> {
    fn count(p: &Pattern, counts: &mut BTreeMap<Name, usize>) {
        match p {
            Pattern::DynConstraint(q, d) => {
                if **q == Pattern::Wildcard {
                    *counts.entry(d.clone()).or_default() += 1;
                }
            }
            Pattern::ContextFilling(q, n, filler) => {
                if **q == Pattern::Wildcard {
                    *counts.entry(n.clone()).or_default() += 1;
                }
                count(filler, counts);
            }
            Pattern::Applied(_, q) | Pattern::TypeConstraint(q, _) | Pattern::Alias(q, _) => count(q, counts),
            Pattern::Tuple(ps) => ps.iter().for_each(|q| count(q, counts)),
            Pattern::Alt(a, b) => {
                count(a, counts);
                count(b, counts);
            }
            Pattern::Wildcard | Pattern::Var(_) | Pattern::Nullary(_) | Pattern::Hole => {}
        }
    }
    fn rename(p: &mut Pattern, counts: &BTreeMap<Name, usize>, seen: &mut BTreeMap<Name, usize>) {
        let mut name_for = |n: &str| {
            let k = seen.entry(n.to_string()).or_default();
            *k += 1;
            let base = n.to_lowercase();
            if counts.get(n).copied().unwrap_or(0) > 1 {
                format!("{base}{k}")
            } else {
                base
            }
        };
        match p {
            Pattern::DynConstraint(q, d) => {
                if **q == Pattern::Wildcard {
                    **q = Pattern::Var(name_for(d));
                }
            }
            Pattern::ContextFilling(q, n, filler) => {
                if **q == Pattern::Wildcard {
                    **q = Pattern::Var(name_for(n));
                }
                rename(filler, counts, seen);
            }
            Pattern::Applied(_, q) | Pattern::TypeConstraint(q, _) | Pattern::Alias(q, _) => rename(q, counts, seen),
            Pattern::Tuple(ps) => ps.iter_mut().for_each(|q| rename(q, counts, seen)),
            Pattern::Alt(a, b) => {
                rename(a, counts, seen);
                rename(b, counts, seen);
            }
            Pattern::Wildcard | Pattern::Var(_) | Pattern::Nullary(_) | Pattern::Hole => {}
        }
    }
    let mut counts = BTreeMap::new();
    def.arms.iter().for_each(|a| count(a, &mut counts));
    let mut seen = BTreeMap::new();
    def.arms
        .iter()
        .map(|a| {
            let mut a = a.clone();
            rename(&mut a, &counts, &mut seen);
            a
        })
        .collect()
}

pub fn build_match_dynamic(spec: &Spec, def: &DynamicDef) -> Automaton {
    let mut mc = MatrixCompiler::new(spec);
    let root = mc.fresh_ref();
    let row = Row {
        patterns: vec![def.pattern.clone()],
        state: State::Accept { action: Action::Subject(root), label: None },
    };
    let state = mc.compile_matrix(Matrix { subjects: vec![root], rows: vec![row] });
    Automaton { kind: AutomatonKind::Dynamic(def.name.clone()), root, num_refs: mc.num_refs(), state }
}

pub fn build_match_context(spec: &Spec, def: &ContextDef) -> Automaton {
    let mut mc = MatrixCompiler::new(spec);
    let root = mc.fresh_ref();
    let rows = name_context_wildcards(def)
        .into_iter()
        .map(|arm| Row {
            patterns: vec![arm],
            state: State::Accept { action: Action::HolePlaceholder, label: None },
        })
        .collect();
    let mut state = mc.compile_matrix(Matrix { subjects: vec![root], rows });
    mc.fill_placeholders(&mut state, None, root);
    Automaton { kind: AutomatonKind::Context(def.name.clone()), root, num_refs: mc.num_refs(), state }
}

/// The initial state of a rule: its condition, premise and action.
pub fn init_rule_state(mc: &mut MatrixCompiler, checked: &CheckedSpec, index: usize) -> State {
    let rule = &checked.spec.rules[index];
    let (cond, core) = match rule {
        Rule::Axiom { name, cond, rhs, .. } => {
            (cond, State::Accept { action: Action::Meta(rhs.clone()), label: Some(name.clone()) })
        }
        Rule::Inference { name, premise_lhs, premise_rhs, cond, conclusion_rhs, .. } => {
            let k = mc.fresh_ref();
            let accept = State::Accept { action: Action::Meta(conclusion_rhs.clone()), label: Some(name.clone()) };
            let body = mc.compile_matrix(Matrix {
                subjects: vec![k],
                rows: vec![Row { patterns: vec![premise_rhs.clone()], state: accept }],
            });
            let ty = checked.premise_types[index].clone().unwrap_or_else(|| checked.start_type());
            let call = MatchCall::Rewrite1 { arg: premise_lhs.clone(), ty };
            (cond, State::RefLet { bound: Bound::Single(k), call, body: Box::new(body) })
        }
    };
    match cond {
        None | Some(MetaExpr::Bool(true)) => core,
        Some(c) => State::Cond { cond: c.clone(), then: Box::new(core), otherwise: Box::new(State::Fail) },
    }
}

/// One-column matrix over `root` with a row per rule, in rule order.
pub fn init_rule_states(mc: &mut MatrixCompiler, checked: &CheckedSpec, indices: &[usize], root: TermRef) -> Matrix {
    let rows = indices
        .iter()
        .map(|&i| Row {
            patterns: vec![checked.spec.rules[i].lhs().clone()],
            state: init_rule_state(mc, checked, i),
        })
        .collect();
    Matrix { subjects: vec![root], rows }
}

/// Compiles the given rules (by index) into one automaton.
pub fn compile_rules(checked: &CheckedSpec, indices: &[usize], kind: AutomatonKind) -> Automaton {
    let mut mc = MatrixCompiler::new(&checked.spec);
    let root = mc.fresh_ref();
    let m = init_rule_states(&mut mc, checked, indices, root);
    let state = mc.compile_matrix(m);
    Automaton { kind, root, num_refs: mc.num_refs(), state }
}

/// All automata of a checked specification.
#[derive(Clone, Debug)]
pub struct CompiledSpec {
    pub checked: CheckedSpec,
    /// Indexed like `spec.dynamics`.
    pub dynamics: Vec<Automaton>,
    /// Indexed like `spec.contexts`.
    pub contexts: Vec<Automaton>,
    pub axioms: BTreeMap<ObjType, Automaton>,
    pub inference: BTreeMap<ObjType, Automaton>,
}

impl CompiledSpec {
    pub fn spec(&self) -> &Spec {
        &self.checked.spec
    }

    pub fn context_index(&self, name: &str) -> Option<usize> {
        self.spec().contexts.iter().position(|c| c.name == name)
    }

    pub fn dynamic_index(&self, name: &str) -> Option<usize> {
        self.spec().dynamics.iter().position(|d| d.name == name)
    }

    pub fn automata(&self) -> impl Iterator<Item = &Automaton> {
        self.dynamics.iter().chain(&self.contexts).chain(self.axioms.values()).chain(self.inference.values())
    }
}

pub fn compile_spec(checked: CheckedSpec) -> CompiledSpec {
    let spec = &checked.spec;
    let dynamics = spec.dynamics.iter().map(|d| build_match_dynamic(spec, d)).collect();
    let contexts = spec.contexts.iter().map(|c| build_match_context(spec, c)).collect();
    let mut axiom_groups: BTreeMap<ObjType, Vec<usize>> = BTreeMap::new();
    let mut inference_groups: BTreeMap<ObjType, Vec<usize>> = BTreeMap::new();
    for (i, r) in spec.rules.iter().enumerate() {
        let groups = if r.is_axiom() { &mut axiom_groups } else { &mut inference_groups };
        groups.entry(checked.rule_types[i].clone()).or_default().push(i);
    }
    let axioms = axiom_groups
        .into_iter()
        .map(|(ty, idx)| {
            let a = compile_rules(&checked, &idx, AutomatonKind::Axioms(ty.clone()));
            (ty, a)
        })
        .collect();
    let inference = inference_groups
        .into_iter()
        .map(|(ty, idx)| {
            let a = compile_rules(&checked, &idx, AutomatonKind::Inference(ty.clone()));
            (ty, a)
        })
        .collect();
    CompiledSpec { checked, dynamics, contexts, axioms, inference }
}

// ---- dump ----

fn header(a: &Automaton) -> String {
    match &a.kind {
        AutomatonKind::Dynamic(n) => format!("dynamic {n} ({}):", a.root),
        AutomatonKind::Context(n) => format!("context {n} ({}):", a.root),
        AutomatonKind::Axioms(t) => format!("axioms {t} ({}):", a.root),
        AutomatonKind::Inference(t) => format!("inference {t} ({}):", a.root),
        AutomatonKind::Matrix => format!("matrix ({}):", a.root),
    }
}

fn call_text(call: &MatchCall) -> String {
    match call {
        MatchCall::Dynamic { name, arg, .. } | MatchCall::Context { name, arg, .. } => format!("match_{name} {arg}"),
        MatchCall::Rewrite1 { arg, .. } => format!("rewrite1 {}", pretty_expr(arg)),
    }
}

fn dump_state(out: &mut String, s: &State, id: usize, depth: usize) {
    let indent = "  ".repeat(depth + 1);
    let children = s.children();
    let mut ids = Vec::with_capacity(children.len());
    let mut next = id + 1;
    for c in &children {
        ids.push(next);
        next += c.size();
    }
    let line = match s {
        State::Branch { subject, cases } => {
            let cs: Vec<String> = cases
                .iter()
                .zip(&ids)
                .map(|(c, k)| match &c.test {
                    Test::Nullary(n) => format!("case {n} -> S{k}"),
                    Test::Applied(n, r) => format!("case {n} {r} -> S{k}"),
                })
                .collect();
            format!("branch {subject} ({})", cs.join(", "))
        }
        State::Accept { action, label } => {
            let a = match action {
                Action::Meta(e) => pretty_expr(e),
                Action::Subject(r) => r.to_string(),
                Action::Decompose { recon, .. } => format!("(λ□. {recon}, □)"),
                Action::HolePlaceholder => "(λ□. ?, □)".to_string(),
            };
            match label {
                Some(l) => format!("accept {a} [{l}]"),
                None => format!("accept {a}"),
            }
        }
        State::Choice(_) => {
            let alts: Vec<String> = ids.iter().map(|k| format!("S{k}")).collect();
            format!("choice {}", alts.join(" | "))
        }
        State::Fail => "fail".to_string(),
        State::RefLet { bound, call, .. } => {
            let b = match bound {
                Bound::Single(r) => r.to_string(),
                Bound::Pair(a, b) => format!("({a}, {b})"),
            };
            format!("let {b} = {} in S{}", call_text(call), ids[0])
        }
        State::Cond { cond, .. } => format!("if {} then S{} else S{}", pretty_expr(cond), ids[0], ids[1]),
        State::BindLet { binder, source, .. } => {
            let b = match binder {
                Binder::Var(x) => x.clone(),
                Binder::Hole => "□".to_string(),
                Binder::Tuple(rs) => {
                    let rs: Vec<String> = rs.iter().map(TermRef::to_string).collect();
                    format!("({})", rs.join(", "))
                }
            };
            format!("let {b} = {source} in S{}", ids[0])
        }
    };
    let _ = writeln!(out, "{indent}S{id}: {line}");
    for (c, k) in children.iter().zip(ids) {
        dump_state(out, c, k, depth + 1);
    }
}

/// Renders one automaton: a header line, then one line per state in
/// preorder, numbered `S0`, `S1`, ... and indented by depth.
pub fn dump_automaton(a: &Automaton) -> String {
    let mut out = header(a);
    out.push('\n');
    dump_state(&mut out, &a.state, 0, 0);
    out
}

/// Renders every automaton: dynamics, contexts, axioms, then inference
/// rules, separated by blank lines.
pub fn dump(compiled: &CompiledSpec) -> String {
    let parts: Vec<String> = compiled.automata().map(dump_automaton).collect();
    parts.join("\n")
}

// ---- structural scans ----

/// Checks that every term reference is bound before it is read and bound
/// at most once on each path.
pub fn check_scoping(a: &Automaton) -> Result<(), String> {
    fn read(bound: &[TermRef], r: TermRef, what: &str) -> Result<(), String> {
        if bound.contains(&r) {
            Ok(())
        } else {
            Err(format!("{r} read by {what} before it is bound"))
        }
    }
    fn bind(bound: &mut Vec<TermRef>, r: TermRef) -> Result<(), String> {
        if bound.contains(&r) {
            return Err(format!("{r} bound twice on one path"));
        }
        bound.push(r);
        Ok(())
    }
    fn walk(s: &State, bound: &mut Vec<TermRef>) -> Result<(), String> {
        let base = bound.len();
        let r = match s {
            State::Branch { subject, cases } => {
                read(bound, *subject, "branch")?;
                for c in cases {
                    let inner = bound.len();
                    if let Test::Applied(_, r) = &c.test {
                        bind(bound, *r)?;
                    }
                    walk(&c.state, bound)?;
                    bound.truncate(inner);
                }
                Ok(())
            }
            State::Accept { action, .. } => match action {
                Action::Subject(r) => read(bound, *r, "accept"),
                Action::Decompose { hole, recon } => {
                    read(bound, *hole, "accept")?;
                    let mut rs = Vec::new();
                    recon.refs(&mut rs);
                    rs.into_iter().try_for_each(|r| read(bound, r, "reconstruction"))
                }
                Action::HolePlaceholder => Err("unresolved hole placeholder".to_string()),
                Action::Meta(_) => Ok(()),
            },
            State::Choice(alts) => {
                if alts.is_empty() {
                    return Err("empty choice".to_string());
                }
                for alt in alts {
                    walk(alt, bound)?;
                }
                Ok(())
            }
            State::Fail => Ok(()),
            State::RefLet { bound: b, call, body } => {
                match call {
                    MatchCall::Dynamic { arg, .. } | MatchCall::Context { arg, .. } => read(bound, *arg, "call")?,
                    MatchCall::Rewrite1 { .. } => {}
                }
                match b {
                    Bound::Single(r) => bind(bound, *r)?,
                    Bound::Pair(x, y) => {
                        bind(bound, *x)?;
                        bind(bound, *y)?;
                    }
                }
                walk(body, bound)
            }
            State::Cond { then, otherwise, .. } => {
                walk(then, bound)?;
                walk(otherwise, bound)
            }
            State::BindLet { binder, source, body } => {
                read(bound, *source, "let")?;
                if let Binder::Tuple(rs) = binder {
                    for r in rs {
                        bind(bound, *r)?;
                    }
                }
                walk(body, bound)
            }
        };
        bound.truncate(base);
        r
    }
    let mut bound = vec![a.root];
    walk(&a.state, &mut bound)
}

/// Checks that no branch tests the same constructor twice.
pub fn check_disjoint(a: &Automaton) -> Result<(), String> {
    fn walk(s: &State) -> Result<(), String> {
        if let State::Branch { subject, cases } = s {
            let mut seen = HashSet::new();
            for c in cases {
                if !seen.insert(c.test.constructor()) {
                    return Err(format!("branch on {subject} tests {} twice", c.test.constructor()));
                }
            }
        }
        s.children().into_iter().try_for_each(walk)
    }
    walk(&a.state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_pattern;

    fn spec() -> Spec {
        crate::syntax::parse_spec(
            "SIGNATURE: type M = A | B | P of M*M;; startfrom M;; SPECIFICATION: dynamic V = A;; dynamic W = B;;",
        )
        .unwrap()
        .spec
    }

    fn accept(e: &str) -> State {
        State::Accept { action: Action::Meta(MetaExpr::Var(e.into())), label: None }
    }

    fn row(p: &str, s: State) -> Row {
        Row { patterns: vec![parse_pattern(p).unwrap()], state: s }
    }

    #[test]
    fn empty_column_is_a_choice_of_rows() {
        let mut mc = MatrixCompiler::new(&spec());
        let m = Matrix {
            subjects: vec![],
            rows: vec![Row { patterns: vec![], state: accept("a") }, Row { patterns: vec![], state: accept("b") }],
        };
        assert_eq!(mc.compile_matrix(m), State::Choice(vec![accept("a"), accept("b")]));
    }

    #[test]
    fn preprocess_rules() {
        let mut mc = MatrixCompiler::new(&spec());
        let t = mc.fresh_ref();
        let m = Matrix {
            subjects: vec![t],
            rows: vec![row("A as x", accept("s")), row("A | B", accept("u")), row("(A : type M)", accept("w"))],
        };
        let out = mc.preprocess(m);
        let pats: Vec<Pattern> = out.rows.iter().map(|r| r.patterns[0].clone()).collect();
        assert_eq!(
            pats,
            vec![Pattern::Nullary("A".into()), Pattern::Nullary("A".into()), Pattern::Nullary("B".into()), Pattern::Nullary("A".into())]
        );
        assert_eq!(
            out.rows[0].state,
            State::BindLet { binder: Binder::Var("x".into()), source: t, body: Box::new(accept("s")) }
        );
        assert_eq!(out.rows[1].state, accept("u"));
        assert_eq!(out.rows[2].state, accept("u"));
    }

    #[test]
    fn grouping() {
        let mut mc = MatrixCompiler::new(&spec());
        let t = mc.fresh_ref();
        let dv = |x: &str, d: &str| Pattern::DynConstraint(Box::new(Pattern::Var(x.into())), d.into());
        let m = Matrix {
            subjects: vec![t],
            rows: vec![
                row("x", accept("1")),
                row("A", accept("2")),
                Row { patterns: vec![dv("y", "V")], state: accept("3") },
                Row { patterns: vec![dv("a", "V")], state: accept("4") },
                Row { patterns: vec![dv("b", "W")], state: accept("5") },
            ],
        };
        let groups = MatrixCompiler::split_groups(mc.preprocess(m));
        let sizes: Vec<usize> = groups.iter().map(|g| g.rows.len()).collect();
        assert_eq!(sizes, vec![1, 1, 2, 1]);
        let one = Matrix { subjects: vec![t], rows: vec![row("A", accept("1")), row("P(x, y)", accept("2"))] };
        assert_eq!(MatrixCompiler::split_groups(one).len(), 1);
    }

    #[test]
    fn tuple_then_variables() {
        let mut mc = MatrixCompiler::new(&spec());
        let t1 = mc.fresh_ref();
        let m = Matrix { subjects: vec![t1], rows: vec![row("(x, y)", accept("e"))] };
        let s = mc.compile_matrix(m);
        let (t11, t12) = (TermRef(1), TermRef(2));
        let expected = State::BindLet {
            binder: Binder::Tuple(vec![t11, t12]),
            source: t1,
            body: Box::new(State::BindLet {
                binder: Binder::Var("x".into()),
                source: t11,
                body: Box::new(State::BindLet { binder: Binder::Var("y".into()), source: t12, body: Box::new(accept("e")) }),
            }),
        };
        assert_eq!(s, expected);
    }

    #[test]
    fn alternatives_give_two_cases() {
        let sp = crate::syntax::parse_spec(
            "SIGNATURE: type M = A | B;; startfrom M;; SPECIFICATION: dynamic W = A | B;;",
        )
        .unwrap()
        .spec;
        let a = build_match_dynamic(&sp, &sp.dynamics[0]);
        match &a.state {
            State::Branch { cases, .. } => {
                assert_eq!(cases.len(), 2);
                assert!(cases.iter().all(|c| matches!(c.state, State::Accept { action: Action::Subject(_), .. })));
            }
            other => panic!("expected branch, got {other:?}"),
        }
        check_scoping(&a).unwrap();
        check_disjoint(&a).unwrap();
    }

    #[test]
    fn context_wildcard_names() {
        let sp = crate::syntax::parse_spec(
            "SIGNATURE: type M = App of M*M | Lam of M;; startfrom M;; SPECIFICATION: \
             dynamic V = Lam _;; context H = BOX | App(H,_) | App(V,H);;",
        )
        .unwrap()
        .spec;
        let arms = name_context_wildcards(&sp.contexts[0]);
        let text: Vec<String> = arms.iter().map(crate::syntax::pretty_pattern).collect();
        assert_eq!(text, vec!["BOX", "App((h1 : H) BOX, _)", "App((v : V), (h2 : H) BOX)"]);
    }

    #[test]
    fn recon_display() {
        let r = Recon::Constr(
            "App".into(),
            Box::new(Recon::Tuple(vec![Recon::Fill(TermRef(4), Box::new(Recon::Hole)), Recon::Ref(TermRef(3))])),
        );
        assert_eq!(r.to_string(), "App($t4[□], $t3)");
        assert!(r.has_hole());
    }
}
