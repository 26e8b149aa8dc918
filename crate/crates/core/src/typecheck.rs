//! Static checking of specifications.
//!
//! Object types are inferred by unification. Dynamic definitions, context
//! definitions and auxiliary functions start with fresh unknown types so
//! that recursive and forward references resolve to a common solution;
//! unknowns left over at the end default to the start type.

use std::collections::BTreeMap;
use std::fmt;

use crate::ast::*;
use crate::diag::{Diagnostic, Span};
use crate::syntax::pretty::{pretty_expr, pretty_pattern};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjType {
    Named(Name),
    Str,
    Int,
    Bool,
    Tuple(Vec<ObjType>),
    /// Inference variable; never present in a [`CheckedSpec`].
    Unknown(u32),
}

impl ObjType {
    fn from_ref(r: &TypeRef) -> ObjType {
        match r {
            TypeRef::Named(n) => ObjType::Named(n.clone()),
            TypeRef::String => ObjType::Str,
            TypeRef::Int => ObjType::Int,
        }
    }

    fn has_unknown(&self) -> bool {
        match self {
            ObjType::Unknown(_) => true,
            ObjType::Tuple(ts) => ts.iter().any(ObjType::has_unknown),
            _ => false,
        }
    }
}

impl fmt::Display for ObjType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjType::Named(n) => f.write_str(n),
            ObjType::Str => f.write_str("string"),
            ObjType::Int => f.write_str("int"),
            ObjType::Bool => f.write_str("bool"),
            ObjType::Unknown(n) => write!(f, "'t{n}"),
            ObjType::Tuple(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" * ")?;
                    }
                    if matches!(t, ObjType::Tuple(_)) {
                        write!(f, "({t})")?;
                    } else {
                        write!(f, "{t}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// `hole ∘→ whole`
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextType {
    pub hole: ObjType,
    pub whole: ObjType,
}

impl fmt::Display for ContextType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ∘→ {}", self.hole, self.whole)
    }
}

/// Type of a name in scope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    Obj(ObjType),
    Ctx(ContextType),
}

pub type Scope = Vec<(Name, Binding)>;

fn lookup<'a>(scope: &'a Scope, name: &str) -> Option<&'a Binding> {
    scope.iter().rev().find(|(n, _)| n == name).map(|(_, b)| b)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxType {
    pub params: Vec<ObjType>,
    pub result: ObjType,
}

/// A specification that passed all checks, annotated with inferred types.
#[derive(Clone, Debug)]
pub struct CheckedSpec {
    pub spec: Spec,
    pub dynamic_types: BTreeMap<Name, ObjType>,
    pub context_types: BTreeMap<Name, ContextType>,
    pub aux_types: BTreeMap<Name, AuxType>,
    /// Subject type of each rule, indexed like `spec.rules`.
    pub rule_types: Vec<ObjType>,
    /// Type of the premise term of each inference rule.
    pub premise_types: Vec<Option<ObjType>>,
}

impl CheckedSpec {
    pub fn start_type(&self) -> ObjType {
        ObjType::Named(self.spec.signature.start_type.clone())
    }
}

enum UnifyError {
    Mismatch,
    Occurs,
}

/// Inference state: the unifier plus the types assigned to definitions.
pub struct Checker<'s> {
    spec: &'s Spec,
    subst: Vec<Option<ObjType>>,
    dynamics: BTreeMap<Name, ObjType>,
    contexts: BTreeMap<Name, ContextType>,
    aux: BTreeMap<Name, AuxType>,
}

type TResult<T> = Result<T, String>;

impl<'s> Checker<'s> {
    /// Assigns fresh unknown types to every definition of `spec`.
    pub fn new(spec: &'s Spec) -> Checker<'s> {
        let mut c = Checker {
            spec,
            subst: Vec::new(),
            dynamics: BTreeMap::new(),
            contexts: BTreeMap::new(),
            aux: BTreeMap::new(),
        };
        for d in &spec.dynamics {
            let t = c.fresh();
            c.dynamics.insert(d.name.clone(), t);
        }
        for d in &spec.contexts {
            let ct = ContextType { hole: c.fresh(), whole: c.fresh() };
            c.contexts.insert(d.name.clone(), ct);
        }
        for f in &spec.aux {
            let params = f.params.iter().map(|_| c.fresh()).collect();
            let result = c.fresh();
            c.aux.insert(f.name.clone(), AuxType { params, result });
        }
        c
    }

    pub fn fresh(&mut self) -> ObjType {
        self.subst.push(None);
        ObjType::Unknown(self.subst.len() as u32 - 1)
    }

    fn shallow(&self, t: &ObjType) -> ObjType {
        let mut cur = t.clone();
        while let ObjType::Unknown(v) = cur {
            match &self.subst[v as usize] {
                Some(next) => cur = next.clone(),
                None => break,
            }
        }
        cur
    }

    /// Applies the current substitution fully.
    pub fn resolve(&self, t: &ObjType) -> ObjType {
        match self.shallow(t) {
            ObjType::Tuple(ts) => ObjType::Tuple(ts.iter().map(|t| self.resolve(t)).collect()),
            other => other,
        }
    }

    pub fn resolve_ctx(&self, ct: &ContextType) -> ContextType {
        ContextType { hole: self.resolve(&ct.hole), whole: self.resolve(&ct.whole) }
    }

    fn occurs(&self, v: u32, t: &ObjType) -> bool {
        match self.shallow(t) {
            ObjType::Unknown(w) => v == w,
            ObjType::Tuple(ts) => ts.iter().any(|t| self.occurs(v, t)),
            _ => false,
        }
    }

    fn unify_raw(&mut self, a: &ObjType, b: &ObjType) -> Result<(), UnifyError> {
        let (a, b) = (self.shallow(a), self.shallow(b));
        match (&a, &b) {
            (ObjType::Unknown(x), ObjType::Unknown(y)) if x == y => Ok(()),
            (ObjType::Unknown(x), t) | (t, ObjType::Unknown(x)) => {
                if self.occurs(*x, t) {
                    return Err(UnifyError::Occurs);
                }
                self.subst[*x as usize] = Some(t.clone());
                Ok(())
            }
            (ObjType::Tuple(xs), ObjType::Tuple(ys)) => {
                if xs.len() != ys.len() {
                    return Err(UnifyError::Mismatch);
                }
                for (x, y) in xs.iter().zip(ys) {
                    self.unify_raw(x, y)?;
                }
                Ok(())
            }
            _ if a == b => Ok(()),
            _ => Err(UnifyError::Mismatch),
        }
    }

    /// Unifies `found` with `expected`, describing a failure as
    /// "expected X, found Y".
    fn unify(&mut self, expected: &ObjType, found: &ObjType) -> TResult<()> {
        let (e, f) = (self.resolve(expected), self.resolve(found));
        match self.unify_raw(expected, found) {
            Ok(()) => Ok(()),
            Err(UnifyError::Occurs) => Err(format!("unresolvable recursive type: {e} occurs in {f}")),
            Err(UnifyError::Mismatch) => Err(format!("expected {e}, found {f}")),
        }
    }

    fn constructor(&self, c: &str) -> TResult<(ObjType, Vec<ObjType>)> {
        match self.spec.signature.constructor(c) {
            Some((td, def)) => Ok((ObjType::Named(td.name.clone()), def.args.iter().map(ObjType::from_ref).collect())),
            None => Err(format!("unknown constructor `{c}`")),
        }
    }

    fn argument_type(args: &[ObjType]) -> ObjType {
        if args.len() == 1 {
            args[0].clone()
        } else {
            ObjType::Tuple(args.to_vec())
        }
    }

    fn named_type(&self, name: &str) -> TResult<ObjType> {
        match name {
            "string" => Ok(ObjType::Str),
            "int" => Ok(ObjType::Int),
            "bool" => Ok(ObjType::Bool),
            _ if self.spec.signature.typedef(name).is_some() => Ok(ObjType::Named(name.to_string())),
            _ => Err(format!("unknown type `{name}`")),
        }
    }

    /// Checks `p` against `expected`, pushing its bindings onto `scope`.
    /// `hole` receives the type at which `BOX` occurs; passing `None`
    /// rejects holes.
    pub fn infer_pattern(
        &mut self,
        p: &Pattern,
        expected: &ObjType,
        scope: &mut Scope,
        hole: &mut Option<Option<ObjType>>,
    ) -> TResult<()> {
        match p {
            Pattern::Wildcard => Ok(()),
            Pattern::Var(x) => {
                scope.push((x.clone(), Binding::Obj(expected.clone())));
                Ok(())
            }
            Pattern::Nullary(c) => {
                let (ty, args) = self.constructor(c)?;
                if !args.is_empty() {
                    return Err(format!("constructor `{c}` expects {} argument(s) but is used without any", args.len()));
                }
                self.unify(expected, &ty).map_err(|e| format!("pattern `{c}`: {e}"))
            }
            Pattern::Applied(c, q) => {
                let (ty, args) = self.constructor(c)?;
                if args.is_empty() {
                    return Err(format!("constructor `{c}` takes no argument"));
                }
                self.unify(expected, &ty).map_err(|e| format!("pattern `{}`: {e}", pretty_pattern(p)))?;
                if let (Pattern::Tuple(items), true) = (&**q, args.len() > 1) {
                    if items.len() != args.len() {
                        return Err(format!(
                            "constructor `{c}` expects {} arguments, found {}",
                            args.len(),
                            items.len()
                        ));
                    }
                }
                self.infer_pattern(q, &Self::argument_type(&args), scope, hole)
            }
            Pattern::Tuple(items) => {
                let comps: Vec<ObjType> = items.iter().map(|_| self.fresh()).collect();
                self.unify(expected, &ObjType::Tuple(comps.clone()))
                    .map_err(|e| format!("pattern `{}`: {e}", pretty_pattern(p)))?;
                for (q, t) in items.iter().zip(&comps) {
                    self.infer_pattern(q, t, scope, hole)?;
                }
                Ok(())
            }
            Pattern::Alt(a, b) => {
                let base = scope.len();
                self.infer_pattern(a, expected, scope, hole)?;
                let mut right = Scope::new();
                self.infer_pattern(b, expected, &mut right, hole)?;
                for (name, binding) in right {
                    let left = scope[base..].iter().find(|(n, _)| *n == name).map(|(_, b)| b.clone());
                    match (left, binding) {
                        (Some(Binding::Obj(l)), Binding::Obj(r)) => {
                            self.unify(&l, &r).map_err(|e| format!("variable `{name}` in alternatives: {e}"))?
                        }
                        (Some(Binding::Ctx(l)), Binding::Ctx(r)) => {
                            self.unify(&l.hole, &r.hole)?;
                            self.unify(&l.whole, &r.whole)?;
                        }
                        _ => return Err(format!("variable `{name}` has different kinds in alternatives")),
                    }
                }
                Ok(())
            }
            Pattern::Alias(q, x) => {
                self.infer_pattern(q, expected, scope, hole)?;
                scope.push((x.clone(), Binding::Obj(expected.clone())));
                Ok(())
            }
            Pattern::TypeConstraint(q, t) => {
                let ty = self.named_type(t)?;
                self.unify(&ty, expected).map_err(|e| format!("type constraint `{t}`: {e}"))?;
                self.infer_pattern(q, expected, scope, hole)
            }
            Pattern::DynConstraint(q, d) => {
                let Some(ty) = self.dynamics.get(d).cloned() else {
                    return Err(if self.contexts.contains_key(d) {
                        format!("context `{d}` used as a dynamic constraint")
                    } else {
                        format!("unknown dynamic definition `{d}`")
                    });
                };
                self.unify(expected, &ty).map_err(|e| format!("dynamic constraint `{d}`: {e}"))?;
                self.infer_pattern(q, expected, scope, hole)
            }
            Pattern::ContextFilling(q, n, filler) => {
                let Some(ct) = self.contexts.get(n).cloned() else {
                    return Err(format!("unknown context definition `{n}`"));
                };
                self.unify(expected, &ct.whole).map_err(|e| format!("context `{n}`: {e}"))?;
                if let Pattern::Var(h) = &**q {
                    scope.push((h.clone(), Binding::Ctx(ct.clone())));
                }
                self.infer_pattern(filler, &ct.hole, scope, hole)
            }
            Pattern::Hole => match hole {
                None => Err("`BOX` is only allowed in context definitions".to_string()),
                Some(slot) => {
                    if slot.is_some() {
                        return Err("context arm has 2 holes".to_string());
                    }
                    *slot = Some(expected.clone());
                    Ok(())
                }
            },
        }
    }

    /// Infers the context type `hole ∘→ whole` of one arm.
    pub fn infer_context_arm(&mut self, arm: &Pattern) -> TResult<ContextType> {
        let holes = arm.hole_count();
        if holes != 1 {
            return Err(format!("context arm has {holes} holes"));
        }
        let whole = self.fresh();
        let mut slot = Some(None);
        self.infer_pattern(arm, &whole, &mut Scope::new(), &mut slot)?;
        let hole = slot.flatten().ok_or_else(|| "context arm has 0 holes".to_string())?;
        Ok(ContextType { hole, whole })
    }

    /// Checks every arm of `def` and unifies the arm types with the type
    /// assumed for the definition.
    pub fn check_context_def(&mut self, def: &ContextDef) -> TResult<ContextType> {
        let assumed = self.contexts[&def.name].clone();
        for arm in &def.arms {
            let shown = pretty_pattern(arm);
            let ct = self
                .infer_context_arm(arm)
                .map_err(|e| format!("in arm `{shown}` of context {}: {e}", def.name))?;
            let before = self.resolve_ctx(&assumed);
            let arm_ty = self.resolve_ctx(&ct);
            let r = self.unify_raw(&assumed.hole, &ct.hole).and_then(|_| self.unify_raw(&assumed.whole, &ct.whole));
            match r {
                Ok(()) => {}
                Err(UnifyError::Occurs) => {
                    return Err(format!("unresolvable recursive type in context {} (arm `{shown}`)", def.name))
                }
                Err(UnifyError::Mismatch) => {
                    return Err(format!(
                        "arms of context {} disagree: `{shown}` has type {arm_ty} but the previous arms have type {before}",
                        def.name
                    ))
                }
            }
        }
        Ok(self.resolve_ctx(&assumed))
    }

    fn check_dynamic_def(&mut self, def: &DynamicDef) -> TResult<()> {
        let ty = self.dynamics[&def.name].clone();
        self.infer_pattern(&def.pattern, &ty, &mut Scope::new(), &mut None)
            .map_err(|e| format!("in dynamic {}: {e}", def.name))
    }

    fn check_aux(&mut self, f: &AuxFun) -> TResult<()> {
        let sig = self.aux[&f.name].clone();
        let mut scope: Scope =
            f.params.iter().zip(&sig.params).map(|(x, t)| (x.clone(), Binding::Obj(t.clone()))).collect();
        let body = self.infer_meta(&mut scope, &f.body).map_err(|e| format!("in function {}: {e}", f.name))?;
        self.unify(&sig.result, &body).map_err(|e| format!("in function {}: {e}", f.name))
    }

    /// Infers the type of a meta-expression.
    pub fn infer_meta(&mut self, scope: &mut Scope, e: &MetaExpr) -> TResult<ObjType> {
        match e {
            MetaExpr::Var(x) => match lookup(scope, x) {
                Some(Binding::Obj(t)) => Ok(t.clone()),
                Some(Binding::Ctx(_)) => Err(format!("context variable `{x}` can only be filled, as in `{x} t`")),
                None => Err(format!("unbound variable `{x}`")),
            },
            MetaExpr::Str(_) => Ok(ObjType::Str),
            MetaExpr::Int(_) => Ok(ObjType::Int),
            MetaExpr::Bool(_) => Ok(ObjType::Bool),
            MetaExpr::Constr(c, args) => {
                let (ty, params) = self.constructor(c)?;
                let n = params.len();
                if args.len() == n {
                    for (a, t) in args.iter().zip(&params) {
                        let found = self.infer_meta(scope, a)?;
                        self.unify(t, &found).map_err(|err| format!("argument `{}` of {c}: {err}", pretty_expr(a)))?;
                    }
                } else if args.len() == 1 && n > 1 {
                    let found = self.infer_meta(scope, &args[0])?;
                    self.unify(&ObjType::Tuple(params), &found)
                        .map_err(|err| format!("argument of {c}: {err}"))?;
                } else {
                    return Err(format!("constructor `{c}` expects {n} argument(s), found {}", args.len()));
                }
                Ok(ty)
            }
            MetaExpr::Tuple(items) => {
                let ts = items.iter().map(|a| self.infer_meta(scope, a)).collect::<TResult<Vec<_>>>()?;
                Ok(ObjType::Tuple(ts))
            }
            MetaExpr::Call(f, args) => {
                if is_builtin(f) {
                    if !args.is_empty() {
                        return Err(format!("builtin `{f}` takes no arguments"));
                    }
                    return Ok(ObjType::Str);
                }
                let Some(sig) = self.aux.get(f).cloned() else {
                    return Err(format!("unknown function `{f}`"));
                };
                let given = if args.len() == 1 && sig.params.len() > 1 {
                    let t = self.infer_meta(scope, &args[0])?;
                    self.unify(&ObjType::Tuple(sig.params.clone()), &t)
                        .map_err(|err| format!("arguments of {f}: {err}"))?;
                    return Ok(sig.result);
                } else {
                    args.len()
                };
                if given != sig.params.len() {
                    return Err(format!("function `{f}` expects {} argument(s), found {given}", sig.params.len()));
                }
                for (a, t) in args.iter().zip(&sig.params) {
                    let found = self.infer_meta(scope, a)?;
                    self.unify(t, &found).map_err(|err| format!("argument `{}` of {f}: {err}", pretty_expr(a)))?;
                }
                Ok(sig.result)
            }
            MetaExpr::Fill(h, a) => {
                let ct = match lookup(scope, h) {
                    Some(Binding::Ctx(ct)) => ct.clone(),
                    Some(Binding::Obj(_)) => return Err(format!("`{h}` is not a context variable and cannot be filled")),
                    None => return Err(format!("unknown function or context variable `{h}`")),
                };
                let found = self.infer_meta(scope, a)?;
                self.unify(&ct.hole, &found).map_err(|err| format!("filling `{h}`: {err}"))?;
                Ok(ct.whole)
            }
            MetaExpr::If(c, t, f) => {
                let ct = self.infer_meta(scope, c)?;
                self.unify(&ObjType::Bool, &ct).map_err(|err| format!("condition of `if`: {err}"))?;
                let tt = self.infer_meta(scope, t)?;
                let ft = self.infer_meta(scope, f)?;
                self.unify(&tt, &ft).map_err(|err| format!("branches of `if` differ: {err}"))?;
                Ok(tt)
            }
            MetaExpr::Let(p, bound, body) => {
                let bt = self.infer_meta(scope, bound)?;
                let base = scope.len();
                self.infer_pattern(p, &bt, scope, &mut None)?;
                let r = self.infer_meta(scope, body);
                scope.truncate(base);
                r
            }
            MetaExpr::Match(s, clauses) => {
                let st = self.infer_meta(scope, s)?;
                let result = self.fresh();
                for (p, body) in clauses {
                    let base = scope.len();
                    self.infer_pattern(p, &st, scope, &mut None)?;
                    let bt = self.infer_meta(scope, body);
                    scope.truncate(base);
                    let bt = bt?;
                    self.unify(&result, &bt).map_err(|err| format!("clause `{}`: {err}", pretty_pattern(p)))?;
                }
                Ok(result)
            }
            MetaExpr::BinOp(op, a, b) => {
                let at = self.infer_meta(scope, a)?;
                let bt = self.infer_meta(scope, b)?;
                let sym = op.symbol();
                if op.is_comparison() {
                    self.unify(&at, &bt).map_err(|err| format!("operands of `{sym}`: {err}"))?;
                    match self.resolve(&at) {
                        ObjType::Int | ObjType::Str | ObjType::Unknown(_) => Ok(ObjType::Bool),
                        other => Err(format!("`{sym}` compares int or string values, found {other}")),
                    }
                } else {
                    self.unify(&ObjType::Int, &at).map_err(|err| format!("left operand of `{sym}`: {err}"))?;
                    self.unify(&ObjType::Int, &bt).map_err(|err| format!("right operand of `{sym}`: {err}"))?;
                    Ok(ObjType::Int)
                }
            }
        }
    }

    /// Checks a rule, returning its subject type and, for inference rules,
    /// the premise type.
    pub fn check_rule(&mut self, rule: &Rule) -> TResult<(ObjType, Option<ObjType>)> {
        let subject = self.fresh();
        let mut scope = Scope::new();
        let in_rule = |e: String| format!("rule {}: {e}", rule.name());
        match rule {
            Rule::Axiom { lhs, cond, rhs, .. } => {
                self.infer_pattern(lhs, &subject, &mut scope, &mut None).map_err(in_rule)?;
                if let Some(c) = cond {
                    self.check_condition(&mut scope, c).map_err(in_rule)?;
                }
                let rt = self.infer_meta(&mut scope, rhs).map_err(in_rule)?;
                self.sides(&subject, &rt).map_err(in_rule)?;
                Ok((subject, None))
            }
            Rule::Inference { premise_lhs, premise_rhs, conclusion_lhs, cond, conclusion_rhs, .. } => {
                self.infer_pattern(conclusion_lhs, &subject, &mut scope, &mut None).map_err(in_rule)?;
                if let Some(c) = cond {
                    self.check_condition(&mut scope, c).map_err(in_rule)?;
                }
                let pt = self.infer_meta(&mut scope, premise_lhs).map_err(in_rule)?;
                self.infer_pattern(premise_rhs, &pt, &mut scope, &mut None).map_err(in_rule)?;
                let rt = self.infer_meta(&mut scope, conclusion_rhs).map_err(in_rule)?;
                self.sides(&subject, &rt).map_err(in_rule)?;
                Ok((subject, Some(pt)))
            }
        }
    }

    fn check_condition(&mut self, scope: &mut Scope, c: &MetaExpr) -> TResult<()> {
        let t = self.infer_meta(scope, c)?;
        self.unify(&ObjType::Bool, &t).map_err(|e| format!("condition `{}` is not boolean: {e}", pretty_expr(c)))
    }

    fn sides(&mut self, lhs: &ObjType, rhs: &ObjType) -> TResult<()> {
        let (l, r) = (self.resolve(lhs), self.resolve(rhs));
        self.unify_raw(lhs, rhs).map_err(|_| format!("sides differ: {l} vs {r}"))
    }

    /// Binds every remaining unknown to `default`.
    fn default_unknowns(&mut self, default: &ObjType) {
        for i in 0..self.subst.len() {
            if self.subst[i].is_none() {
                self.subst[i] = Some(default.clone());
            }
        }
    }
}

fn check_signature(sig: &Signature, errors: &mut Vec<Diagnostic>) {
    if sig.typedef(&sig.start_type).is_none() {
        let span = sig.typedefs.first().map(|t| t.span).unwrap_or_default();
        errors.push(Diagnostic::error(span, format!("start type `{}` is not declared", sig.start_type)));
    }
    for td in &sig.typedefs {
        for c in &td.constructors {
            for a in &c.args {
                if let TypeRef::Named(n) = a {
                    if sig.typedef(n).is_none() {
                        errors.push(Diagnostic::error(
                            td.span,
                            format!("constructor `{}` refers to undeclared type `{n}`", c.name),
                        ));
                    }
                }
            }
        }
    }
}

/// Type checks a parsed specification, reporting every failing item.
pub fn check_spec(spec: &Spec) -> Result<CheckedSpec, Vec<Diagnostic>> {
    let mut errors = Vec::new();
    check_signature(&spec.signature, &mut errors);
    if !errors.is_empty() {
        return Err(errors);
    }
    let mut c = Checker::new(spec);
    let report = |span: Span, r: TResult<()>, errors: &mut Vec<Diagnostic>| {
        if let Err(msg) = r {
            errors.push(Diagnostic::error(span, msg));
        }
    };
    for d in &spec.dynamics {
        let r = c.check_dynamic_def(d);
        report(d.span, r, &mut errors);
    }
    for d in &spec.contexts {
        let r = c.check_context_def(d).map(|_| ());
        report(d.span, r, &mut errors);
    }
    for f in &spec.aux {
        let r = c.check_aux(f);
        report(f.span, r, &mut errors);
    }
    let mut rule_types = Vec::new();
    let mut premise_types = Vec::new();
    for r in &spec.rules {
        match c.check_rule(r) {
            Ok((s, p)) => {
                rule_types.push(s);
                premise_types.push(p);
            }
            Err(msg) => errors.push(Diagnostic::error(r.span(), msg)),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    c.default_unknowns(&ObjType::Named(spec.signature.start_type.clone()));
    let checked = CheckedSpec {
        spec: spec.clone(),
        dynamic_types: c.dynamics.iter().map(|(n, t)| (n.clone(), c.resolve(t))).collect(),
        context_types: c.contexts.iter().map(|(n, t)| (n.clone(), c.resolve_ctx(t))).collect(),
        aux_types: c
            .aux
            .iter()
            .map(|(n, t)| {
                let params = t.params.iter().map(|p| c.resolve(p)).collect();
                (n.clone(), AuxType { params, result: c.resolve(&t.result) })
            })
            .collect(),
        rule_types: rule_types.iter().map(|t| c.resolve(t)).collect(),
        premise_types: premise_types.iter().map(|t| t.as_ref().map(|t| c.resolve(t))).collect(),
    };
    debug_assert!(checked.rule_types.iter().all(|t| !t.has_unknown()));
    Ok(checked)
}
