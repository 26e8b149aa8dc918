//! Evaluation of meta-expressions and auxiliary functions.

use crate::ast::*;
use crate::term::{PlugError, Term, Value};

/// Run-scoped supply of fresh names `_g0`, `_g1`, ...
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreshNames {
    next: u64,
}

impl FreshNames {
    pub fn new() -> FreshNames {
        FreshNames::default()
    }

    pub fn fresh(&mut self) -> String {
        self.next += 1;
        format!("_g{}", self.next - 1)
    }

    pub fn counter(&self) -> u64 {
        self.next
    }

    pub fn reset_to(&mut self, counter: u64) {
        self.next = counter;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuntimeError {
    #[error("no clause of the match in {function} applies to {value}")]
    NoMatchingClause { function: String, value: String },
    #[error("recursion depth limit {limit} exceeded in {function}")]
    DepthExceeded { function: String, limit: usize },
    #[error("unbound name `{0}` at run time")]
    Unbound(String),
    #[error("ill-typed value at run time: {0}")]
    Type(String),
    #[error("integer overflow in `{0}`")]
    Overflow(&'static str),
    #[error(transparent)]
    Plug(#[from] PlugError),
}

pub type Bindings = Vec<(Name, Value)>;

pub const DEFAULT_MAX_DEPTH: usize = 100_000;

/// Evaluator for the meta-language of one specification.
#[derive(Clone, Copy)]
pub struct MetaEval<'s> {
    spec: &'s Spec,
    pub max_depth: usize,
}

fn lookup<'a>(scope: &'a Bindings, x: &str) -> Result<&'a Value, RuntimeError> {
    scope.iter().rev().find(|(n, _)| n == x).map(|(_, v)| v).ok_or_else(|| RuntimeError::Unbound(x.to_string()))
}

fn term_of(v: Value, what: &str) -> Result<Term, RuntimeError> {
    match v {
        Value::Term(t) => Ok(t),
        other => Err(RuntimeError::Type(format!("{what} expects a term, found {other}"))),
    }
}

/// Matches a restricted pattern against a value, pushing bindings.
pub fn match_value(p: &Pattern, v: &Value, out: &mut Bindings) -> bool {
    match (p, v) {
        (Pattern::Wildcard, _) => true,
        (Pattern::Var(x), _) => {
            out.push((x.clone(), v.clone()));
            true
        }
        (Pattern::Nullary(c), Value::Term(Term::Constr(d, args))) => c == d && args.is_empty(),
        (Pattern::Applied(c, q), Value::Term(Term::Constr(d, args))) => {
            c == d && !args.is_empty() && match_value(q, &Value::constructor_argument(args), out)
        }
        (Pattern::Tuple(ps), Value::Tuple(vs)) => {
            ps.len() == vs.len() && ps.iter().zip(vs).all(|(p, v)| match_value(p, v, out))
        }
        (Pattern::Alt(a, b), _) => {
            let base = out.len();
            if match_value(a, v, out) {
                return true;
            }
            out.truncate(base);
            match_value(b, v, out)
        }
        (Pattern::Alias(q, x), _) => {
            if match_value(q, v, out) {
                out.push((x.clone(), v.clone()));
                true
            } else {
                false
            }
        }
        (Pattern::TypeConstraint(q, _), _) => match_value(q, v, out),
        _ => false,
    }
}

impl<'s> MetaEval<'s> {
    pub fn new(spec: &'s Spec) -> MetaEval<'s> {
        MetaEval { spec, max_depth: DEFAULT_MAX_DEPTH }
    }

    pub fn spec(&self) -> &'s Spec {
        self.spec
    }

    /// Evaluates `e` strictly, left to right.
    pub fn eval(&self, fresh: &mut FreshNames, scope: &mut Bindings, e: &MetaExpr) -> Result<Value, RuntimeError> {
        self.eval_in(fresh, scope, e, 0, "a rule")
    }

    fn eval_in(
        &self,
        fresh: &mut FreshNames,
        scope: &mut Bindings,
        e: &MetaExpr,
        depth: usize,
        function: &str,
    ) -> Result<Value, RuntimeError> {
        match e {
            MetaExpr::Var(x) => lookup(scope, x).cloned(),
            MetaExpr::Str(s) => Ok(Value::Term(Term::Str(s.clone()))),
            MetaExpr::Int(n) => Ok(Value::Term(Term::Int(*n))),
            MetaExpr::Bool(b) => Ok(Value::Bool(*b)),
            MetaExpr::Constr(c, args) => {
                let arity = self.spec.signature.constructor(c).map(|(_, d)| d.args.len()).unwrap_or(args.len());
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_in(fresh, scope, a, depth, function)?);
                }
                let terms = if vals.len() == 1 && arity > 1 {
                    match vals.pop() {
                        Some(Value::Tuple(vs)) => {
                            vs.into_iter().map(|v| term_of(v, c)).collect::<Result<Vec<_>, _>>()?
                        }
                        _ => return Err(RuntimeError::Type(format!("{c} expects a tuple argument"))),
                    }
                } else {
                    vals.into_iter().map(|v| term_of(v, c)).collect::<Result<Vec<_>, _>>()?
                };
                Ok(Value::Term(Term::Constr(c.clone(), terms)))
            }
            MetaExpr::Tuple(items) => {
                let mut vals = Vec::with_capacity(items.len());
                for a in items {
                    vals.push(self.eval_in(fresh, scope, a, depth, function)?);
                }
                Ok(Value::Tuple(vals))
            }
            MetaExpr::Call(f, args) => {
                if f == "freshname" {
                    return Ok(Value::Term(Term::Str(fresh.fresh())));
                }
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_in(fresh, scope, a, depth, function)?);
                }
                self.call_aux(fresh, f, vals, depth + 1)
            }
            MetaExpr::Fill(h, a) => {
                let ctx = match lookup(scope, h)? {
                    Value::Context(c) => c.clone(),
                    other => return Err(RuntimeError::Type(format!("`{h}` is bound to {other}, not a context"))),
                };
                let v = self.eval_in(fresh, scope, a, depth, function)?;
                Ok(ctx.plug(v)?)
            }
            MetaExpr::If(c, t, f) => match self.eval_in(fresh, scope, c, depth, function)? {
                Value::Bool(true) => self.eval_in(fresh, scope, t, depth, function),
                Value::Bool(false) => self.eval_in(fresh, scope, f, depth, function),
                other => Err(RuntimeError::Type(format!("`if` condition evaluated to {other}"))),
            },
            MetaExpr::Let(p, bound, body) => {
                let v = self.eval_in(fresh, scope, bound, depth, function)?;
                let base = scope.len();
                if !match_value(p, &v, scope) {
                    scope.truncate(base);
                    return Err(RuntimeError::NoMatchingClause { function: function.to_string(), value: v.to_string() });
                }
                let r = self.eval_in(fresh, scope, body, depth, function);
                scope.truncate(base);
                r
            }
            MetaExpr::Match(s, clauses) => {
                let v = self.eval_in(fresh, scope, s, depth, function)?;
                for (p, body) in clauses {
                    let base = scope.len();
                    if match_value(p, &v, scope) {
                        let r = self.eval_in(fresh, scope, body, depth, function);
                        scope.truncate(base);
                        return r;
                    }
                    scope.truncate(base);
                }
                Err(RuntimeError::NoMatchingClause { function: function.to_string(), value: v.to_string() })
            }
            MetaExpr::BinOp(op, a, b) => {
                let x = self.eval_in(fresh, scope, a, depth, function)?;
                let y = self.eval_in(fresh, scope, b, depth, function)?;
                binop(*op, x, y)
            }
        }
    }

    /// Calls an auxiliary function. A single tuple argument is spread over
    /// the parameters of a multi-parameter function.
    pub fn call_aux(
        &self,
        fresh: &mut FreshNames,
        name: &str,
        mut args: Vec<Value>,
        depth: usize,
    ) -> Result<Value, RuntimeError> {
        let f = self.spec.aux_fun(name).ok_or_else(|| RuntimeError::Unbound(name.to_string()))?;
        if depth > self.max_depth {
            return Err(RuntimeError::DepthExceeded { function: name.to_string(), limit: self.max_depth });
        }
        if args.len() == 1 && f.params.len() > 1 {
            if let Some(Value::Tuple(vs)) = args.pop() {
                args = vs;
            }
        }
        if args.len() != f.params.len() {
            return Err(RuntimeError::Type(format!(
                "{name} expects {} arguments, got {}",
                f.params.len(),
                args.len()
            )));
        }
        let mut scope: Bindings = f.params.iter().cloned().zip(args).collect();
        self.eval_in(fresh, &mut scope, &f.body, depth, &format!("function {name}"))
    }
}

fn binop(op: BinOp, x: Value, y: Value) -> Result<Value, RuntimeError> {
    use std::cmp::Ordering;
    let cmp = |x: &Value, y: &Value| -> Result<Ordering, RuntimeError> {
        match (x, y) {
            (Value::Term(Term::Int(a)), Value::Term(Term::Int(b))) => Ok(a.cmp(b)),
            (Value::Term(Term::Str(a)), Value::Term(Term::Str(b))) => Ok(a.cmp(b)),
            _ => Err(RuntimeError::Type(format!("cannot compare {x} with {y}"))),
        }
    };
    let ints = |x: &Value, y: &Value| -> Result<(i64, i64), RuntimeError> {
        match (x, y) {
            (Value::Term(Term::Int(a)), Value::Term(Term::Int(b))) => Ok((*a, *b)),
            _ => Err(RuntimeError::Type(format!("arithmetic on {x} and {y}"))),
        }
    };
    let b = |v: bool| Ok(Value::Bool(v));
    match op {
        BinOp::Eq => b(x == y),
        BinOp::Ne => b(x != y),
        BinOp::Lt => b(cmp(&x, &y)? == Ordering::Less),
        BinOp::Le => b(cmp(&x, &y)? != Ordering::Greater),
        BinOp::Gt => b(cmp(&x, &y)? == Ordering::Greater),
        BinOp::Ge => b(cmp(&x, &y)? != Ordering::Less),
        BinOp::Add | BinOp::Sub | BinOp::Mul => {
            let (a, c) = ints(&x, &y)?;
            let r = match op {
                BinOp::Add => a.checked_add(c),
                BinOp::Sub => a.checked_sub(c),
                _ => a.checked_mul(c),
            };
            r.map(|n| Value::Term(Term::Int(n))).ok_or(RuntimeError::Overflow(op.symbol()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Context;

    fn cbv() -> Spec {
        crate::syntax::parse_spec(crate::corpus::CBV_SPEC).unwrap().spec
    }

    fn var(s: &str) -> Term {
        Term::constr("Var", vec![Term::str(s)])
    }

    fn lam(s: &str, b: Term) -> Term {
        Term::constr("Lam", vec![Term::str(s), b])
    }

    fn subst(spec: &Spec, fresh: &mut FreshNames, t: Term, x: &str, v: Term) -> Term {
        let args = vec![Value::Term(t), Value::Term(Term::str(x)), Value::Term(v)];
        MetaEval::new(spec).call_aux(fresh, "subst", args, 0).unwrap().into_term().unwrap()
    }

    #[test]
    fn subst_variable_case() {
        let spec = cbv();
        let mut fresh = FreshNames::new();
        let id_z = lam("z", var("z"));
        assert_eq!(subst(&spec, &mut fresh, var("x"), "x", id_z.clone()), id_z);
        assert_eq!(fresh.counter(), 0);
    }

    #[test]
    fn subst_renames_binder() {
        let spec = cbv();
        let mut fresh = FreshNames::new();
        let r = subst(&spec, &mut fresh, lam("y", var("x")), "x", var("y"));
        assert_eq!(r, lam("_g0", var("y")));
    }

    #[test]
    fn subst_application() {
        let spec = cbv();
        let mut fresh = FreshNames::new();
        let app = Term::constr("App", vec![var("x"), var("w")]);
        let r = subst(&spec, &mut fresh, app, "x", var("q"));
        assert_eq!(r, Term::constr("App", vec![var("q"), var("w")]));
    }

    #[test]
    fn fill_with_identity_context() {
        let spec = cbv();
        let ev = MetaEval::new(&spec);
        let mut scope: Bindings = vec![
            ("h".into(), Value::Context(Context::hole())),
            ("t2".into(), Value::Term(lam("z", var("z")))),
        ];
        let e = crate::syntax::parse_expr("h(t2)").unwrap();
        let e = match e {
            MetaExpr::Call(h, mut args) => MetaExpr::Fill(h, Box::new(args.remove(0))),
            other => other,
        };
        let v = ev.eval(&mut FreshNames::new(), &mut scope, &e).unwrap();
        assert_eq!(v, Value::Term(lam("z", var("z"))));
    }

    #[test]
    fn clause_exhaustion_is_reported() {
        let spec = crate::syntax::parse_spec(
            "SIGNATURE: type M = A | B;; startfrom M;; SPECIFICATION: let f x = match x with A -> B;;",
        )
        .unwrap()
        .spec;
        let err = MetaEval::new(&spec)
            .call_aux(&mut FreshNames::new(), "f", vec![Value::Term(Term::nullary("B"))], 0)
            .unwrap_err();
        assert_eq!(err.to_string(), "no clause of the match in function f applies to B");
    }

    #[test]
    fn depth_limit() {
        let spec = crate::syntax::parse_spec(
            "SIGNATURE: type M = A;; startfrom M;; SPECIFICATION: let rec f x = f(x);;",
        )
        .unwrap()
        .spec;
        let mut ev = MetaEval::new(&spec);
        ev.max_depth = 50;
        let err = ev.call_aux(&mut FreshNames::new(), "f", vec![Value::Term(Term::nullary("A"))], 0).unwrap_err();
        assert!(matches!(err, RuntimeError::DepthExceeded { limit: 50, .. }));
    }

    #[test]
    fn arithmetic_and_comparison() {
        let spec = crate::syntax::parse_spec("SIGNATURE: type M = A;; startfrom M;; SPECIFICATION:").unwrap().spec;
        let ev = MetaEval::new(&spec);
        let mut scope = Bindings::new();
        let mut run = |s: &str| ev.eval(&mut FreshNames::new(), &mut scope, &crate::syntax::parse_expr(s).unwrap()).unwrap();
        assert_eq!(run("2 + 3 * 4"), Value::Term(Term::Int(14)));
        assert_eq!(run("10 - 3 - 2"), Value::Term(Term::Int(5)));
        assert_eq!(run("\"a\" < \"b\""), Value::Bool(true));
        assert_eq!(run("if 2 <= 1 then 0 else 7"), Value::Term(Term::Int(7)));
        assert_eq!(run("let (a, b) = (1, 2) in b"), Value::Term(Term::Int(2)));
    }

    #[test]
    fn fresh_names_are_sequential() {
        let mut f = FreshNames::new();
        assert_eq!(f.fresh(), "_g0");
        assert_eq!(f.fresh(), "_g1");
        f.reset_to(0);
        assert_eq!(f.fresh(), "_g0");
    }
}
