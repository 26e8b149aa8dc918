//! Abstract syntax of `.sl` specifications.
//!
//! A specification has two parts: a signature describing the abstract syntax
//! of the object language, and a semantic part made of auxiliary
//! meta-functions, dynamic definitions, context definitions, axioms and
//! inference rules.

use std::collections::BTreeSet;

use crate::diag::Span;

pub type Name = String;

/// Argument type of a constructor. Only first-order atoms are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeRef {
    Named(Name),
    String,
    Int,
}

impl TypeRef {
    pub fn from_name(name: &str) -> TypeRef {
        match name {
            "string" => TypeRef::String,
            "int" => TypeRef::Int,
            other => TypeRef::Named(other.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            TypeRef::Named(n) => n,
            TypeRef::String => "string",
            TypeRef::Int => "int",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructorDef {
    pub name: Name,
    pub args: Vec<TypeRef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDef {
    pub name: Name,
    pub constructors: Vec<ConstructorDef>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub typedefs: Vec<TypeDef>,
    pub start_type: Name,
}

impl Signature {
    pub fn constructor(&self, name: &str) -> Option<(&TypeDef, &ConstructorDef)> {
        self.typedefs
            .iter()
            .find_map(|td| td.constructors.iter().find(|c| c.name == name).map(|c| (td, c)))
    }

    pub fn typedef(&self, name: &str) -> Option<&TypeDef> {
        self.typedefs.iter().find(|td| td.name == name)
    }
}

/// SL patterns, including dynamic constraints `(p : D)` and context
/// fillings `(p : N) q`. `Hole` (surface keyword `BOX`) is legal only inside
/// context definition arms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Wildcard,
    Var(Name),
    Nullary(Name),
    Applied(Name, Box<Pattern>),
    Tuple(Vec<Pattern>),
    Alt(Box<Pattern>, Box<Pattern>),
    Alias(Box<Pattern>, Name),
    TypeConstraint(Box<Pattern>, Name),
    DynConstraint(Box<Pattern>, Name),
    ContextFilling(Box<Pattern>, Name, Box<Pattern>),
    Hole,
}

impl Pattern {
    /// Variables bound by the pattern, in left-to-right order (with repeats).
    pub fn bound_vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Pattern::Wildcard | Pattern::Nullary(_) | Pattern::Hole => {}
            Pattern::Var(x) => out.push(x),
            Pattern::Applied(_, p) | Pattern::TypeConstraint(p, _) | Pattern::DynConstraint(p, _) => {
                p.collect_vars(out)
            }
            Pattern::Tuple(ps) => ps.iter().for_each(|p| p.collect_vars(out)),
            // both branches bind the same names; report them once
            Pattern::Alt(a, _) => a.collect_vars(out),
            Pattern::Alias(p, x) => {
                p.collect_vars(out);
                out.push(x);
            }
            Pattern::ContextFilling(p, _, q) => {
                p.collect_vars(out);
                q.collect_vars(out);
            }
        }
    }

    pub fn var_set(&self) -> BTreeSet<&str> {
        self.bound_vars().into_iter().collect()
    }

    /// Number of syntactic hole occurrences.
    pub fn hole_count(&self) -> usize {
        match self {
            Pattern::Hole => 1,
            Pattern::Wildcard | Pattern::Var(_) | Pattern::Nullary(_) => 0,
            Pattern::Applied(_, p)
            | Pattern::TypeConstraint(p, _)
            | Pattern::DynConstraint(p, _)
            | Pattern::Alias(p, _) => p.hole_count(),
            Pattern::Tuple(ps) => ps.iter().map(Pattern::hole_count).sum(),
            Pattern::Alt(a, b) => a.hole_count() + b.hole_count(),
            Pattern::ContextFilling(p, _, q) => p.hole_count() + q.hole_count(),
        }
    }

    /// True when the pattern uses neither dynamic constraints, context
    /// fillings nor holes.
    pub fn is_restricted(&self) -> bool {
        match self {
            Pattern::Wildcard | Pattern::Var(_) | Pattern::Nullary(_) => true,
            Pattern::Hole | Pattern::DynConstraint(..) | Pattern::ContextFilling(..) => false,
            Pattern::Applied(_, p) | Pattern::TypeConstraint(p, _) | Pattern::Alias(p, _) => {
                p.is_restricted()
            }
            Pattern::Tuple(ps) => ps.iter().all(Pattern::is_restricted),
            Pattern::Alt(a, b) => a.is_restricted() && b.is_restricted(),
        }
    }

    pub fn is_var_or_wildcard(&self) -> bool {
        matches!(self, Pattern::Wildcard | Pattern::Var(_))
    }

    /// Number of constructor nodes plus one per other pattern node.
    pub fn size(&self) -> usize {
        match self {
            Pattern::Wildcard | Pattern::Var(_) | Pattern::Nullary(_) | Pattern::Hole => 1,
            Pattern::Applied(_, p)
            | Pattern::TypeConstraint(p, _)
            | Pattern::DynConstraint(p, _)
            | Pattern::Alias(p, _) => 1 + p.size(),
            Pattern::Tuple(ps) => 1 + ps.iter().map(Pattern::size).sum::<usize>(),
            Pattern::Alt(a, b) => 1 + a.size() + b.size(),
            Pattern::ContextFilling(p, _, q) => 1 + p.size() + q.size(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    pub fn is_comparison(self) -> bool {
        !matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul)
    }
}

/// The first-order meta-language used for conditions, right-hand sides and
/// auxiliary functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MetaExpr {
    Var(Name),
    Str(String),
    Int(i64),
    Bool(bool),
    Constr(Name, Vec<MetaExpr>),
    Tuple(Vec<MetaExpr>),
    Call(Name, Vec<MetaExpr>),
    /// `h e`: plug `e` into the hole of the context bound to `h`.
    Fill(Name, Box<MetaExpr>),
    If(Box<MetaExpr>, Box<MetaExpr>, Box<MetaExpr>),
    /// `let p = e1 in e2`; `p` is a variable, wildcard or tuple of those.
    Let(Pattern, Box<MetaExpr>, Box<MetaExpr>),
    Match(Box<MetaExpr>, Vec<(Pattern, MetaExpr)>),
    BinOp(BinOp, Box<MetaExpr>, Box<MetaExpr>),
}

/// `let [rec] name (p1, ..., pn) = body`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxFun {
    pub name: Name,
    pub params: Vec<Name>,
    pub body: MetaExpr,
    pub recursive: bool,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicDef {
    pub name: Name,
    pub pattern: Pattern,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextDef {
    pub name: Name,
    pub arms: Vec<Pattern>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// `axiom name: lhs [when cond] ==> rhs`
    Axiom { name: Name, lhs: Pattern, cond: Option<MetaExpr>, rhs: MetaExpr, span: Span },
    /// ```text
    /// inference name: premise_lhs ==> premise_rhs
    /// ---------
    /// conclusion_lhs [when cond] |==> conclusion_rhs
    /// ```
    Inference {
        name: Name,
        premise_lhs: MetaExpr,
        premise_rhs: Pattern,
        conclusion_lhs: Pattern,
        cond: Option<MetaExpr>,
        conclusion_rhs: MetaExpr,
        span: Span,
    },
}

impl Rule {
    pub fn name(&self) -> &str {
        match self {
            Rule::Axiom { name, .. } | Rule::Inference { name, .. } => name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Rule::Axiom { span, .. } | Rule::Inference { span, .. } => *span,
        }
    }

    pub fn is_axiom(&self) -> bool {
        matches!(self, Rule::Axiom { .. })
    }

    /// The pattern matched against the subject term.
    pub fn lhs(&self) -> &Pattern {
        match self {
            Rule::Axiom { lhs, .. } => lhs,
            Rule::Inference { conclusion_lhs, .. } => conclusion_lhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spec {
    pub signature: Signature,
    pub aux: Vec<AuxFun>,
    pub dynamics: Vec<DynamicDef>,
    pub contexts: Vec<ContextDef>,
    pub rules: Vec<Rule>,
}

impl Spec {
    pub fn aux_fun(&self, name: &str) -> Option<&AuxFun> {
        self.aux.iter().find(|f| f.name == name)
    }

    pub fn dynamic(&self, name: &str) -> Option<&DynamicDef> {
        self.dynamics.iter().find(|d| d.name == name)
    }

    pub fn context(&self, name: &str) -> Option<&ContextDef> {
        self.contexts.iter().find(|c| c.name == name)
    }

    pub fn axioms(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| r.is_axiom())
    }

    pub fn inferences(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| !r.is_axiom())
    }
}

/// Builtin meta-functions.
pub const BUILTINS: &[(&str, usize)] = &[("freshname", 0)];

pub fn is_builtin(name: &str) -> bool {
    BUILTINS.iter().any(|(n, _)| *n == name)
}

/// Strings of the form `_g<digits>` are reserved for `freshname`.
pub fn is_reserved_fresh_name(s: &str) -> bool {
    s.strip_prefix("_g").is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}
