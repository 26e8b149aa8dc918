//! Recursive-descent parser for `.sl` files.
//!
//! Parsing happens in three passes: tokens to a raw AST, name resolution
//! (bare dynamic/context names in patterns, calls vs. context fillings in
//! meta-expressions), and structural validation.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::lexer::{lex, Kw, Tok, Token};
use crate::ast::*;
use crate::diag::{Diagnostic, Span};

#[derive(Debug, Clone)]
pub struct Parsed {
    pub spec: Spec,
    pub warnings: Vec<Diagnostic>,
}

/// Parses a specification. Performs no type checking.
pub fn parse_spec(source: &str) -> Result<Parsed, Vec<Diagnostic>> {
    let tokens = lex(source).map_err(|d| vec![d])?;
    let mut p = Parser { toks: tokens, pos: 0, warnings: Vec::new() };
    let spec = p.spec().map_err(|d| vec![d])?;
    let spec = resolve(spec)?;
    let errors = validate(&spec);
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(Parsed { spec, warnings: p.warnings })
}

type PResult<T> = Result<T, Diagnostic>;

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
    warnings: Vec<Diagnostic>,
}

impl Parser {
    pub(crate) fn new(source: &str) -> PResult<Parser> {
        Ok(Parser { toks: lex(source)?, pos: 0, warnings: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub(crate) fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, expected: &[&str]) -> PResult<T> {
        let list = expected.join(", ");
        Err(Diagnostic::error(
            self.span(),
            format!("syntax error: unexpected {}, expected one of: {}", self.peek(), list),
        ))
    }

    pub(crate) fn expect(&mut self, t: &Tok, what: &str) -> PResult<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.unexpected(&[what])
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(&["identifier"]),
        }
    }

    fn uident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::UIdent(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(&["capitalized name"]),
        }
    }

    fn any_ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::UIdent(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected(&["name"]),
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        self.at(&Tok::Eof)
    }

    // ---- top level ----

    fn spec(&mut self) -> PResult<Spec> {
        self.expect(&Tok::Kw(Kw::Signature), "`SIGNATURE`")?;
        self.expect(&Tok::Colon, "`:`")?;
        let mut typedefs = Vec::new();
        let mut start: Option<String> = None;
        loop {
            match self.peek() {
                Tok::Kw(Kw::Type) => {
                    self.bump();
                    loop {
                        typedefs.push(self.typedef()?);
                        if !self.eat(&Tok::Kw(Kw::And)) {
                            break;
                        }
                    }
                    self.expect(&Tok::SemiSemi, "`;;`")?;
                }
                Tok::Kw(Kw::Startfrom) => {
                    let span = self.span();
                    self.bump();
                    let name = self.any_ident()?;
                    self.expect(&Tok::SemiSemi, "`;;`")?;
                    if start.is_some() {
                        return Err(Diagnostic::error(span, "duplicate `startfrom` declaration"));
                    }
                    start = Some(name);
                }
                Tok::Kw(Kw::Specification) => break,
                _ => return self.unexpected(&["`type`", "`startfrom`", "`SPECIFICATION`"]),
            }
        }
        let spec_span = self.span();
        self.bump();
        self.expect(&Tok::Colon, "`:`")?;
        let start_type = start
            .ok_or_else(|| Diagnostic::error(spec_span, "missing `startfrom` declaration in SIGNATURE"))?;
        let mut spec = Spec {
            signature: Signature { typedefs, start_type },
            aux: Vec::new(),
            dynamics: Vec::new(),
            contexts: Vec::new(),
            rules: Vec::new(),
        };
        while !self.at_eof() {
            self.item(&mut spec)?;
        }
        Ok(spec)
    }

    fn typedef(&mut self) -> PResult<TypeDef> {
        let span = self.span();
        if let Tok::TyVar(_) = self.peek() {
            return Err(Diagnostic::error(
                span,
                "polymorphic type definitions are not supported; type parameters must be removed",
            ));
        }
        let name = self.any_ident()?;
        if matches!(name.as_str(), "string" | "int" | "bool") {
            return Err(Diagnostic::error(span, format!("cannot redefine builtin type `{name}`")));
        }
        if let Tok::TyVar(_) = self.peek() {
            return Err(Diagnostic::error(self.span(), "polymorphic type definitions are not supported"));
        }
        self.expect(&Tok::Eq, "`=`")?;
        self.eat(&Tok::Bar);
        let mut constructors = Vec::new();
        loop {
            let cname = self.uident()?;
            let mut args = Vec::new();
            if self.eat(&Tok::Kw(Kw::Of)) {
                loop {
                    args.push(self.type_arg()?);
                    if !self.eat(&Tok::Star) {
                        break;
                    }
                }
            }
            constructors.push(ConstructorDef { name: cname, args });
            if !self.eat(&Tok::Bar) {
                break;
            }
        }
        Ok(TypeDef { name, constructors, span })
    }

    fn type_arg(&mut self) -> PResult<TypeRef> {
        let span = self.span();
        match self.peek().clone() {
            Tok::TyVar(v) => Err(Diagnostic::error(
                span,
                format!("type variable '{v} not allowed: polymorphic type definitions are not supported"),
            )),
            Tok::LParen => Err(Diagnostic::error(
                span,
                "constructor arguments must be type names separated by `*`",
            )),
            Tok::Ident(_) | Tok::UIdent(_) => {
                let name = self.any_ident()?;
                if self.at(&Tok::Arrow) {
                    return Err(Diagnostic::error(self.span(), "function types are not allowed in signatures"));
                }
                Ok(TypeRef::from_name(&name))
            }
            _ => self.unexpected(&["type name"]),
        }
    }

    fn item(&mut self, spec: &mut Spec) -> PResult<()> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Hash => {
                self.bump();
                let directive = self.ident()?;
                if directive != "open" {
                    return Err(Diagnostic::error(span, format!("unknown directive `#{directive}`")));
                }
                let module = match self.bump() {
                    Tok::Str(s) => s,
                    Tok::Ident(s) | Tok::UIdent(s) => s,
                    _ => return Err(Diagnostic::error(span, "expected a module name after `#open`")),
                };
                self.expect(&Tok::SemiSemi, "`;;`")?;
                self.warnings.push(Diagnostic::warning(
                    span,
                    format!("`#open \"{module}\"` ignored: builtins such as `freshname` are always available"),
                ));
            }
            Tok::Kw(Kw::Let) => {
                self.bump();
                let recursive = self.eat(&Tok::Kw(Kw::Rec));
                let name = self.ident()?;
                let params = self.params()?;
                self.expect(&Tok::Eq, "`=`")?;
                let body = self.expr()?;
                self.expect(&Tok::SemiSemi, "`;;`")?;
                spec.aux.push(AuxFun { name, params, body, recursive, span });
            }
            Tok::Kw(Kw::Dynamic) => {
                self.bump();
                let name = self.uident()?;
                self.expect(&Tok::Eq, "`=`")?;
                let pattern = self.pattern()?;
                self.expect(&Tok::SemiSemi, "`;;`")?;
                spec.dynamics.push(DynamicDef { name, pattern, span });
            }
            Tok::Kw(Kw::Context) => {
                self.bump();
                let name = self.uident()?;
                self.expect(&Tok::Eq, "`=`")?;
                self.eat(&Tok::Bar);
                let body = self.pattern()?;
                self.expect(&Tok::SemiSemi, "`;;`")?;
                let mut arms = Vec::new();
                flatten_alts(body, &mut arms);
                spec.contexts.push(ContextDef { name, arms, span });
            }
            Tok::Kw(Kw::Axiom) => {
                self.bump();
                let name = self.any_ident()?;
                self.expect(&Tok::Colon, "`:`")?;
                let lhs = self.pattern()?;
                let cond = if self.eat(&Tok::Kw(Kw::When)) { Some(self.expr()?) } else { None };
                self.expect(&Tok::Rewrites, "`==>`")?;
                let rhs = self.expr()?;
                self.expect(&Tok::SemiSemi, "`;;`")?;
                spec.rules.push(Rule::Axiom { name, lhs, cond, rhs, span });
            }
            Tok::Kw(Kw::Inference) => {
                self.bump();
                let name = self.any_ident()?;
                self.expect(&Tok::Colon, "`:`")?;
                let premise_lhs = self.expr()?;
                self.expect(&Tok::Rewrites, "`==>`")?;
                let premise_rhs = self.pattern()?;
                self.expect(&Tok::Separator, "`---`")?;
                let conclusion_lhs = self.pattern()?;
                let cond = if self.eat(&Tok::Kw(Kw::When)) { Some(self.expr()?) } else { None };
                self.expect(&Tok::Steps, "`|==>`")?;
                let conclusion_rhs = self.expr()?;
                self.expect(&Tok::SemiSemi, "`;;`")?;
                spec.rules.push(Rule::Inference {
                    name,
                    premise_lhs,
                    premise_rhs,
                    conclusion_lhs,
                    cond,
                    conclusion_rhs,
                    span,
                });
            }
            _ => {
                return self.unexpected(&["`let`", "`dynamic`", "`context`", "`axiom`", "`inference`", "`#open`"])
            }
        }
        Ok(())
    }

    fn params(&mut self) -> PResult<Vec<String>> {
        match self.peek() {
            Tok::Ident(_) => Ok(vec![self.ident()?]),
            Tok::LParen => {
                self.bump();
                let mut ps = Vec::new();
                if self.eat(&Tok::RParen) {
                    return Ok(ps);
                }
                loop {
                    ps.push(self.ident()?);
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                    self.expect(&Tok::RParen, "`)`")?;
                    return Ok(ps);
                }
            }
            _ => self.unexpected(&["parameter name", "`(`"]),
        }
    }

    // ---- patterns ----

    pub(crate) fn pattern(&mut self) -> PResult<Pattern> {
        let mut p = self.alt_pattern()?;
        while self.eat(&Tok::Kw(Kw::As)) {
            let x = self.ident()?;
            p = Pattern::Alias(Box::new(p), x);
        }
        Ok(p)
    }

    fn alt_pattern(&mut self) -> PResult<Pattern> {
        let mut p = self.app_pattern()?;
        while self.eat(&Tok::Bar) {
            let q = self.app_pattern()?;
            p = Pattern::Alt(Box::new(p), Box::new(q));
        }
        Ok(p)
    }

    fn at_pattern_atom(&self) -> bool {
        matches!(self.peek(), Tok::Underscore | Tok::Ident(_) | Tok::UIdent(_) | Tok::Kw(Kw::Box) | Tok::LParen)
    }

    fn app_pattern(&mut self) -> PResult<Pattern> {
        if let Tok::UIdent(c) = self.peek().clone() {
            self.bump();
            if self.at_pattern_atom() {
                let arg = self.atom_pattern()?;
                return Ok(Pattern::Applied(c, Box::new(arg)));
            }
            return Ok(Pattern::Nullary(c));
        }
        let p = self.atom_pattern()?;
        if let Pattern::DynConstraint(inner, n) = p {
            if self.at_pattern_atom() {
                let filler = self.atom_pattern()?;
                return Ok(Pattern::ContextFilling(inner, n, Box::new(filler)));
            }
            return Ok(Pattern::DynConstraint(inner, n));
        }
        Ok(p)
    }

    fn atom_pattern(&mut self) -> PResult<Pattern> {
        match self.peek().clone() {
            Tok::Underscore => {
                self.bump();
                Ok(Pattern::Wildcard)
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(Pattern::Var(x))
            }
            Tok::UIdent(c) => {
                self.bump();
                Ok(Pattern::Nullary(c))
            }
            Tok::Kw(Kw::Box) => {
                self.bump();
                Ok(Pattern::Hole)
            }
            Tok::LParen => {
                self.bump();
                let first = self.pattern()?;
                if self.eat(&Tok::Colon) {
                    let p = if self.eat(&Tok::Kw(Kw::Type)) {
                        let ty = self.any_ident()?;
                        Pattern::TypeConstraint(Box::new(first), ty)
                    } else {
                        let n = self.uident()?;
                        Pattern::DynConstraint(Box::new(first), n)
                    };
                    self.expect(&Tok::RParen, "`)`")?;
                    return Ok(p);
                }
                if self.eat(&Tok::RParen) {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat(&Tok::Comma) {
                    items.push(self.pattern()?);
                }
                self.expect(&Tok::RParen, "`)`")?;
                Ok(Pattern::Tuple(items))
            }
            _ => self.unexpected(&["pattern"]),
        }
    }

    // ---- meta-expressions ----

    pub(crate) fn expr(&mut self) -> PResult<MetaExpr> {
        match self.peek() {
            Tok::Kw(Kw::Let) => {
                self.bump();
                let p = self.pattern()?;
                self.expect(&Tok::Eq, "`=`")?;
                let bound = self.expr()?;
                self.expect(&Tok::Kw(Kw::In), "`in`")?;
                let body = self.expr()?;
                Ok(MetaExpr::Let(p, Box::new(bound), Box::new(body)))
            }
            Tok::Kw(Kw::If) => {
                self.bump();
                let c = self.expr()?;
                self.expect(&Tok::Kw(Kw::Then), "`then`")?;
                let t = self.expr()?;
                self.expect(&Tok::Kw(Kw::Else), "`else`")?;
                let e = self.expr()?;
                Ok(MetaExpr::If(Box::new(c), Box::new(t), Box::new(e)))
            }
            Tok::Kw(Kw::Match) => {
                self.bump();
                let scrutinee = self.expr()?;
                self.expect(&Tok::Kw(Kw::With), "`with`")?;
                self.eat(&Tok::Bar);
                let mut clauses = Vec::new();
                loop {
                    let p = self.pattern()?;
                    self.expect(&Tok::Arrow, "`->`")?;
                    let body = self.expr()?;
                    clauses.push((p, body));
                    if !self.eat(&Tok::Bar) {
                        break;
                    }
                }
                Ok(MetaExpr::Match(Box::new(scrutinee), clauses))
            }
            _ => self.cmp_expr(),
        }
    }

    fn cmp_expr(&mut self) -> PResult<MetaExpr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.add_expr()?;
        Ok(MetaExpr::BinOp(op, Box::new(lhs), Box::new(rhs)))
    }

    fn add_expr(&mut self) -> PResult<MetaExpr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = MetaExpr::BinOp(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn mul_expr(&mut self) -> PResult<MetaExpr> {
        let mut lhs = self.app_expr()?;
        while self.eat(&Tok::Star) {
            let rhs = self.app_expr()?;
            lhs = MetaExpr::BinOp(BinOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn at_expr_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::UIdent(_) | Tok::Str(_) | Tok::Int(_) | Tok::Kw(Kw::True) | Tok::Kw(Kw::False) | Tok::LParen
        )
    }

    fn paren_args(&mut self) -> PResult<Vec<MetaExpr>> {
        self.expect(&Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(args);
        }
    }

    fn app_expr(&mut self) -> PResult<MetaExpr> {
        match self.peek().clone() {
            Tok::UIdent(c) => {
                self.bump();
                if self.at(&Tok::LParen) {
                    let args = self.paren_args()?;
                    if args.is_empty() {
                        return Err(Diagnostic::error(self.span(), format!("constructor `{c}` applied to `()`")));
                    }
                    return Ok(MetaExpr::Constr(c, args));
                }
                if self.at_expr_atom() {
                    let arg = self.atom_expr()?;
                    return Ok(MetaExpr::Constr(c, vec![arg]));
                }
                Ok(MetaExpr::Constr(c, Vec::new()))
            }
            Tok::Ident(f) if self.peek_at(1) == &Tok::LParen || {
                // `f atom`: juxtaposition with a non-parenthesized argument
                let next = self.peek_at(1);
                matches!(next, Tok::Ident(_) | Tok::UIdent(_) | Tok::Str(_) | Tok::Int(_) | Tok::Kw(Kw::True) | Tok::Kw(Kw::False))
            } => {
                self.bump();
                if self.at(&Tok::LParen) {
                    let args = self.paren_args()?;
                    return Ok(MetaExpr::Call(f, args));
                }
                let arg = self.atom_expr()?;
                Ok(MetaExpr::Call(f, vec![arg]))
            }
            _ => self.atom_expr(),
        }
    }

    fn atom_expr(&mut self) -> PResult<MetaExpr> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.bump();
                Ok(MetaExpr::Var(x))
            }
            Tok::UIdent(c) => {
                self.bump();
                Ok(MetaExpr::Constr(c, Vec::new()))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(MetaExpr::Str(s))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(MetaExpr::Int(n))
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                match self.bump() {
                    Tok::Int(n) => Ok(MetaExpr::Int(-n)),
                    _ => unreachable!(),
                }
            }
            Tok::Kw(Kw::True) => {
                self.bump();
                Ok(MetaExpr::Bool(true))
            }
            Tok::Kw(Kw::False) => {
                self.bump();
                Ok(MetaExpr::Bool(false))
            }
            Tok::LParen => {
                self.bump();
                let first = self.expr()?;
                if self.eat(&Tok::RParen) {
                    return Ok(first);
                }
                let mut items = vec![first];
                while self.eat(&Tok::Comma) {
                    items.push(self.expr()?);
                }
                self.expect(&Tok::RParen, "`)`")?;
                Ok(MetaExpr::Tuple(items))
            }
            _ => self.unexpected(&["expression"]),
        }
    }
}

fn flatten_alts(p: Pattern, out: &mut Vec<Pattern>) {
    match p {
        Pattern::Alt(a, b) => {
            flatten_alts(*a, out);
            flatten_alts(*b, out);
        }
        other => out.push(other),
    }
}

// ---- name resolution ----

struct Names {
    dynamics: HashSet<String>,
    contexts: HashSet<String>,
    functions: HashSet<String>,
}

fn resolve(mut spec: Spec) -> Result<Spec, Vec<Diagnostic>> {
    let names = Names {
        dynamics: spec.dynamics.iter().map(|d| d.name.clone()).collect(),
        contexts: spec.contexts.iter().map(|c| c.name.clone()).collect(),
        functions: spec.aux.iter().map(|f| f.name.clone()).collect(),
    };
    let mut errors = Vec::new();
    for f in &mut spec.aux {
        resolve_expr(&names, &mut f.body, f.span, &mut errors);
    }
    for d in &mut spec.dynamics {
        resolve_pattern(&names, &mut d.pattern, false);
    }
    for c in &mut spec.contexts {
        for arm in &mut c.arms {
            resolve_pattern(&names, arm, true);
        }
    }
    for r in &mut spec.rules {
        match r {
            Rule::Axiom { lhs, cond, rhs, span, .. } => {
                resolve_pattern(&names, lhs, false);
                if let Some(c) = cond {
                    resolve_expr(&names, c, *span, &mut errors);
                }
                resolve_expr(&names, rhs, *span, &mut errors);
            }
            Rule::Inference { premise_lhs, premise_rhs, conclusion_lhs, cond, conclusion_rhs, span, .. } => {
                resolve_expr(&names, premise_lhs, *span, &mut errors);
                resolve_pattern(&names, premise_rhs, false);
                resolve_pattern(&names, conclusion_lhs, false);
                if let Some(c) = cond {
                    resolve_expr(&names, c, *span, &mut errors);
                }
                resolve_expr(&names, conclusion_rhs, *span, &mut errors);
            }
        }
    }
    if errors.is_empty() {
        Ok(spec)
    } else {
        Err(errors)
    }
}

/// Bare dynamic names become `(_ : D)`; inside context arms, bare context
/// names and unfilled `(p : N)` become fillings of the arm's hole.
fn resolve_pattern(names: &Names, p: &mut Pattern, in_arm: bool) {
    match p {
        Pattern::Nullary(n) if names.dynamics.contains(n.as_str()) => {
            *p = Pattern::DynConstraint(Box::new(Pattern::Wildcard), n.clone());
        }
        Pattern::Nullary(n) if in_arm && names.contexts.contains(n.as_str()) => {
            *p = Pattern::ContextFilling(Box::new(Pattern::Wildcard), n.clone(), Box::new(Pattern::Hole));
        }
        Pattern::DynConstraint(inner, n) if in_arm && names.contexts.contains(n.as_str()) => {
            let inner = std::mem::replace(inner, Box::new(Pattern::Wildcard));
            *p = Pattern::ContextFilling(inner, n.clone(), Box::new(Pattern::Hole));
        }
        Pattern::Wildcard | Pattern::Var(_) | Pattern::Nullary(_) | Pattern::Hole => {}
        Pattern::Applied(_, q) | Pattern::TypeConstraint(q, _) | Pattern::DynConstraint(q, _) | Pattern::Alias(q, _) => {
            resolve_pattern(names, q, in_arm)
        }
        Pattern::Tuple(ps) => ps.iter_mut().for_each(|q| resolve_pattern(names, q, in_arm)),
        Pattern::Alt(a, b) => {
            resolve_pattern(names, a, in_arm);
            resolve_pattern(names, b, in_arm);
        }
        Pattern::ContextFilling(a, _, b) => {
            resolve_pattern(names, a, in_arm);
            resolve_pattern(names, b, in_arm);
        }
    }
}

/// `f(args)` stays a call when `f` names a function; otherwise it is the
/// filling of a context variable.
fn resolve_expr(names: &Names, e: &mut MetaExpr, span: Span, errors: &mut Vec<Diagnostic>) {
    match e {
        MetaExpr::Var(_) | MetaExpr::Str(_) | MetaExpr::Int(_) | MetaExpr::Bool(_) => {}
        MetaExpr::Constr(_, args) | MetaExpr::Tuple(args) => {
            args.iter_mut().for_each(|a| resolve_expr(names, a, span, errors))
        }
        MetaExpr::Call(f, args) => {
            args.iter_mut().for_each(|a| resolve_expr(names, a, span, errors));
            if names.functions.contains(f.as_str()) || is_builtin(f) {
                return;
            }
            let filler = match args.len() {
                0 => {
                    errors.push(Diagnostic::error(span, format!("unknown function `{f}`")));
                    return;
                }
                1 => args.pop().unwrap_or(MetaExpr::Bool(false)),
                _ => MetaExpr::Tuple(std::mem::take(args)),
            };
            *e = MetaExpr::Fill(f.clone(), Box::new(filler));
        }
        MetaExpr::Fill(_, a) => resolve_expr(names, a, span, errors),
        MetaExpr::If(a, b, c) => {
            resolve_expr(names, a, span, errors);
            resolve_expr(names, b, span, errors);
            resolve_expr(names, c, span, errors);
        }
        MetaExpr::Let(_, a, b) | MetaExpr::BinOp(_, a, b) => {
            resolve_expr(names, a, span, errors);
            resolve_expr(names, b, span, errors);
        }
        MetaExpr::Match(s, clauses) => {
            resolve_expr(names, s, span, errors);
            for (_, body) in clauses {
                resolve_expr(names, body, span, errors);
            }
        }
    }
}

// ---- structural validation ----

#[derive(Clone, Copy, PartialEq)]
enum PatternSite {
    /// Rule left-hand sides and dynamic definitions.
    Full,
    /// Context definition arms.
    Arm,
    /// Premise right-hand sides, `match` clauses and `let` binders.
    Restricted,
}

fn validate(spec: &Spec) -> Vec<Diagnostic> {
    let mut errors = Vec::new();
    check_duplicates(spec, &mut errors);
    for f in &spec.aux {
        let mut seen = HashSet::new();
        for p in &f.params {
            if !seen.insert(p) {
                errors.push(Diagnostic::error(f.span, format!("parameter `{p}` of `{}` is repeated", f.name)));
            }
        }
        validate_expr(&f.body, f.span, &mut errors);
    }
    for d in &spec.dynamics {
        validate_pattern(&d.pattern, PatternSite::Full, d.span, &format!("dynamic {}", d.name), &mut errors);
    }
    for c in &spec.contexts {
        for arm in &c.arms {
            let what = format!("context {}", c.name);
            validate_pattern(arm, PatternSite::Arm, c.span, &what, &mut errors);
            let holes = arm.hole_count();
            if holes != 1 {
                errors.push(Diagnostic::error(
                    c.span,
                    format!(
                        "context arm has {holes} holes in `{}` of context {} (exactly one is required)",
                        super::pretty::pretty_pattern(arm),
                        c.name
                    ),
                ));
            }
        }
    }
    for r in &spec.rules {
        let what = format!("rule {}", r.name());
        match r {
            Rule::Axiom { lhs, cond, rhs, span, .. } => {
                validate_pattern(lhs, PatternSite::Full, *span, &what, &mut errors);
                if let Some(c) = cond {
                    validate_expr(c, *span, &mut errors);
                }
                validate_expr(rhs, *span, &mut errors);
            }
            Rule::Inference { premise_lhs, premise_rhs, conclusion_lhs, cond, conclusion_rhs, span, .. } => {
                validate_expr(premise_lhs, *span, &mut errors);
                validate_pattern(premise_rhs, PatternSite::Restricted, *span, &what, &mut errors);
                validate_pattern(conclusion_lhs, PatternSite::Full, *span, &what, &mut errors);
                let lhs_vars = conclusion_lhs.var_set();
                for v in premise_rhs.var_set() {
                    if lhs_vars.contains(v) {
                        errors.push(Diagnostic::error(
                            *span,
                            format!("variable `{v}` is bound twice in {what}"),
                        ));
                    }
                }
                if let Some(c) = cond {
                    validate_expr(c, *span, &mut errors);
                }
                validate_expr(conclusion_rhs, *span, &mut errors);
            }
        }
    }
    errors
}

fn check_duplicates(spec: &Spec, errors: &mut Vec<Diagnostic>) {
    let mut types: HashMap<&str, Span> = HashMap::new();
    for td in &spec.signature.typedefs {
        if types.insert(&td.name, td.span).is_some() {
            errors.push(Diagnostic::error(td.span, format!("duplicate definition of type `{}`", td.name)));
        }
    }
    // constructors, dynamic names and context names share one namespace
    let mut upper: HashMap<&str, &str> = HashMap::new();
    for td in &spec.signature.typedefs {
        for c in &td.constructors {
            if let Some(prev) = upper.insert(&c.name, "constructor") {
                errors.push(Diagnostic::error(
                    td.span,
                    format!("duplicate definition of constructor `{}` (already a {prev})", c.name),
                ));
            }
        }
    }
    for d in &spec.dynamics {
        if let Some(prev) = upper.insert(&d.name, "dynamic definition") {
            errors.push(Diagnostic::error(
                d.span,
                format!("duplicate definition of dynamic `{}` (already a {prev})", d.name),
            ));
        }
    }
    for c in &spec.contexts {
        if let Some(prev) = upper.insert(&c.name, "context definition") {
            errors.push(Diagnostic::error(
                c.span,
                format!("duplicate definition of context `{}` (already a {prev})", c.name),
            ));
        }
    }
    let mut funs = HashSet::new();
    for f in &spec.aux {
        if is_builtin(&f.name) {
            errors.push(Diagnostic::error(f.span, format!("cannot redefine builtin function `{}`", f.name)));
        } else if !funs.insert(&f.name) {
            errors.push(Diagnostic::error(f.span, format!("duplicate definition of function `{}`", f.name)));
        }
    }
    let mut rules = HashSet::new();
    for r in &spec.rules {
        if !rules.insert(r.name()) {
            errors.push(Diagnostic::error(r.span(), format!("duplicate definition of rule `{}`", r.name())));
        }
    }
}

fn validate_pattern(p: &Pattern, site: PatternSite, span: Span, what: &str, errors: &mut Vec<Diagnostic>) {
    let mut seen = BTreeSet::new();
    for v in p.bound_vars() {
        if !seen.insert(v) {
            errors.push(Diagnostic::error(
                span,
                format!("variable `{v}` is bound twice in the pattern of {what}"),
            ));
        }
    }
    validate_pattern_shape(p, site, span, what, errors);
}

fn validate_pattern_shape(p: &Pattern, site: PatternSite, span: Span, what: &str, errors: &mut Vec<Diagnostic>) {
    match p {
        Pattern::Wildcard | Pattern::Var(_) | Pattern::Nullary(_) => {}
        Pattern::Hole => {
            if site != PatternSite::Arm {
                errors.push(Diagnostic::error(span, format!("`BOX` is only allowed in context definitions ({what})")));
            }
        }
        Pattern::Applied(_, q) | Pattern::TypeConstraint(q, _) | Pattern::Alias(q, _) => {
            validate_pattern_shape(q, site, span, what, errors)
        }
        Pattern::Tuple(ps) => ps.iter().for_each(|q| validate_pattern_shape(q, site, span, what, errors)),
        Pattern::Alt(a, b) => {
            if a.var_set() != b.var_set() {
                errors.push(Diagnostic::error(
                    span,
                    format!("both sides of an alternative pattern must bind the same variables ({what})"),
                ));
            }
            validate_pattern_shape(a, site, span, what, errors);
            validate_pattern_shape(b, site, span, what, errors);
        }
        Pattern::DynConstraint(q, d) => {
            if site == PatternSite::Restricted {
                errors.push(Diagnostic::error(
                    span,
                    format!("dynamic constraint `{d}` is not allowed in a restricted pattern ({what})"),
                ));
            }
            if !q.is_var_or_wildcard() {
                errors.push(Diagnostic::error(
                    span,
                    format!("the pattern constrained by `{d}` must be a variable or `_` ({what})"),
                ));
            }
        }
        Pattern::ContextFilling(q, n, filler) => {
            if site == PatternSite::Restricted {
                errors.push(Diagnostic::error(
                    span,
                    format!("context filling with `{n}` is not allowed in a restricted pattern ({what})"),
                ));
            }
            if !q.is_var_or_wildcard() {
                errors.push(Diagnostic::error(
                    span,
                    format!("the pattern bound to context `{n}` must be a variable or `_` ({what})"),
                ));
            }
            validate_pattern_shape(filler, site, span, what, errors);
        }
    }
}

fn validate_expr(e: &MetaExpr, span: Span, errors: &mut Vec<Diagnostic>) {
    match e {
        MetaExpr::Var(_) | MetaExpr::Int(_) | MetaExpr::Bool(_) => {}
        MetaExpr::Str(s) => {
            if is_reserved_fresh_name(s) {
                errors.push(Diagnostic::error(
                    span,
                    format!("string literal \"{s}\" is reserved for names produced by `freshname`"),
                ));
            }
        }
        MetaExpr::Constr(_, args) | MetaExpr::Tuple(args) | MetaExpr::Call(_, args) => {
            args.iter().for_each(|a| validate_expr(a, span, errors))
        }
        MetaExpr::Fill(_, a) => validate_expr(a, span, errors),
        MetaExpr::If(a, b, c) => {
            validate_expr(a, span, errors);
            validate_expr(b, span, errors);
            validate_expr(c, span, errors);
        }
        MetaExpr::BinOp(_, a, b) => {
            validate_expr(a, span, errors);
            validate_expr(b, span, errors);
        }
        MetaExpr::Let(p, a, b) => {
            if !is_let_binder(p) {
                errors.push(Diagnostic::error(
                    span,
                    "`let` binds only a variable, `_` or a tuple of those",
                ));
            }
            validate_pattern(p, PatternSite::Restricted, span, "a let binding", errors);
            validate_expr(a, span, errors);
            validate_expr(b, span, errors);
        }
        MetaExpr::Match(s, clauses) => {
            validate_expr(s, span, errors);
            for (p, body) in clauses {
                validate_pattern(p, PatternSite::Restricted, span, "a match clause", errors);
                validate_expr(body, span, errors);
            }
        }
    }
}

fn is_let_binder(p: &Pattern) -> bool {
    match p {
        Pattern::Var(_) | Pattern::Wildcard => true,
        Pattern::Tuple(ps) => ps.iter().all(|q| matches!(q, Pattern::Var(_) | Pattern::Wildcard)),
        _ => false,
    }
}
