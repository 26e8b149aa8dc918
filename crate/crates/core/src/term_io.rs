//! Reading, printing and checking object-language terms.
//!
//! Terms are written in constructor-application syntax: `C`, `C a` for an
//! atomic argument, `C(a1,...,an)` otherwise. A term file holds one term
//! followed by `;;`.

use std::fmt::Write;

use crate::ast::{is_reserved_fresh_name, Signature, TypeRef};
use crate::diag::{Diagnostic, Span};
use crate::syntax::lexer::{lex, Tok, Token};
use crate::syntax::pretty::escape_str;
use crate::term::Term;
use crate::typecheck::ObjType;

/// Parses a single `;;`-terminated term and checks it against `sig`.
pub fn parse_term(sig: &Signature, source: &str) -> Result<Term, Diagnostic> {
    let toks = lex(source)?;
    let mut p = TermParser { sig, toks, pos: 0 };
    let start = p.span();
    let t = p.term()?;
    if !p.eat(&Tok::SemiSemi) {
        return Err(p.error("`;;`"));
    }
    if p.peek() != &Tok::Eof {
        return Err(Diagnostic::error(p.span(), format!("unexpected {} after `;;`", p.peek())));
    }
    typecheck_term(sig, &t).map_err(|e| Diagnostic::error(start, e.to_string()))?;
    Ok(t)
}

struct TermParser<'a> {
    sig: &'a Signature,
    toks: Vec<Token>,
    pos: usize,
}

impl TermParser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(
            self.span(),
            format!("syntax error: unexpected {}, expected one of: {expected}", self.peek()),
        )
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), Diagnostic> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn at_atom(&self) -> bool {
        matches!(self.peek(), Tok::UIdent(_) | Tok::Str(_) | Tok::Int(_) | Tok::Minus | Tok::LParen)
    }

    fn term(&mut self) -> Result<Term, Diagnostic> {
        let span = self.span();
        match self.peek().clone() {
            Tok::UIdent(c) => {
                self.bump();
                let arity = match self.sig.constructor(&c) {
                    Some((_, def)) => def.args.len(),
                    None => return Err(Diagnostic::error(span, format!("unknown constructor `{c}`"))),
                };
                match arity {
                    0 => Ok(Term::Constr(c, Vec::new())),
                    1 => {
                        if !self.at_atom() {
                            return Err(self.error(&format!("argument of `{c}`")));
                        }
                        let arg = self.atom()?;
                        Ok(Term::Constr(c, vec![arg]))
                    }
                    n => {
                        self.expect(&Tok::LParen, "`(`")?;
                        let mut args = vec![self.term()?];
                        while self.eat(&Tok::Comma) {
                            args.push(self.term()?);
                        }
                        self.expect(&Tok::RParen, "`)`")?;
                        if args.len() != n {
                            return Err(Diagnostic::error(
                                span,
                                format!("constructor `{c}` expects {n} arguments, found {}", args.len()),
                            ));
                        }
                        Ok(Term::Constr(c, args))
                    }
                }
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Term, Diagnostic> {
        let span = self.span();
        match self.bump() {
            Tok::UIdent(c) => match self.sig.constructor(&c) {
                Some((_, def)) if def.args.is_empty() => Ok(Term::Constr(c, Vec::new())),
                Some(_) => Err(Diagnostic::error(span, format!("constructor `{c}` needs parentheses here"))),
                None => Err(Diagnostic::error(span, format!("unknown constructor `{c}`"))),
            },
            Tok::Str(s) => {
                if is_reserved_fresh_name(&s) {
                    return Err(Diagnostic::error(
                        span,
                        format!("string \"{s}\" is reserved for generated names"),
                    ));
                }
                Ok(Term::Str(s))
            }
            Tok::Int(n) => Ok(Term::Int(n)),
            Tok::Minus => match self.bump() {
                Tok::Int(n) => Ok(Term::Int(-n)),
                _ => Err(Diagnostic::error(span, "expected an integer after `-`")),
            },
            Tok::LParen => {
                let t = self.term()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => {
                self.pos -= 1;
                Err(self.error("term"))
            }
        }
    }
}

fn is_atomic(t: &Term) -> bool {
    match t {
        Term::Str(_) => true,
        Term::Int(n) => *n >= 0,
        Term::Constr(_, args) => args.is_empty(),
    }
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Str(s) => out.push_str(&escape_str(s)),
        Term::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Term::Constr(c, args) => {
            out.push_str(c);
            match args.as_slice() {
                [] => {}
                [a] if is_atomic(a) => {
                    out.push(' ');
                    write_term(out, a);
                }
                _ => {
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        write_term(out, a);
                    }
                    out.push(')');
                }
            }
        }
    }
}

/// Prints a term in transcript style, e.g. `App(Lam("y",Var "y"),Var "z")`.
pub fn pretty_term_plain(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t);
    out
}

/// Same output as [`pretty_term_plain`]; the signature fixes constructor
/// arities, which are already recorded in the term.
pub fn pretty_term(_sig: &Signature, t: &Term) -> String {
    pretty_term_plain(t)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}{message}", location(path))]
pub struct TermTypeError {
    /// Constructor names and 1-based argument positions from the root.
    pub path: Vec<(String, usize)>,
    pub message: String,
}

fn location(path: &[(String, usize)]) -> String {
    if path.is_empty() {
        return String::new();
    }
    let steps: Vec<String> = path.iter().map(|(c, i)| format!("{c}/{i}")).collect();
    format!("at {}: ", steps.join("."))
}

fn type_of_ref(r: &TypeRef) -> ObjType {
    match r {
        TypeRef::Named(n) => ObjType::Named(n.clone()),
        TypeRef::String => ObjType::Str,
        TypeRef::Int => ObjType::Int,
    }
}

/// Infers the type of a ground term, reporting the path to the first
/// ill-typed node.
pub fn typecheck_term(sig: &Signature, t: &Term) -> Result<ObjType, TermTypeError> {
    let mut path = Vec::new();
    infer(sig, t, &mut path)
}

/// Checks `t` against `expected`.
pub fn check_term(sig: &Signature, t: &Term, expected: &ObjType) -> Result<(), TermTypeError> {
    let found = typecheck_term(sig, t)?;
    if &found == expected {
        Ok(())
    } else {
        Err(TermTypeError { path: Vec::new(), message: format!("expected {expected}, found {found}") })
    }
}

fn infer(sig: &Signature, t: &Term, path: &mut Vec<(String, usize)>) -> Result<ObjType, TermTypeError> {
    match t {
        Term::Str(_) => Ok(ObjType::Str),
        Term::Int(_) => Ok(ObjType::Int),
        Term::Constr(c, args) => {
            let Some((td, def)) = sig.constructor(c) else {
                return Err(TermTypeError { path: path.clone(), message: format!("unknown constructor `{c}`") });
            };
            if def.args.len() != args.len() {
                return Err(TermTypeError {
                    path: path.clone(),
                    message: format!("constructor `{c}` expects {} arguments, found {}", def.args.len(), args.len()),
                });
            }
            for (i, (a, ty)) in args.iter().zip(&def.args).enumerate() {
                path.push((c.clone(), i + 1));
                let expected = type_of_ref(ty);
                let found = infer(sig, a, path)?;
                if found != expected {
                    return Err(TermTypeError { path: path.clone(), message: format!("expected {expected}, found {found}") });
                }
                path.pop();
            }
            Ok(ObjType::Named(td.name.clone()))
        }
    }
}
