//! Printing specifications back to surface syntax.
//!
//! The output re-parses to a structurally equal specification.

use std::fmt::Write;

use crate::ast::*;

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum PatLevel {
    /// Anything, including `as`.
    Top,
    /// Alternatives but no alias.
    Alt,
    /// Constructor application and context filling.
    App,
    Atom,
}

pub fn pretty_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    pat(&mut out, p, PatLevel::Top);
    out
}

fn pat(out: &mut String, p: &Pattern, level: PatLevel) {
    let needed = match p {
        Pattern::Alias(..) => PatLevel::Top,
        Pattern::Alt(..) => PatLevel::Alt,
        Pattern::Applied(..) | Pattern::ContextFilling(..) => PatLevel::App,
        _ => PatLevel::Atom,
    };
    if needed < level {
        out.push('(');
        pat(out, p, PatLevel::Top);
        out.push(')');
        return;
    }
    match p {
        Pattern::Wildcard => out.push('_'),
        Pattern::Var(x) | Pattern::Nullary(x) => out.push_str(x),
        Pattern::Hole => out.push_str("BOX"),
        Pattern::Applied(c, q) => {
            out.push_str(c);
            if !matches!(**q, Pattern::Tuple(_)) {
                out.push(' ');
            }
            pat(out, q, PatLevel::Atom);
        }
        Pattern::Tuple(ps) => {
            out.push('(');
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                pat(out, q, PatLevel::Top);
            }
            out.push(')');
        }
        Pattern::Alt(a, b) => {
            pat(out, a, PatLevel::Alt);
            out.push_str(" | ");
            pat(out, b, PatLevel::App);
        }
        Pattern::Alias(q, x) => {
            pat(out, q, PatLevel::Top);
            let _ = write!(out, " as {x}");
        }
        Pattern::TypeConstraint(q, t) => {
            out.push('(');
            pat(out, q, PatLevel::Top);
            let _ = write!(out, " : type {t})");
        }
        Pattern::DynConstraint(q, d) => {
            out.push('(');
            pat(out, q, PatLevel::Top);
            let _ = write!(out, " : {d})");
        }
        Pattern::ContextFilling(q, n, filler) => {
            out.push('(');
            pat(out, q, PatLevel::Top);
            let _ = write!(out, " : {n}) ");
            pat(out, filler, PatLevel::Atom);
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Pos {
    /// Nothing that a trailing `let`/`if`/`match` could swallow follows.
    Tail,
    /// Followed by `|` of an enclosing `match`.
    TailBeforeBar,
    /// Operand of an operator or juxtaposition.
    Operand,
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Cmp,
    Add,
    Mul,
    App,
    Atom,
}

pub fn pretty_expr(e: &MetaExpr) -> String {
    let mut out = String::new();
    expr(&mut out, e, Pos::Tail);
    out
}

pub fn escape_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn expr(out: &mut String, e: &MetaExpr, pos: Pos) {
    let open_ended = matches!(e, MetaExpr::Let(..) | MetaExpr::If(..) | MetaExpr::Match(..));
    let wrap = open_ended && (pos == Pos::Operand || (pos == Pos::TailBeforeBar && matches!(e, MetaExpr::Match(..))));
    if wrap {
        out.push('(');
        expr(out, e, Pos::Tail);
        out.push(')');
        return;
    }
    match e {
        MetaExpr::Let(p, bound, body) => {
            out.push_str("let ");
            pat(out, p, PatLevel::Top);
            out.push_str(" = ");
            expr(out, bound, Pos::Tail);
            out.push_str(" in ");
            expr(out, body, pos);
        }
        MetaExpr::If(c, t, f) => {
            out.push_str("if ");
            expr(out, c, Pos::Tail);
            out.push_str(" then ");
            expr(out, t, Pos::Tail);
            out.push_str(" else ");
            expr(out, f, pos);
        }
        MetaExpr::Match(s, clauses) => {
            out.push_str("match ");
            expr(out, s, Pos::Tail);
            out.push_str(" with");
            for (i, (p, body)) in clauses.iter().enumerate() {
                out.push_str(if i == 0 { " " } else { " | " });
                pat(out, p, PatLevel::Top);
                out.push_str(" -> ");
                let last = i + 1 == clauses.len();
                expr(out, body, if last { pos } else { Pos::TailBeforeBar });
            }
        }
        _ => binary(out, e, Prec::Cmp),
    }
}

fn prec_of(e: &MetaExpr) -> Prec {
    match e {
        MetaExpr::BinOp(op, ..) if op.is_comparison() => Prec::Cmp,
        MetaExpr::BinOp(BinOp::Add | BinOp::Sub, ..) => Prec::Add,
        MetaExpr::BinOp(..) => Prec::Mul,
        MetaExpr::Constr(_, args) if !args.is_empty() => Prec::App,
        MetaExpr::Call(..) | MetaExpr::Fill(..) => Prec::App,
        MetaExpr::Int(n) if *n < 0 => Prec::App,
        MetaExpr::Let(..) | MetaExpr::If(..) | MetaExpr::Match(..) => Prec::Cmp,
        _ => Prec::Atom,
    }
}

fn binary(out: &mut String, e: &MetaExpr, min: Prec) {
    if prec_of(e) < min || matches!(e, MetaExpr::Let(..) | MetaExpr::If(..) | MetaExpr::Match(..)) {
        out.push('(');
        expr(out, e, Pos::Tail);
        out.push(')');
        return;
    }
    match e {
        MetaExpr::BinOp(op, a, b) => {
            let (left, right) = match prec_of(e) {
                Prec::Cmp => (Prec::Add, Prec::Add),
                Prec::Add => (Prec::Add, Prec::Mul),
                _ => (Prec::Mul, Prec::App),
            };
            binary(out, a, left);
            let _ = write!(out, " {} ", op.symbol());
            binary(out, b, right);
        }
        MetaExpr::Var(x) => out.push_str(x),
        MetaExpr::Str(s) => out.push_str(&escape_str(s)),
        MetaExpr::Int(n) if *n < 0 => {
            let _ = write!(out, "(-{})", n.unsigned_abs());
        }
        MetaExpr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        MetaExpr::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        MetaExpr::Constr(c, args) => {
            out.push_str(c);
            match args.as_slice() {
                [] => {}
                [a] if is_simple(a) => {
                    out.push(' ');
                    binary(out, a, Prec::Atom);
                }
                _ => arg_list(out, args),
            }
        }
        MetaExpr::Call(f, args) => {
            out.push_str(f);
            arg_list(out, args);
        }
        MetaExpr::Fill(h, a) => {
            out.push_str(h);
            arg_list(out, std::slice::from_ref(a));
        }
        MetaExpr::Tuple(items) => arg_list(out, items),
        MetaExpr::Let(..) | MetaExpr::If(..) | MetaExpr::Match(..) => unreachable!(),
    }
}

fn is_simple(e: &MetaExpr) -> bool {
    match e {
        MetaExpr::Var(_) | MetaExpr::Str(_) | MetaExpr::Bool(_) => true,
        MetaExpr::Int(n) => *n >= 0,
        MetaExpr::Constr(_, args) => args.is_empty(),
        _ => false,
    }
}

fn arg_list(out: &mut String, args: &[MetaExpr]) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        expr(out, a, Pos::Tail);
    }
    out.push(')');
}

fn type_def(out: &mut String, td: &TypeDef) {
    let _ = write!(out, "type {} =", td.name);
    for (i, c) in td.constructors.iter().enumerate() {
        out.push_str(if i == 0 { " " } else { "\n  | " });
        out.push_str(&c.name);
        if !c.args.is_empty() {
            let args: Vec<&str> = c.args.iter().map(TypeRef::as_str).collect();
            let _ = write!(out, " of {}", args.join(" * "));
        }
    }
    out.push_str(";;\n");
}

/// Prints a whole specification: signature first, then auxiliary functions,
/// dynamic definitions, context definitions and rules, each in source order.
pub fn pretty_spec(spec: &Spec) -> String {
    let mut out = String::from("SIGNATURE:\n\n");
    for td in &spec.signature.typedefs {
        type_def(&mut out, td);
    }
    let _ = writeln!(out, "\nstartfrom {};;\n\nSPECIFICATION:\n", spec.signature.start_type);
    for f in &spec.aux {
        let rec = if f.recursive { "rec " } else { "" };
        let _ = writeln!(out, "let {rec}{} ({}) =\n  {};;\n", f.name, f.params.join(", "), pretty_expr(&f.body));
    }
    for d in &spec.dynamics {
        let _ = writeln!(out, "dynamic {} = {};;", d.name, pretty_pattern(&d.pattern));
    }
    if !spec.dynamics.is_empty() {
        out.push('\n');
    }
    for c in &spec.contexts {
        let arms: Vec<String> = c
            .arms
            .iter()
            .map(|a| {
                let mut s = String::new();
                pat(&mut s, a, PatLevel::App);
                s
            })
            .collect();
        let _ = writeln!(out, "context {} = {};;", c.name, arms.join("\n  | "));
    }
    if !spec.contexts.is_empty() {
        out.push('\n');
    }
    for r in &spec.rules {
        match r {
            Rule::Axiom { name, lhs, cond, rhs, .. } => {
                let _ = write!(out, "axiom {name}: {}", pretty_pattern(lhs));
                if let Some(c) = cond {
                    let _ = write!(out, " when {}", pretty_expr(c));
                }
                let _ = writeln!(out, "\n  ==> {};;\n", pretty_expr(rhs));
            }
            Rule::Inference { name, premise_lhs, premise_rhs, conclusion_lhs, cond, conclusion_rhs, .. } => {
                let _ = writeln!(
                    out,
                    "inference {name}:\n  {} ==> {}\n  -----------------\n  {}",
                    pretty_expr(premise_lhs),
                    pretty_pattern(premise_rhs),
                    pretty_pattern(conclusion_lhs)
                );
                if let Some(c) = cond {
                    let _ = writeln!(out, "  when {}", pretty_expr(c));
                }
                let _ = writeln!(out, "  |==> {};;\n", pretty_expr(conclusion_rhs));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_spec;

    fn e(src: &str) -> MetaExpr {
        crate::syntax::parse_expr(src).unwrap()
    }

    #[test]
    fn expressions_roundtrip() {
        for src in [
            "subst(t1, x, t2)",
            "if x = y then t else Var x",
            "App(Lam(x, t), Var \"y\")",
            "(if a then b else c) + 1",
            "a - (b - c)",
            "a * (b + c)",
            "C (-3)",
            "match t with Var y -> (match y with _ -> 1) | _ -> 2",
            "let (a, b) = (1, 2) in a < b",
            "f((1, 2))",
        ] {
            let parsed = e(src);
            assert_eq!(e(&pretty_expr(&parsed)), parsed, "{src} printed as {}", pretty_expr(&parsed));
        }
    }

    #[test]
    fn constructor_printing() {
        assert_eq!(pretty_expr(&e("Lam(x, App(Var x, Var y))")), "Lam(x, App(Var x, Var y))");
        assert_eq!(pretty_pattern(&Pattern::Applied("Var".into(), Box::new(Pattern::Var("x".into())))), "Var x");
    }

    #[test]
    fn spec_roundtrip() {
        let src = "SIGNATURE: type M = App of M*M | Lam of string*M | Var of string;; startfrom M;; \
                   SPECIFICATION: dynamic V = Lam _ | Var _;; context H = BOX | App(H,_) | App(V,H);; \
                   axiom b: App(Lam(x,t1),(t2:V)) ==> t1;; \
                   inference e: t1 ==> t2 ------ (h:H) t1 |==> h t2;;";
        let spec = parse_spec(src).unwrap().spec;
        let printed = pretty_spec(&spec);
        assert_eq!(parse_spec(&printed).unwrap().spec, spec, "{printed}");
    }
}
