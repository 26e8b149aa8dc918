//! Lexing, parsing and printing of `.sl` specifications.

pub mod lexer;
pub mod parser;
pub mod pretty;

pub use parser::{parse_spec, Parsed};
pub use pretty::{pretty_expr, pretty_pattern, pretty_spec};

use crate::ast::{MetaExpr, Pattern};
use crate::diag::Diagnostic;

/// Parses a standalone meta-expression. Calls are not resolved against any
/// specification.
pub fn parse_expr(source: &str) -> Result<MetaExpr, Diagnostic> {
    let mut p = parser::Parser::new(source)?;
    let e = p.expr()?;
    if !p.at_eof() {
        return Err(Diagnostic::error(p.span(), "trailing input after expression"));
    }
    Ok(e)
}

/// Parses a standalone pattern.
pub fn parse_pattern(source: &str) -> Result<Pattern, Diagnostic> {
    let mut p = parser::Parser::new(source)?;
    let pat = p.pattern()?;
    if !p.at_eof() {
        return Err(Diagnostic::error(p.span(), "trailing input after pattern"));
    }
    Ok(pat)
}
