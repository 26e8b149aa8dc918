//! Compiler and interpreter for syntactic theories written in SL.
//!
//! A specification declares an object-language signature, dynamic
//! definitions, evaluation contexts, axioms and inference rules. [`load`]
//! parses, checks and compiles one into pattern-matching automata, which
//! [`engine::Session`] runs on terms.

pub mod ast;
pub mod automaton;
pub mod batch;
pub mod corpus;
pub mod diag;
pub mod engine;
pub mod meta_eval;
pub mod syntax;
pub mod term;
pub mod term_io;
pub mod typecheck;

use automaton::{compile_spec, CompiledSpec};
use diag::Diagnostic;

/// Parses, typechecks and compiles a specification. On success also returns
/// the warnings.
pub fn load(source: &str) -> Result<(CompiledSpec, Vec<Diagnostic>), Vec<Diagnostic>> {
    let parsed = syntax::parse_spec(source)?;
    let checked = typecheck::check_spec(&parsed.spec)?;
    Ok((compile_spec(checked), parsed.warnings))
}
