//! Ground object-language terms and one-hole contexts over them.

use std::fmt;

/// A ground term: a constructor tree over the signature plus literals.
///
/// A constructor declared `C of t1*...*tn` carries exactly `n` arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Constr(String, Vec<Term>),
    Str(String),
    Int(i64),
}

impl Term {
    pub fn constr(name: &str, args: Vec<Term>) -> Term {
        Term::Constr(name.to_string(), args)
    }

    pub fn nullary(name: &str) -> Term {
        Term::Constr(name.to_string(), Vec::new())
    }

    pub fn str(s: &str) -> Term {
        Term::Str(s.to_string())
    }

    /// Number of constructor nodes; literals are not counted.
    pub fn size(&self) -> usize {
        match self {
            Term::Constr(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Term::Str(_) | Term::Int(_) => 0,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Constr(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            Term::Str(_) | Term::Int(_) => 0,
        }
    }
}

/// A runtime value flowing through automata and meta-expressions.
///
/// Strings and integers are represented by the literal forms of [`Term`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Term(Term),
    Tuple(Vec<Value>),
    Bool(bool),
    Context(Context),
}

impl Value {
    pub fn as_term(&self) -> Option<&Term> {
        match self {
            Value::Term(t) => Some(t),
            _ => None,
        }
    }

    pub fn into_term(self) -> Option<Term> {
        match self {
            Value::Term(t) => Some(t),
            _ => None,
        }
    }

    /// The value bound to the argument of a constructor node: the single
    /// argument, or the tuple of all arguments.
    pub fn constructor_argument(args: &[Term]) -> Value {
        if args.len() == 1 {
            Value::Term(args[0].clone())
        } else {
            Value::Tuple(args.iter().cloned().map(Value::Term).collect())
        }
    }
}

impl From<Term> for Value {
    fn from(t: Term) -> Value {
        Value::Term(t)
    }
}

/// One layer of a context, outermost layers first in [`Context::frames`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Frame {
    /// Wraps the inner value as the argument of a constructor node.
    Constr(String),
    /// Places the inner value at `index` of a tuple; `others` holds the
    /// remaining components in order.
    Tuple { index: usize, others: Vec<Value> },
}

/// A value with exactly one hole.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    pub frames: Vec<Frame>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum PlugError {
    #[error("constructor {0} expects a term or tuple argument")]
    BadConstructorArgument(String),
}

impl Context {
    pub fn hole() -> Context {
        Context::default()
    }

    pub fn is_hole(&self) -> bool {
        self.frames.is_empty()
    }

    /// `outer[inner[_]]`
    pub fn compose(&self, inner: &Context) -> Context {
        let mut frames = self.frames.clone();
        frames.extend(inner.frames.iter().cloned());
        Context { frames }
    }

    pub fn plug(&self, filler: Value) -> Result<Value, PlugError> {
        let mut cur = filler;
        for frame in self.frames.iter().rev() {
            cur = match frame {
                Frame::Constr(c) => match cur {
                    Value::Term(t) => Value::Term(Term::Constr(c.clone(), vec![t])),
                    Value::Tuple(vs) => {
                        let args = vs
                            .into_iter()
                            .map(Value::into_term)
                            .collect::<Option<Vec<_>>>()
                            .ok_or_else(|| PlugError::BadConstructorArgument(c.clone()))?;
                        Value::Term(Term::Constr(c.clone(), args))
                    }
                    _ => return Err(PlugError::BadConstructorArgument(c.clone())),
                },
                Frame::Tuple { index, others } => {
                    let mut vs = others.clone();
                    vs.insert(*index, cur);
                    Value::Tuple(vs)
                }
            };
        }
        Ok(cur)
    }
}

/// A context paired with the subterm found in its hole. Plugging the hole
/// term back into the context yields the decomposed value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decomposition {
    pub context: Context,
    pub hole: Value,
}

impl Decomposition {
    pub fn recompose(&self) -> Result<Value, PlugError> {
        self.context.plug(self.hole.clone())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Term(t) => write!(f, "{}", crate::term_io::pretty_term_plain(t)),
            Value::Tuple(vs) => {
                f.write_str("(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            Value::Bool(b) => write!(f, "{b}"),
            Value::Context(c) => {
                let shown = c.plug(Value::Term(Term::nullary("BOX"))).map_err(|_| fmt::Error)?;
                write!(f, "[{shown}]")
            }
        }
    }
}
