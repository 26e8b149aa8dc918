use std::fmt;

use crate::diag::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lower-case or underscore-prefixed identifier.
    Ident(String),
    /// Capitalized identifier (constructors, type, dynamic and context names).
    UIdent(String),
    Str(String),
    Int(i64),
    /// `'a`, only lexed so polymorphic type definitions get a clear diagnostic.
    TyVar(String),
    Kw(Kw),
    LParen,
    RParen,
    Comma,
    SemiSemi,
    Colon,
    Bar,
    Underscore,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Arrow,
    Rewrites,
    Steps,
    Separator,
    Hash,
    Eof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kw {
    Signature,
    Specification,
    Type,
    Of,
    And,
    Startfrom,
    Dynamic,
    Axiom,
    Context,
    Inference,
    When,
    Box,
    Let,
    Rec,
    In,
    If,
    Then,
    Else,
    Match,
    With,
    As,
    True,
    False,
}

const KEYWORDS: &[(&str, Kw)] = &[
    ("SIGNATURE", Kw::Signature),
    ("SPECIFICATION", Kw::Specification),
    ("type", Kw::Type),
    ("of", Kw::Of),
    ("and", Kw::And),
    ("startfrom", Kw::Startfrom),
    ("dynamic", Kw::Dynamic),
    ("axiom", Kw::Axiom),
    ("context", Kw::Context),
    ("inference", Kw::Inference),
    ("when", Kw::When),
    ("BOX", Kw::Box),
    ("let", Kw::Let),
    ("rec", Kw::Rec),
    ("in", Kw::In),
    ("if", Kw::If),
    ("then", Kw::Then),
    ("else", Kw::Else),
    ("match", Kw::Match),
    ("with", Kw::With),
    ("as", Kw::As),
    ("true", Kw::True),
    ("false", Kw::False),
];

impl Kw {
    pub fn text(self) -> &'static str {
        KEYWORDS.iter().find(|(_, k)| *k == self).map(|(s, _)| *s).unwrap_or("?")
    }
}

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.iter().any(|(s, _)| *s == word)
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::UIdent(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Int(n) => write!(f, "integer {n}"),
            Tok::TyVar(v) => write!(f, "type variable '{v}"),
            Tok::Kw(k) => write!(f, "`{}`", k.text()),
            Tok::Eof => f.write_str("end of input"),
            other => write!(f, "`{}`", punct_text(other)),
        }
    }
}

pub fn punct_text(t: &Tok) -> &'static str {
    match t {
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::Comma => ",",
        Tok::SemiSemi => ";;",
        Tok::Colon => ":",
        Tok::Bar => "|",
        Tok::Underscore => "_",
        Tok::Eq => "=",
        Tok::Ne => "<>",
        Tok::Lt => "<",
        Tok::Le => "<=",
        Tok::Gt => ">",
        Tok::Ge => ">=",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Arrow => "->",
        Tok::Rewrites => "==>",
        Tok::Steps => "|==>",
        Tok::Separator => "---",
        Tok::Hash => "#",
        _ => "?",
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<u8> {
        self.src.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if b & 0xC0 != 0x80 {
            // count characters, not UTF-8 continuation bytes
            self.col += 1;
        }
        Some(b)
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }

    fn skip_trivia(&mut self) -> Result<(), Diagnostic> {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'(') if self.peek_at(1) == Some(b'*') => {
                    let start = self.span();
                    self.bump();
                    self.bump();
                    let mut depth = 1;
                    while depth > 0 {
                        match self.peek() {
                            None => return Err(Diagnostic::error(start, "unterminated comment")),
                            Some(b'(') if self.peek_at(1) == Some(b'*') => {
                                self.bump();
                                self.bump();
                                depth += 1;
                            }
                            Some(b'*') if self.peek_at(1) == Some(b')') => {
                                self.bump();
                                self.bump();
                                depth -= 1;
                            }
                            Some(_) => {
                                self.bump();
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn string(&mut self, start: Span) -> Result<Tok, Diagnostic> {
        self.bump();
        let mut out = Vec::new();
        loop {
            match self.bump() {
                None | Some(b'\n') => return Err(Diagnostic::error(start, "unterminated string literal")),
                Some(b'"') => break,
                Some(b'\\') => match self.bump() {
                    Some(b'"') => out.push(b'"'),
                    Some(b'\\') => out.push(b'\\'),
                    Some(b'n') => out.push(b'\n'),
                    Some(b't') => out.push(b'\t'),
                    _ => {
                        return Err(Diagnostic::error(
                            start,
                            "invalid escape in string literal (allowed: \\\", \\\\, \\n, \\t)",
                        ))
                    }
                },
                Some(b) => out.push(b),
            }
        }
        String::from_utf8(out)
            .map(Tok::Str)
            .map_err(|_| Diagnostic::error(start, "string literal is not valid UTF-8"))
    }

    fn word(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'\'' {
                self.bump();
            } else {
                break;
            }
        }
        &self.text[start..self.pos]
    }

    fn next_token(&mut self) -> Result<Token, Diagnostic> {
        self.skip_trivia()?;
        let span = self.span();
        let Some(b) = self.peek() else {
            return Ok(Token { tok: Tok::Eof, span });
        };
        let rest = &self.src[self.pos..];
        let punct: &[(&[u8], Tok)] = &[
            (b"|==>", Tok::Steps),
            (b"==>", Tok::Rewrites),
            (b";;", Tok::SemiSemi),
            (b"->", Tok::Arrow),
            (b"<>", Tok::Ne),
            (b"<=", Tok::Le),
            (b">=", Tok::Ge),
        ];
        if rest.starts_with(b"---") {
            while self.peek() == Some(b'-') {
                self.bump();
            }
            return Ok(Token { tok: Tok::Separator, span });
        }
        for (text, tok) in punct {
            if rest.starts_with(text) {
                for _ in 0..text.len() {
                    self.bump();
                }
                return Ok(Token { tok: tok.clone(), span });
            }
        }
        let single = match b {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b':' => Some(Tok::Colon),
            b'|' => Some(Tok::Bar),
            b'=' => Some(Tok::Eq),
            b'<' => Some(Tok::Lt),
            b'>' => Some(Tok::Gt),
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'#' => Some(Tok::Hash),
            _ => None,
        };
        if let Some(tok) = single {
            self.bump();
            return Ok(Token { tok, span });
        }
        if b == b'"' {
            let tok = self.string(span)?;
            return Ok(Token { tok, span });
        }
        if b.is_ascii_digit() {
            let start = self.pos;
            while self.peek().is_some_and(|b| b.is_ascii_digit()) {
                self.bump();
            }
            let text = &self.text[start..self.pos];
            let n = text
                .parse::<i64>()
                .map_err(|_| Diagnostic::error(span, format!("integer literal {text} out of range")))?;
            return Ok(Token { tok: Tok::Int(n), span });
        }
        if b == b'\'' && self.peek_at(1).is_some_and(|c| c.is_ascii_alphabetic()) {
            self.bump();
            let word = self.word();
            return Ok(Token { tok: Tok::TyVar(word.to_string()), span });
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            let word = self.word();
            let tok = if word == "_" {
                Tok::Underscore
            } else if let Some((_, kw)) = KEYWORDS.iter().find(|(s, _)| *s == word) {
                Tok::Kw(*kw)
            } else if word.as_bytes()[0].is_ascii_uppercase() {
                Tok::UIdent(word.to_string())
            } else {
                Tok::Ident(word.to_string())
            };
            return Ok(Token { tok, span });
        }
        let ch = self.text[self.pos..].chars().next().unwrap_or('?');
        Err(Diagnostic::error(span, format!("unknown token `{ch}`")))
    }
}

pub fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut lexer = Lexer { src: text.as_bytes(), text, pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let eof = t.tok == Tok::Eof;
        out.push(t);
        if eof {
            return Ok(out);
        }
    }
}
