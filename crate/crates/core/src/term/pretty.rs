//! Constructor-call notation: `object([prop(id("age"), number(29.0))])`.
//!
//! The notation omits type names, so reading it back needs the signature
//! and the expected type.

use std::fmt::{self, Write as _};

use thiserror::Error;

use super::{render_real, ArgType, Prim, PrimType, Signature, Term, JUST, MAYBE_TYPE, NOTHING};
use crate::json_text;

pub(super) fn write_term(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::Con { name, args, .. } => {
            write!(f, "{name}(")?;
            write_seq(f, args)?;
            f.write_char(')')
        }
        Term::Prim(Prim::Int(i)) => write!(f, "{i}"),
        Term::Prim(Prim::Real(x)) => f.write_str(&render_real(*x)),
        Term::Prim(Prim::Bool(b)) => write!(f, "{b}"),
        Term::Prim(Prim::Str(s)) => {
            let mut out = String::new();
            json_text::write_string(&mut out, s);
            f.write_str(&out)
        }
        Term::List { elems, .. } => {
            f.write_char('[')?;
            write_seq(f, elems)?;
            f.write_char(']')
        }
    }
}

fn write_seq(f: &mut fmt::Formatter<'_>, ts: &[Term]) -> fmt::Result {
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write_term(f, t)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct PrettyError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Reads constructor-call notation at `expected`, resolving constructor
/// names through `sig`.
pub fn read_pretty(sig: &Signature, text: &str, expected: &ArgType) -> Result<Term, PrettyError> {
    let mut r = Reader {
        sig,
        chars: text.chars().collect(),
        i: 0,
        line: 1,
        col: 1,
    };
    r.ws();
    let t = r.term(expected)?;
    r.ws();
    if r.i < r.chars.len() {
        return r.err("trailing characters after term");
    }
    Ok(t)
}

struct Reader<'a> {
    sig: &'a Signature,
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Reader<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, PrettyError> {
        Err(PrettyError {
            line: self.line,
            col: self.col,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn bump(&mut self) {
        if let Some(c) = self.peek() {
            self.i += 1;
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
    }

    fn ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), PrettyError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn token(&mut self) -> String {
        self.ws();
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '+' | '.') {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn term(&mut self, expected: &ArgType) -> Result<Term, PrettyError> {
        self.ws();
        match expected {
            ArgType::List(e) => {
                self.expect('[')?;
                let elems = self.seq(']', |r| r.term(e))?;
                Ok(Term::list(elems, (**e).clone()))
            }
            ArgType::Maybe(e) => {
                let name = self.token();
                self.expect('(')?;
                match name.as_str() {
                    NOTHING => {
                        self.expect(')')?;
                        Ok(Term::nothing())
                    }
                    JUST => {
                        let x = self.term(e)?;
                        self.expect(')')?;
                        Ok(Term::con(JUST, MAYBE_TYPE, vec![x]))
                    }
                    _ => self.err(format!("expected nothing() or just(..), found `{name}`")),
                }
            }
            ArgType::Adt(ty) => {
                let (line, col) = (self.line, self.col);
                let name = self.token();
                let Some(c) = self.sig.constructors_of(ty).find(|c| c.name == name) else {
                    return Err(PrettyError {
                        line,
                        col,
                        message: format!("type {ty} has no constructor `{name}`"),
                    });
                };
                let specs: Vec<ArgType> = c.args.iter().map(|a| a.ty.clone()).collect();
                self.expect('(')?;
                let mut args = Vec::with_capacity(specs.len());
                for (i, spec) in specs.iter().enumerate() {
                    if i > 0 {
                        self.expect(',')?;
                    }
                    args.push(self.term(spec)?);
                }
                self.expect(')')?;
                Ok(Term::con(name, ty.clone(), args))
            }
            ArgType::Prim(PrimType::Str) => {
                if self.peek() != Some('"') {
                    return self.err("expected string literal");
                }
                let start = self.i;
                let mut escaped = false;
                self.bump();
                loop {
                    match self.peek() {
                        None => return self.err("unterminated string"),
                        Some('"') if !escaped => break,
                        Some('\\') if !escaped => escaped = true,
                        _ => escaped = false,
                    }
                    self.bump();
                }
                self.bump();
                let lit: String = self.chars[start..self.i].iter().collect();
                match json_text::parse(&lit, false) {
                    Ok(json_text::Node {
                        value: json_text::Value::Str(s),
                        ..
                    }) => Ok(Term::str(s)),
                    Ok(_) => unreachable!("string literal parsed to non-string"),
                    Err(e) => self.err(e.message),
                }
            }
            ArgType::Prim(k) => {
                let tok = self.token();
                let t = match k {
                    PrimType::Int => tok.parse().ok().map(Term::int),
                    PrimType::Bool => match tok.as_str() {
                        "true" => Some(Term::bool(true)),
                        "false" => Some(Term::bool(false)),
                        _ => None,
                    },
                    PrimType::Real => match tok.as_str() {
                        "NaN" => Some(Term::real(f64::NAN)),
                        "Infinity" => Some(Term::real(f64::INFINITY)),
                        "-Infinity" => Some(Term::real(f64::NEG_INFINITY)),
                        _ => tok.parse().ok().map(Term::real),
                    },
                    PrimType::Str => unreachable!(),
                };
                match t {
                    Some(t) => Ok(t),
                    None => self.err(format!("expected {k} literal, found `{tok}`")),
                }
            }
        }
    }

    fn seq(
        &mut self,
        close: char,
        mut item: impl FnMut(&mut Self) -> Result<Term, PrettyError>,
    ) -> Result<Vec<Term>, PrettyError> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }
}
