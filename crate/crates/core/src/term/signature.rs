use std::collections::HashSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use super::{ArgType, PrimType};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArgSpec {
    pub name: String,
    pub ty: ArgType,
}

impl ArgSpec {
    pub fn new(name: impl Into<String>, ty: ArgType) -> ArgSpec {
        ArgSpec {
            name: name.into(),
            ty,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constructor {
    pub name: String,
    pub ty: String,
    pub args: Vec<ArgSpec>,
}

impl Constructor {
    pub fn new(name: impl Into<String>, ty: impl Into<String>, args: Vec<ArgSpec>) -> Constructor {
        Constructor {
            name: name.into(),
            ty: ty.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

/// `name(T1 a1, T2 a2)`
impl fmt::Display for Constructor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} {}", a.ty, a.name)?;
        }
        f.write_char(')')
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("constructor {constructor} belongs to undeclared type {ty}")]
    UnknownOwner { constructor: String, ty: String },
    #[error("constructor {name} declared twice for type {ty}")]
    DuplicateConstructor { ty: String, name: String },
    #[error("argument {arg} of {constructor} refers to undeclared type {ty}")]
    UnknownArgType {
        constructor: String,
        arg: String,
        ty: String,
    },
    #[error("argument {arg} of {constructor} nests Maybe directly inside Maybe")]
    NestedMaybe { constructor: String, arg: String },
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
}

/// An abstract grammar: a set of type names and the constructors that
/// inhabit them. Immutable once built; [`Signature::new`] checks that every
/// owner and argument type is declared and that constructor names are
/// unique per type.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    types: Vec<String>,
    constructors: Vec<Constructor>,
}

impl Signature {
    pub fn new(
        types: impl IntoIterator<Item = String>,
        constructors: Vec<Constructor>,
    ) -> Result<Signature, SignatureError> {
        let mut seen = HashSet::new();
        let types: Vec<String> = types
            .into_iter()
            .filter(|t| seen.insert(t.clone()))
            .collect();
        let mut names = HashSet::new();
        for c in &constructors {
            if !seen.contains(&c.ty) {
                return Err(SignatureError::UnknownOwner {
                    constructor: c.name.clone(),
                    ty: c.ty.clone(),
                });
            }
            if !names.insert((c.ty.as_str(), c.name.as_str())) {
                return Err(SignatureError::DuplicateConstructor {
                    ty: c.ty.clone(),
                    name: c.name.clone(),
                });
            }
            for a in &c.args {
                if !a.ty.is_valid() {
                    return Err(SignatureError::NestedMaybe {
                        constructor: c.name.clone(),
                        arg: a.name.clone(),
                    });
                }
                if let Some(missing) = first_undeclared(&a.ty, &seen) {
                    return Err(SignatureError::UnknownArgType {
                        constructor: c.name.clone(),
                        arg: a.name.clone(),
                        ty: missing.to_string(),
                    });
                }
            }
        }
        Ok(Signature {
            types,
            constructors,
        })
    }

    /// Parses `data T = c(A a, ...) | ...;` declarations, optionally preceded
    /// by a `module a::b` header. `//` starts a line comment. A type may be
    /// declared by several `data` blocks; their constructors accumulate.
    pub fn parse(text: &str) -> Result<Signature, SignatureError> {
        SigParser::new(text).signature()
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn constructors(&self) -> &[Constructor] {
        &self.constructors
    }

    pub fn has_type(&self, ty: &str) -> bool {
        self.types.iter().any(|t| t == ty)
    }

    pub fn constructors_of<'a>(&'a self, ty: &'a str) -> impl Iterator<Item = &'a Constructor> + 'a {
        self.constructors.iter().filter(move |c| c.ty == ty)
    }

    pub fn constructor(&self, ty: &str, name: &str, arity: usize) -> Option<&Constructor> {
        self.constructors
            .iter()
            .find(|c| c.ty == ty && c.name == name && c.arity() == arity)
    }

    /// Union of two signatures; fails when the result would be inconsistent.
    pub fn merge(&self, other: &Signature) -> Result<Signature, SignatureError> {
        let mut cons = self.constructors.clone();
        for c in &other.constructors {
            if !cons.contains(c) {
                cons.push(c.clone());
            }
        }
        Signature::new(
            self.types.iter().chain(other.types.iter()).cloned(),
            cons,
        )
    }

    /// Renders the signature back into the surface syntax accepted by
    /// [`Signature::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ty in &self.types {
            let cons: Vec<&Constructor> = self.constructors_of(ty).collect();
            if cons.is_empty() {
                let _ = writeln!(out, "data {ty};");
                continue;
            }
            let _ = writeln!(out, "data {ty}");
            for (i, c) in cons.iter().enumerate() {
                let lead = if i == 0 { '=' } else { '|' };
                let _ = write!(out, "  {lead} {c}");
                out.push_str(if i + 1 == cons.len() { ";\n" } else { "\n" });
            }
        }
        out
    }
}

fn first_undeclared<'a>(ty: &'a ArgType, declared: &HashSet<String>) -> Option<&'a str> {
    match ty {
        ArgType::Adt(n) if !declared.contains(n) => Some(n),
        ArgType::Adt(_) | ArgType::Prim(_) => None,
        ArgType::List(e) | ArgType::Maybe(e) => first_undeclared(e, declared),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
    Eof,
}

struct SigParser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    err: Option<SignatureError>,
}

impl SigParser {
    fn new(text: &str) -> SigParser {
        let mut toks = Vec::new();
        let mut err = None;
        let chars: Vec<char> = text.chars().collect();
        let (mut i, mut line, mut col) = (0, 1, 1);
        while i < chars.len() {
            let c = chars[i];
            let (tl, tc) = (line, col);
            if c == '\n' {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            if c.is_whitespace() {
                i += 1;
                col += 1;
                continue;
            }
            if c == '/' && chars.get(i + 1) == Some(&'/') {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                toks.push((Tok::Ident(chars[start..i].iter().collect()), tl, tc));
                continue;
            }
            let sym = match c {
                ':' if chars.get(i + 1) == Some(&':') => "::",
                '=' => "=",
                '|' => "|",
                '(' => "(",
                ')' => ")",
                ',' => ",",
                ';' => ";",
                '[' => "[",
                ']' => "]",
                _ => {
                    err = Some(SignatureError::Syntax {
                        line,
                        col,
                        message: format!("unexpected character {c:?}"),
                    });
                    break;
                }
            };
            i += sym.len();
            col += sym.len();
            toks.push((Tok::Sym(sym), tl, tc));
        }
        toks.push((Tok::Eof, line, col));
        SigParser { toks, pos: 0, err }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, SignatureError> {
        let (_, line, col) = self.toks[self.pos];
        Err(SignatureError::Syntax {
            line,
            col,
            message: message.into(),
        })
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), SignatureError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.error(format!("expected `{sym}`"))
        }
    }

    fn ident(&mut self) -> Result<String, SignatureError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.pos += 1;
                Ok(s)
            }
            _ => self.error("expected identifier"),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn signature(mut self) -> Result<Signature, SignatureError> {
        if let Some(e) = self.err.take() {
            return Err(e);
        }
        if self.keyword("module") {
            self.ident()?;
            while self.eat("::") {
                self.ident()?;
            }
        }
        let mut types = Vec::new();
        let mut cons = Vec::new();
        while *self.peek() != Tok::Eof {
            if !self.keyword("data") {
                return self.error("expected `data`");
            }
            let ty = self.ident()?;
            types.push(ty.clone());
            if self.eat("=") {
                loop {
                    cons.push(self.constructor(&ty)?);
                    if !self.eat("|") {
                        break;
                    }
                }
            }
            self.expect(";")?;
        }
        Signature::new(types, cons)
    }

    fn constructor(&mut self, ty: &str) -> Result<Constructor, SignatureError> {
        let name = self.ident()?;
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.eat(")") {
            loop {
                let aty = self.arg_type()?;
                let aname = self.ident()?;
                args.push(ArgSpec::new(aname, aty));
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        Ok(Constructor::new(name, ty, args))
    }

    fn arg_type(&mut self) -> Result<ArgType, SignatureError> {
        let name = self.ident()?;
        if let Some(p) = PrimType::from_name(&name) {
            return Ok(ArgType::Prim(p));
        }
        if (name == "list" || name == "Maybe") && self.eat("[") {
            let inner = self.arg_type()?;
            self.expect("]")?;
            return Ok(if name == "list" {
                ArgType::list(inner)
            } else {
                ArgType::maybe(inner)
            });
        }
        Ok(ArgType::Adt(name))
    }
}
