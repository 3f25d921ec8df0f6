//! Generic immutable syntax trees typed against an algebraic signature.
//!
//! A [`Term`] is one of three shapes: a constructor application, a primitive
//! value, or a list that remembers its element type (so that `[]` is still
//! typable). Optional values are ordinary constructor applications of the
//! synthetic [`MAYBE_TYPE`] carrier: `nothing()` and `just(x)`.

mod check;
mod pretty;
mod signature;
mod wire;

use std::fmt;
use std::hash::{Hash, Hasher};

pub use check::{check_term, TypeError};
pub use pretty::{read_pretty, PrettyError};
pub use signature::{ArgSpec, Constructor, Signature, SignatureError};
pub use wire::{decode_term, encode_argtype, encode_term, render_real, WireError};
pub(crate) use wire::term_from_node;

/// Owning type of the `nothing()` / `just(x)` constructors.
pub const MAYBE_TYPE: &str = "Maybe";
pub const NOTHING: &str = "nothing";
pub const JUST: &str = "just";

/// Path from a root term to one of its subterms: child indices into
/// constructor arguments or list elements.
pub type Path = Vec<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimType {
    Int,
    Real,
    Bool,
    Str,
}

impl PrimType {
    pub fn name(self) -> &'static str {
        match self {
            PrimType::Int => "int",
            PrimType::Real => "real",
            PrimType::Bool => "bool",
            PrimType::Str => "str",
        }
    }

    pub fn from_name(name: &str) -> Option<PrimType> {
        Some(match name {
            "int" => PrimType::Int,
            "real" => PrimType::Real,
            "bool" => PrimType::Bool,
            "str" => PrimType::Str,
            _ => return None,
        })
    }
}

impl fmt::Display for PrimType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The type of a constructor argument, a list element or a pattern hole.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArgType {
    Adt(String),
    List(Box<ArgType>),
    Maybe(Box<ArgType>),
    Prim(PrimType),
}

impl ArgType {
    pub fn adt(name: impl Into<String>) -> ArgType {
        ArgType::Adt(name.into())
    }

    pub fn list(elem: ArgType) -> ArgType {
        ArgType::List(Box::new(elem))
    }

    pub fn maybe(elem: ArgType) -> ArgType {
        ArgType::Maybe(Box::new(elem))
    }

    /// Rejects `maybe(maybe(_))` at any depth.
    pub fn is_valid(&self) -> bool {
        match self {
            ArgType::Adt(_) | ArgType::Prim(_) => true,
            ArgType::List(e) => e.is_valid(),
            ArgType::Maybe(e) => !matches!(**e, ArgType::Maybe(_)) && e.is_valid(),
        }
    }
}

/// Surface notation used by signature files: `JSON`, `list[Prop]`,
/// `Maybe[Expr]`, `real`.
impl fmt::Display for ArgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgType::Adt(n) => f.write_str(n),
            ArgType::List(e) => write!(f, "list[{e}]"),
            ArgType::Maybe(e) => write!(f, "Maybe[{e}]"),
            ArgType::Prim(p) => f.write_str(p.name()),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Prim {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
}

impl Prim {
    pub fn prim_type(&self) -> PrimType {
        match self {
            Prim::Int(_) => PrimType::Int,
            Prim::Real(_) => PrimType::Real,
            Prim::Bool(_) => PrimType::Bool,
            Prim::Str(_) => PrimType::Str,
        }
    }
}

// Reals compare by bit pattern: no epsilon, NaN equals itself, 0.0 != -0.0.
impl PartialEq for Prim {
    fn eq(&self, other: &Prim) -> bool {
        match (self, other) {
            (Prim::Int(a), Prim::Int(b)) => a == b,
            (Prim::Real(a), Prim::Real(b)) => a.to_bits() == b.to_bits(),
            (Prim::Bool(a), Prim::Bool(b)) => a == b,
            (Prim::Str(a), Prim::Str(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Prim {}

impl Hash for Prim {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Prim::Int(i) => i.hash(state),
            Prim::Real(r) => r.to_bits().hash(state),
            Prim::Bool(b) => b.hash(state),
            Prim::Str(s) => s.hash(state),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Con {
        name: String,
        ty: String,
        args: Vec<Term>,
    },
    Prim(Prim),
    List {
        elems: Vec<Term>,
        elem: ArgType,
    },
}

impl Term {
    pub fn con(name: impl Into<String>, ty: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Con {
            name: name.into(),
            ty: ty.into(),
            args,
        }
    }

    pub fn list(elems: Vec<Term>, elem: ArgType) -> Term {
        Term::List { elems, elem }
    }

    pub fn int(v: i64) -> Term {
        Term::Prim(Prim::Int(v))
    }

    pub fn real(v: f64) -> Term {
        Term::Prim(Prim::Real(v))
    }

    pub fn bool(v: bool) -> Term {
        Term::Prim(Prim::Bool(v))
    }

    pub fn str(v: impl Into<String>) -> Term {
        Term::Prim(Prim::Str(v.into()))
    }

    pub fn nothing() -> Term {
        Term::con(NOTHING, MAYBE_TYPE, vec![])
    }

    pub fn just(t: Term) -> Term {
        Term::con(JUST, MAYBE_TYPE, vec![t])
    }

    /// Immediate subterms, in order.
    pub fn children(&self) -> &[Term] {
        match self {
            Term::Con { args, .. } => args,
            Term::List { elems, .. } => elems,
            Term::Prim(_) => &[],
        }
    }

    pub fn subterm(&self, path: &[usize]) -> Option<&Term> {
        path.iter()
            .try_fold(self, |t, &i| t.children().get(i))
    }

    /// Shallow type conformance: checks the outermost shape against `ty`
    /// without consulting a signature. `just(x)` is checked recursively
    /// because its carrier type carries no element information.
    pub fn conforms(&self, ty: &ArgType) -> bool {
        match (self, ty) {
            (Term::Con { ty: t, .. }, ArgType::Adt(n)) => t == n,
            (Term::Con { name, ty: t, args }, ArgType::Maybe(e)) if t == MAYBE_TYPE => {
                match (name.as_str(), args.as_slice()) {
                    (NOTHING, []) => true,
                    (JUST, [x]) => x.conforms(e),
                    _ => false,
                }
            }
            (Term::Prim(p), ArgType::Prim(k)) => p.prim_type() == *k,
            (Term::List { elem, .. }, ArgType::List(e)) => elem == &**e,
            _ => false,
        }
    }

    /// Every subterm with its path, children before parents, left to right.
    pub fn subterms_bottom_up(&self) -> Vec<(Path, &Term)> {
        fn go<'a>(t: &'a Term, path: &mut Path, out: &mut Vec<(Path, &'a Term)>) {
            for (i, c) in t.children().iter().enumerate() {
                path.push(i);
                go(c, path, out);
                path.pop();
            }
            out.push((path.clone(), t));
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Term::size).sum::<usize>()
    }
}

/// Structural identity. Source locations are not part of terms, so two
/// independent parses of the same text are equal.
pub fn term_equals(a: &Term, b: &Term) -> bool {
    a == b
}

/// Constructor-call notation, e.g. `object([prop(id("name"), string("Rodin"))])`.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        pretty::write_term(f, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_equality_is_bitwise() {
        assert_eq!(Term::real(29.0), Term::real(29.0));
        assert_ne!(Term::real(0.0), Term::real(-0.0));
        assert_eq!(Term::real(f64::NAN), Term::real(f64::NAN));
        assert_ne!(Term::real(1.0), Term::int(1));
    }

    #[test]
    fn nested_maybe_is_invalid() {
        assert!(ArgType::maybe(ArgType::list(ArgType::adt("A"))).is_valid());
        assert!(!ArgType::maybe(ArgType::maybe(ArgType::adt("A"))).is_valid());
        assert!(!ArgType::list(ArgType::maybe(ArgType::maybe(ArgType::adt("A")))).is_valid());
    }

    #[test]
    fn conforms_checks_outer_shape() {
        let n = Term::con("null", "JSON", vec![]);
        assert!(n.conforms(&ArgType::adt("JSON")));
        assert!(!n.conforms(&ArgType::adt("Prop")));
        assert!(Term::nothing().conforms(&ArgType::maybe(ArgType::adt("X"))));
        assert!(Term::just(Term::int(1)).conforms(&ArgType::maybe(ArgType::Prim(PrimType::Int))));
        assert!(!Term::just(Term::int(1)).conforms(&ArgType::maybe(ArgType::Prim(PrimType::Str))));
        let l = Term::list(vec![], ArgType::adt("JSON"));
        assert!(l.conforms(&ArgType::list(ArgType::adt("JSON"))));
        assert!(!l.conforms(&ArgType::list(ArgType::adt("Prop"))));
    }

    #[test]
    fn bottom_up_order() {
        let t = Term::con(
            "f",
            "T",
            vec![Term::int(1), Term::con("g", "T", vec![Term::int(2)])],
        );
        let paths: Vec<Path> = t.subterms_bottom_up().into_iter().map(|(p, _)| p).collect();
        assert_eq!(paths, vec![vec![0], vec![1, 0], vec![1], vec![]]);
        assert_eq!(t.subterm(&[1, 0]), Some(&Term::int(2)));
        assert_eq!(t.subterm(&[2]), None);
    }
}
