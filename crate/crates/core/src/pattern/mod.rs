//! Abstract patterns over terms: typed variables, sequence variables,
//! wildcards, backtracking matching, instantiation and `visit` traversals.

mod instantiate;
mod matching;
mod visit;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::term::{ArgType, Path, Signature, Term, TypeError, JUST, MAYBE_TYPE, NOTHING};

pub use instantiate::{instantiate, InstantiateError};
pub use matching::{for_each_match, match_all, match_first};
pub use visit::{visit_collect, visit_rewrite, RewriteRules, RuleError};

/// Name of the anonymous variable; never bound.
pub const ANONYMOUS: &str = "_";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Con {
        name: String,
        ty: String,
        args: Vec<Pattern>,
    },
    Lit(Term),
    /// A typed hole `<T x>`.
    Var { name: String, ty: ArgType },
    /// A typed sequence hole `<T* x>`; only legal directly inside a list.
    SeqVar { name: String, elem: ArgType },
    Wild(ArgType),
    SeqWild(ArgType),
    List { elems: Vec<Pattern>, elem: ArgType },
}

impl Pattern {
    pub fn con(name: impl Into<String>, ty: impl Into<String>, args: Vec<Pattern>) -> Pattern {
        Pattern::Con {
            name: name.into(),
            ty: ty.into(),
            args,
        }
    }

    pub fn var(name: impl Into<String>, ty: ArgType) -> Pattern {
        Pattern::Var {
            name: name.into(),
            ty,
        }
    }

    pub fn seq_var(name: impl Into<String>, elem: ArgType) -> Pattern {
        Pattern::SeqVar {
            name: name.into(),
            elem,
        }
    }

    pub fn list(elems: Vec<Pattern>, elem: ArgType) -> Pattern {
        Pattern::List { elems, elem }
    }

    /// The type this pattern matches at, when it is determined by the
    /// pattern itself. `None` for Maybe constructors and sequence holes.
    pub fn root_type(&self) -> Option<ArgType> {
        match self {
            Pattern::Con { ty, .. } if ty == MAYBE_TYPE => None,
            Pattern::Con { ty, .. } => Some(ArgType::Adt(ty.clone())),
            Pattern::Lit(t) => match t {
                Term::Con { ty, .. } if ty == MAYBE_TYPE => None,
                Term::Con { ty, .. } => Some(ArgType::Adt(ty.clone())),
                Term::Prim(p) => Some(ArgType::Prim(p.prim_type())),
                Term::List { elem, .. } => Some(ArgType::list(elem.clone())),
            },
            Pattern::Var { ty, .. } | Pattern::Wild(ty) => Some(ty.clone()),
            Pattern::List { elem, .. } => Some(ArgType::list(elem.clone())),
            Pattern::SeqVar { .. } | Pattern::SeqWild(_) => None,
        }
    }

    /// Whether `t` has the outer shape this pattern is typed at. Used both
    /// as the match precondition and to select subtrees during `visit`.
    pub fn accepts_type_of(&self, t: &Term) -> bool {
        match (self, t) {
            (Pattern::Con { ty, .. }, Term::Con { ty: tt, .. }) => ty == tt,
            (Pattern::Con { .. }, _) => false,
            (Pattern::Lit(l), t) => same_shallow_type(l, t),
            (Pattern::Var { ty, .. } | Pattern::Wild(ty), t) => t.conforms(ty),
            (Pattern::List { elem, .. }, Term::List { elem: e, .. }) => elem == e,
            _ => false,
        }
    }

    pub fn has_wildcards(&self) -> bool {
        match self {
            Pattern::Wild(_) | Pattern::SeqWild(_) => true,
            Pattern::Con { args: ps, .. } | Pattern::List { elems: ps, .. } => {
                ps.iter().any(Pattern::has_wildcards)
            }
            _ => false,
        }
    }

    /// Variable occurrences in left-to-right order (repeats included).
    pub fn variables(&self) -> Vec<VarOccurrence<'_>> {
        fn go<'a>(p: &'a Pattern, out: &mut Vec<VarOccurrence<'a>>) {
            match p {
                Pattern::Var { name, ty } => out.push(VarOccurrence {
                    name,
                    ty,
                    sequence: false,
                }),
                Pattern::SeqVar { name, elem } => out.push(VarOccurrence {
                    name,
                    ty: elem,
                    sequence: true,
                }),
                Pattern::Con { args: ps, .. } | Pattern::List { elems: ps, .. } => {
                    ps.iter().for_each(|p| go(p, out))
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Structural invariants: sequence holes sit directly inside lists, `_`
    /// is never a variable name, and a repeated variable keeps one kind and
    /// one type.
    pub fn validate(&self) -> Result<(), MatchError> {
        fn go(p: &Pattern, in_list: bool) -> Result<(), MatchError> {
            match p {
                Pattern::SeqVar { .. } | Pattern::SeqWild(_) if !in_list => Err(
                    MatchError::InvalidPattern("sequence hole outside a list".into()),
                ),
                Pattern::Con { args, .. } => args.iter().try_for_each(|a| go(a, false)),
                Pattern::List { elems, .. } => elems.iter().try_for_each(|e| go(e, true)),
                _ => Ok(()),
            }
        }
        go(self, false)?;
        let mut seen: BTreeMap<&str, (&ArgType, bool)> = BTreeMap::new();
        for v in self.variables() {
            if v.name == ANONYMOUS {
                return Err(MatchError::InvalidPattern(
                    "`_` is reserved for wildcards".into(),
                ));
            }
            match seen.get(v.name) {
                Some(&(ty, seq)) if ty != v.ty || seq != v.sequence => {
                    return Err(MatchError::InvalidPattern(format!(
                        "variable {} used with conflicting types",
                        v.name
                    )))
                }
                _ => {
                    seen.insert(v.name, (v.ty, v.sequence));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarOccurrence<'a> {
    pub name: &'a str,
    /// Declared type; the element type for sequence variables.
    pub ty: &'a ArgType,
    pub sequence: bool,
}

fn same_shallow_type(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::Con { ty: x, .. }, Term::Con { ty: y, .. }) => x == y,
        (Term::Prim(x), Term::Prim(y)) => x.prim_type() == y.prim_type(),
        (Term::List { elem: x, .. }, Term::List { elem: y, .. }) => x == y,
        _ => false,
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn seq(f: &mut fmt::Formatter<'_>, ps: &[Pattern]) -> fmt::Result {
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{p}")?;
            }
            Ok(())
        }
        match self {
            Pattern::Con { name, args, .. } => {
                write!(f, "{name}(")?;
                seq(f, args)?;
                f.write_str(")")
            }
            Pattern::Lit(t) => write!(f, "{t}"),
            Pattern::Var { name, ty } => write!(f, "<{ty} {name}>"),
            Pattern::SeqVar { name, elem } => write!(f, "<{elem}* {name}>"),
            Pattern::Wild(_) => f.write_str("_"),
            Pattern::SeqWild(_) => f.write_str("_*"),
            Pattern::List { elems, .. } => {
                f.write_str("[")?;
                seq(f, elems)?;
                f.write_str("]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    One(Term),
    Seq(Vec<Term>),
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binding::One(t) => write!(f, "{t}"),
            Binding::Seq(ts) => {
                f.write_str("[")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Variable bindings produced by a match, ordered by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env(BTreeMap<String, Binding>);

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn get(&self, name: &str) -> Option<&Binding> {
        self.0.get(name)
    }

    pub fn bind(&mut self, name: impl Into<String>, b: Binding) -> Option<Binding> {
        self.0.insert(name.into(), b)
    }

    pub fn unbind(&mut self, name: &str) -> Option<Binding> {
        self.0.remove(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Binding)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl FromIterator<(String, Binding)> for Env {
    fn from_iter<I: IntoIterator<Item = (String, Binding)>>(iter: I) -> Env {
        Env(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("pattern typed at {expected} cannot match a term of a different type")]
    TypeMismatch { expected: String },
}

/// Well-typedness of a pattern, mirroring [`crate::term::check_term`]; holes
/// and wildcards are typed at their declared types.
pub fn check_pattern(sig: &Signature, p: &Pattern, expected: &ArgType) -> Vec<TypeError> {
    let mut out = Vec::new();
    check(sig, p, expected, &mut Vec::new(), &mut out);
    out
}

fn check(sig: &Signature, p: &Pattern, expected: &ArgType, path: &mut Path, out: &mut Vec<TypeError>) {
    let mut fail = |msg: String| {
        out.push(TypeError {
            path: path.clone(),
            message: msg,
        })
    };
    match (p, expected) {
        (Pattern::Lit(t), _) => {
            for mut e in crate::term::check_term(sig, t, expected) {
                let mut full = path.clone();
                full.append(&mut e.path);
                out.push(TypeError {
                    path: full,
                    message: e.message,
                });
            }
        }
        (Pattern::Var { ty, .. } | Pattern::Wild(ty), _) => {
            if ty != expected {
                fail(format!("hole typed {ty} used where {expected} is expected"));
            }
        }
        (Pattern::SeqVar { .. } | Pattern::SeqWild(_), _) => {
            fail("sequence hole outside a list".into());
        }
        (Pattern::List { elems, elem }, ArgType::List(e)) => {
            if elem != &**e {
                fail(format!("expected list[{e}], found list[{elem}]"));
                return;
            }
            for (i, x) in elems.iter().enumerate() {
                path.push(i);
                match x {
                    Pattern::SeqVar { elem: t, .. } | Pattern::SeqWild(t) => {
                        if t != elem {
                            out.push(TypeError {
                                path: path.clone(),
                                message: format!("sequence hole typed {t}* inside list[{elem}]"),
                            });
                        }
                    }
                    x => check(sig, x, e, path, out),
                }
                path.pop();
            }
        }
        (Pattern::Con { name, ty, args }, ArgType::Maybe(e)) if ty == MAYBE_TYPE => {
            match (name.as_str(), args.as_slice()) {
                (NOTHING, []) => {}
                (JUST, [x]) => {
                    path.push(0);
                    check(sig, x, e, path, out);
                    path.pop();
                }
                _ => fail(format!("{name}/{} is not a Maybe constructor", args.len())),
            }
        }
        (Pattern::Con { name, ty, args }, ArgType::Adt(want)) => {
            if ty != want {
                fail(format!("expected {want}, found constructor of {ty}"));
                return;
            }
            let Some(c) = sig.constructor(ty, name, args.len()) else {
                fail(format!("no constructor {name}/{} in type {ty}", args.len()));
                return;
            };
            for (i, (a, spec)) in args.iter().zip(&c.args).enumerate() {
                path.push(i);
                check(sig, a, &spec.ty, path, out);
                path.pop();
            }
        }
        (p, _) => fail(format!("pattern {p} cannot have type {expected}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::PrimType;

    fn json() -> ArgType {
        ArgType::adt("JSON")
    }

    #[test]
    fn validate_rejects_loose_sequence_holes() {
        let p = Pattern::con("array", "JSON", vec![Pattern::seq_var("xs", json())]);
        assert!(p.validate().is_err());
        let p = Pattern::con(
            "array",
            "JSON",
            vec![Pattern::list(vec![Pattern::seq_var("xs", json())], json())],
        );
        assert!(p.validate().is_ok());
    }

    #[test]
    fn validate_rejects_conflicting_reuse() {
        let p = Pattern::list(
            vec![Pattern::var("x", json()), Pattern::seq_var("x", json())],
            json(),
        );
        assert!(p.validate().is_err());
        let p = Pattern::list(vec![Pattern::var("_", json())], json());
        assert!(p.validate().is_err());
    }

    #[test]
    fn pattern_check_mirrors_term_check() {
        let sig = Signature::parse(
            "data JSON = number(real n) | array(list[JSON] elts); data P = p(JSON v);",
        )
        .unwrap();
        let ok = Pattern::con(
            "array",
            "JSON",
            vec![Pattern::list(
                vec![
                    Pattern::SeqWild(json()),
                    Pattern::con("number", "JSON", vec![Pattern::var("n", ArgType::Prim(PrimType::Real))]),
                ],
                json(),
            )],
        );
        assert!(check_pattern(&sig, &ok, &json()).is_empty());
        let bad = Pattern::con("p", "P", vec![Pattern::var("x", ArgType::adt("P"))]);
        let errs = check_pattern(&sig, &bad, &ArgType::adt("P"));
        assert_eq!(errs[0].path, vec![0]);
        let bad_seq = Pattern::list(vec![Pattern::SeqWild(ArgType::adt("P"))], json());
        assert_eq!(check_pattern(&sig, &bad_seq, &ArgType::list(json())).len(), 1);
    }

    #[test]
    fn display_uses_hole_notation() {
        let p = Pattern::con(
            "object",
            "JSON",
            vec![Pattern::list(
                vec![Pattern::SeqWild(ArgType::adt("Prop")), Pattern::var("p", ArgType::adt("Prop"))],
                ArgType::adt("Prop"),
            )],
        );
        assert_eq!(p.to_string(), "object([_*, <Prop p>])");
    }
}
