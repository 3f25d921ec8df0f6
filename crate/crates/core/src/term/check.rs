use std::fmt;

use super::{ArgType, Path, Signature, Term, JUST, MAYBE_TYPE, NOTHING};

/// A well-typedness violation at `path` inside the checked term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub path: Path,
    pub message: String,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {:?}: {}", self.path, self.message)
    }
}

/// Checks `t` against `expected` under `sig`. An empty result means the
/// term is well-typed.
pub fn check_term(sig: &Signature, t: &Term, expected: &ArgType) -> Vec<TypeError> {
    let mut errors = Vec::new();
    check(sig, t, expected, &mut Vec::new(), &mut errors);
    errors
}

fn check(sig: &Signature, t: &Term, expected: &ArgType, path: &mut Path, out: &mut Vec<TypeError>) {
    let mut fail = |msg: String| {
        out.push(TypeError {
            path: path.clone(),
            message: msg,
        })
    };
    match (expected, t) {
        (ArgType::Prim(k), Term::Prim(p)) => {
            if p.prim_type() != *k {
                fail(format!("expected {k}, found {}", p.prim_type()));
            }
        }
        (ArgType::List(e), Term::List { elems, elem }) => {
            if elem != &**e {
                fail(format!("expected list[{e}], found list[{elem}]"));
                return;
            }
            for (i, x) in elems.iter().enumerate() {
                path.push(i);
                check(sig, x, e, path, out);
                path.pop();
            }
        }
        (ArgType::Maybe(e), Term::Con { name, ty, args }) => {
            if ty != MAYBE_TYPE {
                fail(format!("expected {expected}, found constructor of {ty}"));
                return;
            }
            match (name.as_str(), args.len()) {
                (NOTHING, 0) => {}
                (JUST, 1) => {
                    path.push(0);
                    check(sig, &args[0], e, path, out);
                    path.pop();
                }
                _ => fail(format!("{name}/{} is not a Maybe constructor", args.len())),
            }
        }
        (ArgType::Adt(want), Term::Con { name, ty, args }) => {
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
        (_, t) => fail(format!("expected {expected}, found {}", describe(t))),
    }
}

fn describe(t: &Term) -> String {
    match t {
        Term::Con { name, ty, .. } => format!("constructor {name} of {ty}"),
        Term::Prim(p) => format!("{} value", p.prim_type()),
        Term::List { elem, .. } => format!("list[{elem}]"),
    }
}
